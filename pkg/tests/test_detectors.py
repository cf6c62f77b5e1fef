import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arraygain._rng import complex_normal
from arraygain.detectors import (
    DegenerateChannelError,
    ergodic_rate,
    gram_condition,
    instantaneous_rates,
    mrc_sinr,
    mrc_sinrs,
    pairwise_sir,
    zf_power_bound,
    zf_sinr,
    zf_sinrs,
)
from arraygain.exceptions import ValidationError

R = 1 / np.sqrt(2)
CORRELATED = np.array([[1.0, R], [0.0, R]], dtype=complex)


def combiner_sinr(D, x, k, w):
    """SINR of user k after linear combining with w (unit noise)."""
    g = np.conj(w) @ D
    interference = sum(x[i] * abs(g[i]) ** 2 for i in range(D.shape[1]) if i != k)
    return x[k] * abs(g[k]) ** 2 / (interference + np.vdot(w, w).real)


def random_channel(rng, M, K):
    return complex_normal(rng, (M, K))


def test_single_user_mrc_equals_zf():
    D = np.array([[1.0], [1.0]])
    assert mrc_sinr(D, [1.0], 0) == pytest.approx(2.0)
    assert zf_sinr(D, [1.0], 0) == pytest.approx(2.0)
    assert np.log2(3) == pytest.approx(1.585, abs=1e-3)


def test_correlated_fixture_by_hand():
    x = [1.0, 1.0]
    assert mrc_sinr(CORRELATED, x, 0) == pytest.approx(2 / 3)
    assert mrc_sinr(CORRELATED, x, 1) == pytest.approx(2 / 3)
    assert zf_sinr(CORRELATED, x, 0) == pytest.approx(0.5)
    assert zf_sinr(CORRELATED, x, 1) == pytest.approx(0.5)
    s = instantaneous_rates(CORRELATED, x)
    np.testing.assert_allclose(s.mrc_rate, np.log2(5 / 3))
    np.testing.assert_allclose(s.zf_rate, np.log2(1.5))
    np.testing.assert_allclose(s.mrc_rate, 0.737, atol=1e-3)
    np.testing.assert_allclose(s.zf_rate, 0.585, atol=1e-3)


def test_orthogonal_columns_collapse(rng):
    Q, _ = np.linalg.qr(random_channel(rng, 6, 3))
    D = Q * np.array([0.5, 2.0, 1.3])
    x = np.array([2.0, 0.5, 7.0])
    norms = np.sum(np.abs(D) ** 2, axis=0)
    np.testing.assert_allclose(mrc_sinrs(D, x), x * norms, rtol=1e-12)
    np.testing.assert_allclose(zf_sinrs(D, x), x * norms, rtol=1e-12)
    for k in range(3):
        exact, bound = zf_power_bound(D, k)
        assert exact == pytest.approx(bound, rel=1e-9)


@pytest.mark.parametrize("x", [1.0, 3.0])
def test_identity_rates(x):
    s = instantaneous_rates(np.eye(2), [x, x])
    np.testing.assert_allclose(s.mrc_rate, np.log2(1 + x))
    np.testing.assert_allclose(s.zf_rate, np.log2(1 + x))


def test_strict_mode_uses_own_power():
    D = CORRELATED
    x = np.array([4.0, 1.0])
    # user 0: 4*1 / (4*0.5 + 1) strict, 4*1 / (1*0.5 + 1) generalized
    assert mrc_sinr(D, x, 0, strict=True) == pytest.approx(4 / 3)
    assert mrc_sinr(D, x, 0) == pytest.approx(8 / 3)
    np.testing.assert_allclose(mrc_sinrs(D, [2.0, 2.0], strict=True), mrc_sinrs(D, [2.0, 2.0]))


def test_dead_channel_mrc_zero():
    D = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert mrc_sinr(D, [1.0, 1.0], 1) == 0.0


def test_zf_degenerate():
    D = np.array([[1.0, 2.0], [1.0, 2.0]], dtype=complex)
    assert np.isinf(gram_condition(D)) or gram_condition(D) > 1e12
    with pytest.raises(DegenerateChannelError):
        zf_sinr(D, [1.0, 1.0], 0)
    with pytest.raises(DegenerateChannelError):
        zf_power_bound(D, 0)
    with pytest.raises(DegenerateChannelError) as info:
        instantaneous_rates(D, [1.0, 1.0])
    partial = info.value.partial
    assert np.all(np.isfinite(partial.mrc_rate)) and np.all(np.isnan(partial.zf_rate))
    with pytest.raises(DegenerateChannelError):
        zf_sinrs(np.ones((2, 3)), [1, 1, 1])  # K > M


def test_invalid_inputs():
    with pytest.raises(ValidationError):
        mrc_sinr(CORRELATED, [1.0], 0)
    with pytest.raises(ValidationError):
        mrc_sinr(CORRELATED, [1.0, 1.0], 2)
    with pytest.raises(ValidationError):
        mrc_sinr(CORRELATED, [1.0, -1.0], 0)


def test_pairwise_sir_examples():
    d = np.array([1.0, 1j, -1.0])
    s_k, s_i = pairwise_sir(d, 2 * d)
    assert s_k == pytest.approx(3 / 12)
    assert s_i == pytest.approx(12 / 3)
    assert pairwise_sir([1, 0], [0, 1]) == (np.inf, np.inf)
    s1, s2 = pairwise_sir(CORRELATED[:, 0], CORRELATED[:, 1])
    assert s1 == pytest.approx(2.0) and s2 == pytest.approx(2.0)


def test_pairwise_sir_matches_inner_product_form(rng):
    for _ in range(100):
        a, b = complex_normal(rng, 5), complex_normal(rng, 5)
        x = rng.uniform(0.1, 10, 2)
        s_k, s_i = pairwise_sir(a, b, x)
        ip = abs(np.vdot(a, b)) ** 2
        assert s_k == pytest.approx(x[0] * np.vdot(a, a).real ** 2 / (x[1] * ip), rel=1e-10)
        assert s_i == pytest.approx(x[1] * np.vdot(b, b).real ** 2 / (x[0] * ip), rel=1e-10)


def test_power_bound_fixture():
    exact, bound = zf_power_bound(CORRELATED, 0)
    assert exact == pytest.approx(0.5) and bound == pytest.approx(1.0)


def test_power_bound_sweep():
    rng = np.random.default_rng(99)
    for _ in range(10_000):
        D = random_channel(rng, 8, 4)
        for k in range(4):
            exact, bound = zf_power_bound(D, k)
            assert exact <= bound * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 7), st.integers(0, 2**31))
def test_combiner_oracles(M, extra, seed):
    rng = np.random.default_rng(seed)
    K = max(1, M - extra)
    D = random_channel(rng, M, K)
    x = rng.uniform(0.1, 10, K)
    mrc = mrc_sinrs(D, x)
    zf = zf_sinrs(D, x)
    W = np.linalg.pinv(D).conj().T  # = D (D^H D)^{-1}
    for k in range(K):
        assert mrc[k] == pytest.approx(combiner_sinr(D, x, k, D[:, k]), rel=1e-9)
        assert zf[k] == pytest.approx(combiner_sinr(D, x, k, W[:, k]), rel=1e-9)


def test_batched_matches_single(rng):
    H = complex_normal(rng, (50, 6, 3))
    x = np.array([1.0, 2.0, 0.5])
    batch_m, batch_z = mrc_sinrs(H, x), zf_sinrs(H, x)
    for t in range(50):
        for k in range(3):
            assert batch_m[t, k] == pytest.approx(mrc_sinr(H[t], x, k), rel=1e-12)
            assert batch_z[t, k] == pytest.approx(zf_sinr(H[t], x, k), rel=1e-12)


# -- ergodic averaging --

def test_deterministic_sampler_has_zero_error():
    def sampler(rng, n):
        return np.broadcast_to(CORRELATED, (n, 2, 2))

    r = ergodic_rate(sampler, [1.0, 1.0], 3000, seed=1)
    np.testing.assert_allclose(r.mrc_mean, np.log2(5 / 3))
    np.testing.assert_allclose(r.zf_mean, np.log2(1.5))
    assert np.all(r.mrc_std_error == 0) and np.all(r.zf_std_error == 0)
    assert r.zf_excluded == 0


def rayleigh(M, K):
    def sampler(rng, n):
        return complex_normal(rng, (n, M, K))
    return sampler


def test_doubling_trials_reproduces_prefix():
    a = ergodic_rate(rayleigh(3, 2), [1.0, 2.0], 1500, seed=5, return_samples=True)
    b = ergodic_rate(rayleigh(3, 2), [1.0, 2.0], 3000, seed=5, return_samples=True)
    np.testing.assert_array_equal(a.mrc_samples, b.mrc_samples[:1500])
    np.testing.assert_array_equal(a.mrc_samples.sum(axis=0), b.mrc_samples[:1500].sum(axis=0))
    np.testing.assert_array_equal(a.zf_samples, b.zf_samples[:1500])


def test_workers_do_not_change_results():
    a = ergodic_rate(rayleigh(4, 2), [3.0, 3.0], 5000, seed=2, block_size=256)
    b = ergodic_rate(rayleigh(4, 2), [3.0, 3.0], 5000, seed=2, block_size=256, workers=4)
    np.testing.assert_array_equal(a.mrc_mean, b.mrc_mean)
    np.testing.assert_array_equal(a.zf_mean, b.zf_mean)


def test_degenerate_trials_excluded():
    def sampler(rng, n):
        H = complex_normal(rng, (n, 2, 2))
        H[::2, :, 1] = H[::2, :, 0]  # every other draw is rank one
        return H

    r = ergodic_rate(sampler, [1.0, 1.0], 1000, seed=0, block_size=100)
    assert r.zf_excluded == 500
    assert np.all(np.isfinite(r.zf_mean)) and np.all(np.isfinite(r.mrc_mean))


def test_trials_must_be_positive():
    with pytest.raises(ValidationError):
        ergodic_rate(rayleigh(1, 1), [1.0], 0, seed=0)
