"""Linear MRC and ZF uplink detectors.

Every SINR routine accepts a single channel ``(M, K)`` or a stack
``(..., M, K)``; powers broadcast against the trailing user axis. Noise
variance is one.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .exceptions import DegenerateChannelError, ValidationError

__all__ = [
    "ZF_CONDITION_LIMIT",
    "mrc_sinrs",
    "zf_sinrs",
    "zf_sinrs_masked",
    "zf_inverse_diagonal",
    "gram_condition",
    "mrc_sinr",
    "zf_sinr",
    "pairwise_sir",
    "zf_power_bound",
    "RateSample",
    "instantaneous_rates",
    "ErgodicRate",
    "ergodic_rate",
    "mean_and_stderr",
]

# Gram matrices worse conditioned than this are treated as singular.
ZF_CONDITION_LIMIT = 1e12


def _as_channel(D):
    D = np.asarray(D, dtype=complex)
    if D.ndim < 2 or D.shape[-1] < 1 or D.shape[-2] < 1:
        raise ValidationError(f"channel must have shape (..., M, K), got {D.shape}")
    return D


def _as_powers(powers, K):
    x = np.asarray(powers, dtype=float)
    if x.ndim == 0:
        x = np.full(K, float(x))
    if x.shape[-1] != K:
        raise ValidationError(f"expected {K} user powers, got shape {x.shape}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValidationError("powers must be finite and non-negative")
    return x


def _gram(D):
    return np.swapaxes(D.conj(), -1, -2) @ D


def mrc_sinrs(D, powers, *, strict=False):
    """MRC SINR of every user.

    ``x_k |d_k|^4 / (sum_{i != k} x_i |d_k^H d_i|^2 + |d_k|^2)``. With
    ``strict=True`` the interference sum is weighted by the desired user's
    own power ``x_k`` instead of each interferer's, which only differs when
    powers are unequal. Users with a zero channel get SINR 0.
    """
    D = _as_channel(D)
    x = _as_powers(powers, D.shape[-1])
    G = _gram(D)
    norms = np.real(np.diagonal(G, axis1=-2, axis2=-1))
    cross = np.abs(G) ** 2
    K = D.shape[-1]
    cross = cross * (1 - np.eye(K))
    if strict:
        interference = x * cross.sum(axis=-1)
    else:
        interference = (cross @ x[..., None])[..., 0]
    denom = interference + norms
    with np.errstate(invalid="ignore", divide="ignore"):
        sinr = np.where(norms > 0, x * norms**2 / np.where(denom > 0, denom, 1.0), 0.0)
    return sinr


def gram_condition(D):
    """2-norm condition number of ``D^H D`` (``inf`` when rank deficient)."""
    D = _as_channel(D)
    M, K = D.shape[-2:]
    if K > M:
        return np.full(D.shape[:-2], np.inf)
    s = np.linalg.svd(D, compute_uv=False)
    smax, smin = s[..., 0], s[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(smin > 0, (smax / np.where(smin > 0, smin, 1.0)) ** 2, np.inf)


def zf_inverse_diagonal(D):
    """Diagonal of ``(D^H D)^{-1}`` and a mask of well-conditioned channels.

    Uses the QR factorization ``D = QR`` (so ``D^H D = R^H R``) and reads
    the diagonal off ``R^{-1} R^{-H}``, avoiding explicit formation of the
    Gram inverse. Entries for degenerate channels are NaN.
    """
    D = _as_channel(D)
    ok = gram_condition(D) <= ZF_CONDITION_LIMIT
    K = D.shape[-1]
    diag = np.full(D.shape[:-2] + (K,), np.nan)
    if not np.any(ok):
        return diag, ok
    good = D[ok] if D.ndim > 2 else D
    R = np.linalg.qr(good, mode="r")
    Rinv = np.linalg.inv(R)
    d = np.sum(np.abs(Rinv) ** 2, axis=-1)
    if D.ndim > 2:
        diag[ok] = d
    else:
        diag = d
    return diag, ok


def zf_sinrs_masked(D, powers):
    """ZF SINRs ``x_k / [(D^H D)^{-1}]_kk`` with NaN and a False mask where degenerate."""
    D = _as_channel(D)
    x = _as_powers(powers, D.shape[-1])
    diag, ok = zf_inverse_diagonal(D)
    return x / diag, ok


def zf_sinrs(D, powers):
    """ZF SINR of every user; raises :class:`DegenerateChannelError` if singular."""
    sinr, ok = zf_sinrs_masked(D, powers)
    if not np.all(ok):
        cond = gram_condition(D)
        raise DegenerateChannelError(
            f"Gram matrix condition number {np.max(cond):.3g} exceeds {ZF_CONDITION_LIMIT:.0e}",
            condition=cond,
        )
    return sinr


def _check_user(D, k):
    D = _as_channel(D)
    if D.ndim != 2:
        raise ValidationError("expected a single (M, K) channel")
    if not 0 <= k < D.shape[1]:
        raise ValidationError(f"user index {k} out of range for K={D.shape[1]}")
    return D


def mrc_sinr(D, powers, k, *, strict=False):
    """MRC SINR of user ``k``."""
    D = _check_user(D, k)
    return float(mrc_sinrs(D, powers, strict=strict)[k])


def zf_sinr(D, powers, k):
    """ZF SINR of user ``k``."""
    D = _check_user(D, k)
    return float(zf_sinrs(D, powers)[k])


def pairwise_sir(d_k, d_i, powers=(1.0, 1.0)):
    """Signal-to-interference ratios of a user pair under MRC.

    Written through the squared cosine between the two channels:
    ``SIR_k = x_k |d_k|^2 / (x_i |d_i|^2 cos^2)``, which equals
    ``x_k |d_k|^4 / (x_i |d_k^H d_i|^2)``. Orthogonal channels give
    ``inf`` for both users.
    """
    d_k = np.asarray(d_k, dtype=complex).ravel()
    d_i = np.asarray(d_i, dtype=complex).ravel()
    x_k, x_i = (float(p) for p in powers)
    n_k = float(np.real(np.vdot(d_k, d_k)))
    n_i = float(np.real(np.vdot(d_i, d_i)))
    if n_k == 0 or n_i == 0:
        raise ValidationError("pairwise_sir needs two non-zero channel vectors")
    cos2 = abs(np.vdot(d_k, d_i)) ** 2 / (n_k * n_i)
    if cos2 == 0:
        return np.inf, np.inf
    return (x_k / x_i) * (n_k / n_i) / cos2, (x_i / x_k) * (n_i / n_k) / cos2


def zf_power_bound(D, k):
    """``(1 / [(D^H D)^{-1}]_kk, |d_k|^2)``; the first never exceeds the second."""
    D = _check_user(D, k)
    diag, ok = zf_inverse_diagonal(D)
    if not ok:
        raise DegenerateChannelError("Gram matrix is singular or ill-conditioned",
                                     condition=gram_condition(D))
    return 1.0 / float(diag[k]), float(np.real(np.vdot(D[:, k], D[:, k])))


@dataclass(frozen=True)
class RateSample:
    """Per-user rates (bits/s/Hz) and SINRs for one channel realization."""

    mrc_rate: np.ndarray
    zf_rate: np.ndarray
    mrc_sinr: np.ndarray
    zf_sinr: np.ndarray


def instantaneous_rates(D, powers, *, strict=False):
    """MRC and ZF rates ``log2(1 + SINR)`` for one channel.

    If ZF is undefined a :class:`DegenerateChannelError` is raised whose
    ``partial`` attribute holds the sample with MRC filled in and NaN ZF.
    """
    D = _as_channel(D)
    mrc = mrc_sinrs(D, powers, strict=strict)
    zf, ok = zf_sinrs_masked(D, powers)
    sample = RateSample(np.log2(1 + mrc), np.log2(1 + zf), mrc, zf)
    if not np.all(ok):
        raise DegenerateChannelError("ZF undefined for this channel", condition=gram_condition(D),
                                     partial=sample)
    return sample


@dataclass(frozen=True)
class ErgodicRate:
    """Monte Carlo ergodic rates per user.

    MRC statistics use every trial; ZF statistics skip trials whose Gram
    matrix was degenerate (counted in ``zf_excluded``).
    """

    mrc_mean: np.ndarray
    mrc_std_error: np.ndarray
    zf_mean: np.ndarray
    zf_std_error: np.ndarray
    trials: int
    zf_excluded: int
    mrc_samples: np.ndarray = None
    zf_samples: np.ndarray = None


def mean_and_stderr(samples, axis=0):
    """Sample mean and standard error along ``axis`` (NaN-free input)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    if n == 0:
        shape = np.delete(np.array(samples.shape), axis)
        return np.full(shape, np.nan), np.full(shape, np.nan)
    mean = samples.mean(axis=axis)
    if n == 1:
        return mean, np.zeros_like(mean)
    se = samples.std(axis=axis, ddof=1) / np.sqrt(n)
    flat = np.ptp(samples, axis=axis) == 0
    return mean, np.where(flat, 0.0, se)


def ergodic_rate(sampler, powers, trials, seed, *, block_size=1024, workers=1,
                 strict=False, return_samples=False):
    """Average instantaneous MRC and ZF rates over seeded channel draws.

    ``sampler(rng, n)`` must return ``n`` channels as an ``(n, M, K)`` array.
    Trials are grouped in blocks of ``block_size``; block ``b`` always draws
    a full block from ``substream(seed, b)`` and is truncated if needed, so
    the first ``N`` trials are identical for any total ``trials >= N`` and
    for any number of worker threads.
    """
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    n_blocks = -(-trials // block_size)

    def run_block(b):
        H = np.asarray(sampler(substream(seed, b), block_size), dtype=complex)
        if H.ndim != 3 or H.shape[0] != block_size:
            raise ValidationError(f"sampler must return shape (n, M, K), got {H.shape}")
        H = H[: min(block_size, trials - b * block_size)]
        mrc = np.log2(1 + mrc_sinrs(H, powers, strict=strict))
        zf, ok = zf_sinrs_masked(H, powers)
        return mrc, np.log2(1 + zf), ok

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]
    mrc = np.concatenate([p[0] for p in parts])
    zf = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])

    mrc_mean, mrc_se = mean_and_stderr(mrc)
    zf_mean, zf_se = mean_and_stderr(zf[ok])
    return ErgodicRate(
        mrc_mean=mrc_mean,
        mrc_std_error=mrc_se,
        zf_mean=zf_mean,
        zf_std_error=zf_se,
        trials=trials,
        zf_excluded=int(np.count_nonzero(~ok)),
        mrc_samples=mrc if return_samples else None,
        zf_samples=zf if return_samples else None,
    )
