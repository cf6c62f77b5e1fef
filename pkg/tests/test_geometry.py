import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arraygain.exceptions import ValidationError
from arraygain.geometry import (
    ArrayGeometry,
    Direction,
    element_positions,
    steering_matrix,
    steering_vector,
    wavelength_from_frequency,
)

zenith = st.floats(-1.5707, 1.5707)
azimuth = st.floats(-2 * np.pi, 2 * np.pi)
geometries = st.builds(
    ArrayGeometry,
    rows=st.integers(1, 12),
    cols=st.integers(1, 12),
    spacing=st.floats(0.01, 0.5),
    wavelength=st.floats(0.05, 1.0),
)


def test_broadside_is_all_ones():
    g = ArrayGeometry(2, 2, 0.5, 1.0)
    np.testing.assert_array_equal(steering_vector(g, Direction(0.0, 0.0)), np.ones(4))


def test_endfire_limit_alternates_along_rows():
    # sin(theta) -> 1 with gamma/lambda = 0.5 gives exp(j pi p) along rows
    g = ArrayGeometry(2, 2, 0.5, 1.0)
    a = steering_vector(g, Direction(np.pi / 2 - 1e-9, 0.0))
    np.testing.assert_allclose(a, [1, -1, 1, -1], atol=1e-8)


def test_column_stacked_ordering():
    g = ArrayGeometry(3, 2, 0.25, 1.0)
    a = steering_vector(g, Direction(np.arcsin(0.2), np.arcsin(0.6)))
    for m in range(6):
        p, q = m % 3, m // 3
        assert a[m] == pytest.approx(np.exp(2j * np.pi * 0.25 * (p * 0.2 + q * 0.6)), abs=1e-14)


@pytest.mark.parametrize("rows,cols,spacing,expected", [
    (1, 1, 1.0, [(0, 0)]),
    (2, 1, 0.071, [(0, 0), (0.071, 0)]),
    (2, 2, 1.0, [(0, 0), (1, 0), (0, 1), (1, 1)]),
])
def test_element_positions(rows, cols, spacing, expected):
    np.testing.assert_allclose(element_positions(ArrayGeometry(rows, cols, spacing, 1.0)), expected)


@pytest.mark.parametrize("kwargs", [
    dict(rows=0, cols=1, spacing=1, wavelength=1),
    dict(rows=1, cols=-2, spacing=1, wavelength=1),
    dict(rows=1.5, cols=1, spacing=1, wavelength=1),
    dict(rows=1, cols=1, spacing=0, wavelength=1),
    dict(rows=1, cols=1, spacing=1, wavelength=-1),
    dict(rows=1, cols=1, spacing=float("nan"), wavelength=1),
])
def test_invalid_geometry_rejected(kwargs):
    with pytest.raises(ValidationError):
        ArrayGeometry(**kwargs)


@pytest.mark.parametrize("theta", [np.pi / 2, -np.pi / 2, 2.0, float("nan")])
def test_invalid_zenith_rejected(theta):
    with pytest.raises(ValidationError):
        Direction(theta, 0.0)


def test_wavelength_at_2_6_ghz():
    assert wavelength_from_frequency(2.6e9) == pytest.approx(0.115305, rel=1e-5)
    g = ArrayGeometry.from_frequency(4, 8, 0.071, 2.6e9)
    assert g.num_elements == 32 and g.M == 32
    assert g.spacing_ratio == pytest.approx(0.6158, abs=1e-4)


def test_steering_matrix_matches_single_vectors():
    g = ArrayGeometry(3, 4, 0.06, 0.115)
    th = np.array([[-0.3, 0.1], [0.5, 1.2]])
    ph = np.array([0.2, 1.5])
    A = steering_matrix(g, th, ph)
    assert A.shape == (2, 2, 12)
    for idx in np.ndindex(2, 2):
        np.testing.assert_allclose(A[idx], steering_vector(g, Direction(th[idx], ph[idx[1]])))


@settings(max_examples=200, deadline=None)
@given(geometries, zenith, azimuth)
def test_unit_modulus_and_norm(g, theta, phi):
    a = steering_vector(g, Direction(theta, phi))
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
    assert np.vdot(a, a).real == pytest.approx(g.num_elements, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(geometries, zenith, azimuth)
def test_conjugate_symmetry(g, theta, phi):
    d = Direction(theta, phi)
    np.testing.assert_allclose(steering_vector(g, -d), np.conj(steering_vector(g, d)), atol=1e-12)
