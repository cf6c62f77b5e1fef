"""Rectangular array layout and plane-wave steering vectors.

Element ordering is column-stacked throughout the package: the element at
grid position ``(p, q)`` (``p`` along rows, ``q`` along columns) has index
``m = p + q * rows``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .exceptions import ValidationError

__all__ = [
    "ArrayGeometry",
    "Direction",
    "wavelength_from_frequency",
    "steering_vector",
    "steering_matrix",
    "element_positions",
    "check_zenith",
]

_HALF_PI = np.pi / 2


def wavelength_from_frequency(freq_hz):
    """Free-space wavelength in meters for a carrier frequency in Hz."""
    freq_hz = float(freq_hz)
    if not freq_hz > 0:
        raise ValidationError(f"frequency must be positive, got {freq_hz}")
    return speed_of_light / freq_hz


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular grid of ``rows x cols`` elements.

    Parameters
    ----------
    rows, cols : int
        Grid dimensions; ``M = rows * cols``.
    spacing : float
        Element spacing in meters (same along both axes).
    wavelength : float
        Carrier wavelength in meters.
    """

    rows: int
    cols: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        for name in ("rows", "cols"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        for name in ("spacing", "wavelength"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_frequency(cls, rows, cols, spacing, freq_hz):
        return cls(rows, cols, spacing, wavelength_from_frequency(freq_hz))

    @property
    def num_elements(self):
        return self.rows * self.cols

    M = num_elements

    @property
    def spacing_ratio(self):
        """Spacing in wavelengths (gamma / lambda)."""
        return self.spacing / self.wavelength

    def grid_indices(self):
        """Row and column index of every element, in column-stacked order."""
        m = np.arange(self.num_elements)
        return m % self.rows, m // self.rows


def check_zenith(theta):
    """Raise unless every zenith angle lies strictly inside (-pi/2, pi/2)."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) >= _HALF_PI):
        raise ValidationError("zenith angle must satisfy |theta| < pi/2 (radians)")
    return theta


@dataclass(frozen=True)
class Direction:
    """Arrival direction in radians.

    ``theta`` is the signed zenith angle from the array normal and must lie
    in the open interval (-pi/2, pi/2); ``phi`` is the azimuth.
    """

    theta: float
    phi: float

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        check_zenith(theta)
        if not np.isfinite(phi):
            raise ValidationError(f"azimuth must be finite, got {phi!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_degrees(cls, theta_deg, phi_deg):
        return cls(np.deg2rad(theta_deg), np.deg2rad(phi_deg))

    @property
    def degrees(self):
        return float(np.rad2deg(self.theta)), float(np.rad2deg(self.phi))

    def __neg__(self):
        return Direction(-self.theta, -self.phi)


def _steering_from_sines(geom, sin_theta, sin_phi):
    p, q = geom.grid_indices()
    sin_theta = np.asarray(sin_theta, dtype=float)[..., None]
    sin_phi = np.asarray(sin_phi, dtype=float)[..., None]
    phase = 2 * np.pi * geom.spacing_ratio * (p * sin_theta + q * sin_phi)
    return np.exp(1j * phase)


def steering_matrix(geom, theta, phi):
    """Steering vectors for broadcastable arrays of angles (radians).

    Returns an array of shape ``broadcast(theta, phi).shape + (M,)``.
    """
    theta = check_zenith(theta)
    theta, phi = np.broadcast_arrays(theta, np.asarray(phi, dtype=float))
    return _steering_from_sines(geom, np.sin(theta), np.sin(phi))


def steering_vector(geom, direction):
    """Steering vector ``a(theta, phi)`` of length M.

    Entry ``m = p + q*rows`` is ``exp(j 2 pi (gamma/lambda) (p sin(theta) + q sin(phi)))``.
    The zenith angle drives the row index and the azimuth the column index,
    with no direction-cosine coupling between the two.
    """
    return _steering_from_sines(geom, np.sin(direction.theta), np.sin(direction.phi))


def element_positions(geom):
    """Planar ``(x, y)`` coordinates in meters, shape ``(M, 2)``."""
    p, q = geom.grid_indices()
    return np.column_stack([p * geom.spacing, q * geom.spacing]).astype(float)
