"""Gain-variation statistics over an array.

All functions accept any :class:`~arraygain.patterns.GainPattern`.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .patterns import db_to_linear, linear_to_db

__all__ = [
    "max_pairwise_variation",
    "variation_curve",
    "DynamicRangeProfile",
    "dynamic_range_profile",
    "panel_map",
]


def max_pairwise_variation(pattern, direction):
    """Largest gain difference (dB) between any two elements for one direction."""
    g = pattern.gain_db_at(direction)
    return float(g.max() - g.min())


def variation_curve(pattern, theta, phi):
    """Vectorized :func:`max_pairwise_variation` over broadcastable angle arrays."""
    g = pattern.gain_db(theta, phi)
    return g.max(axis=-1) - g.min(axis=-1)


@dataclass(frozen=True)
class DynamicRangeProfile:
    """Per-zenith extrema and mean of element gains, all in dB."""

    theta: np.ndarray
    max_db: np.ndarray
    min_db: np.ndarray
    mean_db: np.ndarray

    @property
    def range_db(self):
        return self.max_db - self.min_db

    def records(self):
        for row in zip(self.theta, self.max_db, self.min_db, self.mean_db):
            yield tuple(float(v) for v in row)


def dynamic_range_profile(pattern, theta_grid, phi_grid):
    """Max, min and mean gain jointly over elements and azimuths, per zenith.

    The mean is taken over linear power and converted back to dB.
    """
    theta_grid = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    phi_grid = np.atleast_1d(np.asarray(phi_grid, dtype=float))
    if theta_grid.size == 0 or phi_grid.size == 0:
        raise ValidationError("theta and phi grids must be non-empty")
    g = pattern.gain_db(theta_grid[:, None], phi_grid[None, :])  # (n_theta, n_phi, M)
    flat = g.reshape(theta_grid.size, -1)
    return DynamicRangeProfile(
        theta=theta_grid,
        max_db=flat.max(axis=1),
        min_db=flat.min(axis=1),
        mean_db=linear_to_db(db_to_linear(flat).mean(axis=1)),
    )


def panel_map(pattern, direction, geom):
    """Element gains (dB) normalized to the array-mean linear power.

    Pair with :func:`arraygain.geometry.element_positions` for a panel plot.
    """
    if geom.num_elements != pattern.element_count:
        raise ValidationError(
            f"geometry has {geom.num_elements} elements, pattern has {pattern.element_count}"
        )
    g = pattern.gain_db_at(direction)
    return g - linear_to_db(db_to_linear(g).mean())
