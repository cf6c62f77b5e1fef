"""Uplink channel matrices with per-element embedded gains.

A channel matrix is a complex ``(M, K)`` ndarray whose column ``k`` is the
channel vector of user ``k``. Noise variance is fixed to one.
"""
from dataclasses import dataclass, field

import numpy as np

from ._rng import complex_normal
from .exceptions import ValidationError
from .geometry import Direction, steering_matrix

__all__ = [
    "ClusterSpec",
    "UserSpec",
    "los_channel",
    "los_columns",
    "multipath_channel",
    "random_visibility",
    "apply_uplink",
]


@dataclass(frozen=True)
class ClusterSpec:
    """One multipath cluster: arrival direction and element visibility mask."""

    direction: Direction
    visibility: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.visibility is None:
            return
        mask = np.asarray(self.visibility)
        if mask.ndim != 1 or not np.all((mask == 0) | (mask == 1)):
            raise ValidationError("visibility must be a 1-D mask of zeros and ones")
        if not mask.any():
            raise ValidationError("visibility mask must contain at least one visible element")
        object.__setattr__(self, "visibility", mask.astype(float))

    def mask(self, M):
        """Visibility as a length-M float array (all ones when unset)."""
        if self.visibility is None:
            return np.ones(M)
        if self.visibility.size != M:
            raise ValidationError(f"visibility mask has {self.visibility.size} entries, array has {M}")
        return self.visibility

    def fully_visible(self):
        return self.visibility is None or bool(np.all(self.visibility == 1))


@dataclass(frozen=True)
class UserSpec:
    """Single-antenna user: large-scale fading, transmit power and clusters."""

    alpha: float
    tx_power: float
    clusters: tuple

    def __post_init__(self):
        for name in ("alpha", "tx_power"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be finite and non-negative, got {v!r}")
            object.__setattr__(self, name, v)
        clusters = tuple(self.clusters)
        if not clusters:
            raise ValidationError("a user needs at least one cluster")
        object.__setattr__(self, "clusters", clusters)

    @classmethod
    def los(cls, direction, alpha=1.0, tx_power=1.0):
        return cls(alpha, tx_power, (ClusterSpec(direction),))


def _check_sizes(geom, pattern):
    if pattern.element_count != geom.num_elements:
        raise ValidationError(
            f"pattern has {pattern.element_count} elements but geometry has {geom.num_elements}"
        )


def los_columns(geom, pattern, theta, phi, alpha=1.0):
    """Vectorized line-of-sight channel vectors.

    Returns ``sqrt(alpha) * sqrt(g(theta, phi)) * a(theta, phi)`` with the
    element axis last, for broadcastable ``theta``, ``phi`` and ``alpha``.
    """
    _check_sizes(geom, pattern)
    amp = 10.0 ** (pattern.gain_db(theta, phi) / 20.0)
    return np.sqrt(np.asarray(alpha, dtype=float))[..., None] * amp * steering_matrix(geom, theta, phi)


def los_channel(geom, pattern, users):
    """Deterministic single-cluster channel ``d_k = sqrt(alpha_k) G a``."""
    _check_sizes(geom, pattern)
    cols = []
    for k, user in enumerate(users):
        if len(user.clusters) != 1 or not user.clusters[0].fully_visible():
            raise ValidationError(
                f"user {k} is not a single fully-visible cluster; use multipath_channel"
            )
        d = user.clusters[0].direction
        cols.append(los_columns(geom, pattern, d.theta, d.phi, user.alpha))
    if not cols:
        raise ValidationError("at least one user is required")
    return np.stack(cols, axis=1)


def multipath_channel(geom, pattern, users, rng, *, small_scale=None, normalization="mean"):
    """Clustered channel with binary visibility masks.

    Column ``k`` is ``(sqrt(alpha_k) / C_k) * sum_c G(dir_c) Delta_c a(dir_c) v_ck``
    with one scalar ``v_ck ~ CN(0, 1)`` per (user, cluster), drawn from
    ``rng`` in user-major, cluster-minor order.

    Parameters
    ----------
    small_scale : sequence of sequences, optional
        Explicit ``v_ck`` values overriding the random draws (test hook).
    normalization : {"mean", "power"}
        ``"mean"`` scales by ``1/C_k``; ``"power"`` by ``1/sqrt(C_k)``,
        which keeps the average channel power independent of ``C_k``.
    """
    _check_sizes(geom, pattern)
    if normalization not in ("mean", "power"):
        raise ValidationError(f"unknown normalization {normalization!r}")
    if not users:
        raise ValidationError("at least one user is required")
    M = geom.num_elements
    D = np.zeros((M, len(users)), dtype=complex)
    for k, user in enumerate(users):
        C = len(user.clusters)
        if small_scale is not None:
            v = np.asarray(small_scale[k], dtype=complex)
            if v.shape != (C,):
                raise ValidationError(f"small_scale[{k}] must have {C} entries")
        else:
            v = complex_normal(rng, C)
        theta = np.array([c.direction.theta for c in user.clusters])
        phi = np.array([c.direction.phi for c in user.clusters])
        masks = np.stack([c.mask(M) for c in user.clusters])
        cols = los_columns(geom, pattern, theta, phi, user.alpha)  # (C, M)
        scale = 1.0 / C if normalization == "mean" else 1.0 / np.sqrt(C)
        D[:, k] = scale * np.sum(cols * masks * v[:, None], axis=0)
    return D


def random_visibility(M, p, rng):
    """Bernoulli(p) visibility mask with at least one visible element."""
    if not 0 < p <= 1:
        raise ValidationError(f"visibility probability must lie in (0, 1], got {p}")
    while True:
        mask = (rng.random(M) < p).astype(float)
        if mask.any():
            return mask


def apply_uplink(D, powers, symbols, rng=None, *, noise=True):
    """Received vector ``y = D X^(1/2) s + w`` with ``w ~ CN(0, I)``."""
    D = np.asarray(D, dtype=complex)
    powers = np.asarray(powers, dtype=float)
    symbols = np.asarray(symbols, dtype=complex)
    if D.ndim != 2 or powers.shape != (D.shape[1],) or symbols.shape != (D.shape[1],):
        raise ValidationError(
            f"dimension mismatch: D {D.shape}, powers {powers.shape}, symbols {symbols.shape}"
        )
    if np.any(powers < 0):
        raise ValidationError("transmit powers must be non-negative")
    y = D @ (np.sqrt(powers) * symbols)
    if noise:
        if rng is None:
            raise ValidationError("an rng is required when noise is enabled")
        y = y + complex_normal(rng, D.shape[0])
    return y
