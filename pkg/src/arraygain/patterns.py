"""Per-element embedded gain patterns.

A pattern maps an arrival direction to the realized power gain of every
array element. Three providers exist:

* :class:`UniformPattern` - identical, direction-independent gain.
* :class:`TabulatedPattern` - measured or simulated gains on a regular
  (theta, phi) grid in degrees, bilinearly interpolated in dB.
* :class:`SyntheticPattern` - a seeded closed-form stand-in whose element
  spread is calibrated to patch or dipole arrays.

All providers expose ``gain_db(theta, phi)`` taking broadcastable radian
arrays and returning dB values with a trailing element axis.
"""
import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import PatternTableError, ValidationError
from .geometry import check_zenith

__all__ = [
    "GainPattern",
    "UniformPattern",
    "TabulatedPattern",
    "SyntheticPattern",
    "SyntheticParams",
    "PATCH_PARAMS",
    "DIPOLE_PARAMS",
    "builtin_pattern",
    "synthesize_pattern",
    "load_pattern_table",
    "write_pattern_table",
    "interpolate_gain",
    "gain_amplitudes",
    "db_to_linear",
    "linear_to_db",
]

# Grid nodes are compared in degrees after a radian round trip.
_NODE_TOL_DEG = 1e-9


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(np.asarray(lin, dtype=float))


class GainPattern:
    """Base class for embedded gain providers."""

    kind = "abstract"

    def __init__(self, element_count):
        if isinstance(element_count, bool) or int(element_count) != element_count or element_count < 1:
            raise ValidationError(f"element_count must be a positive integer, got {element_count!r}")
        self.element_count = int(element_count)

    def gain_db(self, theta, phi):
        raise NotImplementedError

    def gain_db_at(self, direction):
        """Gains (dB) of all elements for a single :class:`Direction`."""
        return self.gain_db(direction.theta, direction.phi)

    def gain_linear(self, theta, phi):
        return db_to_linear(self.gain_db(theta, phi))


class UniformPattern(GainPattern):
    """Every element has the same gain ``gain_db`` in every direction."""

    kind = "uniform"

    def __init__(self, element_count, gain_db=0.0):
        super().__init__(element_count)
        gain_db = float(gain_db)
        if not np.isfinite(gain_db):
            raise ValidationError("uniform gain must be finite")
        self.level_db = gain_db

    def gain_db(self, theta, phi):
        theta = check_zenith(theta)
        shape = np.broadcast_shapes(theta.shape, np.shape(phi))
        return np.full(shape + (self.element_count,), self.level_db)

    def __repr__(self):
        return f"UniformPattern(element_count={self.element_count}, gain_db={self.level_db})"


def _axis_weights(grid, x, axis_name):
    """Lower node index and fractional weight of ``x`` along a sorted grid."""
    x = np.asarray(x, dtype=float)
    lo_edge, hi_edge = grid[0], grid[-1]
    if np.any(x < lo_edge - _NODE_TOL_DEG) or np.any(x > hi_edge + _NODE_TOL_DEG):
        raise ValidationError(
            f"{axis_name} query outside the table range [{lo_edge}, {hi_edge}] deg (no extrapolation)"
        )
    x = np.clip(x, lo_edge, hi_edge)
    if grid.size == 1:
        return np.zeros(x.shape, dtype=int), np.zeros(x.shape)
    i = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, grid.size - 2)
    w = (x - grid[i]) / (grid[i + 1] - grid[i])
    return i, w


class TabulatedPattern(GainPattern):
    """Gains tabulated per element on a regular (theta, phi) grid.

    Parameters
    ----------
    theta_grid, phi_grid : array_like
        Strictly increasing node angles in degrees.
    gains_db : array_like, shape (M, len(theta_grid), len(phi_grid))
        Element gains in dB at every node.
    """

    kind = "tabulated"

    def __init__(self, theta_grid, phi_grid, gains_db):
        gains_db = np.asarray(gains_db, dtype=float)
        theta_grid = np.asarray(theta_grid, dtype=float).ravel()
        phi_grid = np.asarray(phi_grid, dtype=float).ravel()
        if gains_db.ndim != 3 or gains_db.shape[1:] != (theta_grid.size, phi_grid.size):
            raise ValidationError(
                f"gains_db shape {gains_db.shape} does not match grids "
                f"({theta_grid.size} theta x {phi_grid.size} phi)"
            )
        for name, g in (("theta_grid", theta_grid), ("phi_grid", phi_grid)):
            if g.size == 0 or np.any(np.diff(g) <= 0):
                raise ValidationError(f"{name} must be non-empty and strictly increasing")
        if np.any(np.abs(theta_grid) >= 90.0):
            raise ValidationError("theta_grid must lie strictly inside (-90, 90) degrees")
        if not np.all(np.isfinite(gains_db)):
            raise ValidationError("gain table contains non-finite values")
        super().__init__(gains_db.shape[0])
        self.theta_grid = theta_grid
        self.phi_grid = phi_grid
        self.gains_db = gains_db

    def gain_db(self, theta, phi):
        theta = check_zenith(theta)
        theta_deg, phi_deg = np.broadcast_arrays(np.rad2deg(theta), np.rad2deg(np.asarray(phi, dtype=float)))
        i, u = _axis_weights(self.theta_grid, theta_deg, "theta")
        j, v = _axis_weights(self.phi_grid, phi_deg, "phi")
        i1 = np.minimum(i + 1, self.theta_grid.size - 1)
        j1 = np.minimum(j + 1, self.phi_grid.size - 1)
        g = np.moveaxis(self.gains_db, 0, -1)  # (n_theta, n_phi, M)
        u = u[..., None]
        v = v[..., None]
        return (
            (1 - u) * (1 - v) * g[i, j]
            + u * (1 - v) * g[i1, j]
            + (1 - u) * v * g[i, j1]
            + u * v * g[i1, j1]
        )

    def __repr__(self):
        return (
            f"TabulatedPattern(element_count={self.element_count}, "
            f"theta={self.theta_grid.size} nodes, phi={self.phi_grid.size} nodes)"
        )


def interpolate_gain(table, element, direction):
    """Bilinearly interpolated gain (dB) of one element of a tabulated pattern."""
    if not 0 <= element < table.element_count:
        raise ValidationError(f"element index {element} out of range")
    return float(table.gain_db_at(direction)[element])


def _curve(knots):
    if len(knots) == 0:
        raise ValidationError("curve needs at least one knot")
    xs, ys = (np.asarray(a, dtype=float) for a in zip(*knots))
    if xs.size == 0 or np.any(np.diff(xs) <= 0):
        raise ValidationError("curve knots must be strictly increasing in |theta|")
    return xs, ys


@dataclass(frozen=True)
class SyntheticParams:
    """Inputs of the synthetic gain model.

    ``envelope`` and ``spread`` are piecewise-linear curves given as
    ``((abs_theta_deg, dB), ...)`` knots and held constant beyond the end
    knots. The envelope is relative to ``peak_db``; ``kappa`` is the angular
    frequency (rad/rad) of the per-element modulation.
    """

    peak_db: float = 0.0
    envelope: tuple = ((0.0, 0.0), (75.0, -6.0))
    spread: tuple = ((0.0, 3.0), (20.0, 3.0), (60.0, 5.0), (75.0, 10.0))
    kappa: float = 6.0

    def __post_init__(self):
        _, env = _curve(self.envelope)
        _, spread = _curve(self.spread)
        if np.any(spread < 0):
            raise ValidationError("spread curve must be non-negative")
        if not (np.isfinite(self.peak_db) and np.all(np.isfinite(env)) and np.isfinite(self.kappa)):
            raise ValidationError("synthetic parameters must be finite")


PATCH_PARAMS = SyntheticParams()
DIPOLE_PARAMS = SyntheticParams(
    peak_db=-3.0,
    envelope=((0.0, 0.0), (75.0, -10.0)),
    spread=((0.0, 10.0), (60.0, 10.0), (75.0, 13.0)),
)


class SyntheticPattern(GainPattern):
    """Closed-form element gains with a seeded per-element modulation.

    Element ``m`` has gain, in dB,
    ``peak + envelope(|theta|) - spread(|theta|) * (1 + sin(kappa*theta + psi_m)) / 2``,
    independent of azimuth. The best element at each angle therefore sits on
    the envelope and the array spreads over at most ``spread(|theta|)`` dB.
    """

    kind = "synthetic"

    def __init__(self, params, phases):
        phases = np.asarray(phases, dtype=float).ravel()
        super().__init__(phases.size)
        self.params = params
        self.phases = phases
        self._env = _curve(params.envelope)
        self._spread = _curve(params.spread)

    def envelope_db(self, abs_theta_deg):
        return self.params.peak_db + np.interp(abs_theta_deg, *self._env)

    def spread_db(self, abs_theta_deg):
        return np.interp(abs_theta_deg, *self._spread)

    def gain_db(self, theta, phi):
        theta = check_zenith(theta)
        theta = np.broadcast_to(theta, np.broadcast_shapes(theta.shape, np.shape(phi)))
        a = np.rad2deg(np.abs(theta))[..., None]
        mod = 0.5 * (1.0 + np.sin(self.params.kappa * theta[..., None] + self.phases))
        return self.envelope_db(a) - self.spread_db(a) * mod

    def __repr__(self):
        return f"SyntheticPattern(element_count={self.element_count}, params={self.params})"


def synthesize_pattern(params, seed, M):
    """Draw per-element phases uniformly on [0, 2 pi) from ``seed``.

    Identical ``(params, seed, M)`` always yield an identical pattern.
    """
    if isinstance(params, dict):
        params = SyntheticParams(**params)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return SyntheticPattern(params, rng.uniform(0.0, 2 * np.pi, int(M)))


def builtin_pattern(name, M, seed=0):
    """``reference`` (uniform 0 dB), ``patch`` or ``dipole`` defaults."""
    if name == "reference":
        return UniformPattern(M, 0.0)
    if name == "patch":
        return synthesize_pattern(PATCH_PARAMS, seed, M)
    if name == "dipole":
        return synthesize_pattern(DIPOLE_PARAMS, seed, M)
    raise ValidationError(f"unknown builtin pattern {name!r} (expected reference, patch or dipole)")


def gain_amplitudes(pattern, direction):
    """Amplitude gains ``sqrt(g_m)`` (linear) for every element."""
    return 10.0 ** (pattern.gain_db_at(direction) / 20.0)


_HEADER = ["element", "theta_deg", "phi_deg", "gain_db"]


def load_pattern_table(source, M=None):
    """Parse a pattern-table CSV into a :class:`TabulatedPattern`.

    ``source`` may be a path, a text/byte stream or raw bytes. The header is
    ``element,theta_deg,phi_deg,gain_db`` with one row per (element, theta,
    phi) node. When ``M`` is given, element indices must lie in ``[0, M)``
    and every element must be present.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise PatternTableError("empty pattern table") from None
    if [h.strip() for h in header] != _HEADER:
        raise PatternTableError(f"bad header {header!r}; expected {','.join(_HEADER)}")

    cells = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise PatternTableError(f"row {lineno}: expected 4 fields, got {len(row)}")
        try:
            elem = int(row[0])
            th, ph, g = (float(c) for c in row[1:])
        except ValueError:
            raise PatternTableError(f"row {lineno}: non-numeric field in {row!r}") from None
        if not all(np.isfinite([th, ph, g])):
            raise PatternTableError(f"row {lineno}: non-finite value in {row!r}")
        if elem < 0 or (M is not None and elem >= M):
            raise PatternTableError(f"row {lineno}: element index {elem} out of range")
        key = (elem, th, ph)
        if key in cells:
            raise PatternTableError(f"row {lineno}: duplicate entry for element {elem} at ({th}, {ph})")
        cells[key] = g
    if not cells:
        raise PatternTableError("pattern table has no data rows")

    n_elem = M if M is not None else max(k[0] for k in cells) + 1
    thetas = np.array(sorted({k[1] for k in cells}))
    phis = np.array(sorted({k[2] for k in cells}))
    t_idx = {t: i for i, t in enumerate(thetas)}
    p_idx = {p: j for j, p in enumerate(phis)}
    gains = np.full((n_elem, thetas.size, phis.size), np.nan)
    for (e, t, p), g in cells.items():
        gains[e, t_idx[t], p_idx[p]] = g
    if np.isnan(gains).any():
        e, i, j = np.argwhere(np.isnan(gains))[0]
        raise PatternTableError(
            f"incomplete grid: no entry for element {e} at theta={thetas[i]}, phi={phis[j]}"
        )
    try:
        return TabulatedPattern(thetas, phis, gains)
    except ValidationError as exc:
        raise PatternTableError(str(exc)) from None


def _read_text(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8-sig") if isinstance(data, bytes) else data
    with open(source, "r", encoding="utf-8-sig", newline="") as fh:
        return fh.read()


def write_pattern_table(pattern, stream, theta_grid_deg, phi_grid_deg):
    """Sample ``pattern`` on a grid and write it in the table CSV format."""
    theta_grid_deg = np.asarray(theta_grid_deg, dtype=float)
    phi_grid_deg = np.asarray(phi_grid_deg, dtype=float)
    tt, pp = np.meshgrid(theta_grid_deg, phi_grid_deg, indexing="ij")
    g = pattern.gain_db(np.deg2rad(tt), np.deg2rad(pp))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_HEADER)
    for m in range(pattern.element_count):
        for i, t in enumerate(theta_grid_deg):
            for j, p in enumerate(phi_grid_deg):
                writer.writerow([m, repr(float(t)), repr(float(p)), repr(float(g[i, j, m]))])
