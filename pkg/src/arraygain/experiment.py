"""Good-user / bad-user two-user experiment and gain-statistics reports.

One user is placed in the high-gain zenith region and one outside it on
every trial. Per-trial MRC and ZF rates are averaged for each array case,
SNR point and user class. Placement draws come from a per-trial substream
of the master seed, so every array case sees the same user positions and
results do not depend on the worker count.
"""
import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import substream
from .channel import ClusterSpec, UserSpec, los_columns, multipath_channel, random_visibility
from .detectors import mean_and_stderr, mrc_sinrs, zf_inverse_diagonal
from .exceptions import ConfigError, ValidationError
from .gainstats import dynamic_range_profile, panel_map, variation_curve
from .geometry import ArrayGeometry, Direction, element_positions, wavelength_from_frequency
from .patterns import TabulatedPattern, UniformPattern, builtin_pattern, load_pattern_table

__all__ = [
    "ChannelSettings",
    "ScenarioConfig",
    "load_config",
    "resolve_pattern",
    "place_users",
    "CaseRates",
    "simulate_case",
    "RateRecord",
    "RateCurves",
    "run_scenario",
    "emit_results",
    "gain_stats_report",
    "RESULTS_HEADER",
]

RESULTS_HEADER = ["snr_db", "array", "detector", "user_class", "mean_rate_bps_hz", "std_error", "excluded_trials"]

_BLOCK = 1024


def _deg_range(start, stop, step):
    return tuple(float(v) for v in np.arange(start, stop + step / 2, step))


@dataclass(frozen=True)
class ChannelSettings:
    """``model="los"`` (default) or ``"multipath"``.

    In multipath mode each user gets ``clusters`` clusters: the first at the
    placed direction, the rest at zenith/azimuth values drawn uniformly from
    the configured angle sets. Visibility masks are Bernoulli(``visibility``).
    """

    model: str = "los"
    clusters: int = 1
    visibility: float = 1.0
    normalization: str = "mean"

    def __post_init__(self):
        if self.model not in ("los", "multipath"):
            raise ConfigError(f"channel.model must be 'los' or 'multipath', got {self.model!r}")
        if int(self.clusters) != self.clusters or self.clusters < 1:
            raise ConfigError("channel.clusters must be a positive integer")
        if not 0 < self.visibility <= 1:
            raise ConfigError("channel.visibility must lie in (0, 1]")
        if self.normalization not in ("mean", "power"):
            raise ConfigError("channel.normalization must be 'mean' or 'power'")


@dataclass(frozen=True)
class ScenarioConfig:
    rows: int = 4
    cols: int = 8
    spacing_m: float = 0.071
    wavelength_m: float = wavelength_from_frequency(2.6e9)
    array_cases: tuple = (
        ("reference", "builtin:reference"),
        ("patch", "builtin:patch"),
        ("dipole", "builtin:dipole"),
    )
    good_thetas: tuple = _deg_range(-35, 35, 5)
    bad_thetas: tuple = _deg_range(-75, -40, 5) + _deg_range(40, 75, 5)
    phis: tuple = _deg_range(88, 92, 1)
    snr_sweep_db: tuple = _deg_range(0, 40, 5)
    trials: int = 10000
    seed: int = 0
    pattern_seed: int = 0
    channel: ChannelSettings = field(default_factory=ChannelSettings)
    base_dir: str = field(default=".", compare=False, repr=False)

    def __post_init__(self):
        try:
            self.geometry
        except ValidationError as exc:
            raise ConfigError(f"geometry: {exc}") from None
        cases = tuple((str(a), str(b)) for a, b in self.array_cases)
        if not cases:
            raise ConfigError("at least one array case is required")
        labels = [c[0] for c in cases]
        if len(set(labels)) != len(labels):
            raise ConfigError("array case labels must be unique")
        object.__setattr__(self, "array_cases", cases)
        for name in ("good_thetas", "bad_thetas", "phis", "snr_sweep_db"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ConfigError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        for name in ("good_thetas", "bad_thetas"):
            if any(abs(t) >= 90 for t in getattr(self, name)):
                raise ConfigError(f"{name} must lie strictly inside (-90, 90) degrees")
        if set(self.good_thetas) & set(self.bad_thetas):
            raise ConfigError("good_thetas and bad_thetas must be disjoint")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if isinstance(self.channel, dict):
            object.__setattr__(self, "channel", _from_mapping(ChannelSettings, self.channel, "channel"))

    @property
    def geometry(self):
        return ArrayGeometry(self.rows, self.cols, self.spacing_m, self.wavelength_m)

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        d["array_cases"] = [{"label": a, "pattern": b} for a, b in self.array_cases]
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data, base_dir="."):
        if not isinstance(data, dict):
            raise ConfigError("config must be an object")
        data = dict(data)
        if "base_dir" in data:
            raise ConfigError("unknown config keys: ['base_dir']")
        geom = data.pop("geometry", None)
        if geom is not None:
            if not isinstance(geom, dict):
                raise ConfigError("geometry must be an object")
            geom = dict(geom)
            if "freq_hz" in geom:
                if "wavelength_m" in geom:
                    raise ConfigError("give either geometry.freq_hz or geometry.wavelength_m, not both")
                try:
                    geom["wavelength_m"] = wavelength_from_frequency(geom.pop("freq_hz"))
                except ValidationError as exc:
                    raise ConfigError(str(exc)) from None
            unknown = set(geom) - {"rows", "cols", "spacing_m", "wavelength_m"}
            if unknown:
                raise ConfigError(f"unknown geometry keys: {sorted(unknown)}")
            data.update(geom)
        if "array_cases" in data:
            cases = []
            for c in data["array_cases"]:
                if isinstance(c, dict):
                    if set(c) != {"label", "pattern"}:
                        raise ConfigError("each array case needs exactly 'label' and 'pattern'")
                    cases.append((c["label"], c["pattern"]))
                else:
                    cases.append(tuple(c))
            data["array_cases"] = tuple(cases)
        if "channel" in data:
            data["channel"] = _from_mapping(ChannelSettings, data["channel"], "channel")
        data["base_dir"] = str(base_dir)
        return _from_mapping(cls, data, "config")


def _from_mapping(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path):
    """Read a JSON scenario document; pattern paths resolve relative to it."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return ScenarioConfig.from_dict(data, base_dir=path.parent)


def resolve_pattern(source, M, seed=0, base_dir="."):
    """Build a pattern from ``builtin:<name>``, ``uniform:<dB>`` or a CSV path."""
    if source.startswith("builtin:"):
        return builtin_pattern(source.split(":", 1)[1], M, seed)
    if source.startswith("uniform:"):
        try:
            level = float(source.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad uniform pattern source {source!r}") from None
        return UniformPattern(M, level)
    path = Path(source)
    if not path.is_absolute():
        path = Path(base_dir) / path
    return load_pattern_table(path, M)


def place_users(config, rng):
    """Draw one good-region and one bad-region direction (radians)."""
    for name in ("good_thetas", "bad_thetas", "phis"):
        if not getattr(config, name):
            raise ConfigError(f"{name} must not be empty")
    good = config.good_thetas[rng.integers(len(config.good_thetas))]
    good_phi = config.phis[rng.integers(len(config.phis))]
    bad = config.bad_thetas[rng.integers(len(config.bad_thetas))]
    bad_phi = config.phis[rng.integers(len(config.phis))]
    return Direction.from_degrees(good, good_phi), Direction.from_degrees(bad, bad_phi)


@dataclass(frozen=True)
class CaseRates:
    """Per-trial rates of one array case, shape ``(trials, n_snr, 2)``.

    User 0 is the good user and user 1 the bad user. ``zf_ok`` flags trials
    whose channel admits ZF; ZF rates of the other trials are NaN.
    """

    mrc: np.ndarray
    zf: np.ndarray
    zf_ok: np.ndarray


def _multipath_trial(config, geom, pattern, rng, good, bad):
    ch = config.channel
    all_thetas = config.good_thetas + config.bad_thetas
    users = []
    for d in (good, bad):
        clusters = [d]
        for _ in range(ch.clusters - 1):
            th = all_thetas[rng.integers(len(all_thetas))]
            ph = config.phis[rng.integers(len(config.phis))]
            clusters.append(Direction.from_degrees(th, ph))
        specs = tuple(
            ClusterSpec(c, random_visibility(geom.num_elements, ch.visibility, rng)) for c in clusters
        )
        users.append(UserSpec(1.0, 1.0, specs))
    return multipath_channel(geom, pattern, users, rng, normalization=ch.normalization)


def _channel_block(config, geom, pattern, start, stop):
    if config.channel.model == "los":
        theta = np.empty((stop - start, 2))
        phi = np.empty((stop - start, 2))
        for row, t in enumerate(range(start, stop)):
            good, bad = place_users(config, substream(config.seed, t))
            theta[row] = good.theta, bad.theta
            phi[row] = good.phi, bad.phi
        return np.swapaxes(los_columns(geom, pattern, theta, phi), -1, -2)
    H = []
    for t in range(start, stop):
        rng = substream(config.seed, t)
        good, bad = place_users(config, rng)
        H.append(_multipath_trial(config, geom, pattern, rng, good, bad))
    return np.stack(H)


def simulate_case(config, pattern, workers=1):
    """Per-trial MRC and ZF rates of both users for one gain pattern.

    Users transmit with equal power ``10**(snr/10)`` and unit large-scale
    fading over unit-variance noise.
    """
    geom = config.geometry
    powers = 10.0 ** (np.asarray(config.snr_sweep_db) / 10.0)

    def run(start):
        stop = min(start + _BLOCK, config.trials)
        H = _channel_block(config, geom, pattern, start, stop)
        mrc = np.stack([np.log2(1 + mrc_sinrs(H, [x, x])) for x in powers], axis=1)
        inv_diag, ok = zf_inverse_diagonal(H)
        zf = np.log2(1 + powers[None, :, None] / inv_diag[:, None, :])
        return mrc, zf, ok

    starts = range(0, config.trials, _BLOCK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return CaseRates(
        mrc=np.concatenate([p[0] for p in parts]),
        zf=np.concatenate([p[1] for p in parts]),
        zf_ok=np.concatenate([p[2] for p in parts]),
    )


@dataclass(frozen=True)
class RateRecord:
    snr_db: float
    array: str
    detector: str
    user_class: str
    mean_rate: float
    std_error: float
    excluded_trials: int

    def csv_row(self):
        return [repr(self.snr_db), self.array, self.detector, self.user_class,
                repr(self.mean_rate), repr(self.std_error), str(self.excluded_trials)]


@dataclass(frozen=True)
class RateCurves:
    records: tuple
    config: ScenarioConfig = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, snr_db, array, detector, user_class):
        for r in self.records:
            if (r.snr_db, r.array, r.detector, r.user_class) == (float(snr_db), array, detector, user_class):
                return r
        raise KeyError((snr_db, array, detector, user_class))


def _is_reference(pattern):
    return isinstance(pattern, UniformPattern)


def run_scenario(config, workers=1):
    """Run every array case of ``config`` and collect mean rates per class.

    A uniform-pattern case reports a single ``reference`` class (per-trial
    average of both users, which coincide for identical elements); other
    cases report ``good`` and ``bad``.
    """
    geom = config.geometry
    results = []
    for label, source in config.array_cases:
        pattern = resolve_pattern(source, geom.num_elements, config.pattern_seed, config.base_dir)
        results.append((label, _is_reference(pattern), simulate_case(config, pattern, workers)))

    records = []
    for s, snr in enumerate(config.snr_sweep_db):
        for label, is_ref, rates in results:
            ok = rates.zf_ok
            for detector, data, mask in (("MRC", rates.mrc, None), ("ZF", rates.zf, ok)):
                per_user = data[:, s, :] if mask is None else data[mask, s, :]
                excluded = 0 if mask is None else int(np.count_nonzero(~mask))
                classes = (("reference", per_user.mean(axis=1)),) if is_ref else (
                    ("good", per_user[:, 0]), ("bad", per_user[:, 1]))
                for cls, samples in classes:
                    mean, se = mean_and_stderr(samples)
                    records.append(RateRecord(float(snr), label, detector, cls,
                                              float(mean), float(se), excluded))
    return RateCurves(tuple(records), config)


def _write_bytes(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}", str(path)) from None


def _csv_bytes(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def emit_results(curves, destination):
    """Write ``results.csv`` and ``manifest.json`` into ``destination``.

    Output bytes depend only on the records and the config.
    """
    out = Path(destination)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out}: {exc.strerror}", str(out)) from None
    csv_path = out / "results.csv"
    _write_bytes(csv_path, _csv_bytes(RESULTS_HEADER, [r.csv_row() for r in curves.records]))
    manifest = {
        "artifact_version": __version__,
        "config": curves.config.to_dict() if curves.config is not None else None,
        "seed": curves.config.seed if curves.config is not None else None,
        "records": len(curves.records),
    }
    manifest_path = out / "manifest.json"
    _write_bytes(manifest_path, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return csv_path, manifest_path


def _fmt(v):
    return repr(float(v))


def gain_stats_report(pattern, destination, geometry, theta_grid_deg=None, phi_grid_deg=None,
                      panel_thetas_deg=(40.0, -40.0), panel_phi_deg=90.0):
    """Write variation, dynamic-range and panel-map CSVs for a pattern.

    Grids default to the table grid for tabulated patterns and to
    -75:5:75 deg zenith by 88:1:92 deg azimuth otherwise.
    """
    if isinstance(pattern, TabulatedPattern):
        theta_default, phi_default = pattern.theta_grid, pattern.phi_grid
    else:
        theta_default, phi_default = np.arange(-75.0, 75.1, 5.0), np.arange(88.0, 92.1, 1.0)
    theta_deg = np.asarray(theta_default if theta_grid_deg is None else theta_grid_deg, dtype=float)
    phi_deg = np.asarray(phi_default if phi_grid_deg is None else phi_grid_deg, dtype=float)
    if theta_deg.size == 0 or phi_deg.size == 0:
        raise ValidationError("theta and phi grids must be non-empty")
    theta, phi = np.deg2rad(theta_deg), np.deg2rad(phi_deg)

    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    var = variation_curve(pattern, theta[:, None], phi[None, :])  # (n_theta, n_phi)
    rows = [[_fmt(t), _fmt(p), _fmt(var[i, j])]
            for i, t in enumerate(theta_deg) for j, p in enumerate(phi_deg)]
    written["variation"] = out / "variation.csv"
    _write_bytes(written["variation"], _csv_bytes(["theta_deg", "phi_deg", "variation_db"], rows))

    prof = dynamic_range_profile(pattern, theta, phi)
    rows = [[_fmt(t), _fmt(mx), _fmt(mn), _fmt(me)]
            for t, mx, mn, me in zip(theta_deg, prof.max_db, prof.min_db, prof.mean_db)]
    written["dynamic_range"] = out / "dynamic_range.csv"
    _write_bytes(written["dynamic_range"], _csv_bytes(["theta_deg", "max_db", "min_db", "mean_db"], rows))

    pos = element_positions(geometry)
    for t in panel_thetas_deg:
        values = panel_map(pattern, Direction.from_degrees(t, panel_phi_deg), geometry)
        rows = [[str(m), _fmt(pos[m, 0]), _fmt(pos[m, 1]), _fmt(values[m])] for m in range(values.size)]
        key = f"panel_map_theta{t:+g}"
        written[key] = out / f"{key}.csv"
        _write_bytes(written[key], _csv_bytes(["element", "x_m", "y_m", "gain_db_norm"], rows))
    return written


def with_overrides(config, **overrides):
    """Copy of ``config`` with the non-None overrides applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
