"""Friis link budgets, computed in dB with a linear-domain cross-check."""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .exceptions import ValidationError
from .geometry import wavelength_from_frequency

__all__ = [
    "PathFactor",
    "free_space_factor",
    "LinkBudget",
    "BudgetRow",
    "friis_received_power",
    "friis_received_power_linear",
    "budget_breakdown",
    "format_breakdown",
]


class PathFactor(NamedTuple):
    linear: float
    db: float


def free_space_factor(distance_m, wavelength_m):
    """Inverse free-space path loss ``(lambda / (4 pi d))^2``, linear and dB."""
    distance_m, wavelength_m = float(distance_m), float(wavelength_m)
    if not (distance_m > 0 and wavelength_m > 0):
        raise ValidationError("distance and wavelength must be positive")
    ratio = wavelength_m / (4 * math.pi * distance_m)
    return PathFactor(ratio * ratio, 20 * math.log10(ratio))


@dataclass(frozen=True)
class LinkBudget:
    """Single-link RF budget.

    ``extra_items`` holds ``(name, dB)`` adjustments such as cable loss or
    receiver gain, applied in declaration order after the path loss.
    """

    tx_power_dbm: float
    tx_gain_dbi: float
    rx_gain_dbi: float
    distance_m: float
    wavelength_m: float
    extra_items: tuple = field(default=())

    def __post_init__(self):
        if not (self.distance_m > 0 and self.wavelength_m > 0):
            raise ValidationError("distance and wavelength must be positive")
        items = tuple((str(n), float(v)) for n, v in self.extra_items)
        object.__setattr__(self, "extra_items", items)

    @classmethod
    def from_frequency(cls, tx_power_dbm, tx_gain_dbi, rx_gain_dbi, distance_m, freq_hz, extra_items=()):
        return cls(tx_power_dbm, tx_gain_dbi, rx_gain_dbi, distance_m,
                   wavelength_from_frequency(freq_hz), tuple(extra_items))


class BudgetRow(NamedTuple):
    name: str
    db: float
    running_total: float


def budget_breakdown(budget):
    """Itemized budget rows with running totals (dBm)."""
    items = [
        ("TX power", budget.tx_power_dbm),
        ("TX antenna gain", budget.tx_gain_dbi),
        ("RX antenna gain", budget.rx_gain_dbi),
        ("Free space path loss", free_space_factor(budget.distance_m, budget.wavelength_m).db),
        *budget.extra_items,
    ]
    rows, total = [], 0.0
    for name, db in items:
        total += db
        rows.append(BudgetRow(name, db, total))
    return rows


def friis_received_power(budget):
    """Received level in dBm."""
    return budget_breakdown(budget)[-1].running_total


def friis_received_power_linear(budget):
    """Same as :func:`friis_received_power`, multiplied out in linear units."""
    p_mw = 10 ** (budget.tx_power_dbm / 10)
    g_t = 10 ** (budget.tx_gain_dbi / 10)
    g_r = 10 ** (budget.rx_gain_dbi / 10)
    r = free_space_factor(budget.distance_m, budget.wavelength_m).linear
    extra = math.prod(10 ** (db / 10) for _, db in budget.extra_items)
    return 10 * math.log10(p_mw * g_t * r * g_r * extra)


def format_breakdown(rows):
    """Aligned text table, closing with the received level."""
    width = max([len(r.name) for r in rows] + [len("Received level")])
    lines = [f"{'Item':<{width}}  {'dB':>9}  {'Total dBm':>10}"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.db:>9.2f}  {r.running_total:>10.2f}")
    lines.append(f"{'Received level':<{width}}  {'':>9}  {rows[-1].running_total:>10.2f}")
    return "\n".join(lines)
