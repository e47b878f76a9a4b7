"""Eurocode 3 (EN 1993-1-9) S-N curve at a reference failure probability.

The curve maps a cycle severity (stress range, MPa) to the number of cycles
at which a proportion ``p`` of specimens has failed. In log-log coordinates
it is piecewise linear: slope -1/3 down to the knee (constant-amplitude
fatigue limit), slope -1/5 down to the cut-off limit, and flat (infinite
life) below the cut-off.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BelowCutoffError

__all__ = ["SNCurve", "BelowCutoffError"]


@dataclass(frozen=True)
class SNCurve:
    """Two-slope S-N curve labelled by its detail category.

    Parameters
    ----------
    detail_category : float
        Severity (MPa) at which the curve passes through ``n_ref`` cycles.
    n_ref : float
        Reference cycle count of the detail category, 2e6 in Eurocode 3.
    n_knee : float
        Cycle count at the slope change (constant-amplitude fatigue limit).
    n_cutoff : float
        Cycle count at the cut-off limit; severities below it cause no damage.
    slope_high, slope_low : float
        Inverse log-log slopes above and below the knee.
    """

    detail_category: float
    n_ref: float = 2.0e6
    n_knee: float = 5.0e6
    n_cutoff: float = 1.0e8
    slope_high: float = 3.0
    slope_low: float = 5.0

    def __post_init__(self):
        if not self.detail_category > 0:
            raise ValueError(f"detail_category must be > 0, got {self.detail_category!r}")
        if not 0 < self.n_ref < self.n_knee < self.n_cutoff:
            raise ValueError("cycle counts must satisfy 0 < n_ref < n_knee < n_cutoff")
        if not (self.slope_high > 0 and self.slope_low > 0):
            raise ValueError("slopes must be positive")

    @property
    def knee_severity(self) -> float:
        """Severity at the slope change, in MPa."""
        return self.detail_category * (self.n_ref / self.n_knee) ** (1.0 / self.slope_high)

    @property
    def cutoff_severity(self) -> float:
        """Severity below which cycles cause no damage, in MPa."""
        return self.knee_severity * (self.n_knee / self.n_cutoff) ** (1.0 / self.slope_low)

    def cycles_to_failure(self, severity):
        """Number of cycles to failure at reference probability.

        Returns ``inf`` below the cut-off severity. Accepts a scalar or an
        array; scalars come back as ``float``.
        """
        s = _as_severity(severity)
        knee = self.knee_severity
        cutoff = self.cutoff_severity
        with np.errstate(divide="ignore", over="ignore"):
            high = self.n_ref * (self.detail_category / s) ** self.slope_high
            low = self.n_knee * (knee / s) ** self.slope_low
        n = np.where(s >= knee, high, np.where(s >= cutoff, low, np.inf))
        return _unwrap(n, severity)

    def damage_per_cycle(self, severity):
        """Miner damage of one cycle, ``1 / cycles_to_failure`` (0 below cut-off)."""
        n = np.asarray(self.cycles_to_failure(severity), dtype=float)
        return _unwrap(1.0 / n, severity)

    def severity_from_damage(self, damage: float) -> float:
        """Severity whose single-cycle damage equals ``damage``.

        Raises
        ------
        ValueError
            If ``damage`` is not strictly positive.
        BelowCutoffError
            If ``damage`` is smaller than the damage of a cycle at the
            cut-off severity, so no finite severity on the curve matches.
        """
        damage = float(damage)
        if not damage > 0:
            raise ValueError(f"damage must be > 0, got {damage!r}")
        floor = 1.0 / self.n_cutoff
        if damage < floor * (1.0 - 1e-12):
            raise BelowCutoffError(
                f"damage {damage:.6g} is below the cut-off level {floor:.6g}: "
                "no finite equivalent severity"
            )
        if damage >= 1.0 / self.n_knee:
            return self.detail_category * (self.n_ref * damage) ** (1.0 / self.slope_high)
        s = self.knee_severity * (self.n_knee * damage) ** (1.0 / self.slope_low)
        return max(s, self.cutoff_severity)


def _as_severity(severity):
    s = np.asarray(severity, dtype=float)
    if np.any(np.isnan(s)) or np.any(s < 0):
        raise ValueError("severity must be a non-negative number")
    return s


def _unwrap(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values
