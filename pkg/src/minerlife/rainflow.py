"""Rainflow cycle counting (ASTM E1049-85, three-point rule).

Strain histories are reduced to turning points and then decomposed into
full cycles and residual half cycles, each characterised by its range
(peak-to-valley magnitude).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IngestionError

__all__ = [
    "StrainSignal",
    "CountedCycle",
    "extract_turning_points",
    "rainflow_count",
    "cycle_counts",
    "count_by_day",
    "read_strain_csv",
]


@dataclass(frozen=True)
class StrainSignal:
    """Time-ordered strain samples (dimensionless)."""

    timestamps: tuple
    strains: np.ndarray

    def __post_init__(self):
        strains = np.asarray(self.strains, dtype=float)
        if strains.ndim != 1 or len(strains) != len(self.timestamps):
            raise ValueError("timestamps and strains must be 1-D and of equal length")
        if not np.all(np.isfinite(strains)):
            raise ValueError("strains must be finite")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise ValueError(f"timestamps must be strictly increasing ({a} >= {b})")
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "strains", strains)

    def __len__(self):
        return len(self.strains)


@dataclass(frozen=True)
class CountedCycle:
    """One counted cycle: ``weight`` is 1.0 for a full cycle, 0.5 for a half."""

    magnitude: float
    weight: float = 1.0


def _values(signal) -> np.ndarray:
    if isinstance(signal, StrainSignal):
        return signal.strains
    return np.asarray(signal, dtype=float).ravel()


def extract_turning_points(signal) -> np.ndarray:
    """Reduce a signal to its alternating sequence of peaks and valleys.

    Endpoints are always kept and plateaus are collapsed, so a constant
    signal reduces to a single value.
    """
    x = _values(signal)
    if x.size == 0:
        raise ValueError("signal is empty")
    keep = np.ones(x.size, dtype=bool)
    keep[1:] = x[1:] != x[:-1]
    x = x[keep]
    if x.size <= 2:
        return x.copy()
    d = np.sign(np.diff(x))
    reversal = d[1:] != d[:-1]
    mask = np.concatenate(([True], reversal, [True]))
    return x[mask]


def rainflow_count(signal, min_magnitude: float = 0.0) -> list[CountedCycle]:
    """Count cycles with the ASTM E1049-85 rainflow rules.

    Ranges left on the stack when the history ends are returned as half
    cycles. Cycles with a magnitude below ``min_magnitude`` are dropped.
    """
    points = extract_turning_points(signal).tolist()
    cycles: list[CountedCycle] = []
    stack: list[float] = []
    for point in points:
        stack.append(point)
        while len(stack) >= 3:
            x = abs(stack[-1] - stack[-2])
            y = abs(stack[-2] - stack[-3])
            if x < y:
                break
            if len(stack) == 3:
                # Y contains the starting point: half cycle, drop the start.
                cycles.append(CountedCycle(y, 0.5))
                del stack[0]
            else:
                cycles.append(CountedCycle(y, 1.0))
                del stack[-3:-1]
    for a, b in zip(stack, stack[1:]):
        cycles.append(CountedCycle(abs(b - a), 0.5))
    if min_magnitude > 0:
        cycles = [c for c in cycles if c.magnitude >= min_magnitude]
    return cycles


def cycle_counts(cycles: Sequence[CountedCycle]) -> dict[float, float]:
    """Aggregate counted cycles into ``{magnitude: total count}``, sorted by magnitude.

    This is the tabular form used by ASTM E1049-85 (two half cycles of
    the same range count as one cycle).
    """
    totals: dict[float, float] = {}
    for c in cycles:
        totals[c.magnitude] = totals.get(c.magnitude, 0.0) + c.weight
    return dict(sorted(totals.items()))


def count_by_day(signal: StrainSignal, min_magnitude: float = 0.0) -> dict[date, list[CountedCycle]]:
    """Rainflow-count each calendar day separately, flushing residues per day."""
    days: dict[date, list[int]] = {}
    for i, ts in enumerate(signal.timestamps):
        day = ts.date() if isinstance(ts, datetime) else ts
        days.setdefault(day, []).append(i)
    return {
        day: rainflow_count(signal.strains[idx], min_magnitude)
        for day, idx in sorted(days.items())
    }


def read_strain_csv(path) -> StrainSignal:
    """Read a ``timestamp,strain`` CSV (ISO-8601 timestamps)."""
    path = Path(path)
    problems: list[tuple[int, str]] = []
    times: list[datetime] = []
    strains: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["timestamp", "strain"]:
            raise IngestionError(path, [(1, "expected header 'timestamp,strain'")])
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                problems.append((lineno, "expected 2 columns"))
                continue
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError:
                problems.append((lineno, f"unparseable timestamp {row[0]!r}"))
                continue
            try:
                value = float(row[1])
            except ValueError:
                problems.append((lineno, f"unparseable strain {row[1]!r}"))
                continue
            if not math.isfinite(value):
                problems.append((lineno, f"non-finite strain {row[1]!r}"))
                continue
            if times and not ts > times[-1]:
                problems.append((lineno, "timestamps must be strictly increasing"))
                continue
            times.append(ts)
            strains.append(value)
    if not problems and not times:
        problems.append((0, "no records"))
    if problems:
        raise IngestionError(path, problems)
    return StrainSignal(tuple(times), np.array(strains))
