"""Miner damage accumulation: severities, daily damages, Miner's NCF.

Cycle magnitudes ``eps`` measured by sensor ``k`` are turned into severities
``S = C_s E eps`` (MPa) and each cycle contributes ``1 / N_p(S)`` to the
cumulative damage of the zone, where ``N_p`` is the zone's S-N curve.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IngestionError
from .sn_curve import SNCurve

__all__ = [
    "EPSILON_INTERPRETATIONS",
    "ScenarioConfig",
    "DailyDamageMatrix",
    "severity",
    "daily_damage",
    "miner_ncf",
    "extrapolated_lifetime",
    "days_to_years",
    "DAYS_PER_YEAR",
]

DAYS_PER_YEAR = 365.0
EPSILON_INTERPRETATIONS = ("range", "amplitude")


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one analysis run.

    ``detail_category``, ``safety_factor`` and ``young_modulus`` may be a
    single value shared by all zones or a tuple with one value per zone.
    ``epsilon_interpretation`` says whether the recorded magnitudes are
    cycle ranges or amplitudes (half ranges); amplitudes are doubled before
    conversion to severity.
    """

    detail_category: float | tuple[float, ...] = 36.0
    safety_factor: float | tuple[float, ...] = 1.0
    young_modulus: float | tuple[float, ...] = 210.0e3
    p: float = 0.05
    weibull_modulus: float = 1.5
    epsilon_interpretation: str = "range"
    n_knee: float = 5.0e6
    n_cutoff: float = 1.0e8

    def __post_init__(self):
        for name in ("detail_category", "safety_factor", "young_modulus"):
            value = getattr(self, name)
            if isinstance(value, (list, np.ndarray)):
                value = tuple(float(v) for v in value)
                object.__setattr__(self, name, value)
            values = value if isinstance(value, tuple) else (value,)
            if not values or not all(v > 0 for v in values):
                raise ValueError(f"{name} must be positive, got {value!r}")
        sf = self.safety_factor
        if not all(v >= 1 for v in (sf if isinstance(sf, tuple) else (sf,))):
            raise ValueError(f"safety_factor must be >= 1, got {sf!r}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        if not self.weibull_modulus > 0:
            raise ValueError(f"weibull_modulus must be > 0, got {self.weibull_modulus!r}")
        if self.epsilon_interpretation not in EPSILON_INTERPRETATIONS:
            raise ValueError(
                f"epsilon_interpretation must be one of {EPSILON_INTERPRETATIONS}, "
                f"got {self.epsilon_interpretation!r}"
            )

    def zone_value(self, name: str, zone: int) -> float:
        value = getattr(self, name)
        if isinstance(value, tuple):
            if zone >= len(value):
                raise ValueError(f"{name} has {len(value)} values, zone index {zone} requested")
            return value[zone]
        return float(value)

    def check_zones(self, n_zones: int):
        for name in ("detail_category", "safety_factor", "young_modulus"):
            value = getattr(self, name)
            if isinstance(value, tuple) and len(value) != n_zones:
                raise ValueError(f"{name} has {len(value)} values for {n_zones} zones")

    def strain_factor(self, zone: int) -> float:
        """MPa of severity per unit recorded magnitude in ``zone``."""
        factor = self.zone_value("safety_factor", zone) * self.zone_value("young_modulus", zone)
        if self.epsilon_interpretation == "amplitude":
            factor *= 2.0
        return factor

    def curve(self, zone: int) -> SNCurve:
        return SNCurve(
            self.zone_value("detail_category", zone),
            n_knee=self.n_knee,
            n_cutoff=self.n_cutoff,
        )

    def curves(self, n_zones: int) -> list[SNCurve]:
        self.check_zones(n_zones)
        return [self.curve(k) for k in range(n_zones)]

    def weibull_model(self):
        from .reliability import WeibullModel

        return WeibullModel(self.p, self.weibull_modulus)

    def label(self) -> dict:
        return {
            "detail_category_MPa": self.detail_category,
            "safety_factor": self.safety_factor,
            "young_modulus_MPa": self.young_modulus,
            "p": self.p,
            "weibull_modulus": self.weibull_modulus,
            "epsilon_interpretation": self.epsilon_interpretation,
        }


def severity(config: ScenarioConfig, zone: int, epsilon):
    """Severity in MPa of cycles of magnitude ``epsilon`` recorded in ``zone``."""
    eps = np.asarray(epsilon, dtype=float)
    if np.any(np.isnan(eps)) or np.any(eps < 0):
        raise ValueError("epsilon must be non-negative")
    s = config.strain_factor(zone) * eps
    return float(s) if np.ndim(epsilon) == 0 else s


def daily_damage(config: ScenarioConfig, curve: SNCurve, cycles: Iterable, zone: int = 0) -> float:
    """Sum of Miner damages of one day's cycles in one zone.

    ``cycles`` holds :class:`~minerlife.rainflow.CountedCycle` objects (or
    anything with ``magnitude`` and ``weight`` attributes); half cycles
    count for half the damage.
    """
    cycles = list(cycles)
    if not cycles:
        return 0.0
    magnitudes = np.array([c.magnitude for c in cycles], dtype=float)
    weights = np.array([c.weight for c in cycles], dtype=float)
    d = curve.damage_per_cycle(severity(config, zone, magnitudes))
    return math.fsum((weights * d).tolist())


def miner_ncf(damages, repeats=None) -> int | None:
    """Miner's number of steps to failure: first ``n`` with cumulative damage >= 1.

    ``damages`` are per-step damages (per cycle or per day). When
    ``repeats`` is given, step ``i`` of ``damages`` is repeated
    ``repeats[i]`` times, which encodes long constant blocks without
    materialising them. Returns ``None`` when the damage never reaches 1
    within the supplied horizon.
    """
    d = np.asarray(damages, dtype=float).ravel()
    if np.any(np.isnan(d)) or np.any(d < 0):
        raise ValueError("damages must be non-negative")
    if repeats is None:
        return _ncf_explicit(d)
    r = np.asarray(repeats).ravel()
    if r.shape != d.shape or np.any(r < 0) or np.any(r != np.floor(r)):
        raise ValueError("repeats must be non-negative integers, one per damage")
    return _ncf_blocks(d, r.astype(np.int64))


def _ncf_explicit(d: np.ndarray) -> int | None:
    if d.size == 0:
        return None
    # Locate the crossing with a float cumsum, then settle it with exactly
    # rounded prefix sums so rounding drift cannot shift the index.
    running = np.cumsum(d)
    hit = np.flatnonzero(running >= 1.0)
    n = int(hit[0]) + 1 if hit.size else d.size
    values = d.tolist()
    while n > 1 and math.fsum(values[: n - 1]) >= 1.0:
        n -= 1
    while n <= d.size and math.fsum(values[:n]) < 1.0:
        n += 1
    return n if n <= d.size else None


def _ncf_blocks(d: np.ndarray, r: np.ndarray) -> int | None:
    partials: list[float] = []
    total = 0.0
    steps = 0
    for di, ri in zip(d.tolist(), r.tolist()):
        if ri == 0:
            continue
        if di > 0 and math.fsum(partials + [ri * di]) >= 1.0:
            # The crossing lies in this block; the estimate is off by at most a few steps.
            j = min(ri, max(1, math.ceil((1.0 - total) / di)))
            while j > 1 and math.fsum(partials + [(j - 1) * di]) >= 1.0:
                j -= 1
            while math.fsum(partials + [j * di]) < 1.0:
                j += 1
            return steps + j
        partials.append(ri * di)
        total = math.fsum(partials)
        steps += ri
    return None


def extrapolated_lifetime(d_eq: float) -> float:
    """Linear-extrapolation lifetime ``1 / d_eq`` in days (``inf`` when ``d_eq`` is 0)."""
    d_eq = float(d_eq)
    if d_eq < 0 or math.isnan(d_eq):
        raise ValueError(f"d_eq must be >= 0, got {d_eq!r}")
    if d_eq == 0:
        return math.inf
    return 1.0 / d_eq


def days_to_years(days):
    return np.asarray(days, dtype=float) / DAYS_PER_YEAR if np.ndim(days) else float(days) / DAYS_PER_YEAR


@dataclass(frozen=True)
class DailyDamageMatrix:
    """Daily cumulative damages, one row per day and one column per zone.

    ``damaging_cycles`` optionally records, per day and zone, the weighted
    number of cycles with non-zero damage; it is used to report equivalent
    severities per cycle.
    """

    damages: np.ndarray
    zone_names: tuple[str, ...]
    dates: tuple[date, ...]
    damaging_cycles: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        d = np.array(self.damages, dtype=float)
        if d.ndim != 2:
            raise ValueError("damages must be a 2-D (days x zones) array")
        n, k = d.shape
        if n < 1 or k < 1:
            raise ValueError("damage matrix needs at least one day and one zone")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("damages must be finite and non-negative")
        if len(self.zone_names) != k:
            raise ValueError(f"{len(self.zone_names)} zone names for {k} columns")
        if len(self.dates) != n:
            raise ValueError(f"{len(self.dates)} dates for {n} rows")
        d.setflags(write=False)
        object.__setattr__(self, "damages", d)
        object.__setattr__(self, "zone_names", tuple(self.zone_names))
        object.__setattr__(self, "dates", tuple(self.dates))
        if self.damaging_cycles is not None:
            c = np.array(self.damaging_cycles, dtype=float)
            if c.shape != d.shape:
                raise ValueError("damaging_cycles must have the same shape as damages")
            c.setflags(write=False)
            object.__setattr__(self, "damaging_cycles", c)

    @property
    def n_days(self) -> int:
        return self.damages.shape[0]

    @property
    def n_zones(self) -> int:
        return self.damages.shape[1]

    def column(self, zone) -> np.ndarray:
        k = self.zone_names.index(zone) if isinstance(zone, str) else int(zone)
        return self.damages[:, k]

    def select(self, zones: Sequence) -> "DailyDamageMatrix":
        idx = [self.zone_names.index(z) if isinstance(z, str) else int(z) for z in zones]
        cycles = None if self.damaging_cycles is None else self.damaging_cycles[:, idx]
        return DailyDamageMatrix(
            self.damages[:, idx], tuple(self.zone_names[i] for i in idx), self.dates, cycles
        )

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", *self.zone_names])
            for day, row in zip(self.dates, self.damages.tolist()):
                writer.writerow([_day_label(day), *(repr(v) for v in row)])

    @classmethod
    def from_csv(cls, path) -> "DailyDamageMatrix":
        path = Path(path)
        problems = []
        rows, dates = [], []
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0].strip() != "date" or len(header) < 2:
                raise IngestionError(path, [(1, "expected header 'date,<zone_1>,...'")])
            names = tuple(h.strip() for h in header[1:])
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    problems.append((lineno, f"expected {len(header)} columns, got {len(row)}"))
                    continue
                try:
                    day = date.fromisoformat(row[0].strip())
                except ValueError:
                    problems.append((lineno, f"unparseable date {row[0]!r}"))
                    continue
                try:
                    values = [float(v) for v in row[1:]]
                except ValueError:
                    problems.append((lineno, "unparseable damage value"))
                    continue
                if not all(math.isfinite(v) and v >= 0 for v in values):
                    problems.append((lineno, "damages must be finite and non-negative"))
                    continue
                dates.append(day)
                rows.append(values)
        if not problems and not rows:
            problems.append((0, "no records"))
        if problems:
            raise IngestionError(path, problems)
        return cls(np.array(rows), names, tuple(dates))


def _day_label(day) -> str:
    return day.isoformat() if hasattr(day, "isoformat") else str(day)
