"""Cycle database ingestion, daily damage matrices and their statistics.

The cycle database is a CSV with one row per recorded loading cycle::

    date,sensor,epsilon[,weight]
    2021-03-01,OS1-Back-Right,1.7e-04

``weight`` is optional (1 for a full cycle, 0.5 for a rainflow half cycle).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .damage import DailyDamageMatrix, ScenarioConfig
from .errors import IngestionError
from .sn_curve import SNCurve

__all__ = [
    "DEFAULT_ROSTER",
    "CycleDatabase",
    "DamageStatistics",
    "load_database",
    "write_database",
    "apply_duplication",
    "build_damage_matrix",
    "damage_statistics",
]

DEFAULT_ROSTER = (
    "OS1-Back-Right",
    "OS2-Front-Right",
    "OS3-Back-Left",
    "OS4-Front-Left",
    "OS5-Support-Right",
    "OS6-Support-Left",
    "OS7-Front-Mid",
    "OS8-Back-Mid",
)


@dataclass(frozen=True)
class CycleDatabase:
    """Recorded cycles, stored column-wise.

    Record ``i`` is a cycle of magnitude ``epsilon[i]`` and weight
    ``weight[i]`` seen by sensor ``roster[sensor_index[i]]`` on day
    ``dates[day_index[i]]``. ``dates`` is the full, sorted day span and may
    contain days without any record.
    """

    roster: tuple[str, ...]
    dates: tuple[date, ...]
    day_index: np.ndarray
    sensor_index: np.ndarray
    epsilon: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        n = len(self.epsilon)
        for name in ("day_index", "sensor_index", "weight"):
            if len(getattr(self, name)) != n:
                raise ValueError("record columns must have equal length")
        if list(self.dates) != sorted(set(self.dates)):
            raise ValueError("dates must be sorted and distinct")
        if len(set(self.roster)) != len(self.roster):
            raise ValueError("roster names must be distinct")
        eps = np.asarray(self.epsilon, dtype=float)
        if np.any(~np.isfinite(eps)) or np.any(eps < 0):
            raise ValueError("epsilon must be finite and non-negative")
        for name, value, dtype in (
            ("day_index", self.day_index, np.int64),
            ("sensor_index", self.sensor_index, np.int64),
            ("epsilon", eps, float),
            ("weight", self.weight, float),
        ):
            arr = np.array(value, dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "roster", tuple(self.roster))
        object.__setattr__(self, "dates", tuple(self.dates))

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_records(self) -> int:
        return len(self.epsilon)

    def records(self) -> Iterator[tuple[date, str, float, float]]:
        for d, s, e, w in zip(
            self.day_index.tolist(), self.sensor_index.tolist(), self.epsilon.tolist(), self.weight.tolist()
        ):
            yield self.dates[d], self.roster[s], e, w

    def sensor_records(self, sensor: str) -> np.ndarray:
        return np.flatnonzero(self.sensor_index == self.roster.index(sensor))


def load_database(
    path,
    roster: Sequence[str] = DEFAULT_ROSTER,
    duplicate: Mapping[str, str] | None = None,
    span: tuple[date, date] | None = None,
) -> CycleDatabase:
    """Read and validate a cycle database CSV.

    Parameters
    ----------
    roster : sequence of str
        Sensor names, in zone order. Rows naming other sensors are errors.
    duplicate : mapping, optional
        ``{destination: source}``: the destination sensor's records are
        replaced by a copy of the source sensor's records (for sensors
        without usable data).
    span : (date, date), optional
        Inclusive first and last day of the monitoring period. Days in the
        span without records count as zero-damage days. Without a span the
        observed dates are used.

    Raises
    ------
    IngestionError
        Listing every offending line.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(path, [(0, "file not found")])
    roster = tuple(roster)
    sensor_pos = {name: i for i, name in enumerate(roster)}
    problems: list[tuple[int, str]] = []
    days: list[date] = []
    sensors: list[int] = []
    eps: list[float] = []
    weights: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:3] != ["date", "sensor", "epsilon"] or len(header) > 4 or (
            len(header) == 4 and header[3] != "weight"
        ):
            raise IngestionError(path, [(1, "expected header 'date,sensor,epsilon[,weight]'")])
        ncol = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != ncol:
                problems.append((lineno, f"expected {ncol} columns, got {len(row)}"))
                continue
            try:
                day = date.fromisoformat(row[0].strip())
            except ValueError:
                problems.append((lineno, f"unparseable date {row[0]!r}"))
                continue
            name = row[1].strip()
            if name not in sensor_pos:
                problems.append((lineno, f"unknown sensor {name!r}"))
                continue
            try:
                value = float(row[2])
                weight = float(row[3]) if ncol == 4 else 1.0
            except ValueError:
                problems.append((lineno, "unparseable number"))
                continue
            if not math.isfinite(value) or value < 0:
                problems.append((lineno, f"epsilon must be finite and >= 0, got {row[2].strip()!r}"))
                continue
            if not math.isfinite(weight) or weight <= 0:
                problems.append((lineno, f"weight must be finite and > 0, got {row[3].strip()!r}"))
                continue
            if span is not None and not span[0] <= day <= span[1]:
                problems.append((lineno, f"date {day} outside declared span {span[0]}..{span[1]}"))
                continue
            days.append(day)
            sensors.append(sensor_pos[name])
            eps.append(value)
            weights.append(weight)
    if not problems and not days:
        problems.append((0, "no records"))
    if problems:
        raise IngestionError(path, problems)

    if span is not None:
        n_span = (span[1] - span[0]).days + 1
        all_days = tuple(span[0] + timedelta(days=i) for i in range(n_span))
    else:
        all_days = tuple(sorted(set(days)))
    pos = {d: i for i, d in enumerate(all_days)}
    db = CycleDatabase(
        roster,
        all_days,
        np.array([pos[d] for d in days]),
        np.array(sensors),
        np.array(eps),
        np.array(weights),
    )
    if duplicate:
        db = apply_duplication(db, duplicate)
    return db


def apply_duplication(db: CycleDatabase, policy: Mapping[str, str]) -> CycleDatabase:
    """Replace each destination sensor's records by a copy of its source's.

    All copies are taken from the records as they stand before the policy
    is applied, so applying the same policy twice is the same as once.
    """
    for dst, src in policy.items():
        for name in (dst, src):
            if name not in db.roster:
                raise ValueError(f"duplication names unknown sensor {name!r}")
        if dst == src:
            raise ValueError(f"sensor {dst!r} cannot be duplicated onto itself")
    if set(policy) & set(policy.values()):
        raise ValueError("a duplication destination cannot also be a source")
    dst_idx = [db.roster.index(d) for d in policy]
    keep = ~np.isin(db.sensor_index, dst_idx)
    parts = [np.flatnonzero(keep)]
    new_sensor = [db.sensor_index[keep]]
    for dst, src in policy.items():
        idx = np.flatnonzero(db.sensor_index == db.roster.index(src))
        parts.append(idx)
        new_sensor.append(np.full(idx.size, db.roster.index(dst)))
    take = np.concatenate(parts)
    return CycleDatabase(
        db.roster,
        db.dates,
        db.day_index[take],
        np.concatenate(new_sensor),
        db.epsilon[take],
        db.weight[take],
    )


def write_database(db: CycleDatabase, path, with_weight: bool | None = None):
    """Write ``db`` in the CSV schema read by :func:`load_database`.

    Records are written ordered by day, then sensor, then input order. A day
    of the span without any record gets one zero-strain row for the first
    roster sensor, so the day survives a reload and keeps damage 0.
    """
    if with_weight is None:
        with_weight = bool(np.any(db.weight != 1.0))
    order = np.lexsort((np.arange(db.n_records), db.sensor_index, db.day_index))
    per_day = np.bincount(db.day_index, minlength=db.n_days)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "sensor", "epsilon", "weight"] if with_weight else ["date", "sensor", "epsilon"])
        cursor = 0
        order = order.tolist()
        for day, label in enumerate(d.isoformat() for d in db.dates):
            if per_day[day] == 0:
                writer.writerow([label, db.roster[0], "0.0"] + (["1.0"] if with_weight else []))
                continue
            for i in order[cursor : cursor + per_day[day]]:
                row = [label, db.roster[db.sensor_index[i]], repr(float(db.epsilon[i]))]
                if with_weight:
                    row.append(repr(float(db.weight[i])))
                writer.writerow(row)
            cursor += per_day[day]


def build_damage_matrix(
    db: CycleDatabase, config: ScenarioConfig, curves: Sequence[SNCurve] | None = None
) -> DailyDamageMatrix:
    """Daily cumulative Miner damage per day (rows, by date) and zone (roster order).

    Group sums are exactly rounded (``math.fsum``), so the matrix does not
    depend on the order of the records.
    """
    n_days, n_zones = db.n_days, len(db.roster)
    if curves is None:
        curves = config.curves(n_zones)
    elif len(curves) != n_zones:
        raise ValueError(f"{len(curves)} curves for {n_zones} zones")
    config.check_zones(n_zones)

    damage = np.zeros(db.n_records)
    for k in range(n_zones):
        sel = db.sensor_index == k
        if np.any(sel):
            s = config.strain_factor(k) * db.epsilon[sel]
            damage[sel] = curves[k].damage_per_cycle(s)
    weighted = db.weight * damage

    matrix = np.zeros((n_days, n_zones))
    cycles = np.zeros((n_days, n_zones))
    hit = damage > 0
    if np.any(hit):
        keys = db.day_index[hit] * n_zones + db.sensor_index[hit]
        vals = weighted[hit]
        np.add.at(cycles.reshape(-1), keys, db.weight[hit])
        order = np.argsort(keys, kind="stable")
        keys, vals = keys[order], vals[order]
        starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
        ends = np.r_[starts[1:], keys.size]
        flat = matrix.reshape(-1)
        single = ends - starts == 1
        flat[keys[starts[single]]] = vals[starts[single]]
        values = vals.tolist()
        for s, e in zip(starts[~single].tolist(), ends[~single].tolist()):
            flat[keys[s]] = math.fsum(values[s:e])
    return DailyDamageMatrix(matrix, db.roster, db.dates, cycles)


@dataclass(frozen=True)
class DamageStatistics:
    """Marginal histograms, zero-damage-day fractions and correlations.

    Percentages are of the number of days. ``histogram_percent[k]`` holds the
    share of days whose damage falls in each bin of ``histogram_edges[k]``
    (days with zero damage are excluded from the bins and counted in
    ``zero_day_percent``). Correlations involving a constant column are NaN
    and flagged in ``correlation_defined``.
    """

    zone_names: tuple[str, ...]
    n_days: int
    zero_day_percent: np.ndarray
    histogram_edges: tuple[np.ndarray, ...]
    histogram_percent: tuple[np.ndarray, ...]
    correlation: np.ndarray
    correlation_defined: np.ndarray

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not math.isfinite(v) else v for v in np.asarray(a, float).tolist()]

        return {
            "unit": "percent of days",
            "n_days": self.n_days,
            "zero_day_fraction": dict(zip(self.zone_names, self.zero_day_percent.tolist())),
            "histograms": {
                name: {
                    "zero_percent": float(z),
                    "bin_edges": edges.tolist(),
                    "percent": pct.tolist(),
                }
                for name, z, edges, pct in zip(
                    self.zone_names, self.zero_day_percent, self.histogram_edges, self.histogram_percent
                )
            },
            "correlation": {
                "zones": list(self.zone_names),
                "matrix": [clean(row) for row in self.correlation],
                "undefined_zones": [
                    n for n, ok in zip(self.zone_names, np.diag(self.correlation_defined)) if not ok
                ],
            },
        }

    def write_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def write_csv_tables(self, histogram_path, correlation_path):
        with Path(histogram_path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["zone", "bin_low", "bin_high", "percent_of_days"])
            for name, z, edges, pct in zip(
                self.zone_names, self.zero_day_percent, self.histogram_edges, self.histogram_percent
            ):
                w.writerow([name, "0", "0", repr(float(z))])
                for lo, hi, p in zip(edges[:-1].tolist(), edges[1:].tolist(), pct.tolist()):
                    w.writerow([name, repr(lo), repr(hi), repr(p)])
        with Path(correlation_path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["zone", *self.zone_names])
            for name, row in zip(self.zone_names, self.correlation.tolist()):
                w.writerow([name, *("" if math.isnan(v) else repr(v) for v in row)])


def _pearson(columns: np.ndarray):
    n, k = columns.shape
    centred = columns - columns.mean(axis=0)
    sq = [math.fsum((centred[:, i] ** 2).tolist()) for i in range(k)]
    defined = np.array([s > 0 for s in sq])
    corr = np.full((k, k), np.nan)
    for i in range(k):
        if not defined[i]:
            continue
        corr[i, i] = 1.0
        for j in range(i + 1, k):
            if not defined[j]:
                continue
            cross = math.fsum((centred[:, i] * centred[:, j]).tolist())
            # sqrt(a*a) == a exactly, so identical columns give exactly 1.
            r = cross / math.sqrt(sq[i] * sq[j])
            corr[i, j] = corr[j, i] = min(1.0, max(-1.0, r))
    return corr, np.outer(defined, defined)


def damage_statistics(matrix: DailyDamageMatrix, bins: int = 30) -> DamageStatistics:
    """Appendix-style statistics of daily damages.

    Non-zero damages are binned into ``bins`` equal-width classes over
    ``(0, max]``; zero-damage days are reported separately.
    """
    d = matrix.damages
    n, k = d.shape
    if n < 2:
        raise ValueError("at least two days are needed for correlations")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    zero_pct = 100.0 * (d == 0).sum(axis=0) / n
    edges_all, pct_all = [], []
    for j in range(k):
        pos = d[d[:, j] > 0, j]
        if pos.size:
            counts, edges = np.histogram(pos, bins=bins, range=(0.0, float(pos.max())))
            pct_all.append(100.0 * counts / n)
            edges_all.append(edges)
        else:
            pct_all.append(np.zeros(0))
            edges_all.append(np.zeros(0))
    corr, defined = _pearson(d)
    return DamageStatistics(
        matrix.zone_names, n, zero_pct, tuple(edges_all), tuple(pct_all), corr, defined
    )
