"""Survival probabilities of zones and of the whole structure.

Each zone's random lifetime is Weibull with modulus ``m_W``, scaled so that
its quantile of order ``p`` is Miner's lifetime. For a cumulative damage
``D`` the survival probability is ``exp(log(1 - p) * D**m_W)``, and the
structure survives while every (independent) zone does.

Two estimators are provided for random loading:

* the deterministic equivalent damage approximation, which replaces the
  cumulative damage after ``t`` days by ``t * D_eq`` (``D_eq`` being the mean
  daily damage), giving closed forms for survival curves and quantiles;
* a bootstrap Monte Carlo estimator, which resamples whole days (all zones
  jointly, so cross-zone correlation within a day is kept) with replacement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .damage import DAYS_PER_YEAR, DailyDamageMatrix, extrapolated_lifetime
from .errors import BelowCutoffError
from .sn_curve import SNCurve

__all__ = [
    "WeibullModel",
    "EquivalentDamage",
    "SurvivalCurve",
    "MonteCarloSurvival",
    "WeakestLinkReport",
    "equivalent_damage",
    "zone_survival_det",
    "structure_survival_det",
    "zone_quantile",
    "structure_quantile",
    "bootstrap_survival",
    "zone_survival_mc",
    "structure_survival_mc",
    "weakest_link_report",
    "time_grid",
    "survival_curve_det",
    "survival_curve_mc",
]


@dataclass(frozen=True)
class WeibullModel:
    """Weibull lifetime law anchored at the S-N reference probability ``p``."""

    p: float = 0.05
    weibull_modulus: float = 1.5

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        if not self.weibull_modulus > 0:
            raise ValueError(f"weibull_modulus must be > 0, got {self.weibull_modulus!r}")

    @property
    def log_reference_survival(self) -> float:
        """``log(1 - p)``, the (negative) log-survival at unit damage."""
        return math.log1p(-self.p)

    def survival_from_damage(self, damage):
        """Survival probability of one zone given its cumulative damage."""
        d = np.asarray(damage, dtype=float)
        return np.exp(self.log_reference_survival * d**self.weibull_modulus)


@dataclass(frozen=True)
class EquivalentDamage:
    """Deterministic equivalent daily damages and severities per zone.

    ``s_eq`` is NaN for zones whose equivalent damage per cycle lies below
    the S-N cut-off (or when no curves were supplied). ``cycles_per_day``
    is the divisor that turned daily damage into damage per cycle before
    inverting the S-N curve (1 when per-cycle counts are unknown).
    """

    d_eq: np.ndarray
    s_eq: np.ndarray
    cycles_per_day: np.ndarray
    zone_names: tuple[str, ...] = ()

    @property
    def below_cutoff(self) -> np.ndarray:
        return np.isnan(self.s_eq)

    @property
    def lifetimes_days(self) -> np.ndarray:
        return np.array([extrapolated_lifetime(d) for d in self.d_eq])


def equivalent_damage(
    matrix: DailyDamageMatrix, curves: Sequence[SNCurve] | None = None
) -> EquivalentDamage:
    """Empirical mean daily damage per zone, with the matching severity.

    When ``curves`` are given, the equivalent severity of zone ``k`` is the
    severity whose single-cycle damage equals ``D_eq / c``, where ``c`` is
    the observed mean number of damaging cycles per day (or 1 if the matrix
    carries no cycle counts).
    """
    n, k = matrix.damages.shape
    d_eq = np.array([math.fsum(matrix.damages[:, j].tolist()) / n for j in range(k)])
    if matrix.damaging_cycles is not None:
        cpd = matrix.damaging_cycles.mean(axis=0)
    else:
        cpd = np.ones(k)
    s_eq = np.full(k, np.nan)
    if curves is not None:
        if len(curves) != k:
            raise ValueError(f"{len(curves)} curves for {k} zones")
        for j, curve in enumerate(curves):
            if d_eq[j] > 0 and cpd[j] > 0:
                try:
                    s_eq[j] = curve.severity_from_damage(d_eq[j] / cpd[j])
                except BelowCutoffError:
                    pass
    return EquivalentDamage(d_eq, s_eq, cpd, matrix.zone_names)


def zone_survival_det(model: WeibullModel, d_eq, t):
    """Zone survival after ``t`` days under the equivalent-damage approximation."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(d_eq, dtype=float)
    if np.any(t < 0) or np.any(d < 0):
        raise ValueError("t and d_eq must be non-negative")
    out = model.survival_from_damage(t * d)
    return float(out) if out.ndim == 0 else out


def structure_survival_det(model: WeibullModel, d_eq, t):
    """Structure survival after ``t`` days: zones combine through ``sum_k (t D_k)**m_W``."""
    d = np.atleast_1d(np.asarray(d_eq, dtype=float))
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(d < 0):
        raise ValueError("t and d_eq must be non-negative")
    cum = t_arr[..., None] * d
    exponent = np.sum(cum**model.weibull_modulus, axis=-1)
    out = np.exp(model.log_reference_survival * exponent)
    return float(out) if out.ndim == 0 else out


def zone_quantile(d_eq: float) -> float:
    """Zone lifetime quantile of order ``p`` in days; equals ``1 / d_eq`` for any ``m_W``."""
    return extrapolated_lifetime(d_eq)


def structure_quantile(model: WeibullModel, d_eq) -> float:
    """Structure lifetime quantile of order ``p`` in days.

    Solves ``sum_k (n D_k)**m_W = 1`` in closed form. Returns ``inf`` if no
    zone accumulates damage.
    """
    d = np.atleast_1d(np.asarray(d_eq, dtype=float))
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise ValueError("d_eq must be non-negative")
    m = model.weibull_modulus
    pos = d[d > 0]
    if pos.size == 0:
        return math.inf
    # Factor out the largest damage to keep the power sum well scaled.
    top = pos.max()
    total = math.fsum(((pos / top) ** m).tolist())
    return 1.0 / (top * total ** (1.0 / m))


@dataclass(frozen=True)
class MonteCarloSurvival:
    """Bootstrap survival estimates at integer day counts ``times``.

    ``zone`` has shape ``(len(times), K)``; the ``*_se`` arrays are the
    standard errors of the Monte Carlo means.
    """

    times: np.ndarray
    zone: np.ndarray
    structure: np.ndarray
    zone_se: np.ndarray
    structure_se: np.ndarray
    n_samples: int
    seed: int


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def _day_counts(rng: np.random.Generator, increments: np.ndarray, n_rows: int) -> np.ndarray:
    """Cumulative number of times each row is drawn, at each requested time.

    Sampling ``t`` day indices uniformly with replacement only matters
    through how often each row is drawn. Short stretches are drawn index
    by index; long ones through the equivalent multinomial law.
    """
    counts = np.zeros((len(increments), n_rows), dtype=np.int64)
    uniform = np.full(n_rows, 1.0 / n_rows)
    running = np.zeros(n_rows, dtype=np.int64)
    for g, inc in enumerate(increments.tolist()):
        if inc:
            if inc <= n_rows:
                running = running + np.bincount(rng.integers(0, n_rows, inc), minlength=n_rows)
            else:
                running = running + rng.multinomial(inc, uniform)
        counts[g] = running
    return counts


def bootstrap_survival(
    model: WeibullModel,
    matrix: DailyDamageMatrix | np.ndarray,
    times,
    n_samples: int = 100,
    seed: int | None = None,
) -> MonteCarloSurvival:
    """Bootstrap Monte Carlo survival of every zone and of the structure.

    For each of ``n_samples`` replicates, a history of daily damage rows is
    drawn uniformly with replacement from the observed rows; zone and
    structure survival use the resulting cumulative damages. One history
    per replicate serves all requested times, so each replicate's curve is
    non-increasing in ``t``. Replicate ``m`` draws from its own stream
    derived from ``(seed, m)``.
    """
    if seed is None:
        raise ValueError("a seed is required for Monte Carlo estimates")
    rows = matrix.damages if isinstance(matrix, DailyDamageMatrix) else np.asarray(matrix, float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("damage matrix must be non-empty and 2-D")
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    t = np.asarray(times)
    t_float = np.atleast_1d(t.astype(float))
    if np.any(t_float < 1) or np.any(t_float != np.floor(t_float)):
        raise ValueError("Monte Carlo times must be integer day counts >= 1")
    unique, inverse = np.unique(t_float.astype(np.int64), return_inverse=True)
    increments = np.diff(unique, prepend=0)

    n_rows, n_zones = rows.shape
    log_ref = model.log_reference_survival
    m_w = model.weibull_modulus
    zone = np.empty((n_samples, len(unique), n_zones))
    struct = np.empty((n_samples, len(unique)))
    for m in range(n_samples):
        counts = _day_counts(_replicate_rng(seed, m), increments, n_rows)
        cum = np.einsum("gn,nk->gk", counts.astype(float), rows)
        expo = log_ref * cum**m_w
        zone[m] = np.exp(expo)
        struct[m] = np.exp(expo.sum(axis=1))

    def mean_se(a):
        mean = a.mean(axis=0)
        se = a.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 else np.zeros_like(mean)
        return mean, se

    zm, zse = mean_se(zone)
    sm, sse = mean_se(struct)
    return MonteCarloSurvival(
        times=unique[inverse].reshape(t_float.shape),
        zone=zm[inverse],
        structure=sm[inverse],
        zone_se=zse[inverse],
        structure_se=sse[inverse],
        n_samples=n_samples,
        seed=seed,
    )


def structure_survival_mc(model, matrix, t: int, n_samples: int = 100, seed: int | None = None) -> float:
    """Bootstrap estimate of the structure survival after ``t`` days."""
    return float(bootstrap_survival(model, matrix, [t], n_samples, seed).structure[0])


def zone_survival_mc(model, matrix, zone, t: int, n_samples: int = 100, seed: int | None = None) -> float:
    """Bootstrap estimate of one zone's survival after ``t`` days.

    Uses the same day draws as :func:`structure_survival_mc` for an equal
    seed, restricted to the zone's column.
    """
    if isinstance(matrix, DailyDamageMatrix):
        col = matrix.column(zone)
    else:
        col = np.asarray(matrix, float)[:, zone]
    return float(bootstrap_survival(model, col[:, None], [t], n_samples, seed).structure[0])


@dataclass(frozen=True)
class WeakestLinkReport:
    """Weakest-link (minimum of zone lifetimes) versus the structure quantile."""

    zone_names: tuple[str, ...]
    zone_lifetimes_days: np.ndarray
    minimal_ncf_days: float
    structure_quantile_days: float
    overestimation_factor: float

    def to_dict(self, scenario: dict | None = None) -> dict:
        def years(v):
            v = float(v) / DAYS_PER_YEAR
            return v if math.isfinite(v) else None

        factor = self.overestimation_factor
        return {
            "unit": "years",
            "zone_lifetimes_years": {
                name: years(v) for name, v in zip(self.zone_names, self.zone_lifetimes_days)
            },
            "minimal_ncf_years": years(self.minimal_ncf_days),
            "structure_quantile_years": years(self.structure_quantile_days),
            "overestimation_factor": factor if math.isfinite(factor) else None,
            "scenario": scenario or {},
        }


def weakest_link_report(
    model: WeibullModel, d_eq, zone_names: Sequence[str] | None = None
) -> WeakestLinkReport:
    """Compare the minimal zone lifetime with the structure lifetime quantile.

    The overestimation factor is ``min_k T_k / N*`` (at least 1). It is NaN
    when no zone accumulates damage, since both lifetimes are then infinite.
    """
    d = np.atleast_1d(np.asarray(d_eq, dtype=float))
    names = tuple(zone_names) if zone_names is not None else tuple(f"zone{k + 1}" for k in range(d.size))
    if len(names) != d.size:
        raise ValueError(f"{len(names)} names for {d.size} zones")
    lifetimes = np.array([extrapolated_lifetime(v) for v in d])
    minimal = float(lifetimes.min())
    quant = structure_quantile(model, d)
    factor = minimal / quant if math.isfinite(quant) else math.nan
    return WeakestLinkReport(names, lifetimes, minimal, quant, factor)


def time_grid(d_eq, n_points: int = 200, upper_factor: float = 10.0, start: float = 1.0) -> np.ndarray:
    """Geometric grid of days from ``start`` to ``upper_factor`` times the longest finite zone lifetime."""
    d = np.atleast_1d(np.asarray(d_eq, dtype=float))
    finite = [extrapolated_lifetime(v) for v in d if v > 0]
    if not finite:
        raise ValueError("no zone accumulates damage; survival stays at 1 for all times")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    stop = max(upper_factor * max(finite), start * 10.0)
    return np.geomspace(start, stop, n_points)


@dataclass(frozen=True)
class SurvivalCurve:
    """Sampled survival curves of each zone and of the structure."""

    times: np.ndarray
    zone_names: tuple[str, ...]
    zone_survival: np.ndarray
    structure_survival: np.ndarray
    method: str
    mc_samples: int | None = None
    seed: int | None = None
    structure_se: np.ndarray | None = field(default=None, compare=False)


def survival_curve_det(model: WeibullModel, eq: EquivalentDamage, times) -> SurvivalCurve:
    t = np.asarray(times, dtype=float)
    zone = zone_survival_det(model, eq.d_eq[None, :], t[:, None])
    struct = structure_survival_det(model, eq.d_eq, t)
    return SurvivalCurve(t, eq.zone_names, np.asarray(zone), np.asarray(struct), "det_eq")


def survival_curve_mc(
    model: WeibullModel, matrix: DailyDamageMatrix, times, n_samples: int = 100, seed: int | None = None
) -> SurvivalCurve:
    """Bootstrap curves; non-integer ``times`` are rounded to whole days (at least 1)."""
    t = np.maximum(np.rint(np.asarray(times, dtype=float)), 1.0)
    mc = bootstrap_survival(model, matrix, t, n_samples, seed)
    return SurvivalCurve(
        t, matrix.zone_names, mc.zone, mc.structure, "monte_carlo", n_samples, seed, mc.structure_se
    )
