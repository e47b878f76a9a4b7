"""Probabilistic Miner's-rule fatigue reliability.

Turns recorded strain cycles into per-zone and whole-structure survival
curves under a Weibull lifetime model, and compares the structure's
lifetime quantile with the weakest-link minimum of zone lifetimes.
"""
__version__ = "0.1.0"

from .damage import (
    DailyDamageMatrix,
    ScenarioConfig,
    daily_damage,
    days_to_years,
    extrapolated_lifetime,
    miner_ncf,
    severity,
)
from .dataio import (
    DEFAULT_ROSTER,
    CycleDatabase,
    DamageStatistics,
    apply_duplication,
    build_damage_matrix,
    damage_statistics,
    load_database,
    write_database,
)
from .errors import BelowCutoffError, IngestionError
from .rainflow import (
    CountedCycle,
    StrainSignal,
    count_by_day,
    cycle_counts,
    extract_turning_points,
    rainflow_count,
    read_strain_csv,
)
from .reliability import (
    EquivalentDamage,
    SurvivalCurve,
    WeakestLinkReport,
    WeibullModel,
    bootstrap_survival,
    equivalent_damage,
    structure_quantile,
    structure_survival_det,
    structure_survival_mc,
    survival_curve_det,
    survival_curve_mc,
    time_grid,
    weakest_link_report,
    zone_quantile,
    zone_survival_det,
    zone_survival_mc,
)
from .sn_curve import SNCurve
from .synth import ConstantLaw, LognormalLaw, MixtureLaw, SynthSpec, analytic_d_eq, generate

__all__ = [
    "BelowCutoffError",
    "ConstantLaw",
    "CountedCycle",
    "CycleDatabase",
    "DEFAULT_ROSTER",
    "DailyDamageMatrix",
    "DamageStatistics",
    "EquivalentDamage",
    "IngestionError",
    "LognormalLaw",
    "MixtureLaw",
    "SNCurve",
    "ScenarioConfig",
    "StrainSignal",
    "SurvivalCurve",
    "SynthSpec",
    "WeakestLinkReport",
    "WeibullModel",
    "analytic_d_eq",
    "apply_duplication",
    "bootstrap_survival",
    "build_damage_matrix",
    "count_by_day",
    "cycle_counts",
    "daily_damage",
    "damage_statistics",
    "days_to_years",
    "equivalent_damage",
    "extract_turning_points",
    "extrapolated_lifetime",
    "generate",
    "load_database",
    "miner_ncf",
    "rainflow_count",
    "read_strain_csv",
    "severity",
    "structure_quantile",
    "structure_survival_det",
    "structure_survival_mc",
    "survival_curve_det",
    "survival_curve_mc",
    "time_grid",
    "weakest_link_report",
    "write_database",
    "zone_quantile",
    "zone_survival_det",
    "zone_survival_mc",
]
