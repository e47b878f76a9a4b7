"""Synthetic cycle databases with known equivalent damage.

Days are independent. Each day draws a number of loading cycles shared by
all zones (one physical event loads every zone). Cycle severities follow a
per-zone marginal law; cross-zone dependence comes from a Gaussian common
shock drawn once per day and blended with per-cycle noise by weight ``rho``::

    z = sqrt(rho) * z_day + sqrt(1 - rho) * z_cycle,   S = F^{-1}(Phi(z))

For a lognormal law this is a shared multiplicative factor on severities.
Marginal laws do not depend on ``rho``, so the expected daily damage has a
closed form (or a one-dimensional integral) whatever the correlation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np
from scipy import integrate, special

from .damage import ScenarioConfig
from .dataio import DEFAULT_ROSTER, CycleDatabase
from .sn_curve import SNCurve

__all__ = [
    "ConstantLaw",
    "LognormalLaw",
    "MixtureLaw",
    "SynthSpec",
    "generate",
    "analytic_d_eq",
    "law_from_dict",
]


@dataclass(frozen=True)
class ConstantLaw:
    """Every cycle has the same severity (MPa)."""

    severity: float

    def __post_init__(self):
        if not self.severity >= 0:
            raise ValueError("severity must be >= 0")

    def from_normal(self, z: np.ndarray) -> np.ndarray:
        return np.full(np.shape(z), float(self.severity))

    def expected_damage(self, curve: SNCurve, scale: float = 1.0) -> float:
        return curve.damage_per_cycle(scale * self.severity)

    def to_dict(self):
        return {"kind": "constant", "severity": self.severity}


@dataclass(frozen=True)
class LognormalLaw:
    """``log S`` is normal with mean ``mu`` and standard deviation ``sigma`` (S in MPa)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")

    def from_normal(self, z: np.ndarray) -> np.ndarray:
        return np.exp(self.mu + self.sigma * np.asarray(z))

    def expected_damage(self, curve: SNCurve, scale: float = 1.0) -> float:
        """Mean single-cycle damage, by adaptive quadrature over the normal variable.

        The integrand is split at the knee and cut-off severities, where the
        damage law changes form (and jumps to zero at the cut-off).
        """
        shift = self.mu + math.log(scale)

        def z_of(s):
            return (math.log(s) - shift) / self.sigma

        def integrand(z):
            return curve.damage_per_cycle(math.exp(shift + self.sigma * z)) * math.exp(-0.5 * z * z)

        z_cut, z_knee = z_of(curve.cutoff_severity), z_of(curve.knee_severity)
        low, _ = integrate.quad(integrand, z_cut, z_knee, epsabs=0, epsrel=1e-12, limit=200)
        # The integrand peaks near z = slope_high * sigma; beyond the cap it is negligible.
        z_top = max(z_knee, curve.slope_high * self.sigma) + 40.0
        high, _ = integrate.quad(integrand, z_knee, z_top, epsabs=0, epsrel=1e-12, limit=200)
        return (low + high) / math.sqrt(2.0 * math.pi)

    def to_dict(self):
        return {"kind": "lognormal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class MixtureLaw:
    """Two-point law: severity ``first`` with probability ``weight``, else ``second``."""

    first: float
    second: float
    weight: float = 0.5

    def __post_init__(self):
        if not (self.first >= 0 and self.second >= 0):
            raise ValueError("severities must be >= 0")
        if not 0 <= self.weight <= 1:
            raise ValueError("weight must lie in [0, 1]")

    def from_normal(self, z: np.ndarray) -> np.ndarray:
        u = special.ndtr(np.asarray(z))
        return np.where(u < self.weight, float(self.first), float(self.second))

    def expected_damage(self, curve: SNCurve, scale: float = 1.0) -> float:
        return self.weight * curve.damage_per_cycle(scale * self.first) + (
            1.0 - self.weight
        ) * curve.damage_per_cycle(scale * self.second)

    def to_dict(self):
        return {"kind": "mixture", "first": self.first, "second": self.second, "weight": self.weight}


_LAWS = {"constant": ConstantLaw, "lognormal": LognormalLaw, "mixture": MixtureLaw}


def law_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _LAWS:
        raise ValueError(f"unknown severity law kind {kind!r}; expected one of {sorted(_LAWS)}")
    return _LAWS[kind](**d)


@dataclass(frozen=True)
class SynthSpec:
    """Description of a synthetic monitoring campaign.

    Severity laws are in MPa and are converted to recorded magnitudes with
    ``epsilon = S / (safety_factor * young_modulus)``. ``cycles_per_day`` is
    the mean daily cycle count; with ``cycles_kind='constant'`` it must be
    a whole number.
    """

    n_zones: int
    n_days: int
    laws: tuple
    cycles_per_day: float = 1.0
    cycles_kind: str = "constant"
    rho: float = 0.0
    seed: int = 0
    young_modulus: float = 210.0e3
    safety_factor: float = 1.0
    start_date: date = date(2020, 1, 1)
    zone_names: tuple[str, ...] | None = None

    def __post_init__(self):
        laws = self.laws if isinstance(self.laws, (tuple, list)) else (self.laws,)
        if len(laws) == 1:
            laws = tuple(laws) * self.n_zones
        object.__setattr__(self, "laws", tuple(laws))
        if self.n_zones < 1 or self.n_days < 1:
            raise ValueError("n_zones and n_days must be >= 1")
        if len(self.laws) != self.n_zones:
            raise ValueError(f"{len(self.laws)} severity laws for {self.n_zones} zones")
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")
        if self.cycles_kind not in ("constant", "poisson"):
            raise ValueError("cycles_kind must be 'constant' or 'poisson'")
        if self.cycles_per_day < 0 or (
            self.cycles_kind == "constant" and self.cycles_per_day != int(self.cycles_per_day)
        ):
            raise ValueError("cycles_per_day must be >= 0 (and whole for constant counts)")
        if not (self.young_modulus > 0 and self.safety_factor > 0):
            raise ValueError("young_modulus and safety_factor must be positive")
        if isinstance(self.start_date, str):
            object.__setattr__(self, "start_date", date.fromisoformat(self.start_date))
        if self.zone_names is None:
            names = DEFAULT_ROSTER if self.n_zones == len(DEFAULT_ROSTER) else tuple(
                f"Z{k + 1}" for k in range(self.n_zones)
            )
            object.__setattr__(self, "zone_names", tuple(names))
        elif len(self.zone_names) != self.n_zones:
            raise ValueError("zone_names must have one name per zone")
        else:
            object.__setattr__(self, "zone_names", tuple(self.zone_names))

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        law = d.pop("severity_law", None)
        if law is None:
            law = d.pop("laws")
        laws = [law_from_dict(x) for x in law] if isinstance(law, list) else [law_from_dict(law)]
        cpd = d.pop("cycles_per_day", 1)
        if isinstance(cpd, dict):
            d["cycles_kind"] = cpd.get("kind", "constant")
            cpd = cpd.get("mean", cpd.get("value", 1))
        if "zone_names" in d and d["zone_names"] is not None:
            d["zone_names"] = tuple(d["zone_names"])
        return cls(laws=tuple(laws), cycles_per_day=cpd, **d)

    def to_dict(self) -> dict:
        return {
            "n_zones": self.n_zones,
            "n_days": self.n_days,
            "severity_law": [law.to_dict() for law in self.laws],
            "cycles_per_day": {"kind": self.cycles_kind, "mean": self.cycles_per_day},
            "rho": self.rho,
            "seed": self.seed,
            "young_modulus": self.young_modulus,
            "safety_factor": self.safety_factor,
            "start_date": self.start_date.isoformat(),
            "zone_names": list(self.zone_names),
        }


def generate(spec: SynthSpec) -> CycleDatabase:
    """Draw a cycle database from ``spec``; identical specs give identical databases."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n, k = spec.n_days, spec.n_zones
    if spec.cycles_kind == "poisson":
        counts = rng.poisson(spec.cycles_per_day, n)
    else:
        counts = np.full(n, int(spec.cycles_per_day))
    day_of_cycle = np.repeat(np.arange(n), counts)
    z_day = rng.standard_normal(n)
    z_cycle = rng.standard_normal((day_of_cycle.size, k))
    z = math.sqrt(spec.rho) * z_day[day_of_cycle, None] + math.sqrt(1.0 - spec.rho) * z_cycle
    to_eps = 1.0 / (spec.safety_factor * spec.young_modulus)
    eps = np.empty_like(z)
    for j, law in enumerate(spec.laws):
        eps[:, j] = law.from_normal(z[:, j]) * to_eps
    dates = tuple(spec.start_date + timedelta(days=i) for i in range(n))
    return CycleDatabase(
        spec.zone_names,
        dates,
        np.repeat(day_of_cycle, k),
        np.tile(np.arange(k), day_of_cycle.size),
        eps.reshape(-1),
        np.ones(eps.size),
    )


def analytic_d_eq(spec: SynthSpec, config: ScenarioConfig) -> np.ndarray:
    """Expected daily damage of each zone when ``spec``'s data are analysed with ``config``."""
    config.check_zones(spec.n_zones)
    out = np.empty(spec.n_zones)
    for j, law in enumerate(spec.laws):
        scale = config.strain_factor(j) / (spec.safety_factor * spec.young_modulus)
        out[j] = spec.cycles_per_day * law.expected_damage(config.curve(j), scale)
    return out
