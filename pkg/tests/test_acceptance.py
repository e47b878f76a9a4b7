"""Acceptance criteria, one group of tests per criterion.

Each test carries ``@pytest.mark.criterion(n)``; the conftest prints a
PASS/FAIL line per criterion at the end of the session.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minerlife import (
    ConstantLaw,
    LognormalLaw,
    MixtureLaw,
    ScenarioConfig,
    SNCurve,
    SynthSpec,
    WeibullModel,
    analytic_d_eq,
    apply_duplication,
    bootstrap_survival,
    build_damage_matrix,
    cycle_counts,
    damage_statistics,
    equivalent_damage,
    extract_turning_points,
    generate,
    miner_ncf,
    rainflow_count,
    structure_quantile,
    structure_survival_det,
    weakest_link_report,
    zone_survival_det,
)

from conftest import make_matrix
from golden_pipeline import GOLDEN_DIR, OUTPUTS, run_pipeline

FIXTURES = Path(__file__).parent / "fixtures"


def criterion(n, title=""):
    return pytest.mark.criterion(n, title=title)


# ---------------------------------------------------------------------------
# 1. S-N anchor and slopes


@criterion(1, "S-N anchor and slopes")
@pytest.mark.parametrize("dc", [36.0, 56.0, 80.0, 160.0])
def test_c01_anchor_and_slopes(dc):
    start = time.perf_counter()
    curve = SNCurve(dc)
    assert curve.cycles_to_failure(dc) == pytest.approx(2e6, rel=1e-12)
    knee, cut = curve.knee_severity, curve.cutoff_severity

    def slope(s, h=1e-4):
        lo, hi = s * math.exp(-h), s * math.exp(h)
        return (math.log(curve.cycles_to_failure(hi)) - math.log(curve.cycles_to_failure(lo))) / (2 * h)

    for s in (1.2 * knee, 2.0 * knee, 5.0 * knee):
        assert slope(s) == pytest.approx(-3.0, abs=1e-9)
    for s in (1.05 * cut, math.sqrt(cut * knee), 0.95 * knee):
        assert slope(s) == pytest.approx(-5.0, abs=1e-9)
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 2. constant-amplitude consistency


@criterion(2, "constant-amplitude Miner consistency")
def test_c02_constant_amplitude():
    start = time.perf_counter()
    curve = SNCurve(36.0)
    rng = np.random.default_rng(2)
    knee, cut = curve.knee_severity, curve.cutoff_severity
    severities = np.r_[rng.uniform(cut * 1.0001, knee, 10), rng.uniform(knee, 250.0, 10)]
    for s in severities:
        n = float(curve.cycles_to_failure(s))
        d = float(curve.damage_per_cycle(s))
        expected = math.ceil(n)
        assert miner_ncf([d], repeats=[2 * expected]) == expected
        if expected <= 3_000_000:
            assert miner_ncf(np.full(expected + 10, d)) == expected
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 3. Weibull quantile identity


@criterion(3, "Weibull quantile identity")
def test_c03_quantile_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    for _ in range(1000):
        p, m_w = rng.uniform(1e-4, 0.5), rng.uniform(0.5, 5.0)
        model = WeibullModel(p, m_w)
        d = 10 ** rng.uniform(-9, -1)
        assert zone_survival_det(model, d, 1.0 / d) == pytest.approx(1 - p, abs=1e-12)
        k = rng.integers(1, 12)
        dv = 10 ** rng.uniform(-9, -1, k) * (rng.random(k) < 0.8)
        dv[rng.integers(k)] = 10 ** rng.uniform(-9, -1)
        assert structure_survival_det(model, dv, structure_quantile(model, dv)) == pytest.approx(1 - p, abs=1e-12)
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 4. factorization


@criterion(4, "structure survival factorizes over zones")
def test_c04_factorization():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    for _ in range(1000):
        model = WeibullModel(rng.uniform(1e-3, 0.5), rng.uniform(0.5, 5.0))
        k = rng.integers(1, 13)
        d = 10 ** rng.uniform(-8, -2, k) * (rng.random(k) < 0.8)
        t = 10 ** rng.uniform(0, 5)
        product = math.prod(zone_survival_det(model, dk, t) for dk in d)
        assert structure_survival_det(model, d, t) == pytest.approx(product, rel=1e-12, abs=1e-300)
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 5. weakest-link overestimation


@criterion(5, "weakest-link overestimation bound")
def test_c05_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        model = WeibullModel(rng.uniform(1e-3, 0.5), rng.uniform(1.0, 3.0))
        k = rng.integers(1, 13)
        d = 10 ** rng.uniform(-7, -3, k) * (rng.random(k) < 0.7)
        if not d.any():
            d[0] = 1e-5
        q = structure_quantile(model, d)
        min_life = 1.0 / d.max()
        assert q <= min_life
        if np.count_nonzero(d) == 1:
            assert q == pytest.approx(min_life, rel=1e-12)
        else:
            assert q < min_life
    assert time.perf_counter() - start < 5.0


@criterion(5, "weakest-link overestimation bound")
def test_c05_identical_zones_ratio():
    rep = weakest_link_report(WeibullModel(0.05, 1.5), np.full(8, 3.7e-5))
    assert rep.overestimation_factor == pytest.approx(4.0, rel=1e-9)
    assert rep.minimal_ncf_days / rep.structure_quantile_days == pytest.approx(8 ** (2 / 3), rel=1e-9)


# ---------------------------------------------------------------------------
# 6. Monte Carlo vs closed form


@pytest.fixture(scope="module")
def lognormal_matrix():
    spec = SynthSpec(n_zones=8, n_days=912, laws=LognormalLaw(3.3, 0.45), cycles_per_day=20,
                     cycles_kind="poisson", rho=0.5, seed=606)
    return build_damage_matrix(generate(spec), ScenarioConfig(safety_factor=3.0))


def _mid_survival_times(model, d_eq, n=25):
    total = math.fsum(d_eq ** model.weibull_modulus)
    t_of = lambda s: (math.log(s) / (model.log_reference_survival * total)) ** (1 / model.weibull_modulus)  # noqa: E731
    lo, hi = math.ceil(t_of(0.9)), math.floor(t_of(0.1))
    return np.unique(np.rint(np.geomspace(lo, hi, n)).astype(np.int64))


@criterion(6, "Monte Carlo agrees with closed form")
@pytest.mark.parametrize("n_samples, tol", [(1000, 0.02), (100, 0.05)])
def test_c06_mc_vs_det(lognormal_matrix, n_samples, tol):
    start = time.perf_counter()
    model = WeibullModel(0.05, 1.5)
    d_eq = equivalent_damage(lognormal_matrix).d_eq
    times = _mid_survival_times(model, d_eq)
    det = structure_survival_det(model, d_eq, times)
    assert det.min() >= 0.1 and det.max() <= 0.9
    mc = bootstrap_survival(model, lognormal_matrix, times, n_samples=n_samples, seed=60)
    assert np.max(np.abs(mc.structure - det)) <= tol
    assert time.perf_counter() - start < 60.0


# ---------------------------------------------------------------------------
# 7. bootstrap determinism


@criterion(7, "bootstrap determinism")
def test_c07_determinism(lognormal_matrix):
    start = time.perf_counter()
    model = WeibullModel(0.05, 1.5)
    times = _mid_survival_times(model, equivalent_damage(lognormal_matrix).d_eq, 12)
    a = bootstrap_survival(model, lognormal_matrix, times, n_samples=200, seed=71)
    b = bootstrap_survival(model, lognormal_matrix, times, n_samples=200, seed=71)
    for field in ("times", "zone", "structure", "zone_se", "structure_se"):
        assert np.array_equal(getattr(a, field), getattr(b, field))
    c = bootstrap_survival(model, lognormal_matrix, times, n_samples=200, seed=72)
    assert not np.array_equal(a.structure, c.structure)
    se = np.sqrt(a.structure_se**2 + c.structure_se**2)
    assert np.all(se > 0)
    assert np.all(np.abs(a.structure - c.structure) <= 3 * se)
    zse = np.sqrt(a.zone_se**2 + c.zone_se**2)
    assert np.all(np.abs(a.zone - c.zone) <= 3 * zse)
    assert time.perf_counter() - start < 10.0


# ---------------------------------------------------------------------------
# 8. rainflow oracle


@criterion(8, "rainflow oracle and properties")
def test_c08_astm_example():
    fixture = json.loads((FIXTURES / "astm_e1049_rainflow.json").read_text())
    cycles = rainflow_count(np.array(fixture["turning_points"], dtype=float))
    got = sorted((c.magnitude, c.weight) for c in cycles)
    expected = sorted((float(c["range"]), c["weight"]) for c in fixture["cycles"])
    assert got == expected
    assert cycle_counts(cycles) == {float(k): v for k, v in fixture["counts"].items()}


@criterion(8, "rainflow oracle and properties")
def test_c08_random_signals():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    for _ in range(1000):
        n = rng.integers(2, 300)
        signal = np.round(np.cumsum(rng.normal(size=n)), rng.integers(0, 4))
        tp = extract_turning_points(signal)
        cycles = rainflow_count(signal)
        assert math.fsum(c.weight for c in cycles) == (len(tp) - 1) / 2
        if len(tp) > 1:
            assert max(c.magnitude for c in cycles) == signal.max() - signal.min()
        else:
            assert cycles == []
    assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------------------
# 9. synthetic ground truth

LAWS = {
    "constant": (ConstantLaw(50.0), 3.0, "poisson"),
    "mixture": (MixtureLaw(60.0, 20.0, 0.4), 2.0, "poisson"),
    "lognormal": (LognormalLaw(3.4, 0.5), 4.0, "poisson"),
}


@criterion(9, "synthetic ground truth")
@pytest.mark.parametrize("n_days", [1_000, 100_000])
@pytest.mark.parametrize("law", sorted(LAWS))
def test_c09_empirical_vs_analytic(law, n_days):
    start = time.perf_counter()
    laws, cycles, kind = LAWS[law]
    spec = SynthSpec(n_zones=2, n_days=n_days, laws=laws, cycles_per_day=cycles, cycles_kind=kind,
                     rho=0.5, seed=900 + n_days)
    config = ScenarioConfig()
    matrix = build_damage_matrix(generate(spec), config)
    empirical = equivalent_damage(matrix).d_eq
    truth = analytic_d_eq(spec, config)
    sd = matrix.damages.std(axis=0, ddof=1)
    assert np.all(sd > 0)
    assert np.all(np.abs(empirical - truth) <= 3 * sd / math.sqrt(n_days))
    assert time.perf_counter() - start < 30.0


@criterion(9, "synthetic ground truth")
@pytest.mark.parametrize("n_days", [1_000, 100_000])
def test_c09_degenerate_constant(n_days):
    # Zero spread: the CLT bound collapses to zero, so only rounding remains.
    spec = SynthSpec(n_zones=2, n_days=n_days, laws=ConstantLaw(50.0), cycles_per_day=3)
    config = ScenarioConfig()
    empirical = equivalent_damage(build_damage_matrix(generate(spec), config)).d_eq
    np.testing.assert_allclose(empirical, analytic_d_eq(spec, config), rtol=1e-12)


# ---------------------------------------------------------------------------
# 10. daily-damage statistics


@criterion(10, "daily-damage statistics")
def test_c10_duplicated_pair():
    spec = SynthSpec(n_zones=8, n_days=400, laws=LognormalLaw(3.3, 0.45), cycles_per_day=5,
                     cycles_kind="poisson", rho=0.3, seed=10)
    db = generate(spec)
    dup = apply_duplication(db, {db.roster[1]: db.roster[0]})
    stats = damage_statistics(build_damage_matrix(dup, ScenarioConfig(safety_factor=3.0)))
    assert stats.correlation[0, 1] == 1.0 and stats.correlation[1, 0] == 1.0


@criterion(10, "daily-damage statistics")
def test_c10_zero_day_fraction():
    rng = np.random.default_rng(10)
    col = rng.exponential(1e-6, 1000)
    col[rng.permutation(1000)[:840]] = 0.0
    stats = damage_statistics(make_matrix(np.c_[col, rng.exponential(1e-6, 1000)]))
    assert stats.zero_day_percent[0] == pytest.approx(84.0, abs=1e-12)


@criterion(10, "daily-damage statistics")
@settings(max_examples=200, deadline=None)
@given(st.integers(2, 60), st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 0.9))
def test_c10_correlation_shape(n, k, seed, zero_share):
    rng = np.random.default_rng(seed)
    rows = rng.lognormal(-12, 1.5, (n, k)) * (rng.random((n, k)) >= zero_share)
    stats = damage_statistics(make_matrix(rows))
    corr = stats.correlation
    assert np.array_equal(corr, corr.T, equal_nan=True)
    defined = stats.correlation_defined.diagonal()
    assert np.all(corr.diagonal()[defined] == 1.0)
    assert np.all(np.isnan(corr.diagonal()[~defined]))
    assert np.all(np.abs(corr[~np.isnan(corr)]) <= 1.0)


# ---------------------------------------------------------------------------
# 11. end-to-end CLI golden files


@criterion(11, "end-to-end CLI golden files")
def test_c11_golden_pipeline(tmp_path):
    start = time.perf_counter()
    outputs = run_pipeline(tmp_path)
    for name in OUTPUTS:
        assert outputs[name].read_bytes() == (GOLDEN_DIR / name).read_bytes(), name
    report = json.loads(outputs["report.json"].read_text())
    grid = [(s["scenario"]["detail_category_MPa"], s["scenario"]["safety_factor"]) for s in report["scenarios"]]
    assert sorted(grid) == sorted((dc, cs) for dc in (36.0, 80.0) for cs in (1.0, 3.0))
    table = outputs["report.csv"].read_text().splitlines()
    assert table[0].startswith("unit,years")
    assert [row.split(",")[0] for row in table[-3:]] == ["Minimal NCF", "Lifetime quantile", "Overestimation factor"]
    assert time.perf_counter() - start < 60.0
