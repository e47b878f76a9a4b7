"""Command-line front end.

Subcommands::

    minerlife simulate --spec spec.json --out cycles.csv
    minerlife damage   --db cycles.csv --out damage.csv
    minerlife survival --db cycles.csv --out survival.csv --method both --seed 1
    minerlife report   --db cycles.csv --out report.json
    minerlife stats    --db cycles.csv --out stats.json
    minerlife rainflow --signal strain.csv --sensor OS1-Back-Right --out cycles.csv

Every option may also come from a JSON or TOML file given with
``--config``; options on the command line take precedence. Failures exit
with a non-zero status and a JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .damage import DAYS_PER_YEAR, DailyDamageMatrix, ScenarioConfig
from .dataio import DEFAULT_ROSTER, CycleDatabase, build_damage_matrix, damage_statistics, load_database, write_database
from .errors import IngestionError
from .rainflow import count_by_day, read_strain_csv
from .reliability import (
    equivalent_damage,
    structure_quantile,
    survival_curve_det,
    survival_curve_mc,
    time_grid,
    weakest_link_report,
)
from .synth import SynthSpec, generate

# Report column order: most conservative first.
DEFAULT_SCENARIOS = ((36.0, 3.0), (80.0, 3.0), (36.0, 1.0), (80.0, 1.0))

DEFAULTS = {
    "detail_category": 36.0,
    "safety_factor": 1.0,
    "young_modulus": 210.0e3,
    "p": 0.05,
    "weibull_modulus": 1.5,
    "epsilon_interpretation": "range",
    "method": "det-eq",
    "mc_samples": 100,
    "seed": None,
    "grid_points": 200,
    "grid_max_factor": 10.0,
    "bins": 30,
    "min_magnitude": 0.0,
    "scenarios": None,
    "roster": None,
    "duplicate": None,
    "span": None,
}

METHODS = ("det-eq", "mc", "both")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, status: int, details=None):
    payload = {"error": kind, "message": message}
    if details is not None:
        payload["details"] = details
    sys.stderr.write(json.dumps(payload) + "\n")
    return status


# ----------------------------------------------------------------------------
# option handling


def _per_zone(value):
    """Parse ``36`` or ``36,36,80`` (one value per zone)."""
    if value is None or isinstance(value, (int, float)):
        return value
    if isinstance(value, (list, tuple)):
        vals = tuple(float(v) for v in value)
    else:
        vals = tuple(float(v) for v in str(value).split(","))
    return vals[0] if len(vals) == 1 else vals


def _parse_scenarios(value):
    if value is None:
        return DEFAULT_SCENARIOS
    if isinstance(value, (list, tuple)) and value and isinstance(value[0], (list, tuple)):
        pairs = [(float(a), float(b)) for a, b in value]
    else:
        items = value if isinstance(value, (list, tuple)) else str(value).split(",")
        pairs = []
        for item in items:
            try:
                dc, cs = str(item).split(":")
                pairs.append((float(dc), float(cs)))
            except ValueError:
                raise UsageError(f"bad scenario {item!r}; expected DETAIL_CATEGORY:SAFETY_FACTOR") from None
    if not pairs:
        raise UsageError("scenario grid is empty")
    return tuple(pairs)


def _parse_duplicate(value) -> dict:
    if not value:
        return {}
    if isinstance(value, dict):
        return dict(value)
    out = {}
    for item in value:
        if "=" not in item:
            raise UsageError(f"bad --duplicate {item!r}; expected DEST=SOURCE")
        dst, src = item.split("=", 1)
        out[dst.strip()] = src.strip()
    return out


def _parse_span(value):
    if not value:
        return None
    if isinstance(value, (list, tuple)):
        start, end = value
    else:
        start, _, end = str(value).partition(":")
    try:
        return date.fromisoformat(str(start)), date.fromisoformat(str(end))
    except ValueError:
        raise UsageError(f"bad --span {value!r}; expected YYYY-MM-DD:YYYY-MM-DD") from None


def _load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return {k.replace("-", "_"): v for k, v in data.items()}


def _options(args) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(_load_config(args.config))
    explicit = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config", "func")}
    opts.update(explicit)
    return opts


def _scenario(opts, detail_category=None, safety_factor=None) -> ScenarioConfig:
    return ScenarioConfig(
        detail_category=_per_zone(detail_category if detail_category is not None else opts["detail_category"]),
        safety_factor=_per_zone(safety_factor if safety_factor is not None else opts["safety_factor"]),
        young_modulus=_per_zone(opts["young_modulus"]),
        p=float(opts["p"]),
        weibull_modulus=float(opts["weibull_modulus"]),
        epsilon_interpretation=opts["epsilon_interpretation"],
    )


def _require(opts, *names):
    for name in names:
        if not opts.get(name):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _database(opts) -> CycleDatabase:
    _require(opts, "db")
    roster = opts["roster"]
    if isinstance(roster, str):
        roster = [r.strip() for r in roster.split(",")]
    return load_database(
        opts["db"],
        roster=tuple(roster) if roster else DEFAULT_ROSTER,
        duplicate=_parse_duplicate(opts["duplicate"]),
        span=_parse_span(opts["span"]),
    )


def _matrix(opts, config: ScenarioConfig) -> DailyDamageMatrix:
    if opts.get("matrix"):
        return DailyDamageMatrix.from_csv(opts["matrix"])
    return build_damage_matrix(_database(opts), config)


def _finite(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _sibling(out, suffix) -> Path:
    out = Path(out)
    return out.with_name(out.stem + suffix)


# ----------------------------------------------------------------------------
# commands


def cmd_simulate(opts):
    _require(opts, "spec", "out")
    spec_data = _load_config(opts["spec"])
    if opts.get("seed") is not None:
        spec_data["seed"] = int(opts["seed"])
    spec = SynthSpec.from_dict(spec_data)
    db = generate(spec)
    write_database(db, opts["out"])
    print(json.dumps({"out": str(opts["out"]), "n_days": db.n_days, "n_records": db.n_records}))


def cmd_damage(opts):
    _require(opts, "db", "out")
    config = _scenario(opts)
    matrix = build_damage_matrix(_database(opts), config)
    matrix.to_csv(opts["out"])
    eq = equivalent_damage(matrix, config.curves(matrix.n_zones))
    summary = {
        "out": str(opts["out"]),
        "n_days": matrix.n_days,
        "d_eq_unit": "damage per day",
        "d_eq": dict(zip(matrix.zone_names, eq.d_eq.tolist())),
        "lifetime_unit": "days",
        "lifetime_days": {n: _finite(v) for n, v in zip(matrix.zone_names, eq.lifetimes_days)},
    }
    print(json.dumps(summary))


def cmd_survival(opts):
    _require(opts, "out")
    method = opts["method"]
    if method not in METHODS:
        raise UsageError(f"invalid method {method!r}; choose from {', '.join(METHODS)}")
    if method != "det-eq" and opts["seed"] is None:
        raise UsageError("--seed is required for Monte Carlo survival")
    config = _scenario(opts)
    model = config.weibull_model()
    matrix = _matrix(opts, config)
    eq = equivalent_damage(matrix)
    times = time_grid(eq.d_eq, int(opts["grid_points"]), float(opts["grid_max_factor"]))
    if method != "det-eq":
        times = np.maximum(np.rint(times), 1.0)

    columns = {"t_days": times}
    det = mc = None
    if method in ("det-eq", "both"):
        det = survival_curve_det(model, eq, times)
        for j, name in enumerate(matrix.zone_names):
            columns[f"zone_{name}"] = det.zone_survival[:, j]
        columns["structure"] = det.structure_survival
    if method in ("mc", "both"):
        mc = survival_curve_mc(model, matrix, times, int(opts["mc_samples"]), int(opts["seed"]))
        suffix = "_mc" if method == "both" else ""
        for j, name in enumerate(matrix.zone_names):
            columns[f"zone_{name}{suffix}"] = mc.zone_survival[:, j]
        columns[f"structure{suffix}"] = mc.structure_survival

    with Path(opts["out"]).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns))
        for row in zip(*(np.asarray(c).tolist() for c in columns.values())):
            w.writerow([repr(float(v)) for v in row])

    markers = {
        "unit": "days",
        "p": config.p,
        "weibull_modulus": config.weibull_modulus,
        "method": method,
        "zone_quantiles_days": {n: _finite(v) for n, v in zip(matrix.zone_names, eq.lifetimes_days)},
        "structure_quantile_days": _finite(structure_quantile(model, eq.d_eq)),
    }
    if mc is not None:
        markers["mc_samples"] = mc.mc_samples
        markers["seed"] = mc.seed
    if det is not None and mc is not None:
        markers["max_abs_gap_structure"] = float(np.max(np.abs(det.structure_survival - mc.structure_survival)))
    qpath = Path(opts["quantiles_out"]) if opts.get("quantiles_out") else _sibling(opts["out"], "_quantiles.json")
    _write_json(qpath, markers)
    print(json.dumps({"out": str(opts["out"]), "quantiles": str(qpath), "rows": len(times)}))


def format_2sig(value: float) -> str:
    """Two significant figures, plain below 1e5 and scientific above."""
    if value is None or not math.isfinite(value):
        return "inf"
    if value == 0:
        return "0"
    rounded = float(f"{value:.2g}")
    if 1e-3 <= abs(rounded) < 1e5:
        return f"{rounded:g}" if abs(rounded) < 1e4 else str(int(rounded))
    return f"{rounded:.1e}"


def cmd_report(opts):
    _require(opts, "db", "out")
    scenarios = _parse_scenarios(opts["scenarios"])
    db = _database(opts)
    results = []
    for dc, cs in scenarios:
        config = _scenario(opts, detail_category=dc, safety_factor=cs)
        matrix = build_damage_matrix(db, config)
        eq = equivalent_damage(matrix)
        rep = weakest_link_report(config.weibull_model(), eq.d_eq, matrix.zone_names)
        results.append((config, rep))

    payload = {
        "unit": "years",
        "days_per_year": DAYS_PER_YEAR,
        "scenarios": [rep.to_dict(config.label()) for config, rep in results],
    }
    _write_json(opts["out"], payload)

    table = Path(opts["table_out"]) if opts.get("table_out") else Path(opts["out"]).with_suffix(".csv")
    names = results[0][1].zone_names
    with table.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit", "years"] + [""] * (len(results) - 1))
        w.writerow(["detail_category_MPa"] + [f"{dc:g}" for dc, _ in scenarios])
        w.writerow(["safety_factor"] + [f"{cs:g}" for _, cs in scenarios])
        for j, name in enumerate(names):
            w.writerow([name] + [format_2sig(rep.zone_lifetimes_days[j] / DAYS_PER_YEAR) for _, rep in results])
        w.writerow(["Minimal NCF"] + [format_2sig(rep.minimal_ncf_days / DAYS_PER_YEAR) for _, rep in results])
        w.writerow(
            ["Lifetime quantile"] + [format_2sig(rep.structure_quantile_days / DAYS_PER_YEAR) for _, rep in results]
        )
        w.writerow(["Overestimation factor"] + [format_2sig(rep.overestimation_factor) for _, rep in results])
    print(json.dumps({"out": str(opts["out"]), "table": str(table), "scenarios": len(results)}))


def cmd_stats(opts):
    _require(opts, "out")
    config = _scenario(opts)
    matrix = _matrix(opts, config)
    stats = damage_statistics(matrix, int(opts["bins"]))
    stats.write_json(opts["out"])
    hist = _sibling(opts["out"], "_histograms.csv")
    corr = _sibling(opts["out"], "_correlation.csv")
    stats.write_csv_tables(hist, corr)
    print(json.dumps({"out": str(opts["out"]), "histograms": str(hist), "correlation": str(corr)}))


def cmd_rainflow(opts):
    _require(opts, "signal", "sensor", "out")
    signal = read_strain_csv(opts["signal"])
    per_day = count_by_day(signal, float(opts["min_magnitude"]))
    dates = tuple(per_day)
    day_idx, mags, weights = [], [], []
    for i, cycles in enumerate(per_day.values()):
        for c in cycles:
            day_idx.append(i)
            mags.append(c.magnitude)
            weights.append(c.weight)
    db = CycleDatabase(
        (opts["sensor"],), dates, np.array(day_idx, dtype=np.int64), np.zeros(len(mags), dtype=np.int64),
        np.array(mags, dtype=float), np.array(weights, dtype=float),
    )
    write_database(db, opts["out"], with_weight=True)
    print(json.dumps({"out": str(opts["out"]), "days": len(dates), "cycles": len(mags),
                      "total_weight": float(sum(weights))}))


# ----------------------------------------------------------------------------
# parser


def _add_scenario(p):
    g = p.add_argument_group("scenario")
    g.add_argument("--detail-category", help="detail category in MPa (one value, or one per zone, comma separated)")
    g.add_argument("--safety-factor", help="safety factor C_s >= 1 (one value or one per zone)")
    g.add_argument("--young-modulus", help="Young modulus in MPa (one value or one per zone)")
    g.add_argument("--p", type=float, help="reference failure probability of the S-N curve")
    g.add_argument("--weibull-modulus", type=float, help="Weibull modulus m_W")
    g.add_argument("--epsilon-interpretation", choices=("range", "amplitude"))


def _add_db(p, required=True):
    g = p.add_argument_group("cycle database")
    g.add_argument("--db", help="cycle database CSV (date,sensor,epsilon[,weight])")
    g.add_argument("--roster", help="comma-separated sensor names in zone order")
    g.add_argument("--duplicate", action="append", metavar="DEST=SOURCE",
                   help="copy SOURCE's records onto sensor DEST (repeatable)")
    g.add_argument("--span", metavar="START:END", help="declared monitoring period (inclusive ISO dates)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minerlife", description="Fatigue survival curves and lifetime quantiles from strain-cycle data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON or TOML file supplying any option")
        p.add_argument("--out", help="output file")
        p.set_defaults(func=func)
        return p

    p = command("simulate", cmd_simulate, "generate a synthetic cycle database")
    p.add_argument("--spec", help="synthetic spec (JSON or TOML)")
    p.add_argument("--seed", type=int)

    p = command("damage", cmd_damage, "daily damage matrix from a cycle database")
    _add_db(p)
    _add_scenario(p)

    p = command("survival", cmd_survival, "survival curves of zones and structure")
    _add_db(p)
    p.add_argument("--matrix", help="daily damage matrix CSV (instead of --db)")
    _add_scenario(p)
    p.add_argument("--method", help="det-eq, mc or both")
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--grid-max-factor", type=float)
    p.add_argument("--quantiles-out", help="quantile markers JSON (default: <out>_quantiles.json)")

    p = command("report", cmd_report, "weakest-link vs structure quantile lifetimes per scenario")
    _add_db(p)
    _add_scenario(p)
    p.add_argument("--scenarios", help="DC:CS pairs, e.g. 36:3,80:3,36:1,80:1")
    p.add_argument("--table-out", help="human-readable table CSV (default: <out>.csv)")

    p = command("stats", cmd_stats, "histograms and correlations of daily damages")
    _add_db(p)
    p.add_argument("--matrix", help="daily damage matrix CSV (instead of --db)")
    _add_scenario(p)
    p.add_argument("--bins", type=int)

    p = command("rainflow", cmd_rainflow, "rainflow-count a raw strain signal into a cycle database")
    p.add_argument("--signal", help="strain CSV (timestamp,strain)")
    p.add_argument("--sensor", help="sensor name for the emitted records")
    p.add_argument("--min-magnitude", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a subcommand is required")
        opts = _options(args)
        args.func(opts)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except IngestionError as exc:
        return _fail("ingestion", str(exc), 1, exc.to_dict())
    except FileNotFoundError as exc:
        return _fail("file_not_found", str(exc), 1)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
