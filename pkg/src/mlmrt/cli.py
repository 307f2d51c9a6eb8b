"""Command line front end.

Subcommands: samplesize, power, coverage, simulate, analyze, tables, serve.
Exit codes: 0 success, 2 invalid config or data, 3 infeasible query,
4 environment failure (such as a port that cannot be bound).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as config_mod
from . import estimator, tables
from .distributions import VARIANTS
from .errors import ConfigError, InsufficientN, MlmrtError, NoSolution, SchemaError
from .simulation import SimulationPlan, estimate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_ENVIRONMENT = 4


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(path, "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from None


def _emit(report: dict, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _run_config_command(args, forced_result: str | None) -> int:
    doc = _load_json(args.config)
    if forced_result is not None:
        doc = dict(doc)
        doc["result"] = forced_result
        ss = getattr(args, "ss", None)
        if ss is not None:
            doc["SS"] = ss
    cfg = config_mod.parse_config(doc)
    report = config_mod.run_query(cfg)
    print(report["message"])
    _emit(report, args.out)
    return EXIT_OK


def cmd_samplesize(args) -> int:
    return _run_config_command(args, config_mod.RESULT_SAMPLE_SIZE)


def cmd_power(args) -> int:
    return _run_config_command(args, config_mod.RESULT_POWER)


def cmd_coverage(args) -> int:
    return _run_config_command(args, config_mod.RESULT_COVERAGE)


def cmd_run(args) -> int:
    """Run the config as-is, honoring its own result choice."""
    return _run_config_command(args, None)


def cmd_simulate(args) -> int:
    doc = _load_json(args.config)
    cfg = config_mod.parse_config(doc)
    n = args.ss if args.ss is not None else cfg.ss
    if n is None:
        report = config_mod.run_query(cfg)
        n = report["result"].get("N")
        if n is None:
            raise ConfigError("SS", "required for simulation when the config does not size")
    plan = SimulationPlan(
        design=cfg.design,
        trend=cfg.trend,
        n=n,
        variant=cfg.variant,
        mode="power" if cfg.method == config_mod.METHOD_POWER else "coverage",
        precision=None if cfg.method == config_mod.METHOD_POWER else cfg.trend,
        q=cfg.q,
        sigma=cfg.sigma,
        rho=cfg.rho,
        sig_level=cfg.sig_level,
        replicates=args.replicates if args.replicates is not None else cfg.replicates,
        seed=args.seed if args.seed is not None else cfg.seed,
    )
    est = estimate(plan)
    metric = "power" if plan.mode == "power" else "coverage probability"
    print(
        f"Empirical {metric} {est.value:.3f} (se {est.se:.3f}) against formulated "
        f"{est.formula_value:.3f} at N = {n} over {est.replicates} replicates."
    )
    report = {
        "config": config_mod.resolved(cfg),
        "plan": {
            "N": n,
            "mode": plan.mode,
            "replicates": plan.replicates,
            "seed": plan.seed,
            "sigma": plan.sigma,
            "rho": plan.rho,
        },
        "empirical": est.value,
        "se": est.se,
        "formula": est.formula_value,
        "discrepancy": est.discrepancy,
        "failures": est.failures,
        "runtime_s": est.runtime_s,
        "engine_version": config_mod.ENGINE_VERSION,
    }
    _emit(report, args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    doc = _load_json(args.config)
    cfg = config_mod.parse_config(doc, require_targets=False)
    dataset = estimator.read_dataset_csv(args.data, cfg.design)
    fit_result = estimator.fit(dataset, cfg.trend, cfg.q)
    tests = []
    for variant in VARIANTS:
        try:
            tests.append(estimator.test(fit_result, variant, cfg.sig_level))
        except InsufficientN:
            continue
    report = estimator.fit_report(fit_result, tests)
    report["config"] = config_mod.resolved(cfg)
    report["engine_version"] = config_mod.ENGINE_VERSION

    chosen = [t for t in tests if t.variant == args.variant]
    if chosen:
        t = chosen[0]
        print(
            f"Fit on {fit_result.n} participants: statistic {t.statistic:.3f}, "
            f"p-value {t.p_value:.4f} under {t.variant!r}."
        )
    for eff in fit_result.level_effects:
        idx = eff.level - 1
        print(
            f"  level {eff.level}: average effect {eff.average:.4g} "
            f"(se {eff.se_average:.4g}), standardized {fit_result.standardized_average[idx]:.4g}"
        )

    if args.size_followup:
        follow_doc = dict(_load_json(args.size_followup))
        follow_doc["beta_mean"] = list(fit_result.standardized_average)
        if follow_doc.get("beta_shape", "constant") != "constant":
            follow_doc["beta_initial"] = list(fit_result.standardized_initial)
        follow_doc["result"] = config_mod.RESULT_SAMPLE_SIZE
        follow_cfg = config_mod.parse_config(follow_doc)
        follow_report = config_mod.run_query(follow_cfg)
        print(follow_report["message"])
        report["followup"] = follow_report
    _emit(report, args.out)
    return EXIT_OK


def cmd_tables(args) -> int:
    if args.table not in tables.TABLES:
        raise ConfigError("table", f"unknown table {args.table!r}; choose from {sorted(tables.TABLES)}")
    rows = tables.compute_table(
        args.table, mc=args.mc, replicates=args.replicates, seed=args.seed
    )
    text = tables.table_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"Wrote {len(rows)} rows to {args.out}.")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=args.static)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"Failed to serve on {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlmrt",
        description="Sample size, power and analysis for multi-level micro-randomized trials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name, fn, help_text, with_ss=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config path, or - for stdin")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if with_ss:
            p.add_argument("--ss", type=int, help="sample size to evaluate (overrides SS)")
        p.set_defaults(fn=fn)
        return p

    add_config_command("samplesize", cmd_samplesize, "minimal N for the configured target")
    add_config_command("power", cmd_power, "power at a given sample size", with_ss=True)
    add_config_command("coverage", cmd_coverage, "coverage probability at a given sample size",
                       with_ss=True)
    add_config_command("run", cmd_run, "run the config using its own result choice")

    p = sub.add_parser("simulate", help="Monte Carlo check of the configured query")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--ss", type=int, help="sample size to simulate (default: solve it first)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="fit the working model to a trial CSV")
    p.add_argument("data", help="long-format CSV (participant,day,occasion,available,level,outcome)")
    p.add_argument("--config", required=True, help="design config JSON (prob or control_prob, beta_shape, q)")
    p.add_argument("--variant", default="chi", choices=list(VARIANTS))
    p.add_argument("--size-followup", help="config JSON for a follow-up study sized from the estimates")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("tables", help="reproduce a published benchmark table as CSV")
    p.add_argument("table", help="table id: 1, 2, 3, 4, C5, C6, C7 or C8")
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("serve", help="run the HTTP service (and UI, if built)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of built UI assets to serve at /")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, SchemaError) as exc:
        print(f"Config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoSolution, InsufficientN) as exc:
        print(f"Infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except MlmrtError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
