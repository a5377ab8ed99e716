"""Command-line front end.

Subcommands: fit, calibrate, simulate, select, compare, explore, report.
Every run writes a manifest (seed, n, config digest, tool version, timings)
into the output directory.  Exit codes: 0 success, 2 usage error,
3 validation error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .budget import derive_stage2_limits
from .designs import (
    RECORDED_RECEIVER_RATES,
    RECORDED_SELECTION_RATES,
    ConfigError,
    builtin_designs,
    dataset_to_config,
    parse_config_file,
)
from .explorer import (
    SweepConstraints,
    default_grid,
    explore_to_csv,
    filter_feasible,
    pick_best_per_current,
    surrogate_performance,
    sweep,
)
from .montecarlo import generate_population, population_to_csv, summarize, violation_rates
from .report import (
    ReportBundle,
    RunManifest,
    compare,
    config_digest,
    render_tables,
    render_text,
    summarize_baseline,
    write_json,
    _bundle_json,
)
from .selection import apply_strategy, selection_to_csv, strategy_from_name
from .statmodel import (
    CalibrationTarget,
    FreeParameter,
    calibrate,
    fit_sigma_two_tails,
)

__all__ = ["build_parser", "main"]

_DEFAULT_SEED = 12345
_DEFAULT_N = 100_000


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lnayield",
        description="Statistical yield analysis for traditional and programmable LNAs",
    )
    parser.add_argument("--version", action="version", version=f"lnayield {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON config file (defaults to the bundled dataset)")
    common.add_argument("--seed", type=int, default=_DEFAULT_SEED,
                        help="base random seed (default %(default)s)")
    common.add_argument("--n", type=int, default=_DEFAULT_N,
                        help="population size (default %(default)s)")
    common.add_argument("--out-dir", type=Path, default=Path("out"),
                        help="output directory (default ./out)")
    common.add_argument("--format", choices=("csv", "json", "text"), default="text",
                        help="stdout rendering of the results (default text)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common],
                       help="refit marginals from the recorded characterization data")
    p.add_argument("--design", default=None, help="restrict to one design name")

    p = sub.add_parser("calibrate", parents=[common],
                       help="tune free model parameters against recorded rates")
    p.add_argument("--design", default="paper-plna")
    p.add_argument("--target-set", choices=("receiver-rates", "selection-rates"),
                   default=None,
                   help="defaults to selection-rates for the PLNA, receiver-rates otherwise")
    p.add_argument("--n-eval", type=int, default=20_000)
    p.add_argument("--sweeps", type=int, default=3)

    p = sub.add_parser("simulate", parents=[common],
                       help="generate populations and summary statistics")
    p.add_argument("--design", default=None, help="restrict to one design name")
    p.add_argument("--emit-population", action="store_true",
                   help="also dump per-die CSVs (large)")

    p = sub.add_parser("select", parents=[common],
                       help="apply a mode-selection strategy to the PLNA")
    p.add_argument("--strategy", default="best-receiver",
                   help="best-gain, best-receiver or fixed-{hg,mg-lp,lg}")
    p.add_argument("--emit-outcomes", action="store_true",
                   help="also dump the per-die outcome CSV")

    p = sub.add_parser("compare", parents=[common],
                       help="compliance/power deltas of the PLNA vs fixed designs")
    p.add_argument("--strategies", default="best-gain,best-receiver",
                   help="comma-separated strategy list")
    p.add_argument("--baselines", default=None,
                   help="comma-separated design names or currents (default: all)")

    p = sub.add_parser("explore", parents=[common],
                       help="design-space sweep over the surrogate model")
    p.add_argument("--currents", default=None, help="comma-separated currents (mA)")
    p.add_argument("--widths", default=None, help="comma-separated widths (um)")

    sub.add_parser("report", parents=[common],
                   help="full pipeline: simulate, select, compare, render")
    return parser


def _load_dataset(args):
    if args.config is not None:
        return parse_config_file(args.config)
    return builtin_designs()


def _resolve_baselines(dataset, spec: str | None):
    if spec is None:
        return list(dataset.traditional)
    chosen = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        name = token
        try:
            name = f"paper-{float(token):.1f}mA"
        except ValueError:
            pass
        match = [d for d in dataset.traditional if d.name in (name, token)]
        if not match:
            raise ConfigError(f"unknown baseline {token!r}; traditional designs: "
                              f"{[d.name for d in dataset.traditional]}")
        chosen.append(match[0])
    return chosen


def _emit(args, bundle: ReportBundle):
    if args.format == "text":
        sys.stdout.write(render_text(bundle))
    elif args.format == "json":
        json.dump(_bundle_json(bundle), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    # csv: artifacts on disk are the deliverable; keep stdout quiet


class _Timer:
    def __init__(self):
        self.timings = {}

    def time(self, label):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()
                return self

            def __exit__(self, *exc):
                timer.timings[label] = timer.timings.get(label, 0.0) \
                    + time.perf_counter() - self.t0
                return False

        return _Ctx()


def _write_manifest(args, dataset, timer: _Timer):
    manifest = RunManifest(
        command=args.command,
        seed=args.seed,
        n=args.n,
        config_digest=config_digest(dataset_to_config(dataset)),
        tool_version=__version__,
        timings_s=timer.timings,
    )
    manifest.write(args.out_dir / "manifest.json")


def _cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    timer = _Timer()
    rows = []
    with timer.time("fit"):
        for design in dataset.all_designs():
            if args.design and design.name != args.design:
                continue
            model = design.model
            stats = design.recorded_stats
            for i, mode in enumerate(model.modes):
                mode_stats = stats if model.mode_count == 1 else stats.get(mode, {})
                for j, param in enumerate(
                        ("gain_db", "nf_db", "iip3_dbm", "s11_db", "s22_db")):
                    row = {
                        "design": design.name, "mode": mode, "parameter": param,
                        "mean": float(model.means[i, j]),
                        "sigma": float(model.sigmas[i, j]),
                    }
                    if param == "gain_db" and "p_below_min" in mode_stats.get(param, {}):
                        g = mode_stats[param]
                        fit = fit_sigma_two_tails(
                            g["mean"],
                            dataset.lna_spec.gain_min_db, g["p_below_min"],
                            dataset.lna_spec.gain_max_db, g["p_above_max"],
                        )
                        row.update(sigma_low_tail=fit.sigma_low,
                                   sigma_high_tail=fit.sigma_high,
                                   gaussianity_spread=fit.relative_spread)
                    rows.append(row)
    if args.design and not rows:
        raise ConfigError(f"unknown design {args.design!r}")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_json(args.out_dir / "fit.json",
               {"schema_version": 1, "marginals": rows})
    from .report import atomic_writer
    import csv as _csv
    keys = ["design", "mode", "parameter", "mean", "sigma",
            "sigma_low_tail", "sigma_high_tail", "gaussianity_spread"]
    with atomic_writer(args.out_dir / "fit.csv") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(keys)
        for row in rows:
            writer.writerow([row.get(k, "") if not isinstance(row.get(k), float)
                             else f"{row[k]:.6g}" for k in keys])
    _write_manifest(args, dataset, timer)
    if args.format != "csv":
        sys.stdout.write(f"fitted {len(rows)} marginals -> {args.out_dir}\n")
    return 0


def _calibration_setup(args, dataset, design):
    """Target set, free parameters and the deterministic evaluate function."""
    limits = derive_stage2_limits(dataset.lna_spec, dataset.receiver_targets)
    targets_cfg = dataset.receiver_targets
    target_set = args.target_set
    if target_set is None:
        target_set = "selection-rates" if design is dataset.plna else "receiver-rates"

    if target_set == "receiver-rates":
        if design is dataset.plna:
            raise ConfigError("receiver-rates targets apply to traditional designs")
        recorded = RECORDED_RECEIVER_RATES[design.name]
        targets = [CalibrationTarget(k, v) for k, v in recorded.items()]
        free = [FreeParameter.coupling("gain_linearity")]

        def evaluate(model):
            pop = generate_population(design, args.n_eval, args.seed, model=model)
            base = summarize_baseline(design, pop, limits, targets_cfg)
            return {"both": base.compliance_fraction,
                    "nf_fail": base.nf_fail_fraction,
                    "iip3_fail": base.iip3_fail_fraction}

        return targets, free, evaluate

    if design is not dataset.plna:
        raise ConfigError("selection-rates targets apply to the PLNA design")
    targets = [
        CalibrationTarget(f"{strategy}.{stat}", value)
        for strategy, stats in RECORDED_SELECTION_RATES.items()
        for stat, value in stats.items()
    ]
    free = [
        FreeParameter.coupling("gain"),
        FreeParameter.coupling("linearity"),
        FreeParameter.coupling("gain_linearity"),
    ]

    def evaluate(model):
        pop = generate_population(design, args.n_eval, args.seed, model=model)
        out = {}
        for strategy in RECORDED_SELECTION_RATES:
            rep = apply_strategy(pop, strategy_from_name(strategy), limits,
                                 targets_cfg, design)
            out[f"{strategy}.both"] = rep.compliance_fraction
            out[f"{strategy}.nf_fail"] = rep.nf_fail_fraction
            out[f"{strategy}.iip3_fail"] = rep.iip3_fail_fraction
        return out

    return targets, free, evaluate


def _cmd_calibrate(args) -> int:
    dataset = _load_dataset(args)
    design = dataset.design(args.design)
    timer = _Timer()
    targets, free, evaluate = _calibration_setup(args, dataset, design)
    with timer.time("calibrate"):
        result = calibrate(design.model, targets, evaluate, free,
                           sweeps=args.sweeps)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    from .designs import _model_to_config
    write_json(args.out_dir / "calibrated_model.json", {
        "schema_version": 1,
        "design": design.name,
        "model": _model_to_config(result.model),
        "sse_before": result.sse_before,
        "sse_after": result.sse_after,
        "residuals": result.residuals,
        "evaluations": result.evaluations,
        "message": result.message,
    })
    _write_manifest(args, dataset, timer)
    if args.format != "csv":
        sys.stdout.write(
            f"calibration {result.message}: sse {result.sse_before:.3e} -> "
            f"{result.sse_after:.3e} in {result.evaluations} evaluations\n"
        )
        for name, residual in result.residuals.items():
            sys.stdout.write(f"  residual {name}: {residual:+.4f}\n")
    return 0


def _cmd_simulate(args) -> int:
    dataset = _load_dataset(args)
    timer = _Timer()
    bundle = ReportBundle()
    designs = [d for d in dataset.all_designs()
               if not args.design or d.name == args.design]
    if not designs:
        raise ConfigError(f"unknown design {args.design!r}")
    for design in designs:
        with timer.time(f"simulate.{design.name}"):
            pop = generate_population(design, args.n, args.seed)
            bundle.summaries[design.name] = summarize(pop)
            bundle.violations[design.name] = violation_rates(pop, dataset.lna_spec)
            if args.emit_population:
                population_to_csv(pop, args.out_dir / f"population_{design.name}.csv")
    with timer.time("render"):
        render_tables(bundle, args.out_dir)
        from .figures import render_figures
        render_figures(bundle, args.out_dir)
    _write_manifest(args, dataset, timer)
    _emit(args, bundle)
    return 0


def _cmd_select(args) -> int:
    dataset = _load_dataset(args)
    strategy = strategy_from_name(args.strategy)
    limits = derive_stage2_limits(dataset.lna_spec, dataset.receiver_targets)
    timer = _Timer()
    bundle = ReportBundle()
    with timer.time("simulate"):
        pop = generate_population(dataset.plna, args.n, args.seed)
    with timer.time("select"):
        rep = apply_strategy(pop, strategy, limits, dataset.receiver_targets,
                             dataset.plna)
        bundle.selections[rep.strategy] = rep
    with timer.time("render"):
        render_tables(bundle, args.out_dir)
        if args.emit_outcomes:
            selection_to_csv(rep, args.out_dir / f"outcomes_{rep.strategy}.csv")
        from .figures import render_figures
        render_figures(bundle, args.out_dir)
    _write_manifest(args, dataset, timer)
    _emit(args, bundle)
    return 0


def _cmd_compare(args) -> int:
    dataset = _load_dataset(args)
    limits = derive_stage2_limits(dataset.lna_spec, dataset.receiver_targets)
    baselines = _resolve_baselines(dataset, args.baselines)
    strategies = [strategy_from_name(s) for s in args.strategies.split(",") if s.strip()]
    timer = _Timer()
    bundle = ReportBundle()
    with timer.time("baselines"):
        summaries = []
        for design in baselines:
            pop = generate_population(design, args.n, args.seed)
            base = summarize_baseline(design, pop, limits, dataset.receiver_targets)
            summaries.append(base)
            bundle.receiver[design.name] = base
    with timer.time("select"):
        plna_pop = generate_population(dataset.plna, args.n, args.seed)
        for strategy in strategies:
            rep = apply_strategy(plna_pop, strategy, limits,
                                 dataset.receiver_targets, dataset.plna)
            bundle.selections[rep.strategy] = rep
            bundle.comparisons[rep.strategy] = compare(rep, summaries)
    with timer.time("render"):
        render_tables(bundle, args.out_dir)
        from .figures import render_figures
        render_figures(bundle, args.out_dir)
    _write_manifest(args, dataset, timer)
    _emit(args, bundle)
    return 0


def _cmd_explore(args) -> int:
    dataset = _load_dataset(args)
    currents, widths = default_grid()
    constraints = SweepConstraints()
    if dataset.explorer is not None:
        # config-provided grid/constraints; CLI flags still win below
        if dataset.explorer.currents_ma:
            currents = list(dataset.explorer.currents_ma)
        if dataset.explorer.widths_um:
            widths = list(dataset.explorer.widths_um)
        constraints = dataset.explorer.constraints
    if args.currents:
        currents = [float(t) for t in args.currents.split(",") if t.strip()]
    if args.widths:
        widths = [float(t) for t in args.widths.split(",") if t.strip()]
    timer = _Timer()
    with timer.time("explore"):
        points = sweep(currents, widths, surrogate_performance)
        feasible = filter_feasible(points, constraints)
        selected = pick_best_per_current(feasible)
        explore_to_csv(points, feasible, selected, args.out_dir / "sweep.csv")
        from .figures import explore_figure
        explore_figure(points, selected, constraints, args.out_dir / "explore.png")
    _write_manifest(args, dataset, timer)
    if args.format != "csv":
        sys.stdout.write(f"swept {len(points)} points, {len(feasible)} feasible, "
                         f"selected {len(selected)} designs -> {args.out_dir}\n")
        for current, point in selected.items():
            sys.stdout.write(f"  {current:g} mA -> w1 {point.w1_um:g} um, "
                             f"IIP3 {point.rf.iip3_dbm:+.2f} dBm\n")
    return 0


def _cmd_report(args) -> int:
    dataset = _load_dataset(args)
    limits = derive_stage2_limits(dataset.lna_spec, dataset.receiver_targets)
    timer = _Timer()
    bundle = ReportBundle()
    summaries = []
    for design in dataset.all_designs():
        with timer.time(f"simulate.{design.name}"):
            pop = generate_population(design, args.n, args.seed)
            bundle.summaries[design.name] = summarize(pop)
            bundle.violations[design.name] = violation_rates(pop, dataset.lna_spec)
            if design is dataset.plna:
                plna_pop = pop
            else:
                base = summarize_baseline(design, pop, limits,
                                          dataset.receiver_targets)
                summaries.append(base)
                bundle.receiver[design.name] = base
    with timer.time("select"):
        for name in ("best-gain", "best-receiver"):
            rep = apply_strategy(plna_pop, strategy_from_name(name), limits,
                                 dataset.receiver_targets, dataset.plna)
            bundle.selections[rep.strategy] = rep
            bundle.comparisons[rep.strategy] = compare(rep, summaries)
    with timer.time("render"):
        render_tables(bundle, args.out_dir)
        from .figures import render_figures
        render_figures(bundle, args.out_dir)
    _write_manifest(args, dataset, timer)
    _emit(args, bundle)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "calibrate": _cmd_calibrate,
    "simulate": _cmd_simulate,
    "select": _cmd_select,
    "compare": _cmd_compare,
    "explore": _cmd_explore,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"lnayield.designs.ConfigError: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # surfaced, never swallowed
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
