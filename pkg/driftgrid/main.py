#!/usr/bin/env python3
"""
driftgrid - selective classification under temporal drift

Subcommands:
- score: attach a confidence or uncertainty score to a prediction stream
- rc-curve: risk-coverage curve, AURC and AUROC of one score
- simulate: month-by-month rejection with a monthly quota
- evaluate: every (stream, score, rho) combination into one metrics table
- pareto: non-dominated methods from a per-dataset pillar table
- sample: label-budget selection
- presets: list built-in run presets
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from rich.markup import escape

from .config import RunConfig, apply_overrides, get_preset, load_config, print_presets
from .console import console, setup_logging
from .errors import ConfigError, DriftGridError, InvariantViolation
from .evaluation import build_registry, evaluate, load_scorer_inputs, load_streams, write_run
from .pareto import pareto_from_table, read_pillar_table
from .plots import render_rc_svg, render_temporal_svg
from .reliability import stream_auroc, stream_rc_curve
from .report import render_f1_risk_curve, render_trace, simulation_summary, write_text
from .sampling import (
    DEFAULT_FOLDS,
    contiguous_fold_assignment,
    select_uncertain,
    stratified_fold_assignment,
    stratk_sample,
    uncertainty_fold_sample,
)
from .scorers import SCORER_NAMES, resolve_score_name, score_stream
from .simulation import (
    REJECTION_METHODS,
    RejectionConfig,
    aurc_f1_star,
    benefit_fraction,
    f1_risk_curve,
    rejection_bias,
    rejection_volatility,
    run_posthoc_simulation,
)
from .stream_model import TemporalStream, read_id_table, read_stream, write_stream


EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INVARIANT = 2


def _global_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=str, help="Flat key = value run config file")
    parent.add_argument("--preset", type=str, help="Load a built-in run preset (see 'presets')")
    parent.add_argument("--out", type=str, help="Output directory (default: config 'out' or ./driftgrid-out)")
    parent.add_argument("--seed", type=int, help="Seed for generated streams and random sampling")
    parent.add_argument("--format", type=str, choices=["csv", "json"], help="Report format")
    parent.add_argument("--verbose", "-v", action="store_true", help="Log per-month thresholds")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _global_parser()
    parser = argparse.ArgumentParser(
        description="Evaluate uncertainty scores for selective classification under drift",
        prog="driftgrid",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", parents=[parent], help="Compute a score column for a stream")
    score.add_argument("--stream", type=str, required=True, help="Stream file (.csv or .jsonl)")
    score.add_argument("--scorer", type=str, default="msp_u",
                       help="One of " + ", ".join(SCORER_NAMES) + " or external:<column> (default: msp_u)")
    score.add_argument("--embeddings", type=str, help="Embedding table (margin, cade_ood)")
    score.add_argument("--hyperplane", type=str, help="JSON {weights, bias} (margin)")
    score.add_argument("--train-labels", type=str, help="CSV sample_id,label of training embeddings (cade_ood)")
    score.add_argument("--mad-scale", type=float, help="MAD consistency factor (cade_ood)")

    rc = sub.add_parser("rc-curve", parents=[parent], help="Risk-coverage curve of a score")
    rc.add_argument("--stream", type=str, help="Stream file (default: first configured stream)")
    rc.add_argument("--score", type=str, default="msp_u", help="Score name (default: msp_u)")

    simulate = sub.add_parser("simulate", parents=[parent], help="Monthly quota rejection simulation")
    simulate.add_argument("--stream", type=str, help="Stream file (default: first configured stream)")
    simulate.add_argument("--rho", type=int, required=True, help="Monthly rejection quota")
    simulate.add_argument("--method", type=str, choices=REJECTION_METHODS, help="Rejection rule (default: cutoff)")
    simulate.add_argument("--score", type=str, default="msp_u", help="Score name (default: msp_u)")
    simulate.add_argument("--window", type=int, help="Calibration pool window in months (default: unbounded)")

    sub.add_parser("evaluate", parents=[parent], help="Evaluate every stream, score and rho of a config")

    pareto = sub.add_parser("pareto", parents=[parent], help="Pareto front from a pillar table")
    pareto.add_argument("--table", type=str, required=True,
                        help="CSV with columns method_id,dataset,f1,sigma_f1,aurc,tau")

    sample = sub.add_parser("sample", parents=[parent], help="Label-budget sample selection")
    sample.add_argument("--scheme", type=str, choices=["top", "stratk", "uncertainty-folds"], required=True)
    sample.add_argument("--budget", type=int, required=True, help="Number of samples to select")
    sample.add_argument("--k", type=int, default=DEFAULT_FOLDS, help=f"Folds (default: {DEFAULT_FOLDS})")
    sample.add_argument("--stream", type=str, help="Stream file (top)")
    sample.add_argument("--month", type=int, help="Month index to query (top, default: last month)")
    sample.add_argument("--score", type=str, default="msp_u", help="Score name (top)")
    sample.add_argument("--pool", type=str,
                        help="CSV sample_id,y_true (stratk) or sample_id,fold_uncertainty[,fold] (uncertainty-folds)")
    sample.add_argument("--stratified-folds", action="store_true",
                        help="Deal folds round-robin within class instead of contiguous blocks (needs y_true)")

    sub.add_parser("presets", parents=[parent], help="List built-in run presets")
    return parser


def _run_config(args) -> RunConfig:
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = get_preset(args.preset).to_config()
        console.print(f"Loading preset: [cyan]{args.preset}[/]")
    else:
        config = RunConfig()
    formats = None
    if args.format:
        formats = [args.format] + (["svg"] if "svg" in config.formats else [])
    return apply_overrides(config, out=args.out, seed=args.seed, formats=formats)


def _one_stream(args, config: RunConfig) -> TemporalStream:
    if getattr(args, "stream", None):
        return read_stream(args.stream)
    streams = load_streams(config)
    if not streams:
        raise ConfigError("no stream given; use --stream, --config or --preset")
    return streams[0]


def _ensure_score(stream: TemporalStream, spec: str, config: RunConfig):
    registry = build_registry(config)
    name = resolve_score_name(spec, registry)
    if name == "msp_u" and name not in stream.score_names:
        stream = score_stream(stream, "msp_u", registry)
    return stream, name, registry


def cmd_score(args, config: RunConfig) -> int:
    stream = read_stream(args.stream)
    registry = build_registry(config)
    config.embeddings = args.embeddings or config.embeddings
    config.hyperplane = args.hyperplane or config.hyperplane
    config.train_labels = args.train_labels or config.train_labels
    config.mad_scale = args.mad_scale or config.mad_scale
    inputs = load_scorer_inputs(config, [args.scorer])

    scored = score_stream(stream, args.scorer, registry, inputs.embeddings, inputs.cade_stats, inputs.hyperplane)
    fmt = "jsonl" if (args.format or "csv") == "json" else "csv"
    path = Path(config.out) / f"{Path(args.stream).stem}.scored.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_stream(scored, path, fmt)
    console.print(f"[green]✓[/] Scored stream saved: {path}")
    return EXIT_OK


def cmd_rc_curve(args, config: RunConfig) -> int:
    stream, name, registry = _ensure_score(_one_stream(args, config), args.score, config)
    curve = stream_rc_curve(stream, name, registry)
    out = Path(config.out)
    summary = {"aurc": curve.aurc, "aurc_percent": curve.aurc_percent, "auroc": stream_auroc(stream), "n": curve.n}
    if "json" in config.formats:
        write_text(out / "rc_summary.json", simulation_summary(summary))
    if "csv" in config.formats:
        frame = pd.DataFrame({"coverage": curve.coverages, "risk": curve.risks})
        write_text(out / "rc_curve.csv", frame.to_csv(index=False, float_format="%.6f", lineterminator="\n"))
    if "svg" in config.formats:
        render_rc_svg(curve, out / "rc_curve.svg", title=stream.dataset_name)
    console.print(f"AURC: [bold]{curve.aurc_percent:.2f}[/] (x100) over {curve.n} samples")
    sys.stdout.write(f"aurc={curve.aurc:.6f}\n")
    return EXIT_OK


def cmd_simulate(args, config: RunConfig) -> int:
    stream, name, registry = _ensure_score(_one_stream(args, config), args.score, config)
    cfg = RejectionConfig(
        quota_rho=args.rho,
        method=args.method or config.method,
        score_name=name,
        coverage_grid=config.coverage_grid,
        window=args.window if args.window is not None else config.window,
    )
    trace = run_posthoc_simulation(stream, cfg, registry)
    out = Path(config.out)
    write_text(out / "trace.csv", render_trace(trace))
    curve = f1_risk_curve(stream, cfg, registry)
    write_text(out / "f1_risk_curve.csv", render_f1_risk_curve(curve))
    try:
        bf_star: Optional[float] = benefit_fraction(trace)
    except DriftGridError:
        bf_star = None
    summary = {
        "bf_star": bf_star,
        "delta_rej": rejection_bias(trace, cfg.quota_rho),
        "sigma_rej": rejection_volatility(trace),
        "aurc_f1_star": aurc_f1_star(stream, cfg, registry),
    }
    write_text(out / "summary.json", simulation_summary(summary))
    if "svg" in config.formats:
        render_temporal_svg(trace, cfg.quota_rho, out / "temporal.svg", title=stream.dataset_name)
    capped = sum(1 for m in trace.months if m.capped)
    console.print(f"[green]✓[/] Simulated {len(trace)} months at rho={cfg.quota_rho}"
                  + (f" ({capped} month(s) capped)" if capped else ""))
    return EXIT_OK


def cmd_evaluate(args, config: RunConfig) -> int:
    result = evaluate(config)
    written = write_run(result, config.out, config.formats)
    console.print(f"[green]✓[/] {len(result.reports)} report(s), {len(written)} file(s) in {config.out}")
    return EXIT_OK


def cmd_pareto(args, config: RunConfig) -> int:
    flags = pareto_from_table(read_pillar_table(args.table))
    frame = pd.DataFrame(
        [(m, "" if f is None else ("true" if f else "false")) for m, f in flags],
        columns=["method_id", "non_dominated"],
    )
    text = frame.to_csv(index=False, lineterminator="\n")
    write_text(Path(config.out) / "pareto.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def _read_pool(path: Optional[str], required: Sequence[str], int_columns: Sequence[str] = (),
               float_columns: Sequence[str] = ()) -> pd.DataFrame:
    if not path:
        raise ConfigError("--pool is required for this scheme")
    return read_id_table(path, required, "pool", int_columns=int_columns, float_columns=float_columns)


def cmd_sample(args, config: RunConfig) -> int:
    seed = args.seed if args.seed is not None else config.seeds[0]
    if args.scheme == "top":
        stream, name, registry = _ensure_score(_one_stream(args, config), args.score, config)
        months = {b.month_index: b for b in stream.batches}
        month = args.month if args.month is not None else stream.month_indices[-1]
        if month not in months:
            raise ConfigError(f"month {month} not in stream (months {stream.month_indices[0]}..{stream.month_indices[-1]})")
        result = select_uncertain(months[month], name, args.budget, registry)
    elif args.scheme == "stratk":
        pool = _read_pool(args.pool, ["y_true"], int_columns=["y_true"])
        result = stratk_sample(list(zip(pool["sample_id"], pool["y_true"])), args.budget, seed)
    else:
        pool = _read_pool(args.pool, ["fold_uncertainty"], int_columns=["fold", "y_true"],
                          float_columns=["fold_uncertainty"])
        ids = list(pool["sample_id"])
        if "fold" in pool.columns:
            folds = dict(zip(ids, pool["fold"]))
        elif args.stratified_folds:
            if "y_true" not in pool.columns:
                raise ConfigError("--stratified-folds needs a y_true column in the pool")
            folds = stratified_fold_assignment(list(zip(ids, pool["y_true"])), args.k)
        else:
            folds = contiguous_fold_assignment(ids, args.k)
        result = uncertainty_fold_sample(list(zip(ids, pool["fold_uncertainty"])), args.budget, args.k, folds)

    text = "".join(f"{sample_id}\n" for sample_id in result.selected_ids)
    write_text(Path(config.out) / "selected.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "rc-curve": cmd_rc_curve,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "pareto": cmd_pareto,
    "sample": cmd_sample,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    if args.command == "presets":
        print_presets()
        return EXIT_OK

    try:
        config = _run_config(args)
        return COMMANDS[args.command](args, config)
    except InvariantViolation as e:
        console.print(f"[red]✗ Internal invariant failed:[/] {escape(str(e))}")
        return EXIT_INVARIANT
    except DriftGridError as e:
        console.print(f"[red]✗ Error:[/] {escape(str(e))}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
