"""End-to-end evaluation over every (stream, score, rho) combination."""

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .config import RunConfig
from .errors import (
    AllUndefined,
    ConfigError,
    DriftGridError,
    EvaluationError,
    MissingScore,
    NoDefinedMonths,
    TooFewPoints,
)
from .pareto import pareto_from_table
from .plots import render_rc_svg, render_temporal_svg
from .reliability import RCCurve, excess_aurc, stream_auroc, stream_rc_curve
from .report import MetricsReport, render_trace, write_reports, write_text
from .scorers import (
    CadeClassStats,
    Hyperplane,
    ScoreRegistry,
    fit_cade_stats,
    load_hyperplane,
    read_train_labels,
    resolve_score_name,
    score_stream,
)
from .simulation import (
    RejectionConfig,
    SimulationTrace,
    aurc_f1_star,
    benefit_fraction,
    concatenate_traces,
    mean_retained_f1,
    monthly_f1,
    monthly_fnr,
    rejection_bias,
    rejection_mapd,
    rejection_volatility,
    run_posthoc_simulation,
)
from .stability import MonthlySeries, coefficient_of_variation, f1_volatility, mann_kendall_tau, max_drawdown
from .stream_model import EmbeddingTable, TemporalStream, read_embeddings, read_stream
from .synthetic import generate_drift_stream


logger = logging.getLogger(__name__)

ComboKey = Tuple[str, str, str, int]
SeedKey = Tuple[str, str, str, int, Optional[int]]

# Stream-level metrics that are averaged over the seeds of a group
SEED_AVERAGED = (
    "f1_mean", "fnr_mean", "auroc", "aurc", "aurc_f1_star", "sigma_f1", "tau", "e_aurc", "cv_f1", "max_drawdown",
)


@dataclass
class EvaluationResult:
    """Reports sorted by (method_id, dataset, score, rho) plus the artifacts behind them.

    ``traces`` holds one trace per report, the seeds of a group concatenated in
    seed order. ``seed_traces`` and ``curves`` keep the per-stream artifacts,
    keyed with the stream seed (None when the stream has no seed).
    """
    reports: List[MetricsReport]
    traces: Dict[ComboKey, SimulationTrace] = field(default_factory=dict)
    seed_traces: Dict[SeedKey, SimulationTrace] = field(default_factory=dict)
    curves: Dict[Tuple[str, str, str, Optional[int]], RCCurve] = field(default_factory=dict)


@dataclass
class ScorerInputs:
    """What the margin and cade_ood scorers compute from."""
    embeddings: Optional[EmbeddingTable] = None
    hyperplane: Optional[Hyperplane] = None
    cade_stats: Optional[List[CadeClassStats]] = None


@dataclass
class _StreamScore:
    """Rho-independent metrics of one (stream, score) pair."""
    method_id: str
    stream: TemporalStream
    score_name: str
    registry: ScoreRegistry
    curve: RCCurve
    report: MetricsReport

    @property
    def group_key(self) -> Tuple[str, str, str]:
        return (self.method_id, self.stream.dataset_name, self.score_name)

    @property
    def seed(self) -> Optional[int]:
        return self.stream.seed


def build_registry(config: RunConfig) -> ScoreRegistry:
    registry = ScoreRegistry()
    for name, uncertain in sorted(config.orientations.items()):
        registry.register(name, uncertain, "configured orientation")
    return registry


def load_streams(config: RunConfig) -> List[TemporalStream]:
    """Read the configured stream files, or generate synthetic streams per seed and scorer."""
    if config.streams:
        return [read_stream(path) for path in config.streams]
    synthetic = config.synthetic
    if synthetic is None:
        raise ConfigError("config names no streams and no synthetic.* settings")
    return [
        generate_drift_stream(
            months=synthetic.months,
            month_size=synthetic.month_size,
            error_rate=synthetic.error_rate,
            scorer=scorer,
            seed=seed,
            malware_ratio=synthetic.malware_ratio,
            shift_month=synthetic.shift_month,
            shift=synthetic.shift,
        )
        for seed in config.seeds
        for scorer in synthetic.scorers
    ]


def method_id_of(stream: TemporalStream) -> str:
    return stream.method_name or stream.dataset_name


def _percent(value: Optional[float]) -> Optional[float]:
    return None if value is None else 100.0 * value


def _mean_defined(values: Sequence[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return math.fsum(defined) / len(defined)


def _or_none(fn, *args):
    try:
        return fn(*args)
    except (AllUndefined, NoDefinedMonths, TooFewPoints):
        return None


def _lacks_score(stream: TemporalStream, name: str) -> bool:
    return any(name not in r.scores for r in stream.records)


def load_scorer_inputs(config: RunConfig, scorers: Sequence[str]) -> ScorerInputs:
    """Read the configured embeddings, hyperplane and training labels the scorers need.

    Args:
        config: Run config naming the input files
        scorers: Scorer names about to be computed; only margin and cade_ood read inputs

    Raises:
        ConfigError: A requested scorer has no configured input
    """
    inputs = ScorerInputs()
    embedding_scorers = sorted(set(scorers) & {"margin", "cade_ood"})
    if not embedding_scorers:
        return inputs
    if not config.embeddings:
        raise ConfigError(f"{', '.join(embedding_scorers)} needs an embeddings file")
    inputs.embeddings = read_embeddings(config.embeddings)
    if "margin" in embedding_scorers:
        if not config.hyperplane:
            raise ConfigError("margin needs a hyperplane file")
        inputs.hyperplane = load_hyperplane(config.hyperplane)
    if "cade_ood" in embedding_scorers:
        if not config.train_labels:
            raise ConfigError("cade_ood needs a train_labels file")
        labels = read_train_labels(config.train_labels)
        inputs.cade_stats = fit_cade_stats(inputs.embeddings, labels, config.mad_scale)
    return inputs


def _prepare_scores(stream: TemporalStream, score_specs: Sequence[str], registry: ScoreRegistry,
                    inputs: ScorerInputs) -> Tuple[TemporalStream, List[str]]:
    names = []
    for spec in score_specs:
        name = resolve_score_name(spec, registry)
        if _lacks_score(stream, name):
            if name == "msp_u" and all(r.prob_positive is not None for r in stream.records):
                stream = score_stream(stream, "msp_u", registry)
            elif name in ("margin", "cade_ood"):
                stream = score_stream(stream, name, registry, inputs.embeddings, inputs.cade_stats,
                                      inputs.hyperplane)
            else:
                missing = next(r for r in stream.records if name not in r.scores)
                raise MissingScore(missing.sample_id, name)
        names.append(name)
    return stream, names


def _stream_score_metrics(stream: TemporalStream, score_name: str, registry: ScoreRegistry,
                          config: RunConfig) -> _StreamScore:
    method_id = method_id_of(stream)
    baseline_f1 = [monthly_f1(batch) for batch in stream.batches]
    baseline_fnr = [monthly_fnr(batch) for batch in stream.batches]
    series = MonthlySeries(baseline_f1, "f1")

    curve = stream_rc_curve(stream, score_name, registry)
    correct = [r.correct for r in stream.records]
    star_cfg = RejectionConfig(1, config.method, score_name, config.coverage_grid, config.window)

    report = MetricsReport(
        method_id=method_id,
        dataset_name=stream.dataset_name,
        score_name=score_name,
        rho=0,
        monthly_budget=stream.monthly_budget,
        initial_budget=stream.initial_budget,
        f1_mean=_percent(_mean_defined(baseline_f1)),
        fnr_mean=_percent(_mean_defined(baseline_fnr)),
        auroc=stream_auroc(stream),
        aurc=curve.aurc_percent,
        aurc_f1_star=_or_none(aurc_f1_star, stream, star_cfg, registry),
        sigma_f1=_percent(_or_none(f1_volatility, series)),
        tau=_or_none(mann_kendall_tau, series, config.tau_variant),
        e_aurc=100.0 * excess_aurc(curve, correct),
        cv_f1=_or_none(coefficient_of_variation, series),
        max_drawdown=_percent(_or_none(max_drawdown, series)),
    )
    return _StreamScore(method_id, stream, score_name, registry, curve, report)




def _seed_order(seed: Optional[int]) -> int:
    return -1 if seed is None else seed


def _simulate(base: _StreamScore, rho: int, config: RunConfig) -> SimulationTrace:
    cfg = RejectionConfig(rho, config.method, base.score_name, config.coverage_grid, config.window)
    try:
        trace = run_posthoc_simulation(base.stream, cfg, base.registry)
    except DriftGridError as e:
        raise EvaluationError(base.stream.dataset_name, base.score_name, rho, e) from e
    logger.info("evaluated %s / %s / %s / seed=%s / rho=%d",
                base.method_id, base.stream.dataset_name, base.score_name, base.seed, rho)
    return trace


def _pool_seeds(members: List[_StreamScore]) -> MetricsReport:
    first = members[0].report
    if len(members) == 1:
        return first
    means = {name: _mean_defined([getattr(m.report, name) for m in members]) for name in SEED_AVERAGED}
    return replace(first, n_seeds=len(members), **means)


def _combine(members: List[_StreamScore], rho: int,
             traces: List[SimulationTrace]) -> Tuple[MetricsReport, SimulationTrace]:
    """One report per group: rejection metrics over the seed traces concatenated."""
    trace = concatenate_traces(traces)
    report = replace(
        _pool_seeds(members),
        rho=rho,
        bf_star=_or_none(benefit_fraction, trace),
        delta_rej=rejection_bias(trace, rho),
        sigma_rej=rejection_volatility(trace),
        rej_mapd=rejection_mapd(trace, rho),
        mean_retained_f1=_percent(mean_retained_f1(trace)),
    )
    return report, trace


def _group_by_seed(bases: List[_StreamScore]) -> Dict[Tuple[str, str, str], List[_StreamScore]]:
    """Streams of one (method, dataset, score) grouped in seed order.

    Raises:
        ConfigError: Two streams of a group share a seed (or both have none)
    """
    groups: Dict[Tuple[str, str, str], List[_StreamScore]] = {}
    for base in bases:
        groups.setdefault(base.group_key, []).append(base)
    for key, members in groups.items():
        seeds = [m.seed for m in members]
        if len(set(seeds)) != len(seeds):
            raise ConfigError(f"streams of {' / '.join(key)} repeat seed(s) {seeds}; "
                              "give each file its own '# seed=' line")
        members.sort(key=lambda m: _seed_order(m.seed))
    return groups


def _pareto_flags(reports: List[MetricsReport]) -> List[MetricsReport]:
    """Flag the Pareto front per (monthly budget, score, rho) across datasets."""
    groups: Dict[Tuple, List[int]] = {}
    for i, report in enumerate(reports):
        key = (report.monthly_budget if report.monthly_budget is not None else -1, report.score_name, report.rho)
        groups.setdefault(key, []).append(i)

    flagged = list(reports)
    for key in sorted(groups):
        members = [reports[i] for i in groups[key]]
        table = pd.DataFrame([{
            "method_id": r.method_id,
            "dataset": r.dataset_name,
            "f1": r.f1_mean,
            "sigma_f1": r.sigma_f1,
            "aurc": r.aurc,
            "tau": r.tau,
        } for r in members])
        try:
            flags = dict(pareto_from_table(table))
        except ConfigError as e:
            logger.warning("no Pareto flags for budget group %s: %s", key, e)
            continue
        for i in groups[key]:
            flagged[i] = replace(reports[i], pareto_flag=flags.get(reports[i].method_id))
    return flagged


def evaluate(config: RunConfig) -> EvaluationResult:
    """Score, simulate and summarize every (stream, score, rho) combination.

    Streams that share method and dataset but differ in seed form one group.
    Their reports are pooled: stream-level metrics are averaged over seeds and
    the rejection metrics (BF*, ΔRej, σRej, MAPD) are computed on the seed
    traces concatenated in seed order.

    Raises:
        ConfigError: Two streams of a group share a seed, or a scorer lacks its inputs
        EvaluationError: Naming the failing stream, score and rho
    """
    config.validate()
    streams = load_streams(config)
    needed = [name for name in ("margin", "cade_ood")
              if name in config.scores and any(_lacks_score(s, name) for s in streams)]
    inputs = load_scorer_inputs(config, needed)

    bases: List[_StreamScore] = []
    for stream in streams:
        registry = build_registry(config)
        try:
            scored, names = _prepare_scores(stream, config.scores, registry, inputs)
        except DriftGridError as e:
            score = getattr(e, "score_name", ", ".join(config.scores))
            raise EvaluationError(stream.dataset_name, score, None, e) from e
        for name in names:
            try:
                bases.append(_stream_score_metrics(scored, name, registry, config))
            except DriftGridError as e:
                raise EvaluationError(stream.dataset_name, name, None, e) from e
    groups = _group_by_seed(bases)

    jobs = [(base, rho) for base in bases for rho in config.rhos]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            traces = list(pool.map(lambda job: _simulate(job[0], job[1], config), jobs))
    else:
        traces = [_simulate(base, rho, config) for base, rho in jobs]

    result = EvaluationResult(reports=[])
    for (base, rho), trace in zip(jobs, traces):
        result.seed_traces[base.group_key + (rho, base.seed)] = trace
        result.curves[base.group_key + (base.seed,)] = base.curve
    reports = []
    for key, members in groups.items():
        for rho in config.rhos:
            report, trace = _combine(members, rho, [result.seed_traces[key + (rho, m.seed)] for m in members])
            result.traces[report.sort_key] = trace
            reports.append(report)
            if len(members) > 1:
                logger.info("pooled %d seeds of %s / rho=%d", len(members), " / ".join(key), rho)
    result.reports = _pareto_flags(sorted(reports, key=lambda r: r.sort_key))
    return result


def _slug(*parts) -> str:
    return "__".join(re.sub(r"[^A-Za-z0-9._-]+", "_", str(p)) for p in parts if p is not None)


def _seed_part(seed: Optional[int]) -> Optional[str]:
    return None if seed is None else f"seed{seed}"


def write_run(result: EvaluationResult, out_dir, formats: Sequence[str]) -> List[Path]:
    """Write metrics tables, per-stream traces and, with "svg", the plots.

    Trace and plot names carry ``seed<n>`` for streams that have a seed.
    """
    out_dir = Path(out_dir)
    written = write_reports(result.reports, out_dir, formats)
    for key in sorted(result.seed_traces, key=lambda k: (k[:4], _seed_order(k[4]))):
        trace = result.seed_traces[key]
        method_id, dataset, score, rho, seed = key
        slug = _slug(method_id, dataset, score, _seed_part(seed), f"rho{rho}")
        if "csv" in formats:
            written.append(write_text(out_dir / "traces" / f"{slug}.csv", render_trace(trace)))
        if "svg" in formats:
            title = f"{method_id} / {dataset}" + ("" if seed is None else f" / seed {seed}") + f" / rho={rho}"
            written.append(render_temporal_svg(trace, rho, out_dir / "plots" / f"{slug}_temporal.svg", title=title))
    if "svg" in formats:
        for key in sorted(result.curves, key=lambda k: (k[:3], _seed_order(k[3]))):
            method_id, dataset, score, seed = key
            slug = _slug(method_id, dataset, score, _seed_part(seed))
            written.append(render_rc_svg(result.curves[key], out_dir / "plots" / f"{slug}_rc.svg",
                                         title=f"{method_id} / {dataset}"))
    return written
