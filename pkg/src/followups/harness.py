"""Experiment harness: end-to-end pipeline, parameter sweeps with median
aggregation, explanation-table rendering, and timing comparison.

All default outputs are pure functions of the input files, configuration and
seed; wall-clock measurements are only written when explicitly requested.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import baselines, miner
from .errors import ConfigError, ParseError
from .featurization import (
    ACTION,
    TARGET_FOLLOWER,
    USER,
    AttributeTable,
    BinSpec,
    PredicateIndex,
    bin_numeric_attribute,
    bins_from_json,
    bins_to_json,
    build_predicate_index,
    load_attribute_table,
)
from .ingestion import (
    ActionLog,
    FollowupStats,
    SocialGraph,
    compute_followup_set,
    followup_histogram,
    global_followup_stats,
    parse_action_log,
    parse_social_graph,
)

ALGORITHMS = ("greedy", "eager", "random", "most-popular", "exhaustive", "oracle")


@dataclass
class RunConfig:
    graph: Path
    actions: Path
    user_attrs: Path | None = None
    action_attrs: Path | None = None
    bins: Path | None = None
    nbins: int = 3
    algo: str = "greedy"
    k: int = 6
    l: int = 3
    top_n: int = 100
    seed: int = 0
    max_delay: int | None = None
    target: str = TARGET_FOLLOWER
    out_dir: Path | None = None
    node_budget: int = baselines.DEFAULT_NODE_BUDGET

    def validate(self) -> None:
        if self.k < 1 or self.l < 1 or self.top_n < 1:
            raise ConfigError("k, l and top_n must all be >= 1")
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        for path in (self.graph, self.actions, self.user_attrs, self.action_attrs, self.bins):
            if path is not None and not Path(path).exists():
                raise ConfigError(f"input file not found: {path}")


def median(values: Sequence[float]):
    """Lower median: the rank-ceil(n/2) order statistic."""
    if not values:
        raise ValueError("median of empty sequence")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def load_graph(path: str | Path) -> SocialGraph:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_social_graph(fh)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from None


def load_log(path: str | Path) -> ActionLog:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_action_log(fh)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from None


def load_table(path: str | Path | None, dimension: str) -> AttributeTable:
    if path is None:
        return AttributeTable(dimension)
    with open(path, encoding="utf-8") as fh:
        try:
            return load_attribute_table(fh, dimension)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from None


def prepare_bins(
    user_attrs: AttributeTable,
    action_attrs: AttributeTable,
    stats: FollowupStats,
    nbins: int,
) -> list[BinSpec]:
    """Equi-depth bin specs for every declared numeric attribute, weighted by
    global followup mass (cells carried by each entity). nbins is clamped to
    the number of distinct values so sparse attributes stay usable."""
    specs = []
    for table, weights in ((action_attrs, stats.action_cells), (user_attrs, stats.follower_cells)):
        for attribute in sorted(table.numeric):
            values = [
                (entity, table.numeric_value(entity, attribute))
                for entity in table.entities()
                if table.numeric_value(entity, attribute) is not None
            ]
            if not values:
                continue
            distinct = len({v for _, v in values})
            specs.append(bin_numeric_attribute(attribute, values, weights, min(nbins, distinct)))
    return specs


def run_algorithm(
    algo: str,
    index: PredicateIndex,
    k: int,
    l: int,
    seed: int = 0,
    node_budget: int = baselines.DEFAULT_NODE_BUDGET,
) -> miner.ExplanationSet:
    if algo == "greedy":
        return miner.mine_explanations(index, k, l)
    if algo == "eager":
        return miner.eager_greedy(index, k, l)
    if algo == "random":
        return baselines.random_baseline(index, k, l, seed)
    if algo == "most-popular":
        return baselines.most_popular_baseline(index, k, l)
    if algo == "exhaustive":
        return baselines.exhaustive_baseline(index, k, l, node_budget)
    if algo == "oracle":
        return baselines.brute_force_oracle(index, k, l)[1]
    raise ConfigError(f"unknown algorithm {algo!r}")


@dataclass
class PipelineResult:
    summary_rows: list[dict]
    written: list[Path]


def _load_all(config: RunConfig):
    graph = load_graph(config.graph)
    log = load_log(config.actions)
    user_attrs = load_table(config.user_attrs, USER)
    action_attrs = load_table(config.action_attrs, ACTION)
    return graph, log, user_attrs, action_attrs


def _resolve_bins(config: RunConfig, user_attrs, action_attrs, stats) -> list[BinSpec]:
    if config.bins is not None:
        return bins_from_json(Path(config.bins).read_text(encoding="utf-8"))
    return prepare_bins(user_attrs, action_attrs, stats, config.nbins)


def _rank_counts(stats: FollowupStats, top_n: int) -> list[tuple[int, int]]:
    ranked = sorted(stats.influencer_counts.items(), key=lambda it: (-it[1], it[0]))
    return ranked[:top_n]


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Rank influencers, mine each with the configured algorithm, and write
    one explanation JSON per influencer plus a summary CSV.

    Partially written outputs are removed if any step fails.
    """
    config.validate()
    if config.out_dir is None:
        raise ConfigError("pipeline needs an output directory")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        graph, log, user_attrs, action_attrs = _load_all(config)
        stats = global_followup_stats(graph, log, config.max_delay)
        bins = _resolve_bins(config, user_attrs, action_attrs, stats)
        if config.bins is None:
            bins_path = out_dir / "bins.json"
            bins_path.write_text(bins_to_json(bins), encoding="utf-8")
            written.append(bins_path)
        summary_rows = []
        for rank, (user, count) in enumerate(_rank_counts(stats, config.top_n), start=1):
            fset = compute_followup_set(graph, log, user, config.max_delay)
            index = build_predicate_index(fset, user_attrs, action_attrs, bins, config.target)
            eset = run_algorithm(config.algo, index, config.k, config.l, config.seed, config.node_budget)
            path = out_dir / f"explanations_{rank:03d}_user{user}.json"
            path.write_bytes(miner.explanation_set_json(eset, index))
            written.append(path)
            summary_rows.append(
                {
                    "rank": rank,
                    "influencer": user,
                    "followups": count,
                    "explanations": len(eset.explanations),
                    "total_coverage": eset.total_coverage,
                    "relative_coverage": eset.relative_coverage,
                }
            )
        summary_path = out_dir / "summary.csv"
        with summary_path.open("w", encoding="utf-8") as fh:
            fh.write("rank,influencer,followups,explanations,total_coverage,relative_coverage\n")
            for row in summary_rows:
                fh.write(
                    f"{row['rank']},{row['influencer']},{row['followups']},"
                    f"{row['explanations']},{row['total_coverage']},{row['relative_coverage']!r}\n"
                )
        written.append(summary_path)
        return PipelineResult(summary_rows, written)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise


@dataclass
class SweepPoint:
    value: int
    coverages: dict[str, list[float]]
    medians: dict[str, float]
    millis: dict[str, float]


@dataclass
class SweepResult:
    axis: str
    influencers: list[int]
    points: list[SweepPoint] = field(default_factory=list)


def sweep(
    config: RunConfig,
    axis: str,
    values: Sequence[int],
    algos: Sequence[str],
) -> SweepResult:
    """Run each algorithm over the top influencers for every axis value,
    recording per-influencer relative coverages, their median, and the median
    wall-clock time of the mining call alone."""
    if axis not in ("k", "l"):
        raise ConfigError("sweep axis must be 'k' or 'l'")
    if not values or list(values) != sorted(values):
        raise ConfigError("sweep values must be non-empty and ascending")
    for algo in algos:
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r}")
    config.validate()
    graph, log, user_attrs, action_attrs = _load_all(config)
    stats = global_followup_stats(graph, log, config.max_delay)
    bins = _resolve_bins(config, user_attrs, action_attrs, stats)
    indexes = []
    result = SweepResult(axis=axis, influencers=[])
    for user, _count in _rank_counts(stats, config.top_n):
        fset = compute_followup_set(graph, log, user, config.max_delay)
        indexes.append(build_predicate_index(fset, user_attrs, action_attrs, bins, config.target))
        result.influencers.append(user)
    for value in values:
        k = value if axis == "k" else config.k
        l = value if axis == "l" else config.l
        point = SweepPoint(value=value, coverages={}, medians={}, millis={})
        for algo in algos:
            covs = []
            times = []
            for index in indexes:
                t0 = time.perf_counter()
                eset = run_algorithm(algo, index, k, l, config.seed, config.node_budget)
                times.append((time.perf_counter() - t0) * 1000.0)
                covs.append(eset.relative_coverage)
            point.coverages[algo] = covs
            point.medians[algo] = median(covs)
            point.millis[algo] = median(times)
        result.points.append(point)
    return result


def write_sweep_csv(result: SweepResult, out_dir: str | Path, timing_path: str | Path | None = None) -> list[Path]:
    """Persist raw per-influencer coverages and the gnuplot-ready median
    table. Wall-clock medians are only written when `timing_path` is given
    (they are not deterministic)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    algos = list(result.points[0].coverages) if result.points else []
    raw_path = out / "sweep_raw.csv"
    with raw_path.open("w", encoding="utf-8") as fh:
        fh.write(f"{result.axis},algorithm,influencer,relative_coverage\n")
        for point in result.points:
            for algo in algos:
                for user, cov in zip(result.influencers, point.coverages[algo]):
                    fh.write(f"{point.value},{algo},{user},{cov!r}\n")
    medians_path = out / "sweep_medians.csv"
    with medians_path.open("w", encoding="utf-8") as fh:
        fh.write(result.axis + "," + ",".join(algos) + "\n")
        for point in result.points:
            row = ",".join(repr(point.medians[algo]) for algo in algos)
            fh.write(f"{point.value},{row}\n")
    paths = [raw_path, medians_path]
    if timing_path is not None:
        tpath = Path(timing_path)
        with tpath.open("w", encoding="utf-8") as fh:
            fh.write(f"{result.axis},algorithm,median_ms\n")
            for point in result.points:
                for algo in algos:
                    fh.write(f"{point.value},{algo},{point.millis[algo]:.3f}\n")
        paths.append(tpath)
    return paths


def timing_report(
    config: RunConfig,
    algos: Sequence[str],
    indexes: Sequence[PredicateIndex] | None = None,
) -> list[tuple[str, int, int, float]]:
    """Median wall-clock milliseconds of the mining call per algorithm at the
    configured (k, l). Parsing and index construction are excluded."""
    if indexes is None:
        config.validate()
        graph, log, user_attrs, action_attrs = _load_all(config)
        stats = global_followup_stats(graph, log, config.max_delay)
        bins = _resolve_bins(config, user_attrs, action_attrs, stats)
        indexes = []
        for user, _count in _rank_counts(stats, config.top_n):
            fset = compute_followup_set(graph, log, user, config.max_delay)
            indexes.append(build_predicate_index(fset, user_attrs, action_attrs, bins, config.target))
    rows = []
    for algo in algos:
        times = []
        for index in indexes:
            t0 = time.perf_counter()
            run_algorithm(algo, index, config.k, config.l, config.seed, config.node_budget)
            times.append((time.perf_counter() - t0) * 1000.0)
        rows.append((algo, config.k, config.l, median(times)))
    return rows


def _predicate_display(pred: Mapping, display: Mapping[str, str] | None) -> str:
    if display and pred["attribute"] in display:
        return f"{display[pred['attribute']]}:{pred['value']}"
    return str(pred["value"])


def render_table(doc: Mapping, display: Mapping[str, str] | None = None) -> str:
    """Text table for one explanation-set JSON document.

    Consecutive rows sharing leading predicates render the shared cells once:
    each row's predicates are reordered to maximize the common prefix with
    the previous row, then the shared prefix is blanked.
    """
    if not doc.get("explanations"):
        raise ValueError("explanation set is empty")
    rows = []
    prev: list[tuple] = []
    width = max(len(e["predicates"]) for e in doc["explanations"])
    for expl in doc["explanations"]:
        preds = [(p["dimension"], p["attribute"], p["value"]) for p in expl["predicates"]]
        pred_set = set(preds)
        shared = 0
        while shared < len(prev) and shared < len(preds) and prev[shared] in pred_set:
            shared += 1
        ordered = list(prev[:shared]) + [p for p in preds if p not in prev[:shared]]
        by_key = {(p["dimension"], p["attribute"], p["value"]): p for p in expl["predicates"]}
        labels = ["" for _ in range(shared)] + [
            _predicate_display(by_key[p], display) for p in ordered[shared:]
        ]
        labels += [""] * (width - len(labels))
        rows.append((labels, expl["actions"], expl["followers"], expl["followups"]))
        prev = ordered
    headers = [""] * width + ["Actions", "Followers", "Followups"]
    table = [headers] + [
        labels + [str(a), str(f), str(c)] for labels, a, f, c in rows
    ]
    widths = [max(len(str(row[i])) for row in table) for i in range(len(headers))]
    lines = []
    for row in table:
        lines.append("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip())
    total = doc["total_followups"]
    pct = 100.0 * doc["total_coverage"] / total if total else 0.0
    lines.insert(0, f"Influencer {doc['influencer']} ({total} followups)")
    lines.append(f"Total Coverage: {pct:.1f}%")
    return "\n".join(lines) + "\n"


def histogram_csv(graph: SocialGraph, log: ActionLog, max_delay: int | None = None) -> str:
    rows = followup_histogram(graph, log, max_delay)
    return "followups,users\n" + "".join(f"{c},{n}\n" for c, n in rows)


def rank_csv(graph: SocialGraph, log: ActionLog, top_n: int, max_delay: int | None = None) -> str:
    stats = global_followup_stats(graph, log, max_delay)
    rows = _rank_counts(stats, top_n)
    return "rank,influencer,followups\n" + "".join(
        f"{i},{u},{c}\n" for i, (u, c) in enumerate(rows, start=1)
    )
