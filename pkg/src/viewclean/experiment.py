"""Reproducible seeded experiment runs, blocking reports, and metrics files.

One experiment is a grid of (view, strategy, budget, batch, initial batch,
alpha, window) times a number of repetitions. Every run's seed is derived
from the master seed as SeedSequence([master_seed, grid_index, repetition]),
so any single run can be re-executed in isolation. Metrics are written as
one flat CSV row per (run, iteration) with stable float formatting, making
a repeated invocation with the same master seed byte-identical.
"""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .datasets import LoadedDataset
from .distance import DistanceConfig, view_distance
from .engine import (
    Candidates,
    CleaningConfig,
    SessionState,
    Strategy,
    oracle_labeler,
    prepare_candidates,
    run_cleaning,
)
from .errors import ConfigError
from .pairs import (
    apply_blocking,
    build_pairs,
    compute_features,
    load_feature_cache,
    save_feature_cache,
)
from .relation import Relation, apply_dedup
from .views import ViewResult, evaluate, provenance

METRIC_COLUMNS = [
    "run_id",
    "strategy",
    "view",
    "iteration",
    "labels_used",
    "distance_to_clean",
    "distance_to_prev",
    "f1",
    "stopped_reason",
]


@dataclass(frozen=True)
class ExperimentConfig:
    views: tuple[str, ...]
    strategies: tuple[Strategy, ...] = (Strategy.VIEW_IMPACT,)
    repetitions: int = 20
    budgets: tuple[int, ...] = (150,)
    batches: tuple[int, ...] = (20,)
    initial_batches: tuple[int, ...] = (13,)
    alphas: tuple[float, ...] = (0.5,)
    windows: tuple[int, ...] = (3,)
    epsilon: float = 0.01
    master_seed: int = 0
    holdout: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.views:
            raise ConfigError("at least one view required")


def run_seed(master_seed: int, grid_index: int, repetition: int) -> int:
    """Documented master-seed fan-out for one run."""
    seq = np.random.SeedSequence([master_seed, grid_index, repetition])
    return int(seq.generate_state(1)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.10g}"


@dataclass
class _RunTask:
    grid_index: int
    repetition: int
    view: str
    cfg: CleaningConfig


@dataclass
class _Prepared:
    relation: Relation
    candidates: Candidates
    v_clean: ViewResult
    v_dirty: ViewResult


def relation_for_view(loaded: LoadedDataset, view_name: str) -> Relation:
    """join-style views run over the pre-joined scores relation."""
    if view_name == "join_avg_score":
        if loaded.scores_relation is None:
            raise ConfigError("join_avg_score needs the pre-joined scores file")
        return loaded.scores_relation
    return loaded.relation


def prepare_view(loaded: LoadedDataset, view_name: str,
                 dcfg: DistanceConfig | None = None,
                 cache_dir: str | Path | None = None) -> _Prepared:
    """Prepare one view; with cache_dir set, the per-pair feature vectors
    are read from / written to a flat cache file so repeated experiments
    skip the similarity recomputation."""
    spec = loaded.view(view_name)
    rel = relation_for_view(loaded, view_name)
    feature_defs = loaded.spec.all_features()
    features = None
    cache_path = None
    if cache_dir is not None:
        cache_path = Path(cache_dir) / f"{loaded.spec.name}_{view_name}_features.tsv"
        if cache_path.exists():
            features = load_feature_cache(cache_path, feature_defs)
    cands = prepare_candidates(
        [spec], rel, loaded.spec.blocking, feature_defs, dcfg, features=features
    )
    if cache_path is not None and features is None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        save_feature_cache(cache_path, cands.features, feature_defs)
    clean_rel = apply_dedup(rel, set(loaded.ground_truth.matches))
    return _Prepared(
        relation=rel,
        candidates=cands,
        v_clean=evaluate(spec, clean_rel),
        v_dirty=evaluate(spec, rel),
    )


def _execute_run(args) -> tuple[_RunTask, SessionState]:
    task, loaded, prepared = args
    spec = loaded.view(task.view)
    state = run_cleaning(
        spec,
        prepared.relation,
        oracle_labeler(loaded.ground_truth),
        task.cfg,
        loaded.spec.blocking,
        loaded.spec.all_features(),
        ground_truth=loaded.ground_truth,
        candidates=prepared.candidates,
    )
    return task, state


def _rows_for_run(task: _RunTask, state: SessionState) -> list[list[str]]:
    run_id = f"{task.view}-{task.cfg.strategy.value}-g{task.grid_index}-r{task.repetition}"
    rows = []
    last = len(state.metrics) - 1
    for i, m in enumerate(state.metrics):
        dist_clean = None
        if m.distance_to_clean is not None:
            dist_clean = m.distance_to_clean[task.view]
        rows.append(
            [
                run_id,
                task.cfg.strategy.value,
                task.view,
                str(m.iteration),
                str(m.labels_used),
                _fmt(dist_clean),
                _fmt(m.view_change),
                _fmt(m.f1),
                state.reason if i == last else "",
            ]
        )
    return rows


def run_experiment(loaded: LoadedDataset, cfg: ExperimentConfig,
                   outdir: str | Path, cache_dir: str | Path | None = None):
    """Run the grid, write metrics.csv and summary.txt, return their paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = list(
        product(cfg.views, cfg.strategies, cfg.budgets, cfg.batches,
                cfg.initial_batches, cfg.alphas, cfg.windows)
    )
    prepared = {v: prepare_view(loaded, v, cache_dir=cache_dir) for v in cfg.views}
    tasks = []
    for grid_index, (view, strategy, budget, batch, b0, alpha, window) in enumerate(grid):
        for rep in range(cfg.repetitions):
            run_cfg = CleaningConfig(
                budget=budget,
                batch=batch,
                initial_batch=b0,
                alpha=alpha,
                strategy=strategy,
                epsilon=cfg.epsilon,
                window=window,
                seed=run_seed(cfg.master_seed, grid_index, rep),
                holdout=cfg.holdout,
            )
            tasks.append(_RunTask(grid_index, rep, view, run_cfg))

    args = [(t, loaded, prepared[t.view]) for t in tasks]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_execute_run, args))
    else:
        results = [_execute_run(a) for a in args]
    results.sort(key=lambda ts: (ts[0].grid_index, ts[0].view, ts[0].repetition))

    metrics_path = outdir / "metrics.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    per_iter: dict[tuple, list[float]] = {}
    for task, state in results:
        for row in _rows_for_run(task, state):
            writer.writerow(row)
        for m in state.metrics:
            if m.distance_to_clean is not None:
                key = (task.view, task.cfg.strategy.value, task.grid_index, m.iteration)
                per_iter.setdefault(key, []).append(m.distance_to_clean[task.view])
    metrics_path.write_text(buf.getvalue(), encoding="utf-8")

    summary_path = outdir / "summary.txt"
    lines = ["view strategy grid iteration runs mean_distance stddev"]
    for key in sorted(per_iter):
        vals = per_iter[key]
        sd = statistics.pstdev(vals) if len(vals) > 1 else 0.0
        lines.append(
            f"{key[0]} {key[1]} g{key[2]} it{key[3]} n={len(vals)} "
            f"{statistics.mean(vals):.6f} {sd:.6f}"
        )
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return metrics_path, summary_path


# ---------------------------------------------------------------------------
# blocking statistics (the Table-1-style counts)


def blocking_report(loaded: LoadedDataset, view_name: str | None = None) -> dict:
    """Pair counts, positives, and positive fractions at each blocking stage.

    Pair counts are reported in both conventions: unordered C(n,2) and
    ordered n*(n-1).
    """
    rel = loaded.relation if view_name is None else relation_for_view(loaded, view_name)
    gt = loaded.ground_truth
    n = len(rel.records)

    def stage(rows: int, pairs: int, positives: int) -> dict:
        return {
            "rows": rows,
            "pairs_unordered": pairs,
            "pairs_ordered": 2 * pairs,
            "positives": positives,
            "positive_fraction": positives / pairs if pairs else 0.0,
        }

    report = {
        "dataset": loaded.spec.name,
        "base": stage(n, n * (n - 1) // 2, len(gt.matches)),
    }
    if view_name is None:
        return report
    spec = loaded.view(view_name)
    prov = provenance(spec, rel)
    in_view = {m for m in gt.matches if m[0] in prov and m[1] in prov}
    k = len(prov)
    report["view"] = view_name
    report["view_blocked"] = stage(k, k * (k - 1) // 2, len(in_view))
    pairs = build_pairs(prov)
    features = compute_features(rel, pairs, loaded.spec.all_features())
    blocked = apply_blocking(pairs, features, loaded.spec.blocking,
                             loaded.spec.all_features())
    report["feature_blocked"] = stage(k, len(blocked), len(in_view & blocked))
    return report


def quality(v_curr: ViewResult, v_clean: ViewResult,
            dcfg: DistanceConfig | None = None) -> float:
    """Cleanliness in [0,1]: one minus the clamped distance to the clean view."""
    return 1.0 - min(1.0, view_distance(v_curr, v_clean, dcfg))
