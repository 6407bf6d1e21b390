"""The active-learning cleaning loop and its pair-selection strategies.

A cleaning session scores every candidate pair by the view impact of its
records, asks a labeler for an initial impact-biased batch, trains a
classifier, and then iterates: select a batch (by impact, impact/margin,
a hybrid weight, or one of the view-agnostic baselines), label it, retrain
from scratch on everything labeled so far, re-deduplicate, recompute the
view, and append the view change to the history. The loop stops when the
budget cannot cover another full batch or when the last ``window`` view
changes are all within epsilon.

Impact scores and feature vectors are computed once up front; they are
not refreshed between iterations.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import classifier as clf
from .distance import DistanceConfig, converged, view_distance, view_impact_scores
from .errors import ConfigError, DataError, LabelingAborted
from .pairs import BlockingRule, FeatureDef, apply_blocking, build_pairs, compute_features
from .relation import GroundTruth, PairKey, Relation, apply_dedup
from .views import ViewResult, ViewSpec, evaluate, provenance

PairScores = dict[PairKey, float]

Labeler = Callable[[list[PairKey]], dict[PairKey, bool]]


class Strategy(str, Enum):
    VIEW_IMPACT = "view_impact"
    HYBRID = "hybrid"
    UNCERTAINTY = "uncertainty"
    ENTROPY = "entropy"
    RANDOM = "random"
    ROUND_ROBIN = "round_robin"


class Aggregation(str, Enum):
    MAX = "max"
    SUM = "sum"


@dataclass(frozen=True)
class DashboardSpec:
    views: tuple[ViewSpec, ...]
    aggregation: Aggregation = Aggregation.MAX

    def __post_init__(self):
        if not self.views:
            raise ConfigError("dashboard needs at least one view")


@dataclass(frozen=True)
class CleaningConfig:
    budget: int
    batch: int = 20
    initial_batch: int = 13
    alpha: float = 0.5
    strategy: Strategy = Strategy.VIEW_IMPACT
    epsilon: float = 0.01
    window: int = 3
    seed: int = 0
    kernel: str = "linear"
    holdout: bool = True
    ensemble_size: int = 10

    def __post_init__(self):
        if self.batch < 1:
            raise ConfigError("batch must be >= 1")
        if self.initial_batch > self.budget:
            raise ConfigError("initial batch cannot exceed the budget")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must be in [0, 1]")

    def distance_config(self) -> DistanceConfig:
        return DistanceConfig(epsilon=self.epsilon, window=self.window)


def oracle_labeler(gt: GroundTruth) -> Labeler:
    """Labeler that answers from benchmark ground truth."""

    def label(batch: list[PairKey]) -> dict[PairKey, bool]:
        return {pair: gt.is_match(pair) for pair in batch}

    return label


# ---------------------------------------------------------------------------
# weighted sampling


def _rng_for(seed: int, stage: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stage, purpose]))


def weighted_sample_without_replacement(
    items: list, weights, k: int, rng: np.random.Generator
) -> list:
    """Draw up to k items, each draw proportional to the remaining weights.

    While any positive mass remains, zero-weight items are unreachable;
    once it is exhausted the remaining draws are uniform.
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(items):
        raise ConfigError("weights must align with items")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ConfigError("weights must be finite and non-negative")
    alive = np.ones(len(items), dtype=bool)
    w = weights.copy()
    chosen = []
    for _ in range(min(k, len(items))):
        total = w.sum()
        if total > 0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(w), r, side="right"))
            idx = min(idx, len(items) - 1)
        else:
            candidates = np.flatnonzero(alive)
            idx = int(candidates[rng.integers(len(candidates))])
        chosen.append(items[idx])
        alive[idx] = False
        w[idx] = 0.0
    return chosen


def select_bias(b: int, ps: PairScores, rng: np.random.Generator | int) -> list[PairKey]:
    """Impact-weighted sampling without replacement over all scored pairs."""
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    items = sorted(ps)
    return weighted_sample_without_replacement(items, [ps[p] for p in items], b, rng)


def _top_pair_scores(ps: PairScores, margins: dict[PairKey, float]) -> PairScores:
    """Per record, keep only its lowest-margin pair (the classifier's least
    confident pair among those the record generates)."""
    by_tuple: dict[int, list[PairKey]] = {}
    for pair in ps:
        if pair not in margins:
            raise DataError(f"pair {pair} has no margin")
        for rid in pair:
            by_tuple.setdefault(rid, []).append(pair)
    top: PairScores = {}
    for rid in sorted(by_tuple):
        best = min(by_tuple[rid], key=lambda p: (abs(margins[p]), p))
        top[best] = ps[best]
    return top


def select_top(
    b: int, ps: PairScores, margins: dict[PairKey, float], rng: np.random.Generator | int
) -> list[PairKey]:
    """Margin-reduced, impact-weighted batch selection."""
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    return select_bias(b, _top_pair_scores(ps, margins), rng)


def select_hybrid(
    b: int,
    ps: PairScores,
    margins: dict[PairKey, float],
    uncertainty: dict[PairKey, float],
    alpha: float,
    rng: np.random.Generator | int,
) -> list[PairKey]:
    """Mix of impact score and committee uncertainty after the same
    per-record margin reduction as select_top.

    Both terms are scaled into [0, 1] by their maximum over the candidate
    set (impacts and uncertainties are already non-negative), so alpha=1
    leaves a weight proportional to the impact score alone and reproduces
    the select_top sampling distribution.
    """
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    top = _top_pair_scores(ps, margins)
    items = sorted(top)
    impact = np.array([top[p] for p in items])
    try:
        unc = np.array([uncertainty[p] for p in items])
    except KeyError as exc:
        raise DataError(f"pair {exc} has no uncertainty score") from None
    if impact.max(initial=0.0) > 0:
        impact = impact / impact.max()
    if unc.max(initial=0.0) > 0:
        unc = unc / unc.max()
    weights = alpha * impact + (1.0 - alpha) * unc
    return weighted_sample_without_replacement(items, weights, b, rng)


def select_baseline(
    kind: str,
    b: int,
    candidates: list[PairKey],
    scores: dict[PairKey, float] | None = None,
    features: dict[PairKey, np.ndarray] | None = None,
    rng: np.random.Generator | int = 0,
) -> list[PairKey]:
    """The view-agnostic selection baselines.

    uncertainty/entropy: weighted by the given ensemble score (uniform
    fallback when all scores are zero). random: uniform. round_robin: one
    descending sorted list per feature; a pair's weight is 1/(best rank it
    attains across the lists).
    """
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    if not candidates:
        return []
    items = sorted(candidates)
    if kind in ("uncertainty", "entropy"):
        if scores is None:
            raise ConfigError(f"{kind} baseline needs scores")
        weights = [scores[p] for p in items]
    elif kind == "random":
        weights = [1.0] * len(items)
    elif kind == "round_robin":
        if features is None:
            raise ConfigError("round_robin needs feature vectors")
        n_features = len(next(iter(features.values())))
        best_rank = {p: len(items) for p in items}
        for f in range(n_features):
            ordered = sorted(items, key=lambda p: (-features[p][f], p))
            for rank, p in enumerate(ordered, start=1):
                if rank < best_rank[p]:
                    best_rank[p] = rank
        weights = [1.0 / best_rank[p] for p in items]
    else:
        raise ConfigError(f"unknown baseline kind {kind!r}")
    return weighted_sample_without_replacement(items, weights, b, rng)


# ---------------------------------------------------------------------------
# candidate preparation (impact scores, features, blocking)


@dataclass(frozen=True)
class Candidates:
    """Everything computed once before a cleaning session starts."""

    specs: tuple[ViewSpec, ...]
    impact: dict[int, float]  # per record over the view(s)
    pair_scores: PairScores  # blocked pairs -> max endpoint impact
    features: dict[PairKey, np.ndarray]
    feature_defs: tuple[FeatureDef, ...]
    provenance_ids: frozenset[int]
    unblocked_pairs: frozenset[PairKey]


def _aggregate_impacts(
    per_view: list[dict[int, float]], aggregation: Aggregation
) -> dict[int, float]:
    combined: dict[int, float] = {}
    for table in per_view:
        for rid, score in table.items():
            if rid in combined:
                if aggregation is Aggregation.MAX:
                    combined[rid] = max(combined[rid], score)
                else:
                    combined[rid] += score
            else:
                combined[rid] = score
    return combined


def prepare_candidates(
    specs: list[ViewSpec],
    rel: Relation,
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
    dcfg: DistanceConfig | None = None,
    aggregation: Aggregation = Aggregation.MAX,
    impact_tables: list[dict[int, float]] | None = None,
    features: dict[PairKey, np.ndarray] | None = None,
) -> Candidates:
    """Score tuples, build candidate pairs over the provenance, compute
    features, and apply feature blocking. ``impact_tables`` and ``features``
    may be passed to reuse earlier computations (neither changes
    mid-session)."""
    if not specs:
        raise ConfigError("at least one view is required")
    dcfg = dcfg or DistanceConfig()
    if impact_tables is None:
        impact_tables = [view_impact_scores(spec, rel, dcfg) for spec in specs]
    impact = _aggregate_impacts(impact_tables, aggregation)
    prov: set[int] = set()
    for spec in specs:
        prov |= provenance(spec, rel)
    pairs = build_pairs(prov)
    if features is None or not pairs <= set(features):
        features = compute_features(rel, pairs, feature_defs)
    blocked = apply_blocking(pairs, features, rule, feature_defs)
    scores = {
        pair: max(impact.get(pair[0], 0.0), impact.get(pair[1], 0.0)) for pair in blocked
    }
    return Candidates(
        specs=tuple(specs),
        impact=impact,
        pair_scores=scores,
        features=features,
        feature_defs=tuple(feature_defs),
        provenance_ids=frozenset(prov),
        unblocked_pairs=frozenset(pairs),
    )


def pair_scores(
    spec: ViewSpec,
    rel: Relation,
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
    dcfg: DistanceConfig | None = None,
) -> PairScores:
    """Blocked candidate pairs keyed by the larger of their two records'
    view impact scores."""
    return prepare_candidates([spec], rel, rule, feature_defs, dcfg).pair_scores


def dashboard_pair_scores(
    dash: DashboardSpec,
    rel: Relation,
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
    dcfg: DistanceConfig | None = None,
) -> PairScores:
    """As pair_scores, with per-tuple impact aggregated across the
    dashboard's views by MAX or SUM."""
    return prepare_candidates(
        list(dash.views), rel, rule, feature_defs, dcfg, aggregation=dash.aggregation
    ).pair_scores


# ---------------------------------------------------------------------------
# the session itself


@dataclass(frozen=True)
class StageMetrics:
    """One row per completed stage (stage 0 is the pre-cleaning state)."""

    iteration: int
    labels_used: int
    view_change: float | None
    distance_to_clean: dict[str, float] | None
    f1: float | None


@dataclass(frozen=True)
class SessionState:
    """Snapshot of a session; serializable and hashable via digest()."""

    labeled: tuple[tuple[PairKey, bool], ...]
    initial_batch_size: int
    iteration: int
    budget_left: int
    history: tuple[float, ...]
    stopped: bool
    reason: str | None
    pending: tuple[PairKey, ...]
    dups: tuple[PairKey, ...]
    views: dict[str, ViewResult]
    metrics: tuple[StageMetrics, ...] = ()

    def digest(self) -> str:
        payload = {
            "labeled": [[list(p), l] for p, l in self.labeled],
            "iteration": self.iteration,
            "budget_left": self.budget_left,
            "history": [round(h, 12) for h in self.history],
            "stopped": self.stopped,
            "reason": self.reason,
            "dups": [list(p) for p in self.dups],
            "views": {
                name: [[("" if v is None else v) for v in row] for row in vr.rows]
                for name, vr in self.views.items()
            },
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


class CleaningSession:
    """Single-writer stepwise cleaning loop.

    The caller fetches ``pending_batch`` and answers via ``submit_labels``;
    each submission advances exactly one stage. ``run_cleaning`` drives the
    same machinery with a callback labeler, so an interactive session
    replayed with the same labels and seed lands in an identical state.
    """

    def __init__(
        self,
        candidates: Candidates,
        rel: Relation,
        cfg: CleaningConfig,
        ground_truth: GroundTruth | None = None,
    ):
        self.cands = candidates
        self.rel = rel
        self.cfg = cfg
        self.gt = ground_truth
        self.dcfg = cfg.distance_config()

        blocked = sorted(candidates.pair_scores)
        holdout_size = len(blocked) // 2 if cfg.holdout else 0
        rng = _rng_for(cfg.seed, 0, 2)
        shuffled = list(blocked)
        rng.shuffle(shuffled)
        self.holdout: list[PairKey] = sorted(shuffled[:holdout_size])
        self.remaining: PairScores = {
            p: candidates.pair_scores[p] for p in shuffled[holdout_size:]
        }

        self.labeled: dict[PairKey, bool] = {}
        self.l0: list[PairKey] = []
        self.t_acc: list[PairKey] = []
        self.iteration = 0
        self.budget_left = cfg.budget
        self.history: list[float] = []
        self.stopped = False
        self.reason: str | None = None
        self.model: clf.Model | None = None
        self.margins: dict[PairKey, float] = {}
        self.dups: set[PairKey] = set()

        self.v_dirty = {s.name: evaluate(s, rel) for s in candidates.specs}
        self.views = dict(self.v_dirty)
        self.v_clean = (
            {s.name: evaluate(s, apply_dedup(rel, set(ground_truth.matches))) for s in candidates.specs}
            if ground_truth is not None
            else None
        )
        self.metrics: list[StageMetrics] = [
            StageMetrics(0, 0, None, self._distance_to_clean(), None)
        ]
        self.pending: list[PairKey] = self._select_initial()
        if not self.pending:  # nothing survived blocking: nothing to label
            self.stopped, self.reason = True, "budget"

    # -- selection ---------------------------------------------------------

    def _select_initial(self) -> list[PairKey]:
        b = min(self.cfg.initial_batch, self.budget_left)
        rng = _rng_for(self.cfg.seed, 1, 0)
        strat = self.cfg.strategy
        if strat in (Strategy.VIEW_IMPACT, Strategy.HYBRID):
            return select_bias(b, self.remaining, rng)
        if strat is Strategy.ROUND_ROBIN:
            return select_baseline(
                "round_robin", b, list(self.remaining), features=self.cands.features, rng=rng
            )
        # the classifier-centric baselines start from a plain random sample
        return select_baseline("random", b, list(self.remaining), rng=rng)

    def _select_next(self) -> list[PairKey]:
        stage = self.iteration + 1
        rng = _rng_for(self.cfg.seed, stage, 0)
        b = self.cfg.batch
        strat = self.cfg.strategy
        if strat is Strategy.VIEW_IMPACT:
            return select_top(b, self.remaining, self.margins, rng)
        if strat is Strategy.HYBRID:
            unc = self._ensemble(stage, "uncertainty")
            return select_hybrid(b, self.remaining, self.margins, unc, self.cfg.alpha, rng)
        if strat in (Strategy.UNCERTAINTY, Strategy.ENTROPY):
            scores = self._ensemble(stage, strat.value)
            return select_baseline(strat.value, b, list(self.remaining), scores=scores, rng=rng)
        if strat is Strategy.ROUND_ROBIN:
            return select_baseline(
                "round_robin", b, list(self.remaining), features=self.cands.features, rng=rng
            )
        return select_baseline("random", b, list(self.remaining), rng=rng)

    def _ensemble(self, stage: int, which: str) -> dict[PairKey, float]:
        data = self._training_data()
        items = sorted(self.remaining)
        feats = np.array([self.cands.features[p] for p in items])
        seed = int(np.random.SeedSequence([self.cfg.seed, stage, 1]).generate_state(1)[0])
        scores = clf.ensemble_scores(
            data, items, feats, k=self.cfg.ensemble_size, seed=seed, kernel=self.cfg.kernel
        )
        return {
            s.pair: (s.uncertainty if which == "uncertainty" else s.entropy) for s in scores
        }

    # -- state transitions ---------------------------------------------------

    def _training_data(self) -> list[clf.LabeledPair]:
        return [
            clf.LabeledPair(p, self.cands.features[p], lab)
            for p, lab in self.labeled.items()
        ]

    def _retrain_and_reclean(self) -> None:
        self.model = clf.train(self._training_data(), kernel=self.cfg.kernel)
        targets = sorted(self.remaining) + self.holdout
        if targets:
            feats = np.array([self.cands.features[p] for p in targets])
            preds = clf.predict(self.model, targets, feats)
        else:
            preds = []
        self.margins = {p.pair: p.decision for p in preds}
        predicted_pos = {p.pair for p in preds if p.label}
        user_pos = {p for p, lab in self.labeled.items() if lab}
        self.dups = user_pos | predicted_pos
        deduped = apply_dedup(self.rel, self.dups)
        self.views = {s.name: evaluate(s, deduped) for s in self.cands.specs}

    def _view_change(self, before: dict[str, ViewResult]) -> float:
        return max(
            view_distance(before[name], self.views[name], self.dcfg)
            for name in self.views
        )

    def _distance_to_clean(self) -> dict[str, float] | None:
        if self.v_clean is None:
            return None
        return {
            name: view_distance(self.views[name], self.v_clean[name], self.dcfg)
            for name in self.views
        }

    def _f1(self) -> float | None:
        if self.gt is None or not self.holdout or self.model is None:
            return None
        holdout_data = [
            clf.LabeledPair(p, self.cands.features[p], self.gt.is_match(p))
            for p in self.holdout
        ]
        return clf.f1_on_holdout(self.model, holdout_data)

    def pending_batch(self) -> list[PairKey]:
        return list(self.pending)

    def labels_used(self) -> int:
        return len(self.labeled)

    def submit_labels(self, labels: dict[PairKey, bool]) -> None:
        """Advance one stage. The submission must cover exactly the pending
        batch; anything else is rejected atomically."""
        if self.stopped:
            raise DataError("session already stopped")
        if set(labels) != set(self.pending):
            raise DataError(
                f"labels must cover exactly the outstanding batch "
                f"({len(self.pending)} pairs), got {len(labels)}"
            )
        batch = list(self.pending)
        before = dict(self.views)
        for pair in batch:
            self.labeled[pair] = bool(labels[pair])
            self.remaining.pop(pair, None)
        if self.iteration == 0:
            self.l0 = batch
        else:
            self.t_acc.extend(batch)
        self.budget_left -= len(batch)
        self.iteration += 1
        self._retrain_and_reclean()
        baseline = self.v_dirty if self.iteration == 1 else before
        self.history.append(self._view_change(baseline))
        self.metrics.append(
            StageMetrics(
                self.iteration,
                self.labels_used(),
                self.history[-1],
                self._distance_to_clean(),
                self._f1(),
            )
        )
        self._maybe_stop()
        if not self.stopped:
            self.pending = self._select_next()
            if not self.pending:
                self.pending = []
                self.stopped, self.reason = True, "budget"
        else:
            self.pending = []

    def _maybe_stop(self) -> None:
        if converged(self.history, self.dcfg):
            self.stopped, self.reason = True, "converged"
        elif self.budget_left < self.cfg.batch or not self.remaining:
            self.stopped, self.reason = True, "budget"

    def state(self) -> SessionState:
        return SessionState(
            labeled=tuple(self.labeled.items()),
            initial_batch_size=len(self.l0),
            iteration=self.iteration,
            budget_left=self.budget_left,
            history=tuple(self.history),
            stopped=self.stopped,
            reason=self.reason,
            pending=tuple(self.pending),
            dups=tuple(sorted(self.dups)),
            views=dict(self.views),
            metrics=tuple(self.metrics),
        )


def run_cleaning(
    spec: ViewSpec | DashboardSpec,
    rel: Relation,
    labeler: Labeler,
    cfg: CleaningConfig,
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
    ground_truth: GroundTruth | None = None,
    candidates: Candidates | None = None,
) -> SessionState:
    """Run the whole loop against a callback labeler and return the final
    state. A labeler exception aborts with the resumable state attached."""
    session = start_session(spec, rel, cfg, rule, feature_defs, ground_truth, candidates)
    while not session.stopped:
        batch = session.pending_batch()
        try:
            labels = labeler(batch)
        except Exception as exc:  # noqa: BLE001 - labelers are user callbacks
            raise LabelingAborted(str(exc), state=session.state()) from exc
        session.submit_labels(labels)
    return session.state()


def start_session(
    spec: ViewSpec | DashboardSpec,
    rel: Relation,
    cfg: CleaningConfig,
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
    ground_truth: GroundTruth | None = None,
    candidates: Candidates | None = None,
) -> CleaningSession:
    if isinstance(spec, DashboardSpec):
        specs, aggregation = list(spec.views), spec.aggregation
    else:
        specs, aggregation = [spec], Aggregation.MAX
    if candidates is None:
        candidates = prepare_candidates(
            specs, rel, rule, feature_defs, cfg.distance_config(), aggregation
        )
    return CleaningSession(candidates, rel, cfg, ground_truth)
