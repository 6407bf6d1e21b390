"""Distances between views and per-tuple view impact scores.

A view row is compared attribute by attribute: text attributes contribute
0/1 (string equality), numeric attributes contribute |a-b| normalized by
the largest absolute value the column takes across *both* views being
compared. The tuple distance is the Euclidean norm of that vector (it can
exceed 1 for multi-attribute rows), and the view distance is the earth
mover's distance between the two row sets under uniform per-row weights.

The impact of a record on a view is the view distance between the view
evaluated with and without that record; records outside the view's
provenance never change the result and are simply absent from the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .emd import emd_uniform
from .errors import EvaluationError
from .relation import AttributeType, Relation
from .views import ViewResult, ViewSpec, evaluate, provenance

ImpactTable = dict[int, float]


@dataclass(frozen=True)
class DistanceConfig:
    """Convergence parameters plus optional fixed per-column norms.

    ``norms`` is aligned with the view schema (None for text columns).
    When left unset, view_distance derives norms from the two views it is
    given, which reproduces the per-call normalization used throughout.
    """

    epsilon: float = 0.01
    window: int = 3
    norms: tuple[float | None, ...] | None = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.window < 1:
            raise ValueError("window must be a positive integer")


def norms_for_views(v1: ViewResult, v2: ViewResult) -> tuple[float | None, ...]:
    """Per numeric column, max |value| over the rows of both views."""
    out: list[float | None] = []
    for idx, (_, atype) in enumerate(v1.schema):
        if atype is not AttributeType.NUMBER:
            out.append(None)
            continue
        peak = 0.0
        for rows in (v1.rows, v2.rows):
            for row in rows:
                if row[idx] is not None:
                    peak = max(peak, abs(float(row[idx])))
        out.append(peak)
    return tuple(out)


def attribute_distance(a, b, atype: AttributeType, norm: float = 1.0) -> float:
    """Distance in [0, 1] between two cells of the same attribute."""
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        return 1.0
    if atype is AttributeType.TEXT:
        return 0.0 if a == b else 1.0
    if norm == 0:
        return 0.0  # column is constant zero
    return abs(float(a) - float(b)) / norm


def tuple_distance(row_a, row_b, schema, cfg: DistanceConfig) -> float:
    """Euclidean norm of the per-attribute distance vector."""
    if len(row_a) != len(row_b) or len(row_a) != len(schema):
        raise EvaluationError("tuple distance requires rows of one schema")
    if cfg.norms is not None and len(cfg.norms) != len(schema):
        raise EvaluationError(
            f"{len(cfg.norms)} norms for a {len(schema)}-column schema"
        )
    norms = cfg.norms if cfg.norms is not None else (1.0,) * len(schema)
    acc = 0.0
    for a, b, (_, atype), norm in zip(row_a, row_b, schema, norms):
        d = attribute_distance(a, b, atype, norm if norm is not None else 1.0)
        acc += d * d
    return math.sqrt(acc)


def _cost_matrix(v1: ViewResult, v2: ViewResult, cfg: DistanceConfig) -> np.ndarray:
    cost = np.zeros((len(v1.rows), len(v2.rows)))
    for i, row_i in enumerate(v1.rows):
        for j, row_j in enumerate(v2.rows):
            cost[i, j] = tuple_distance(row_i, row_j, v1.schema, cfg)
    return cost


def view_distance(v1: ViewResult, v2: ViewResult, cfg: DistanceConfig | None = None) -> float:
    """Earth mover's distance between two views of the same schema.

    Each row carries weight 1/|view|; ground distances are tuple distances
    with per-call numeric normalization unless cfg pins the norms. An empty
    view is at distance 1.0 from any non-empty view and 0.0 from another
    empty view (a bounded sentinel; the solver itself needs mass on both
    sides).
    """
    d, _ = view_distance_with_flow(v1, v2, cfg)
    return d


def view_distance_with_flow(
    v1: ViewResult, v2: ViewResult, cfg: DistanceConfig | None = None
):
    """As view_distance, also returning the optimal flow matrix."""
    if [n for n, _ in v1.schema] != [n for n, _ in v2.schema]:
        raise EvaluationError(
            f"view schema mismatch: {v1.schema} vs {v2.schema}"
        )
    if not v1.rows and not v2.rows:
        return 0.0, np.zeros((0, 0))
    if not v1.rows or not v2.rows:
        return 1.0, np.zeros((len(v1.rows), len(v2.rows)))
    cfg = cfg or DistanceConfig()
    if cfg.norms is None:
        cfg = replace(cfg, norms=norms_for_views(v1, v2))
    return emd_uniform(_cost_matrix(v1, v2, cfg))


def view_impact_scores(
    spec: ViewSpec, rel: Relation, cfg: DistanceConfig | None = None
) -> ImpactTable:
    """Impact of each provenance record: distance between the view with and
    without that record. Records outside provenance are absent (zero)."""
    cfg = cfg or DistanceConfig()
    base = evaluate(spec, rel)
    scores: ImpactTable = {}
    for rid in sorted(provenance(spec, rel)):
        without = evaluate(spec, rel.without({rid}))
        scores[rid] = view_distance(base, without, cfg)
    return scores


def converged(history: list[float], cfg: DistanceConfig) -> bool:
    """True once the last ``window`` view changes are all within epsilon."""
    if len(history) < cfg.window:
        return False
    return all(h <= cfg.epsilon for h in history[-cfg.window :])
