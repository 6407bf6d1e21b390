"""Candidate pairs, similarity features, and threshold blocking.

Candidate pairs are all unordered pairs over a set of record ids (in
practice the provenance of the view being cleaned). Each pair gets a
vector of similarity features in [0, 1] where 1 means identical; a
blocking rule then keeps only pairs whose features clear per-attribute
thresholds, which removes the bulk of obvious non-matches before any
learning happens.

Token-based measures (jaccard, containment, cosine) lowercase the text,
turn punctuation into spaces, and split on whitespace; set measures
de-duplicate tokens while cosine keeps counts. A null on either side of a
pair always yields similarity 0 rather than an error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .relation import PairKey, Relation, Value, pair_key

_PUNCT = re.compile(r"[^\w\s]|_")

SIMILARITY_FUNCTIONS = (
    "levenshtein_norm",
    "jaccard",
    "jaccard_containment",
    "cosine",
    "norm_euclid",
)


def tokenize(text: str) -> list[str]:
    return _PUNCT.sub(" ", text.lower()).split()


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(fn: str, a: Value, b: Value, norm: float | None = None) -> float:
    """Similarity in [0, 1] between two cell values; 1 means identical."""
    if fn not in SIMILARITY_FUNCTIONS:
        raise ConfigError(f"unknown similarity function {fn!r}")
    if a is None or b is None:
        return 0.0
    if fn == "norm_euclid":
        if norm is None:
            raise ConfigError("norm_euclid needs a population norm")
        if norm == 0:
            return 1.0  # both values are zero
        return max(0.0, 1.0 - abs(float(a) - float(b)) / norm)
    sa, sb = str(a).strip().lower(), str(b).strip().lower()
    if fn == "levenshtein_norm":
        longest = max(len(sa), len(sb))
        if longest == 0:
            return 1.0
        return 1.0 - levenshtein(sa, sb) / longest
    ta, tb = tokenize(sa), tokenize(sb)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    if fn == "cosine":
        counts_a: dict[str, int] = {}
        counts_b: dict[str, int] = {}
        for t in ta:
            counts_a[t] = counts_a.get(t, 0) + 1
        for t in tb:
            counts_b[t] = counts_b.get(t, 0) + 1
        if counts_a == counts_b:
            return 1.0
        dot = sum(counts_a[t] * counts_b.get(t, 0) for t in counts_a)
        na = math.sqrt(sum(c * c for c in counts_a.values()))
        nb = math.sqrt(sum(c * c for c in counts_b.values()))
        return min(1.0, dot / (na * nb))
    set_a, set_b = set(ta), set(tb)
    inter = len(set_a & set_b)
    if fn == "jaccard":
        return inter / len(set_a | set_b)
    return inter / min(len(set_a), len(set_b))  # jaccard_containment


@dataclass(frozen=True)
class FeatureDef:
    """One similarity feature: a column and the function applied to it."""

    name: str
    column: str
    fn: str

    def __post_init__(self):
        if self.fn not in SIMILARITY_FUNCTIONS:
            raise ConfigError(f"unknown similarity function {self.fn!r}")


@dataclass(frozen=True)
class Threshold:
    """Keep a pair when feature >= threshold (similarity mode) or when
    1 - feature <= threshold (distance mode)."""

    feature: str
    threshold: float
    mode: str = "similarity"  # or "distance"

    def passes(self, value: float) -> bool:
        if self.mode == "similarity":
            return value >= self.threshold
        return (1.0 - value) <= self.threshold


@dataclass(frozen=True)
class BlockingRule:
    """Conjunction of clauses; each clause is a disjunction of thresholds.

    An empty rule keeps everything.
    """

    clauses: tuple[tuple[Threshold, ...], ...] = ()

    def keeps(self, features: dict[str, float]) -> bool:
        for clause in self.clauses:
            ok = False
            for atom in clause:
                if atom.feature not in features:
                    raise DataError(f"pair has no feature {atom.feature!r}")
                if atom.passes(features[atom.feature]):
                    ok = True
                    break
            if not ok:
                return False
        return True


def build_pairs(ids: set[int]) -> set[PairKey]:
    """All unordered candidate pairs over the given ids, canonical order."""
    return {pair_key(a, b) for a, b in combinations(sorted(ids), 2)}


def population_norms(
    rel: Relation, pairs: set[PairKey], feature_defs: list[FeatureDef]
) -> dict[str, float]:
    """Per norm_euclid feature, max |value| among records in the pair set."""
    involved = {rid for pair in pairs for rid in pair}
    by_id = {r.id: r for r in rel.records if r.id in involved}
    norms: dict[str, float] = {}
    for fd in feature_defs:
        if fd.fn != "norm_euclid":
            continue
        peak = 0.0
        idx = rel.column_index(fd.column)
        for rec in by_id.values():
            v = rec.values[idx]
            if v is not None:
                peak = max(peak, abs(float(v)))
        norms[fd.name] = peak
    return norms


def compute_features(
    rel: Relation,
    pairs: set[PairKey],
    feature_defs: list[FeatureDef],
) -> dict[PairKey, np.ndarray]:
    """Feature vector per pair, aligned with feature_defs order.

    Computed once per candidate set; norm_euclid norms are fixed from this
    population at computation time.
    """
    names = [fd.name for fd in feature_defs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate feature names: {names}")
    norms = population_norms(rel, pairs, feature_defs)
    by_id = {r.id: r for r in rel.records}
    cols = [rel.column_index(fd.column) for fd in feature_defs]
    out: dict[PairKey, np.ndarray] = {}
    for pair in sorted(pairs):
        a, b = by_id[pair[0]], by_id[pair[1]]
        vec = np.empty(len(feature_defs))
        for k, (fd, col) in enumerate(zip(feature_defs, cols)):
            vec[k] = similarity(fd.fn, a.values[col], b.values[col], norms.get(fd.name))
        out[pair] = vec
    return out


def feature_map(vector: np.ndarray, feature_defs: list[FeatureDef]) -> dict[str, float]:
    return {fd.name: float(v) for fd, v in zip(feature_defs, vector)}


def apply_blocking(
    pairs: set[PairKey],
    features: dict[PairKey, np.ndarray],
    rule: BlockingRule,
    feature_defs: list[FeatureDef],
) -> set[PairKey]:
    """Pure threshold filter; a pair survives iff every clause passes."""
    kept = set()
    for pair in pairs:
        if pair not in features:
            raise DataError(f"pair {pair} has no feature vector")
        if rule.keeps(feature_map(features[pair], feature_defs)):
            kept.add(pair)
    return kept


# ---------------------------------------------------------------------------
# flat-file cache so experiments skip recomputation

def save_feature_cache(
    path: str | Path,
    features: dict[PairKey, np.ndarray],
    feature_defs: list[FeatureDef],
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id1\tid2\t" + "\t".join(fd.name for fd in feature_defs) + "\n")
        for (a, b) in sorted(features):
            vals = "\t".join(f"{v:.12g}" for v in features[(a, b)])
            fh.write(f"{a}\t{b}\t{vals}\n")


def load_feature_cache(
    path: str | Path, feature_defs: list[FeatureDef]
) -> dict[PairKey, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature cache not found: {path}")
    out: dict[PairKey, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        expected = ["id1", "id2"] + [fd.name for fd in feature_defs]
        if header != expected:
            raise ConfigError(f"feature cache header {header} != {expected}")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            key = pair_key(int(parts[0]), int(parts[1]))
            out[key] = np.array([float(x) for x in parts[2:]])
    return out


def blocking_rule_from_dict(doc: list) -> BlockingRule:
    """Rule from a list of clauses; each clause is a list of atom dicts
    {feature, min_similarity} or {feature, max_distance}."""
    clauses = []
    for clause in doc:
        atoms = []
        for atom in clause:
            if "min_similarity" in atom:
                atoms.append(Threshold(atom["feature"], float(atom["min_similarity"])))
            elif "max_distance" in atom:
                atoms.append(
                    Threshold(atom["feature"], float(atom["max_distance"]), mode="distance")
                )
            else:
                raise ConfigError(f"blocking atom needs min_similarity or max_distance: {atom}")
        clauses.append(tuple(atoms))
    return BlockingRule(tuple(clauses))
