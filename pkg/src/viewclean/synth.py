"""Seeded synthetic dedup benchmark: base records plus perturbed copies.

Records mimic a small product/venue table: a multi-word name drawn from a
syllable pool (so unrelated names still show moderate character overlap,
which keeps the blocking step honest), a skewed category column that gives
top-k views something to rank, a two-value city column acting as the view
selection, and a price. Duplicates copy a base record and perturb the name
at character level and the price multiplicatively, both scaled by
``noise``; with noise 0 the planted pairs are exact copies.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .pairs import FeatureDef, Threshold, BlockingRule
from .relation import AttributeType, GroundTruth, Record, Relation, pair_key
from .views import Aggregate, ViewSpec, p_and, p_eq, p_lt

_SYLLABLES = [
    "ka", "ro", "mi", "ta", "lu", "ne", "so", "vi", "da", "pe",
    "ri", "no", "za", "be", "ku", "ma", "ti", "lo", "sa", "ve",
    "hu", "fe", "gi", "wo", "xa", "ce", "ju", "py",
]
CATEGORIES = [
    "arcade", "bistro", "cantina", "diner", "espresso", "fondue", "grill", "haven",
]
_CATEGORY_WEIGHTS = np.array([0.22, 0.18, 0.15, 0.12, 0.10, 0.09, 0.08, 0.06])
CITIES = ("alpha", "beta")
_CITY_ALPHA_PROB = 0.65
# optional extra-noise subpopulation of duplicates (off by default: copies
# that blend into the non-duplicate band can only be resolved by labels and
# put a floor under the reachable view distance)
_HARD_DUP_FRACTION = 0.0
_HARD_DUP_FACTOR = 3.0

SCHEMA = [
    ("name", AttributeType.TEXT),
    ("category", AttributeType.TEXT),
    ("city", AttributeType.TEXT),
    ("price", AttributeType.NUMBER),
]

FEATURES = [
    FeatureDef("name_lev", "name", "levenshtein_norm"),
    FeatureDef("name_jaccard", "name", "jaccard"),
    FeatureDef("category_lev", "category", "levenshtein_norm"),
    FeatureDef("price_sim", "price", "norm_euclid"),
]

BLOCKING = BlockingRule(((Threshold("name_lev", 0.42),),))


def default_views() -> dict[str, ViewSpec]:
    in_alpha = p_eq("city", "alpha")
    count = Aggregate("count", name="count")
    return {
        "top3": ViewSpec(
            name="top3",
            selection=in_alpha,
            group_by=("category",),
            aggregates=(count,),
            order_by=(("count", "desc"),),
            limit=3,
        ),
        # top categories among the budget-priced listings, the slice where
        # duplicate entries concentrate
        "budget_top3": ViewSpec(
            name="budget_top3",
            selection=p_and(in_alpha, p_lt("price", 150.0)),
            group_by=("category",),
            aggregates=(count,),
            order_by=(("count", "desc"),),
            limit=3,
        ),
        "groups": ViewSpec(
            name="groups",
            selection=in_alpha,
            group_by=("category",),
            aggregates=(count,),
        ),
        "count": ViewSpec(name="count", selection=in_alpha, aggregates=(count,)),
        "select_alpha": ViewSpec(name="select_alpha", selection=in_alpha),
        "avg_price": ViewSpec(
            name="avg_price",
            selection=in_alpha,
            group_by=("category",),
            aggregates=(Aggregate("avg", column="price", name="avg_price"),),
        ),
    }


def _word(rng: np.random.Generator) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.integers(2, 4)))


def _name(rng: np.random.Generator) -> str:
    return " ".join(_word(rng) for _ in range(rng.integers(3, 5)))


def _perturb_text(text: str, noise: float, rng: np.random.Generator) -> str:
    # each character is edited with probability noise/2, split evenly
    # between substitution and deletion
    out = []
    for ch in text:
        if ch != " " and rng.random() < noise * 0.5:
            if rng.random() < 0.5:
                out.append(chr(ord("a") + int(rng.integers(26))))
            # else: drop the character
        else:
            out.append(ch)
    return "".join(out)


def generate_synthetic(
    n: int, dup_rate: float, noise: float, seed: int = 0
) -> tuple[Relation, GroundTruth]:
    """Build n base records and ceil(n * dup_rate) perturbed duplicates.

    Ground truth lists exactly the planted (base, copy) pairs; copies keep
    the category and city of their base record so they land in the same
    view groups.
    """
    if not 0 < dup_rate < 1:
        raise ConfigError("dup_rate must be in (0, 1)")
    if noise < 0:
        raise ConfigError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    records = []
    for rid in range(n):
        records.append(
            Record(
                rid,
                (
                    _name(rng),
                    CATEGORIES[int(rng.choice(len(CATEGORIES), p=_CATEGORY_WEIGHTS))],
                    CITIES[0] if rng.random() < _CITY_ALPHA_PROB else CITIES[1],
                    float(round(rng.uniform(5.0, 500.0), 2)),
                ),
            )
        )
    k = int(np.ceil(n * dup_rate))
    # low-priced listings get re-entered far more often, and busy categories
    # accumulate extra copies, so duplicate origination is tilted that way
    cat_index = {c: i for i, c in enumerate(CATEGORIES)}
    record_w = np.array(
        [
            float(_CATEGORY_WEIGHTS[cat_index[r.values[1]]]) ** 2
            * (4.0 if r.values[3] is not None and r.values[3] < 150.0 else 1.0)
            for r in records
        ]
    )
    originals = rng.choice(n, size=k, replace=False, p=record_w / record_w.sum())
    rows: list[tuple] = [r.values for r in records]
    planted: list[tuple[int, int]] = []  # (base row index, copy row index)
    for orig in sorted(int(o) for o in originals):
        name, category, city, price = rows[orig]
        hard = rng.random() < _HARD_DUP_FRACTION
        name_noise = noise * (_HARD_DUP_FACTOR if hard else 1.0)
        new_name = _perturb_text(name, name_noise, rng)
        new_price = (
            None
            if price is None
            else float(round(price * (1.0 + noise * rng.uniform(-1.0, 1.0)), 2))
        )
        planted.append((orig, len(rows)))
        rows.append((new_name, category, city, new_price))
    # shuffle before assigning ids so copies are interleaved with base rows,
    # as in a real unioned dataset
    order = rng.permutation(len(rows))
    new_id = {int(old): new for new, old in enumerate(order)}
    shuffled = [Record(new, rows[int(old)]) for new, old in enumerate(order)]
    shuffled.sort(key=lambda r: r.id)
    matches = {pair_key(new_id[a], new_id[b]) for a, b in planted}
    rel = Relation(tuple(SCHEMA), tuple(shuffled))
    return rel, GroundTruth(frozenset(matches))
