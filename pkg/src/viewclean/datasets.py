"""Dataset registry: benchmark configs plus the synthetic fallback.

The two benchmark datasets are not redistributable, so only their configs
ship here; the user supplies the delimited files in a data directory. Row
and match counts are validated against the documented figures with a
warning, never a hard failure, since small re-releases of the benchmarks
differ by a few rows.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError, DataError
from .pairs import BlockingRule, FeatureDef, blocking_rule_from_dict
from .relation import AttributeType, GroundTruth, Relation, load_ground_truth, load_relation
from .synth import BLOCKING as SYNTH_BLOCKING
from .synth import FEATURES as SYNTH_FEATURES
from .synth import SCHEMA as SYNTH_SCHEMA
from .synth import default_views, generate_synthetic
from .views import ViewSpec, view_spec_from_dict

log = logging.getLogger(__name__)

BUILTIN_CONFIGS = ("restaurants", "products")


@dataclass(frozen=True)
class DatasetSpec:
    """Everything needed to load and clean one dataset."""

    name: str
    schema: tuple[tuple[str, AttributeType], ...]
    features: tuple[FeatureDef, ...]  # learning features
    blocking_features: tuple[FeatureDef, ...]  # extra features for blocking only
    blocking: BlockingRule
    views: dict[str, ViewSpec]
    data_file: str | None = None
    matches_file: str | None = None
    scores_file: str | None = None
    expected_rows: int | None = None
    expected_matches: int | None = None
    synthetic: dict | None = None  # generator parameters when synthetic

    def all_features(self) -> list[FeatureDef]:
        return list(self.features) + list(self.blocking_features)


@dataclass
class LoadedDataset:
    spec: DatasetSpec
    relation: Relation
    ground_truth: GroundTruth
    scores_relation: Relation | None = None
    views: dict[str, ViewSpec] = field(default_factory=dict)

    def view(self, name: str) -> ViewSpec:
        try:
            return self.views[name]
        except KeyError:
            raise ConfigError(
                f"dataset {self.spec.name!r} has no view {name!r}; "
                f"available: {sorted(self.views)}"
            ) from None


def _spec_from_config(doc: dict) -> DatasetSpec:
    schema = tuple((n, AttributeType(t)) for n, t in doc["schema"])
    features = tuple(
        FeatureDef(f["name"], f["column"], f["fn"]) for f in doc["features"]
    )
    blocking_features = tuple(
        FeatureDef(f["name"], f["column"], f["fn"])
        for f in doc.get("blocking_features", [])
    )
    views = {}
    for entry in doc.get("views", []):
        spec = view_spec_from_dict(entry)
        views[spec.name] = spec
    return DatasetSpec(
        name=doc["name"],
        schema=schema,
        features=features,
        blocking_features=blocking_features,
        blocking=blocking_rule_from_dict(doc.get("blocking", [])),
        views=views,
        data_file=doc.get("data_file"),
        matches_file=doc.get("matches_file"),
        scores_file=doc.get("scores_file"),
        expected_rows=doc.get("expected_rows"),
        expected_matches=doc.get("expected_matches"),
    )


def builtin_spec(name: str) -> DatasetSpec:
    if name == "synthetic":
        return synthetic_spec()
    if name not in BUILTIN_CONFIGS:
        raise ConfigError(
            f"unknown dataset {name!r}; built-ins: {BUILTIN_CONFIGS + ('synthetic',)}"
        )
    text = resources.files("viewclean.configs").joinpath(f"{name}.yaml").read_text()
    return _spec_from_config(yaml.safe_load(text))


def synthetic_spec(n: int = 300, dup_rate: float = 0.15, noise: float = 0.1,
                   seed: int = 0) -> DatasetSpec:
    return DatasetSpec(
        name="synthetic",
        schema=tuple(SYNTH_SCHEMA),
        features=tuple(SYNTH_FEATURES),
        blocking_features=(),
        blocking=SYNTH_BLOCKING,
        views=default_views(),
        synthetic={"n": n, "dup_rate": dup_rate, "noise": noise, "seed": seed},
    )


def spec_from_file(path: str | Path) -> DatasetSpec:
    with open(path, encoding="utf-8") as fh:
        return _spec_from_config(yaml.safe_load(fh))


def load_dataset(spec: DatasetSpec, data_dir: str | Path | None = None) -> LoadedDataset:
    """Materialize a dataset: generate (synthetic) or read files (benchmark)."""
    if spec.synthetic is not None:
        rel, gt = generate_synthetic(**spec.synthetic)
        return LoadedDataset(spec, rel, gt, views=dict(spec.views))
    if data_dir is None:
        raise DataError(f"dataset {spec.name!r} needs --data-dir with {spec.data_file}")
    data_dir = Path(data_dir)
    data_path = data_dir / spec.data_file
    matches_path = data_dir / spec.matches_file
    missing = [str(p) for p in (data_path, matches_path) if not p.exists()]
    if missing:
        raise DataError(
            f"dataset {spec.name!r}: expected files not found: {', '.join(missing)}"
        )
    rel = load_relation(data_path, list(spec.schema))
    gt = load_ground_truth(matches_path, valid_ids=rel.ids())
    if spec.expected_rows is not None and len(rel.records) != spec.expected_rows:
        warnings.warn(
            f"{spec.name}: {len(rel.records)} rows, documented benchmark has "
            f"{spec.expected_rows}", stacklevel=2,
        )
    if spec.expected_matches is not None and len(gt.matches) != spec.expected_matches:
        warnings.warn(
            f"{spec.name}: {len(gt.matches)} match pairs, documented benchmark has "
            f"{spec.expected_matches}", stacklevel=2,
        )
    scores_rel = None
    if spec.scores_file and (data_dir / spec.scores_file).exists():
        scores_schema = list(spec.schema) + [("score", AttributeType.NUMBER)]
        scores_rel = load_relation(data_dir / spec.scores_file, scores_schema)
    views = dict(spec.views)
    if scores_rel is None and "join_avg_score" in views:
        log.info("%s: no scores file, join_avg_score view unavailable", spec.name)
        views.pop("join_avg_score")
    return LoadedDataset(spec, rel, gt, scores_relation=scores_rel, views=views)
