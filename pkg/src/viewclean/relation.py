"""Tabular data model: typed relations, ground-truth match sets, dedup.

A relation is an immutable list of records over a (name, type) schema.
Cell values are plain Python objects: ``str`` for text, ``float`` for
numbers, ``None`` for missing. Record ids are zero-based ingestion order
and stay stable for the lifetime of a run, so every downstream artifact
(pair files, impact tables, metrics) can refer back to them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ConfigError, DataError

Value = str | float | None

PairKey = tuple[int, int]


class AttributeType(str, Enum):
    TEXT = "text"
    NUMBER = "number"


def pair_key(a: int, b: int) -> PairKey:
    """Canonical unordered pair: smaller id first. (a, a) is forbidden."""
    if a == b:
        raise ValueError(f"pair of a record with itself: {a}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Record:
    id: int
    values: tuple[Value, ...]


@dataclass(frozen=True)
class Relation:
    """Schema plus records. Immutable after construction; safe to share."""

    schema: tuple[tuple[str, AttributeType], ...]
    records: tuple[Record, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = [name for name, _ in self.schema]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate column names in schema: {names}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})
        for rec in self.records:
            if len(rec.values) != len(self.schema):
                raise ConfigError(
                    f"record {rec.id} has arity {len(rec.values)}, "
                    f"schema has {len(self.schema)}"
                )

    def column_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ConfigError(f"unknown column {name!r}") from None

    def column_type(self, name: str) -> AttributeType:
        return self.schema[self.column_index(name)][1]

    def value(self, record: Record, column: str) -> Value:
        return record.values[self.column_index(column)]

    def ids(self) -> set[int]:
        return {r.id for r in self.records}

    def record_by_id(self, rid: int) -> Record:
        for r in self.records:
            if r.id == rid:
                return r
        raise DataError(f"unknown record id {rid}")

    def without(self, drop: set[int]) -> "Relation":
        """New relation with the given ids removed, original order kept."""
        return Relation(self.schema, tuple(r for r in self.records if r.id not in drop))


@dataclass(frozen=True)
class GroundTruth:
    """Known duplicate pairs, stored canonically (smaller id first)."""

    matches: frozenset[PairKey]

    def is_match(self, key: PairKey) -> bool:
        return key in self.matches


def _parse_number(raw: str) -> float | None:
    try:
        return float(raw)
    except ValueError:
        return None


def load_relation(
    path: str | Path,
    schema: list[tuple[str, AttributeType]],
    delimiter: str = ",",
) -> Relation:
    """Load a delimiter-separated text file with a header row.

    Schema names must be a subset of the header; columns are read in schema
    order. Numeric cells that fail to parse (or are empty) become None.
    Ids are assigned sequentially from zero in file order.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, expected a header row") from None
        positions = []
        for name, _ in schema:
            if name not in header:
                raise ConfigError(f"{path}: column {name!r} not in header {header}")
            positions.append(header.index(name))
        records = []
        for rid, row in enumerate(reader):
            values: list[Value] = []
            for (name, atype), pos in zip(schema, positions):
                raw = row[pos].strip() if pos < len(row) else ""
                if atype is AttributeType.NUMBER:
                    values.append(_parse_number(raw) if raw else None)
                else:
                    values.append(raw)
            records.append(Record(rid, tuple(values)))
    return Relation(tuple((n, t) for n, t in schema), tuple(records))


def load_ground_truth(
    path: str | Path,
    valid_ids: set[int] | None = None,
    delimiter: str = ",",
) -> GroundTruth:
    """Load a two-column id-pair file (with or without a header row)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"ground truth file not found: {path}")
    matches: set[PairKey] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter)):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno + 1}: expected two ids, got {row}")
            try:
                a, b = int(row[0]), int(row[1])
            except ValueError:
                if lineno == 0:
                    continue  # header row
                raise DataError(f"{path}:{lineno + 1}: non-integer ids {row}") from None
            if valid_ids is not None and (a not in valid_ids or b not in valid_ids):
                raise DataError(f"{path}:{lineno + 1}: unknown record id in pair {row}")
            matches.add(pair_key(a, b))
    return GroundTruth(frozenset(matches))


def save_relation(rel: Relation, path: str | Path, delimiter: str = ",") -> None:
    """Write a relation back to delimiter-separated text with a header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([name for name, _ in rel.schema])
        for rec in rel.records:
            writer.writerow(["" if v is None else v for v in rec.values])


def save_ground_truth(gt: GroundTruth, path: str | Path, delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(["id1", "id2"])
        for a, b in sorted(gt.matches):
            writer.writerow([a, b])


def apply_dedup(rel: Relation, dup_pairs: set[PairKey]) -> Relation:
    """Drop duplicates: keep the smallest id of each connected component.

    Pairs are closed transitively here (and only here); the result keeps
    the original record order and is idempotent for a fixed pair set.
    """
    ids = rel.ids()
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != x:
            parent[x], x = root, parent[x]
        return root

    for a, b in dup_pairs:
        if a not in ids or b not in ids:
            raise DataError(f"dedup pair references unknown id: {(a, b)}")
        ra, rb = find(a), find(b)
        if ra != rb:
            # union by smaller root so the component representative is min-id
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = lo
    drop = {x for x in parent if find(x) != x}
    return rel.without(drop)
