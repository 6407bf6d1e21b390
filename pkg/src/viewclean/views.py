"""Select-project-group-aggregate-order-limit views over a relation.

Views are built from a declarative structure (usually parsed from YAML)
rather than a query language: a selection predicate tree, optional bin
derivations on numeric columns, grouping with COUNT(*)/AVG aggregates,
projection, ordering, and an optional row limit.

The evaluation order is fixed: selection, derivation, grouping and
aggregation, projection, ordering, limit. Ordering is made fully
deterministic by breaking ties on the output row values and finally on the
smallest contributing record id, so repeated evaluations of top-k views
always return the same rows in the same order.
"""

from __future__ import annotations

import csv
import functools
import io
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError, EvaluationError
from .relation import AttributeType, Record, Relation, Value

# ---------------------------------------------------------------------------
# selection predicates


@dataclass(frozen=True)
class Predicate:
    """Boolean tree over column atoms. Null cells fail every comparison."""

    op: str  # all | eq | contains | lt | ge | and | or
    column: str | None = None
    value: Value = None
    args: tuple["Predicate", ...] = ()

    def validate(self, rel: Relation) -> None:
        if self.op in ("and", "or"):
            if not self.args:
                raise ConfigError(f"{self.op} predicate needs at least one argument")
            for child in self.args:
                child.validate(rel)
            return
        if self.op == "all":
            return
        ctype = rel.column_type(self.column)
        if self.op == "contains":
            if ctype is not AttributeType.TEXT:
                raise ConfigError(f"contains on non-text column {self.column!r}")
            if not isinstance(self.value, str):
                raise ConfigError("contains needs a string constant")
        elif self.op in ("lt", "ge"):
            if ctype is not AttributeType.NUMBER:
                raise ConfigError(f"{self.op} on non-number column {self.column!r}")
            if not isinstance(self.value, (int, float)) or isinstance(self.value, bool):
                raise ConfigError(f"{self.op} needs a numeric constant")
        elif self.op == "eq":
            want = str if ctype is AttributeType.TEXT else (int, float)
            if not isinstance(self.value, want) or isinstance(self.value, bool):
                raise ConfigError(
                    f"eq constant {self.value!r} does not match type of {self.column!r}"
                )
        else:
            raise ConfigError(f"unknown predicate op {self.op!r}")

    def matches(self, rel: Relation, rec: Record) -> bool:
        if self.op == "all":
            return True
        if self.op == "and":
            return all(c.matches(rel, rec) for c in self.args)
        if self.op == "or":
            return any(c.matches(rel, rec) for c in self.args)
        cell = rel.value(rec, self.column)
        if cell is None:
            return False
        if self.op == "eq":
            if isinstance(cell, str):
                return cell == self.value
            return float(cell) == float(self.value)
        if self.op == "contains":
            return str(self.value).lower() in str(cell).lower()
        if self.op == "lt":
            return float(cell) < float(self.value)
        if self.op == "ge":
            return float(cell) >= float(self.value)
        raise EvaluationError(f"unknown predicate op {self.op!r}")


def p_all() -> Predicate:
    return Predicate("all")


def p_eq(column: str, value: Value) -> Predicate:
    return Predicate("eq", column, value)


def p_contains(column: str, value: str) -> Predicate:
    return Predicate("contains", column, value)


def p_lt(column: str, value: float) -> Predicate:
    return Predicate("lt", column, value)


def p_ge(column: str, value: float) -> Predicate:
    return Predicate("ge", column, value)


def p_and(*args: Predicate) -> Predicate:
    return Predicate("and", args=tuple(args))


def p_or(*args: Predicate) -> Predicate:
    return Predicate("or", args=tuple(args))


# ---------------------------------------------------------------------------
# derived bin columns


@dataclass(frozen=True)
class BinExpr:
    """CASE-style binning of a numeric column into labeled ranges.

    ``bounds`` is an ordered list of (exclusive upper bound, label); a value
    falls into the first bound it is strictly below, else ``else_label``.
    Null follows SQL CASE semantics: every WHEN fails, so it takes the
    else label.
    """

    name: str
    source: str
    bounds: tuple[tuple[float, str], ...]
    else_label: str

    def validate(self, rel: Relation) -> None:
        if rel.column_type(self.source) is not AttributeType.NUMBER:
            raise ConfigError(f"bin source {self.source!r} must be numeric")
        uppers = [b for b, _ in self.bounds]
        if any(nxt <= prev for prev, nxt in zip(uppers, uppers[1:])):
            raise ConfigError(f"bin bounds must be strictly increasing: {uppers}")

    def label(self, value: Value) -> str:
        if value is not None:
            for upper, lab in self.bounds:
                if float(value) < upper:
                    return lab
        return self.else_label


# ---------------------------------------------------------------------------
# view specification and result


@dataclass(frozen=True)
class Aggregate:
    kind: str  # count | avg
    column: str | None = None
    name: str = "count"


@dataclass(frozen=True)
class ViewSpec:
    name: str
    selection: Predicate = field(default_factory=p_all)
    derived: tuple[BinExpr, ...] = ()
    group_by: tuple[str, ...] = ()
    aggregates: tuple[Aggregate, ...] = ()
    projection: tuple[str, ...] = ()
    order_by: tuple[tuple[str, str], ...] = ()  # (column, "asc"|"desc")
    limit: int | None = None


@dataclass(frozen=True)
class ViewResult:
    """Materialized view rows plus, per row, the smallest contributing
    record id (used for deterministic tie-breaking and provenance checks)."""

    schema: tuple[tuple[str, AttributeType], ...]
    rows: tuple[tuple[Value, ...], ...]
    min_ids: tuple[int, ...] = ()

    def column(self, name: str) -> int:
        for i, (n, _) in enumerate(self.schema):
            if n == name:
                return i
        raise ConfigError(f"view result has no column {name!r}")


def _value_sort_key(v: Value):
    # total order across null/text/number; nulls sort last
    if v is None:
        return (2, "")
    if isinstance(v, str):
        return (1, v)
    return (0, float(v))


def _cmp_values(a: Value, b: Value) -> int:
    ka, kb = _value_sort_key(a), _value_sort_key(b)
    if ka[0] != kb[0]:
        return -1 if ka[0] < kb[0] else 1
    if ka[1] == kb[1]:
        return 0
    return -1 if ka[1] < kb[1] else 1


def _validate(spec: ViewSpec, rel: Relation) -> None:
    spec.selection.validate(rel)
    derived_names = set()
    for bexpr in spec.derived:
        bexpr.validate(rel)
        derived_names.add(bexpr.name)
    known = {n for n, _ in rel.schema} | derived_names
    for col in spec.group_by:
        if col not in known:
            raise ConfigError(f"group_by column {col!r} unknown")
    if spec.limit is not None and spec.limit <= 0:
        raise ConfigError("limit must be positive")
    for agg in spec.aggregates:
        if agg.kind not in ("count", "avg"):
            raise ConfigError(f"unknown aggregate kind {agg.kind!r}")
        if agg.kind == "avg" and agg.column not in known:
            raise ConfigError(f"avg column {agg.column!r} unknown")


def provenance(spec: ViewSpec, rel: Relation) -> set[int]:
    """Record ids feeding the view: exactly those passing the selection.

    Ordering and limit clauses are deliberately ignored, so a record that a
    top-k clause currently hides still counts as contributing.
    """
    _validate(spec, rel)
    return {r.id for r in rel.records if spec.selection.matches(rel, r)}


def evaluate(spec: ViewSpec, rel: Relation) -> ViewResult:
    _validate(spec, rel)
    selected = [r for r in rel.records if spec.selection.matches(rel, r)]

    # per-record output cells: base columns plus derived bins
    colnames = [n for n, _ in rel.schema]
    coltypes = {n: t for n, t in rel.schema}
    for bexpr in spec.derived:
        colnames.append(bexpr.name)
        coltypes[bexpr.name] = AttributeType.TEXT

    def cells(rec: Record) -> dict[str, Value]:
        out = {n: v for (n, _), v in zip(rel.schema, rec.values)}
        for bexpr in spec.derived:
            out[bexpr.name] = bexpr.label(out[bexpr.source])
        return out

    grouped = bool(spec.group_by) or bool(spec.aggregates)
    if grouped:
        groups: dict[tuple[Value, ...], list[dict[str, Value]]] = {}
        group_min: dict[tuple[Value, ...], int] = {}
        for rec in selected:
            c = cells(rec)
            key = tuple(c[g] for g in spec.group_by)
            groups.setdefault(key, []).append(c)
            group_min[key] = min(group_min.get(key, rec.id), rec.id)
        if not spec.group_by and not groups:
            # aggregate over an empty selection still yields one row
            groups[()] = []
            group_min[()] = -1
        out_schema = [(g, coltypes[g]) for g in spec.group_by]
        for agg in spec.aggregates:
            out_schema.append((agg.name, AttributeType.NUMBER))
        out_rows, out_ids = [], []
        for key, members in groups.items():
            row = list(key)
            for agg in spec.aggregates:
                if agg.kind == "count":
                    row.append(float(len(members)))
                else:  # avg ignores nulls
                    vals = [m[agg.column] for m in members if m[agg.column] is not None]
                    row.append(sum(float(v) for v in vals) / len(vals) if vals else None)
            out_rows.append(row)
            out_ids.append(group_min[key])
        available = [n for n, _ in out_schema]
    else:
        out_schema = [(n, coltypes[n]) for n in colnames]
        out_rows = [[cells(rec)[n] for n in colnames] for rec in selected]
        out_ids = [rec.id for rec in selected]
        available = colnames

    # projection
    if spec.projection:
        for col in spec.projection:
            if col not in available:
                raise ConfigError(f"projection column {col!r} unknown")
        keep = [available.index(c) for c in spec.projection]
        out_schema = [out_schema[i] for i in keep]
        out_rows = [[row[i] for i in keep] for row in out_rows]
        available = list(spec.projection)

    # ordering: explicit keys, then full-row values, then min record id
    order_idx = []
    for col, direction in spec.order_by:
        if col not in available:
            raise ConfigError(f"order_by column {col!r} not in output")
        if direction not in ("asc", "desc"):
            raise ConfigError(f"order direction must be asc/desc, got {direction!r}")
        order_idx.append((available.index(col), direction))

    indexed = list(range(len(out_rows)))

    def compare(i: int, j: int) -> int:
        for pos, direction in order_idx:
            c = _cmp_values(out_rows[i][pos], out_rows[j][pos])
            if c:
                return -c if direction == "desc" else c
        for pos in range(len(available)):
            c = _cmp_values(out_rows[i][pos], out_rows[j][pos])
            if c:
                return c
        return out_ids[i] - out_ids[j]

    indexed.sort(key=functools.cmp_to_key(compare))
    if spec.limit is not None:
        indexed = indexed[: spec.limit]

    return ViewResult(
        schema=tuple(out_schema),
        rows=tuple(tuple(out_rows[i]) for i in indexed),
        min_ids=tuple(out_ids[i] for i in indexed),
    )


# ---------------------------------------------------------------------------
# config documents


def _predicate_from_dict(node: dict) -> Predicate:
    if not isinstance(node, dict) or "op" not in node:
        raise ConfigError(f"bad predicate node: {node!r}")
    op = node["op"]
    if op in ("and", "or"):
        return Predicate(op, args=tuple(_predicate_from_dict(a) for a in node["args"]))
    if op == "all":
        return p_all()
    value = node.get("value")
    if isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    return Predicate(op, node["column"], value)


def view_spec_from_dict(doc: dict) -> ViewSpec:
    try:
        name = doc["name"]
    except KeyError:
        raise ConfigError("view definition needs a name") from None
    selection = _predicate_from_dict(doc["selection"]) if "selection" in doc else p_all()
    derived = tuple(
        BinExpr(
            name=b["name"],
            source=b["source"],
            bounds=tuple((float(u), str(lab)) for u, lab in b["bounds"]),
            else_label=str(b["else"]),
        )
        for b in doc.get("bins", [])
    )
    aggregates = tuple(
        Aggregate(
            kind=a["kind"],
            column=a.get("column"),
            name=a.get("as", a["kind"] if a["kind"] == "count" else f"avg_{a['column']}"),
        )
        for a in doc.get("aggregates", [])
    )
    order_by = tuple((o[0], o[1]) for o in doc.get("order_by", []))
    return ViewSpec(
        name=name,
        selection=selection,
        derived=derived,
        group_by=tuple(doc.get("group_by", [])),
        aggregates=aggregates,
        projection=tuple(doc.get("projection", [])),
        order_by=order_by,
        limit=doc.get("limit"),
    )


def load_view_specs(path: str | Path) -> dict[str, ViewSpec]:
    """Load a YAML document with a top-level ``views:`` list."""
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or "views" not in doc:
        raise ConfigError(f"{path}: expected a top-level 'views' list")
    specs = {}
    for entry in doc["views"]:
        spec = view_spec_from_dict(entry)
        if spec.name in specs:
            raise ConfigError(f"duplicate view name {spec.name!r}")
        specs[spec.name] = spec
    return specs


# ---------------------------------------------------------------------------
# stored view results (used by the `emd` CLI subcommand)


def dump_view_result(result: ViewResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{n}:{t.value}" for n, t in result.schema])
    for row in result.rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def parse_view_result(text: str) -> ViewResult:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("stored view result is empty") from None
    schema = []
    for cell in header:
        name, _, kind = cell.rpartition(":")
        if not name or kind not in ("text", "number"):
            raise ConfigError(f"bad stored view header cell {cell!r}")
        schema.append((name, AttributeType(kind)))
    rows = []
    for raw in reader:
        row: list[Value] = []
        for (name, atype), cell in zip(schema, raw):
            if cell == "":
                row.append(None)
            elif atype is AttributeType.NUMBER:
                row.append(float(cell))
            else:
                row.append(cell)
        rows.append(tuple(row))
    return ViewResult(tuple(schema), tuple(rows), tuple(-1 for _ in rows))
