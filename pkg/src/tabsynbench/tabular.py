"""Mixed-type tabular data model: schema, CSV ingestion, splitting, encoding.

Tables hold categorical cells as strings and continuous cells as floats.
The numeric encoding is plain one-hot for categoricals and min-max scaling
to [0, 1] for continuous columns, so every encoded entry of a fitted table
is non-negative.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateSplit,
    EmptyTable,
    LayoutMismatch,
    ParseError,
    SchemaMismatch,
    UnknownCategory,
)

CLASSIFICATION = "classification"
REGRESSION = "regression"
NO_TASK = "none"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # "categorical" | "continuous"
    categories: tuple[str, ...] = ()
    observed_min: float = 0.0
    observed_max: float = 0.0

    def __post_init__(self):
        if not self.name:
            raise SchemaMismatch("column name must be non-empty")
        if self.kind == "categorical":
            if len(self.categories) < 1:
                raise SchemaMismatch(f"column {self.name!r}: needs >= 1 category")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaMismatch(f"column {self.name!r}: duplicate categories")
        elif self.kind == "continuous":
            if self.observed_min > self.observed_max:
                raise SchemaMismatch(
                    f"column {self.name!r}: observed_min > observed_max"
                )
        else:
            raise SchemaMismatch(f"column {self.name!r}: unknown kind {self.kind!r}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    @property
    def width(self) -> int:
        return len(self.categories) if self.is_categorical else 1


@dataclass(frozen=True)
class TableSchema:
    columns: tuple[ColumnSpec, ...]
    target_index: int | None = None
    task: str = NO_TASK

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate column names")
        if self.task not in (CLASSIFICATION, REGRESSION, NO_TASK):
            raise SchemaMismatch(f"unknown task {self.task!r}")
        if self.task != NO_TASK:
            if self.target_index is None:
                raise SchemaMismatch("task set but target_index missing")
            if not (0 <= self.target_index < len(self.columns)):
                raise SchemaMismatch("target_index out of range")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def target(self) -> ColumnSpec | None:
        if self.target_index is None:
            return None
        return self.columns[self.target_index]

    def to_json(self) -> dict:
        cols = []
        for c in self.columns:
            if c.is_categorical:
                cols.append(
                    {"name": c.name, "kind": "categorical",
                     "categories": list(c.categories)}
                )
            else:
                cols.append(
                    {"name": c.name, "kind": "continuous",
                     "min": c.observed_min, "max": c.observed_max}
                )
        doc = {"columns": cols}
        if self.target_index is not None:
            doc["target"] = self.columns[self.target_index].name
        if self.task != NO_TASK:
            doc["task"] = self.task
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TableSchema":
        cols = []
        for c in doc["columns"]:
            if c["kind"] == "categorical":
                cols.append(ColumnSpec(c["name"], "categorical",
                                       tuple(str(x) for x in c["categories"])))
            else:
                cols.append(ColumnSpec(c["name"], "continuous",
                                       observed_min=float(c.get("min", 0.0)),
                                       observed_max=float(c.get("max", 0.0))))
        target_index = None
        if "target" in doc and doc["target"] is not None:
            names = [c.name for c in cols]
            if doc["target"] not in names:
                raise SchemaMismatch(f"target {doc['target']!r} not a column")
            target_index = names.index(doc["target"])
        return cls(tuple(cols), target_index, doc.get("task", NO_TASK))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "TableSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Table:
    schema: TableSchema
    rows: tuple[tuple, ...]

    def __post_init__(self):
        ncols = len(self.schema.columns)
        for r, row in enumerate(self.rows):
            if len(row) != ncols:
                raise SchemaMismatch(f"row {r}: {len(row)} cells, expected {ncols}")
            for c, (cell, spec) in enumerate(zip(row, self.schema.columns)):
                if spec.is_categorical:
                    if not isinstance(cell, str):
                        raise SchemaMismatch(f"row {r} col {c}: expected label")
                    if cell not in spec.categories:
                        raise UnknownCategory(
                            f"row {r} col {spec.name!r}: label {cell!r} not in schema"
                        )
                else:
                    if isinstance(cell, str):
                        raise SchemaMismatch(f"row {r} col {c}: expected number")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n_columns(self) -> int:
        return len(self.schema.columns)

    def column(self, index: int) -> list:
        return [row[index] for row in self.rows]

    def continuous_column(self, index: int) -> np.ndarray:
        if self.schema.columns[index].is_categorical:
            raise SchemaMismatch(f"column {index} is categorical")
        return np.array([row[index] for row in self.rows], dtype=float)

    def subset(self, indices) -> "Table":
        return Table(self.schema, tuple(self.rows[i] for i in indices))

    def concat(self, other: "Table") -> "Table":
        if other.schema.names != self.schema.names:
            raise SchemaMismatch("cannot concatenate tables with different columns")
        return Table(self.schema, self.rows + other.rows)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.schema.names)
            for row in self.rows:
                writer.writerow([cell if isinstance(cell, str) else repr(cell)
                                 for cell in row])


@dataclass(frozen=True)
class ColumnBlock:
    column_index: int
    offset: int
    width: int
    constant: bool = False  # continuous column with observed_min == observed_max


@dataclass(frozen=True)
class EncodedMatrix:
    data: np.ndarray
    layout: tuple[ColumnBlock, ...]
    schema: TableSchema

    def __post_init__(self):
        m = sum(b.width for b in self.layout)
        if self.data.ndim != 2 or self.data.shape[1] != m:
            raise LayoutMismatch(
                f"matrix width {self.data.shape} inconsistent with layout m={m}"
            )

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def build_layout(schema: TableSchema) -> tuple[ColumnBlock, ...]:
    blocks = []
    offset = 0
    for i, spec in enumerate(schema.columns):
        constant = (not spec.is_categorical
                    and spec.observed_min == spec.observed_max)
        blocks.append(ColumnBlock(i, offset, spec.width, constant))
        offset += spec.width
    return tuple(blocks)


def load_csv(path, schema: TableSchema) -> Table:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: missing header row") from None
        if header != schema.names:
            raise SchemaMismatch(
                f"{path}: header {header} does not match schema {schema.names}"
            )
        rows = []
        for r, record in enumerate(reader):
            if len(record) != len(schema.columns):
                raise SchemaMismatch(
                    f"{path}: row {r} has {len(record)} cells, "
                    f"expected {len(schema.columns)}"
                )
            row = []
            for spec, raw in zip(schema.columns, record):
                if spec.is_categorical:
                    if raw not in spec.categories:
                        raise UnknownCategory(
                            f"{path}: row {r} col {spec.name!r}: "
                            f"unknown label {raw!r}"
                        )
                    row.append(raw)
                else:
                    try:
                        value = float(raw)
                    except ValueError:
                        raise ParseError(
                            f"{path}: row {r} col {spec.name!r}: "
                            f"non-numeric cell {raw!r}"
                        ) from None
                    if math.isnan(value):
                        raise ParseError(
                            f"{path}: row {r} col {spec.name!r}: missing value"
                        )
                    row.append(value)
            rows.append(tuple(row))
    return Table(schema, tuple(rows))


def infer_schema(path, categorical_threshold: int = 20, *,
                 target: str | None = None, task: str = NO_TASK) -> TableSchema:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTable(f"{path}: empty file") from None
        records = list(reader)
    if not records:
        raise EmptyTable(f"{path}: no data rows")

    columns = []
    for i, name in enumerate(header):
        raw = [record[i] for record in records]
        values = []
        numeric = True
        for cell in raw:
            try:
                values.append(float(cell))
            except ValueError:
                numeric = False
                break
        distinct = sorted(set(raw))
        if not numeric or len(distinct) <= categorical_threshold:
            columns.append(ColumnSpec(name, "categorical", tuple(distinct)))
        else:
            columns.append(ColumnSpec(name, "continuous",
                                      observed_min=min(values),
                                      observed_max=max(values)))
    target_index = None
    if target is not None:
        if target not in header:
            raise SchemaMismatch(f"target {target!r} not in header")
        target_index = header.index(target)
    return TableSchema(tuple(columns), target_index, task)


def split(table: Table, train_fraction: float, seed: int) -> tuple[Table, Table]:
    """Deterministic shuffled split; stratified by target for classification."""
    train_idx, test_idx = split_indices(table, train_fraction, seed)
    return table.subset(train_idx), table.subset(test_idx)


def split_indices(table: Table, train_fraction: float,
                  seed: int) -> tuple[list[int], list[int]]:
    n = len(table)
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit(f"train_fraction {train_fraction} not in (0, 1)")
    if n < 2:
        raise DegenerateSplit("need at least 2 rows to split")
    n_train = math.floor(n * train_fraction)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"split {n_train}/{n - n_train} leaves a side empty")

    rng = np.random.default_rng(seed)
    if table.schema.task == CLASSIFICATION:
        target = table.schema.target_index
        by_class: dict[str, list[int]] = {}
        for i, row in enumerate(table.rows):
            by_class.setdefault(row[target], []).append(i)
        stratify = all(len(v) >= 2 for v in by_class.values())
        if stratify:
            train_idx, test_idx = [], []
            remainder = []
            for label in sorted(by_class):
                idx = np.array(by_class[label])
                rng.shuffle(idx)
                k_exact = len(idx) * train_fraction
                k = math.floor(k_exact)
                train_idx.extend(idx[:k].tolist())
                test_idx.extend(idx[k + 1:].tolist())
                remainder.append((k_exact - k, idx[k] if k < len(idx) else None))
            # top up to floor(N * fraction) rows from the largest fractional parts
            deficit = n_train - len(train_idx)
            remainder.sort(key=lambda t: -t[0])
            for _, extra in remainder:
                if extra is None:
                    continue
                if deficit > 0:
                    train_idx.append(int(extra))
                    deficit -= 1
                else:
                    test_idx.append(int(extra))
            train_idx.sort()
            test_idx.sort()
            if not train_idx or not test_idx:
                raise DegenerateSplit("stratified split left a side empty")
            return train_idx, test_idx

    perm = rng.permutation(n)
    train_idx = sorted(perm[:n_train].tolist())
    test_idx = sorted(perm[n_train:].tolist())
    return train_idx, test_idx


def encode(table: Table) -> EncodedMatrix:
    if len(table) == 0:
        raise EmptyTable("cannot encode an empty table")
    layout = build_layout(table.schema)
    m = sum(b.width for b in layout)
    data = np.zeros((len(table), m), dtype=float)
    for block, spec in zip(layout, table.schema.columns):
        if spec.is_categorical:
            index = {label: j for j, label in enumerate(spec.categories)}
            for r, row in enumerate(table.rows):
                data[r, block.offset + index[row[block.column_index]]] = 1.0
        elif not block.constant:
            span = spec.observed_max - spec.observed_min
            col = np.array([row[block.column_index] for row in table.rows])
            data[:, block.offset] = (col - spec.observed_min) / span
    return EncodedMatrix(data, layout, table.schema)


def decode(matrix: EncodedMatrix) -> Table:
    expected = build_layout(matrix.schema)
    if matrix.layout != expected:
        raise LayoutMismatch("layout does not match schema")
    rows = []
    for r in range(matrix.n_rows):
        row = []
        for block, spec in zip(matrix.layout, matrix.schema.columns):
            chunk = matrix.data[r, block.offset:block.offset + block.width]
            if spec.is_categorical:
                row.append(spec.categories[int(np.argmax(chunk))])
            elif block.constant:
                row.append(spec.observed_min)
            else:
                span = spec.observed_max - spec.observed_min
                value = spec.observed_min + chunk[0] * span
                row.append(min(max(value, spec.observed_min), spec.observed_max))
        rows.append(tuple(row))
    return Table(matrix.schema, tuple(rows))
