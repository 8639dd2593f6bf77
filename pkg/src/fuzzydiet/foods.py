"""Indexed food-composition table (nutrients per 100 g plus a serving size)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

HEADER = (
    "index",
    "code",
    "name",
    "energy_kcal",
    "protein_g",
    "fat_g",
    "carb_g",
    "calcium_mg",
    "phosphorus_mg",
    "sodium_mg",
    "potassium_mg",
    "serving_g",
)
NUTRIENT_COLUMNS = HEADER[3:11]


class FoodDataError(ValueError):
    """Malformed food table; the message names the row and column."""


@dataclass(frozen=True)
class FoodRecord:
    index: int
    code: str
    name: str
    energy_kcal: float
    protein_g: float
    fat_g: float
    carb_g: float
    calcium_mg: float
    phosphorus_mg: float
    sodium_mg: float
    potassium_mg: float
    serving_g: float = 100.0

    def nutrient(self, column: str) -> float:
        if column not in NUTRIENT_COLUMNS:
            raise KeyError(column)
        return getattr(self, column)


class FoodDatabase:
    """Immutable, order-preserving collection of foods addressed by index."""

    def __init__(self, records: Iterable[FoodRecord]):
        self._records = tuple(records)
        self._by_index: dict[int, FoodRecord] = {}
        for pos, rec in enumerate(self._records):
            if rec.index in self._by_index:
                raise FoodDataError(f"duplicate food index {rec.index} (records {self._position(rec.index) + 1} and {pos + 1})")
            self._by_index[rec.index] = rec
        self.indices = np.array([r.index for r in self._records], dtype=np.int64)
        self.indices.setflags(write=False)

    def _position(self, index: int) -> int:
        for pos, rec in enumerate(self._records):
            if rec.index == index:
                return pos
        return -1

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[FoodRecord]:
        return iter(self._records)

    def __eq__(self, other) -> bool:
        return isinstance(other, FoodDatabase) and self._records == other._records

    def __contains__(self, index) -> bool:
        return int(index) in self._by_index

    @property
    def records(self) -> tuple[FoodRecord, ...]:
        return self._records

    def get(self, index: int) -> FoodRecord:
        try:
            return self._by_index[int(index)]
        except KeyError:
            raise KeyError(f"no food with index {index}") from None

    def nutrient_matrix(self, columns=NUTRIENT_COLUMNS, per_serving: bool = False) -> np.ndarray:
        """(N, len(columns)) array in record order, optionally scaled to one serving."""
        m = np.array([[getattr(r, c) for c in columns] for r in self._records], dtype=float).reshape(len(self), len(columns))
        if per_serving:
            m = m * (np.array([r.serving_g for r in self._records], dtype=float)[:, None] / 100.0)
        return m

    def row_lookup(self) -> np.ndarray:
        """Array mapping food index -> row position (-1 where absent)."""
        size = int(self.indices.max()) + 1 if len(self) else 1
        lookup = np.full(size, -1, dtype=np.int64)
        lookup[self.indices] = np.arange(len(self))
        return lookup


def get(db: FoodDatabase, index: int) -> FoodRecord:
    return db.get(index)


def _parse_number(raw: str, line: int, column: str) -> float:
    text = raw.strip().replace(",", ".")
    try:
        value = float(text)
    except ValueError:
        raise FoodDataError(f"line {line}, column {column!r}: not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise FoodDataError(f"line {line}, column {column!r}: non-finite value {raw!r}")
    return value


def _parse_rows(reader: csv.reader, source: str) -> FoodDatabase:
    try:
        header = next(reader)
    except StopIteration:
        raise FoodDataError(f"{source}: empty file, expected header {','.join(HEADER)}") from None
    header = [h.strip().lstrip("﻿") for h in header]
    missing = [h for h in HEADER if h not in header]
    if missing:
        raise FoodDataError(f"{source}: missing column(s) {', '.join(missing)}")
    pos = {h: header.index(h) for h in HEADER}

    records: list[FoodRecord] = []
    seen: dict[int, int] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise FoodDataError(f"{source}: line {line}: expected {len(header)} fields, got {len(row)}")
        raw_index = row[pos["index"]].strip()
        try:
            index = int(raw_index)
        except ValueError:
            raise FoodDataError(f"{source}: line {line}, column 'index': not an integer: {raw_index!r}") from None
        if index < 1:
            raise FoodDataError(f"{source}: line {line}, column 'index': indices start at 1, got {index}")
        if index in seen:
            raise FoodDataError(f"{source}: duplicate index {index} on lines {seen[index]} and {line}")
        seen[index] = line
        values = {}
        for column in HEADER[3:]:
            value = _parse_number(row[pos[column]], line, column)
            if value < 0:
                raise FoodDataError(f"{source}: line {line}, column {column!r}: negative value {value}")
            values[column] = value
        if values["serving_g"] <= 0:
            raise FoodDataError(f"{source}: line {line}, column 'serving_g': must be positive")
        records.append(FoodRecord(index, row[pos["code"]].strip(), row[pos["name"]].strip(), **values))
    return FoodDatabase(records)


def load_csv(path: str | Path) -> FoodDatabase:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return _parse_rows(csv.reader(fh), str(path))
    except OSError as exc:
        raise FoodDataError(f"cannot read {path}: {exc.strerror}") from None


def loads_csv(text: str, source: str = "<string>") -> FoodDatabase:
    return _parse_rows(csv.reader(io.StringIO(text)), source)


def _format(value) -> str:
    if isinstance(value, float):
        # repr round-trips exactly; integral values stay short
        return str(int(value)) if value.is_integer() and abs(value) < 1e15 else repr(value)
    return str(value)


def dumps_csv(db: FoodDatabase) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in db:
        writer.writerow([_format(v) for v in astuple(rec)])
    return buf.getvalue()


def write_csv(db: FoodDatabase, path: str | Path) -> None:
    Path(path).write_text(dumps_csv(db), encoding="utf-8")

