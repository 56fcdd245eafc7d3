"""Categorical schema, datasets and sparse contingency tables."""

from __future__ import annotations

import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Prefix = Tuple[int, ...]


class SchemaError(ValueError):
    """Invalid attribute domains or records."""


class CsvParseError(ValueError):
    """Malformed CSV input."""


@dataclass(frozen=True)
class Attribute:
    name: str
    categories: Tuple[str, ...]

    def __post_init__(self):
        if len(self.categories) < 2:
            raise SchemaError(
                f"attribute {self.name!r} has {len(self.categories)} distinct "
                "value(s); every attribute needs at least 2 categories"
            )
        if len(set(self.categories)) != len(self.categories):
            raise SchemaError(f"attribute {self.name!r} has duplicate categories")

    @property
    def size(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class Schema:
    """Ordered attribute domains. The order is the hierarchy order."""

    attributes: Tuple[Attribute, ...]

    def __post_init__(self):
        if len(self.attributes) < 1:
            raise SchemaError("schema needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")

    @classmethod
    def from_domains(cls, domains: Mapping[str, Sequence[str]]) -> "Schema":
        return cls(tuple(Attribute(name, tuple(cats)) for name, cats in domains.items()))

    @classmethod
    def of_sizes(cls, sizes: Sequence[int]) -> "Schema":
        """Synthetic schema with attributes ``a0, a1, ...`` and integer labels."""
        return cls(
            tuple(
                Attribute(f"a{i}", tuple(str(j) for j in range(size)))
                for i, size in enumerate(sizes)
            )
        )

    @property
    def d(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.attributes]

    @property
    def sizes(self) -> List[int]:
        return [a.size for a in self.attributes]

    def universe_size(self, k: Optional[int] = None) -> int:
        """Number of length-``k`` prefixes (full universe when ``k`` is None)."""
        out = 1
        for size in self.sizes[: self.d if k is None else k]:
            out *= size
        return out

    def validate_record(self, record: Sequence[int]) -> None:
        if len(record) != self.d:
            raise SchemaError(f"record {tuple(record)} has length {len(record)}, expected {self.d}")
        for value, attr in zip(record, self.attributes):
            if not 0 <= value < attr.size:
                raise SchemaError(f"value {value} out of range for attribute {attr.name!r}")

    def decode(self, record: Sequence[int]) -> Tuple[str, ...]:
        return tuple(a.categories[v] for a, v in zip(self.attributes, record))


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    records: Tuple[Tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class ContingencyTable:
    """Sparse histogram over the full universe; zero cells are not stored."""

    schema: Schema
    counts: Mapping[Tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, value in self.counts.items():
            key = tuple(key)
            self.schema.validate_record(key)
            if value < 0:
                raise SchemaError(f"negative count {value} at {key}")
            if value:
                clean[key] = int(value)
        object.__setattr__(self, "counts", clean)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)

    def get(self, key: Sequence[int]) -> int:
        return self.counts.get(tuple(key), 0)


def _split_row(line: str, lineno: int) -> List[str]:
    if '"' in line:
        raise CsvParseError(f"row {lineno}: quoted fields are not supported")
    return line.split(",")


def ingest_csv(
    source: Union[str, bytes, io.IOBase, Iterable[str]],
    columns: Optional[Sequence[str]] = None,
    domains: Optional[Mapping[str, Sequence[str]]] = None,
) -> Dataset:
    """Read a headered, unquoted, comma-separated file into an encoded dataset.

    Categories are the distinct values observed per column, sorted
    lexicographically. ``domains`` may declare extra categories for named
    columns (the union with the observed values is used), which is the only way
    to admit a column with a single observed value. ``columns`` reorders (and
    must name every) attribute; the resulting order is the hierarchy order.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [
            line.decode("utf-8") if isinstance(line, bytes) else line for line in source
        ]
    lines = [line.rstrip("\r\n") for line in lines]
    # drop trailing blank lines only
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise CsvParseError("input is empty; expected a header row")

    header = [h.strip() for h in _split_row(lines[0], 1)]
    if any(not h for h in header):
        raise CsvParseError("row 1: empty column name in header")
    if len(set(header)) != len(header):
        raise CsvParseError("row 1: duplicate column names in header")
    d = len(header)

    raw_rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in _split_row(line, lineno)]
        if len(fields) != d:
            raise CsvParseError(
                f"row {lineno}: expected {d} fields, got {len(fields)}"
                + (" (fields containing commas are not supported)" if len(fields) > d else "")
            )
        raw_rows.append(fields)
    if not raw_rows:
        raise CsvParseError("dataset has no data rows")

    order = list(range(d))
    if columns is not None:
        columns = list(columns)
        if sorted(columns) != sorted(header):
            raise SchemaError(
                f"column order {columns} must be a permutation of the header {header}"
            )
        order = [header.index(c) for c in columns]

    domains = dict(domains or {})
    unknown = set(domains) - set(header)
    if unknown:
        raise SchemaError(f"domains given for unknown columns {sorted(unknown)}")
    attrs = []
    for j in order:
        cats = tuple(sorted({row[j] for row in raw_rows} | set(domains.get(header[j], ()))))
        attrs.append(Attribute(header[j], cats))
    schema = Schema(tuple(attrs))
    lookup = [{c: i for i, c in enumerate(a.categories)} for a in schema.attributes]
    records = tuple(
        tuple(lookup[pos][row[j]] for pos, j in enumerate(order)) for row in raw_rows
    )
    return Dataset(schema, records)


def contingency(dataset: Dataset) -> ContingencyTable:
    return ContingencyTable(dataset.schema, dict(Counter(dataset.records)))


def aggregate(level_map: Mapping[Prefix, int], k: int) -> Dict[Prefix, int]:
    """Sum a prefix map onto its length-``k`` prefixes, dropping zeros."""
    out: Dict[Prefix, int] = defaultdict(int)
    for key, value in level_map.items():
        out[key[:k]] += value
    return {key: value for key, value in out.items() if value}


def prefix_counts(table: ContingencyTable, k: int) -> Dict[Prefix, int]:
    """Exact answers of every nonzero ``k``-hierarchical query.

    Level 0 is ``{(): n}`` and is always present, even when ``n == 0``.
    """
    if not 0 <= k <= table.schema.d:
        raise ValueError(f"level {k} outside [0, {table.schema.d}]")
    if k == 0:
        return {(): table.total}
    return aggregate(table.counts, k)


def materialize_records(table: ContingencyTable) -> Dataset:
    """Expand counts into records, sorted lexicographically by index tuple."""
    records = []
    for key in sorted(table.counts):
        records.extend([key] * table.counts[key])
    return Dataset(table.schema, tuple(records))


def write_records_csv(dataset: Dataset) -> str:
    lines = [",".join(dataset.schema.names)]
    for record in dataset.records:
        lines.append(",".join(dataset.schema.decode(record)))
    return "\n".join(lines) + "\n"


def write_table_csv(table: ContingencyTable) -> str:
    lines = [",".join(table.schema.names + ["count"])]
    for key in sorted(table.counts):
        lines.append(",".join(list(table.schema.decode(key)) + [str(table.counts[key])]))
    return "\n".join(lines) + "\n"
