"""Binned categorical schemas, dataset ingestion, and linear counting queries.

A schema maps raw CSV columns onto ordered bins (categorical labels or
numeric breakpoint ranges). Datasets store one bin index per attribute per
record. A query domain is the cross product of two (or more) attributes'
bins, enumerated row-major in attribute order; that enumeration order is
load-bearing: measurements and inference index cells identically across
remeasures.
"""

from __future__ import annotations

import csv
import io
import os
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainMismatchError,
    IngestError,
    SchemaError,
    UnknownAttributeError,
)


@dataclass(frozen=True)
class Attribute:
    """One binned attribute: categorical labels or numeric breakpoint bins.

    Numeric bins are left-closed right-open, except the final bin which is
    closed on both ends; ``breakpoints`` must have ``len(bins) + 1`` entries.
    """

    name: str
    bins: tuple[str, ...]
    breakpoints: tuple[float, ...] | None = None
    column: str | None = None

    def __post_init__(self):
        if len(self.bins) < 2:
            raise SchemaError(f"attribute {self.name!r} needs at least 2 bins")
        if len(set(self.bins)) != len(self.bins):
            raise SchemaError(f"attribute {self.name!r} has duplicate bin labels")
        if self.breakpoints is not None:
            if len(self.breakpoints) != len(self.bins) + 1:
                raise SchemaError(
                    f"attribute {self.name!r}: {len(self.bins)} bins require "
                    f"{len(self.bins) + 1} breakpoints, got {len(self.breakpoints)}"
                )
            if any(a >= b for a, b in zip(self.breakpoints, self.breakpoints[1:])):
                raise SchemaError(f"attribute {self.name!r}: breakpoints must increase")

    @property
    def source_column(self) -> str:
        return self.column if self.column is not None else self.name

    def bin_of(self, raw: str) -> int:
        """Map a raw column value to its bin index, or raise ValueError."""
        if self.breakpoints is None:
            value = raw.strip()
            try:
                return self.bins.index(value)
            except ValueError:
                raise ValueError(f"value {raw!r} matches no bin of {self.name!r}") from None
        try:
            x = float(raw)
        except (TypeError, ValueError):
            raise ValueError(f"value {raw!r} is not numeric for {self.name!r}") from None
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        if x < lo or x > hi:
            raise ValueError(f"value {raw!r} outside [{lo}, {hi}] for {self.name!r}")
        if x == hi:
            return len(self.bins) - 1
        return bisect_right(self.breakpoints, x) - 1


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate attribute names in schema")

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise UnknownAttributeError(f"unknown attribute {name!r}")

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise UnknownAttributeError(f"unknown attribute {name!r}")

    def to_config(self) -> dict:
        out = []
        for a in self.attributes:
            entry: dict = {"name": a.name, "bins": list(a.bins)}
            if a.column is not None:
                entry["column"] = a.column
            if a.breakpoints is not None:
                entry["breakpoints"] = list(a.breakpoints)
            out.append(entry)
        return {"attributes": out}

    @classmethod
    def from_config(cls, config: dict) -> "Schema":
        try:
            entries = config["attributes"]
        except (KeyError, TypeError):
            raise SchemaError("schema config must contain an 'attributes' list") from None
        attrs = []
        for entry in entries:
            attrs.append(
                Attribute(
                    name=entry["name"],
                    bins=tuple(entry["bins"]),
                    breakpoints=tuple(entry["breakpoints"]) if "breakpoints" in entry else None,
                    column=entry.get("column"),
                )
            )
        return cls(attributes=tuple(attrs))


@dataclass(eq=False)
class Dataset:
    """Records as bin-index tuples, one column per schema attribute."""

    schema: Schema
    records: np.ndarray  # shape (n, n_attributes), integer bin indices

    def __post_init__(self):
        self.records = np.asarray(self.records, dtype=np.int64)
        if self.records.ndim != 2 or self.records.shape[1] != len(self.schema.attributes):
            raise SchemaError("records must be (n, n_attributes) bin indices")
        for j, attr in enumerate(self.schema.attributes):
            col = self.records[:, j]
            if col.size and (col.min() < 0 or col.max() >= len(attr.bins)):
                raise SchemaError(f"record bin index out of range for {attr.name!r}")

    @property
    def size(self) -> int:
        return self.records.shape[0]


@dataclass(frozen=True)
class QueryDomain:
    """Cross product of attributes' bins, enumerated row-major in attribute order."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        if not self.attributes:
            raise SchemaError("query domain needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("query domain attributes must be distinct")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a.bins) for a in self.attributes)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape))

    def cell_bins(self, cell: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(cell, self.shape))

    def cell_of(self, bins: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(bins, self.shape))

    def marginal_selector(self, axis: int) -> np.ndarray:
        """0/1 matrix (bins of attribute `axis` x cells) summing cells to bins."""
        n_bins = self.shape[axis]
        sel = np.zeros((n_bins, self.cell_count))
        idx = np.arange(self.cell_count)
        bins = np.unravel_index(idx, self.shape)[axis]
        sel[bins, idx] = 1.0
        return sel


@dataclass(eq=False)
class DataVector:
    """True cell counts of one query domain (units: records)."""

    domain: QueryDomain
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.domain.cell_count,):
            raise DomainMismatchError("counts length must equal cell count")
        if self.counts.size and self.counts.min() < 0:
            raise DomainMismatchError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(eq=False)
class LinearQuery:
    """One linear counting query: answer = weights . counts."""

    domain: QueryDomain
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.domain.cell_count,):
            raise DomainMismatchError("weights length must equal cell count")


GREATER_THAN = "greater-than"
LESS_THAN_OR_EQUAL = "less-than-or-equal"


@dataclass(eq=False)
class Question:
    """An analysis question answered by a linear functional of the counts.

    Quantitative questions ask for the count itself; binary questions
    compare it against a threshold. ``constant`` is the dollars-scale
    normalization divisor used when scores are converted to payoffs.
    """

    qid: str
    kind: str  # "quantitative" | "binary"
    functional: LinearQuery
    value_style: str = "single-value"  # "single-value" | "multi-value"
    threshold: int | None = None
    direction: str | None = None  # GREATER_THAN | LESS_THAN_OR_EQUAL
    constant: float = 1.0

    def __post_init__(self):
        if self.kind not in ("quantitative", "binary"):
            raise SchemaError(f"unknown question kind {self.kind!r}")
        if self.kind == "binary":
            if self.threshold is None or self.direction not in (GREATER_THAN, LESS_THAN_OR_EQUAL):
                raise SchemaError("binary questions need a threshold and direction")
        elif self.threshold is not None:
            raise SchemaError("quantitative questions must not carry a threshold")
        if not self.constant > 0:
            raise SchemaError("normalization constant must be positive")


def selection_weights(domain: QueryDomain, select: dict[str, list[str]]) -> np.ndarray:
    """0/1 weights over cells where each listed attribute's bin is in the given set.

    Attributes not listed impose no constraint. Bin sets are given as labels.
    """
    keep = np.ones(domain.cell_count, dtype=bool)
    names = [a.name for a in domain.attributes]
    idx = np.arange(domain.cell_count)
    axes_bins = np.unravel_index(idx, domain.shape)
    for name, labels in select.items():
        if name not in names:
            raise UnknownAttributeError(f"attribute {name!r} not in query domain")
        axis = names.index(name)
        attr = domain.attributes[axis]
        allowed = set()
        for label in labels:
            if label not in attr.bins:
                raise UnknownAttributeError(f"bin {label!r} not in attribute {name!r}")
            allowed.add(attr.bins.index(label))
        keep &= np.isin(axes_bins[axis], sorted(allowed))
    return keep.astype(float)


def bin_marginal(domain: QueryDomain, attr_name: str, bin_label: str) -> LinearQuery:
    """Indicator query selecting exactly the cells of one bin of one attribute."""
    return LinearQuery(domain, selection_weights(domain, {attr_name: [bin_label]}))


def ingest(csv_source, schema: Schema) -> Dataset:
    """Parse a CSV (path, bytes, or text stream) into a Dataset under `schema`.

    Every row must map to a bin-index tuple. Rows with unmappable values are
    collected into a row-numbered error list and the whole ingest fails.
    """
    if isinstance(csv_source, (str, os.PathLike)):
        handle = open(csv_source, "r", encoding="utf-8", newline="")
        close = True
    elif isinstance(csv_source, bytes):
        handle = io.StringIO(csv_source.decode("utf-8"))
        close = False
    else:
        handle = csv_source
        close = False
    try:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise IngestError("empty file")
        missing = [a.source_column for a in schema.attributes if a.source_column not in reader.fieldnames]
        if missing:
            raise IngestError(f"missing columns: {', '.join(missing)}")
        rows = []
        row_errors = []
        for row_no, row in enumerate(reader, start=1):
            indices = []
            for attr in schema.attributes:
                raw = row.get(attr.source_column)
                try:
                    if raw is None:
                        raise ValueError("missing value")
                    indices.append(attr.bin_of(raw))
                except ValueError:
                    row_errors.append((row_no, attr.name, raw))
            if len(indices) == len(schema.attributes):
                rows.append(indices)
        if row_errors:
            preview = "; ".join(f"row {r}: {a}={v!r}" for r, a, v in row_errors[:5])
            raise IngestError(f"{len(row_errors)} unmappable value(s): {preview}", row_errors)
        if not rows:
            raise IngestError("empty file")
        return Dataset(schema=schema, records=np.array(rows, dtype=np.int64))
    finally:
        if close:
            handle.close()


def _record_mask(dataset: Dataset, filter_bins: dict[str, list[str]] | None) -> np.ndarray:
    mask = np.ones(dataset.size, dtype=bool)
    if not filter_bins:
        return mask
    for name, labels in filter_bins.items():
        j = dataset.schema.index_of(name)
        attr = dataset.schema.attributes[j]
        allowed = []
        for label in labels:
            if label not in attr.bins:
                raise UnknownAttributeError(f"bin {label!r} not in attribute {name!r}")
            allowed.append(attr.bins.index(label))
        mask &= np.isin(dataset.records[:, j], allowed)
    return mask


def vectorize(
    dataset: Dataset,
    domain: QueryDomain,
    filter_bins: dict[str, list[str]] | None = None,
) -> DataVector:
    """Count records per domain cell, optionally restricted by a bin-set filter.

    The filter is a conjunction of bin-set memberships and may reference any
    schema attribute, including the domain's own.
    """
    cols = [dataset.schema.index_of(a.name) for a in domain.attributes]
    for a in domain.attributes:
        schema_attr = dataset.schema.attribute(a.name)
        if schema_attr.bins != a.bins:
            raise DomainMismatchError(f"attribute {a.name!r} bins differ from dataset schema")
    mask = _record_mask(dataset, filter_bins)
    projected = dataset.records[mask][:, cols]
    if projected.shape[0]:
        flat = np.ravel_multi_index(projected.T, domain.shape)
        counts = np.bincount(flat, minlength=domain.cell_count)
    else:
        counts = np.zeros(domain.cell_count, dtype=np.int64)
    return DataVector(domain=domain, counts=counts)


def evaluate(question: Question, counts: DataVector):
    """Ground truth of a question: a count, or yes/no against its threshold."""
    if question.functional.domain != counts.domain:
        raise DomainMismatchError("question and counts use different domains")
    value = float(question.functional.weights @ counts.counts)
    if question.kind == "quantitative":
        return value
    if question.direction == GREATER_THAN:
        return value > question.threshold
    return value <= question.threshold
