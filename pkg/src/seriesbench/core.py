"""Shared data model: series tensors, conditions, embeddings, metric reports.

Alignment across files is positional: record ``i`` of a conditions file, row
``i`` of an embedding matrix and sample ``i`` of a series tensor all describe
the same sample.  ``sample_id`` is an opaque string carried along for
provenance only.

All payloads are float32 on disk and widened to float64 for arithmetic; the
types below always hold float64.  Instances are immutable after construction
(arrays are marked read-only) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class InputFormatError(ValueError):
    """Malformed input file or payload (CLI exit code 2)."""


class ContractViolation(ValueError):
    """Operation precondition violated by otherwise well-formed data (CLI exit code 3)."""


class ProposerError(RuntimeError):
    """Schema proposer unreachable or persistently unparseable (CLI exit code 4)."""


def _frozen_float64(data: np.ndarray | Sequence, ndim: int, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != ndim:
        raise ContractViolation(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{what} contains non-finite values")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeriesTensor:
    """A batch of series with shape (n_samples, length, n_features)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _frozen_float64(self.data, 3, "series tensor"))
        if self.length < 1 or self.n_features < 1:
            raise ContractViolation("series tensor needs positive length and feature count")

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    @property
    def n_features(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class EmbeddingMatrix:
    """(n_samples, dim) vectors from an external encoder.

    ``role`` records which encoder produced the rows; ``"time_series"`` and
    ``"text"`` are the two input roles, concatenated matrices use ``"joint"``.
    """

    data: np.ndarray
    role: str = "time_series"

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _frozen_float64(self.data, 2, "embedding matrix"))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Attribute:
    """One named attribute with an ordered set of discrete value options."""

    name: str
    definition: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.name:
            raise ContractViolation("attribute name must be non-empty")
        if len(self.values) < 2:
            raise ContractViolation(f"attribute {self.name!r} needs at least 2 values")
        if len(set(self.values)) != len(self.values):
            raise ContractViolation(f"attribute {self.name!r} has duplicate values")


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered list of attributes; the governing vocabulary for conditions."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ContractViolation("attribute names must be unique")

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "attributes": [
                {"name": a.name, "definition": a.definition, "values": list(a.values)}
                for a in self.attributes
            ]
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "AttributeSchema":
        try:
            attrs = tuple(
                Attribute(
                    name=str(a["name"]),
                    definition=str(a.get("definition", "")),
                    values=tuple(str(v) for v in a["values"]),
                )
                for a in doc["attributes"]
            )
        except (KeyError, TypeError) as exc:
            raise InputFormatError(f"malformed schema document: {exc}") from exc
        return cls(attributes=attrs)


@dataclass(frozen=True)
class ConditionRecord:
    """Aligned (text, attribute-vector, class-label) triple for one sample."""

    sample_id: str
    text: str
    attrs: Mapping[str, int]
    label: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "attrs", dict(self.attrs))
        if self.label < 0:
            raise ContractViolation(f"label must be non-negative, got {self.label}")

    def vector(self, schema: AttributeSchema) -> tuple[int, ...]:
        """Attribute vector in schema order; missing attributes are an error."""
        try:
            return tuple(self.attrs[name] for name in schema.names)
        except KeyError as exc:
            raise ContractViolation(f"record {self.sample_id!r} missing attribute {exc}") from exc


@dataclass(frozen=True)
class MetricEntry:
    metric_name: str
    value: float
    direction: str  # "higher_better" | "lower_better"

    def __post_init__(self) -> None:
        if self.direction not in ("higher_better", "lower_better"):
            raise ContractViolation(f"unknown direction {self.direction!r}")
        if not np.isfinite(self.value):
            raise ContractViolation(f"metric {self.metric_name!r} has non-finite value")


@dataclass(frozen=True)
class ReportContext:
    dataset_id: str
    model_id: str
    seed: int


@dataclass(frozen=True)
class MetricReport:
    """Named scalar scores with direction flags; the unit of the rank protocol."""

    entries: tuple[MetricEntry, ...]
    context: ReportContext

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        names = [e.metric_name for e in self.entries]
        if len(set(names)) != len(names):
            raise ContractViolation("metric names must be unique within a report")

    def value(self, metric_name: str) -> float:
        for e in self.entries:
            if e.metric_name == metric_name:
                return e.value
        raise KeyError(metric_name)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_dataset; violations are data, not failures."""

    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_dataset(
    series: TimeSeriesTensor,
    conditions: Sequence[ConditionRecord],
    schema: AttributeSchema,
) -> ValidationReport:
    """Cross-check a (series, conditions, schema) triple.

    Reported violations: sample-count mismatch, attribute names outside the
    schema, value indices out of range, non-finite series values, and label
    inconsistency (two records with identical attribute vectors must carry
    the same label).  A passing report is the precondition every metric
    operation assumes.
    """
    violations: list[str] = []
    if series.n_samples != len(conditions):
        violations.append(
            f"count mismatch: {series.n_samples} series vs {len(conditions)} condition records"
        )
    if not np.all(np.isfinite(series.data)):
        violations.append("non-finite values in series tensor")

    options = {a.name: len(a.values) for a in schema.attributes}
    label_by_vector: dict[tuple, int] = {}
    for i, rec in enumerate(conditions):
        for name, idx in rec.attrs.items():
            if name not in options:
                violations.append(f"record {i}: unknown attribute {name!r}")
            elif not 0 <= idx < options[name]:
                violations.append(
                    f"record {i}: value index {idx} out of range for attribute {name!r}"
                )
        key = tuple(sorted(rec.attrs.items()))
        if key in label_by_vector:
            if label_by_vector[key] != rec.label:
                violations.append(
                    f"record {i}: label {rec.label} inconsistent with earlier label "
                    f"{label_by_vector[key]} for the same attribute vector"
                )
        else:
            label_by_vector[key] = rec.label
    return ValidationReport(violations=tuple(violations))


def as_series_array(x: TimeSeriesTensor | np.ndarray) -> np.ndarray:
    """Coerce a tensor argument to a float64 (N, L, F) array."""
    if isinstance(x, TimeSeriesTensor):
        return x.data
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ContractViolation(f"expected (N, L, F) array, got shape {arr.shape}")
    return arr


def as_embedding_array(x: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    """Coerce an embedding argument to a float64 (N, d) array."""
    if isinstance(x, EmbeddingMatrix):
        return x.data
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractViolation(f"expected (N, d) array, got shape {arr.shape}")
    return arr
