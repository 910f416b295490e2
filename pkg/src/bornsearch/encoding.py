"""Discretization of multivariate series into register bitstrings.

Each input column becomes one feature occupying a fixed field of the register, in
column order, most significant bit first. A value is quantized to
floor((2**bits - 1) * (x - min) / (max - min)) and decoded back to the field's lattice
point, so a round trip moves a value by at most one quantization step. Differencing
(consecutive-row deltas) happens before the min/max scan, since the model is meant to
learn the distribution of day-to-day moves rather than levels.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import Distribution, from_counts


@dataclass(frozen=True)
class FeatureSpec:
    """One column's field: its name, bit width, and the value range it spans."""

    name: str
    num_bits: int
    min_value: float
    max_value: float

    def __post_init__(self):
        if self.num_bits < 1:
            raise ValueError("num_bits must be at least 1")
        if not (math.isfinite(self.min_value) and math.isfinite(self.max_value)):
            raise ValueError(f"feature {self.name!r}: range must be finite")
        if self.max_value < self.min_value:
            raise ValueError(f"feature {self.name!r}: max_value below min_value")

    @property
    def levels(self) -> int:
        return 1 << self.num_bits


def encode_value(x: float, spec: FeatureSpec) -> int:
    """Quantize x to an integer level in [0, 2**bits). Out-of-range x clamps."""
    if not math.isfinite(x):
        raise ValueError(f"cannot encode non-finite value {x!r}")
    span = spec.max_value - spec.min_value
    if span == 0.0:
        return 0
    q = (x - spec.min_value) / span
    q = min(max(q, 0.0), 1.0)
    v = math.floor((spec.levels - 1) * q)
    return min(v, spec.levels - 1)


def decode_value(v: int, spec: FeatureSpec) -> float:
    """Lattice point for level v: min + v * (max - min) / (2**bits - 1)."""
    if not 0 <= v < spec.levels:
        raise ValueError(f"level {v} out of range for {spec.num_bits}-bit feature")
    span = spec.max_value - spec.min_value
    if span == 0.0:
        return spec.min_value
    return spec.min_value + v * span / (spec.levels - 1)


def encode_row(values: tuple[float, ...], features: tuple[FeatureSpec, ...]) -> str:
    if len(values) != len(features):
        raise ValueError(f"row has {len(values)} values for {len(features)} features")
    return "".join(
        format(encode_value(x, f), f"0{f.num_bits}b") for x, f in zip(values, features)
    )


def decode_row(bitstring: str, features: tuple[FeatureSpec, ...]) -> tuple[float, ...]:
    width = sum(f.num_bits for f in features)
    if len(bitstring) != width:
        raise ValueError(f"bitstring of length {len(bitstring)}, expected {width}")
    out = []
    offset = 0
    for f in features:
        out.append(decode_value(int(bitstring[offset : offset + f.num_bits], 2), f))
        offset += f.num_bits
    return tuple(out)


@dataclass(frozen=True)
class EncodingConfig:
    """How to turn a CSV into bitstrings: field widths, differencing, column choice.

    bits_per_feature may be a single width applied to every column or one width per
    selected column. columns=None takes every column in file order.
    """

    bits_per_feature: int | tuple[int, ...] = 4
    difference: bool = True
    columns: tuple[str, ...] | None = None

    def widths_for(self, num_columns: int) -> tuple[int, ...]:
        if isinstance(self.bits_per_feature, int):
            return (self.bits_per_feature,) * num_columns
        if len(self.bits_per_feature) != num_columns:
            raise ValueError(
                f"{len(self.bits_per_feature)} widths given for {num_columns} columns"
            )
        return tuple(self.bits_per_feature)


@dataclass(frozen=True)
class EncodedDataset:
    """The encoded sample set plus everything needed to decode it again."""

    features: tuple[FeatureSpec, ...]
    bitstrings: tuple[str, ...]
    differenced: bool

    def __post_init__(self):
        width = self.num_qubits
        for s in self.bitstrings:
            if len(s) != width or any(c not in "01" for c in s):
                raise ValueError(f"bad bitstring {s!r} for register width {width}")

    @property
    def num_qubits(self) -> int:
        return sum(f.num_bits for f in self.features)

    @property
    def num_samples(self) -> int:
        return len(self.bitstrings)

    def empirical(self) -> Distribution:
        counts: dict[str, int] = {}
        for s in self.bitstrings:
            counts[s] = counts.get(s, 0) + 1
        return from_counts(counts, self.num_qubits)

    def decoded(self) -> list[tuple[float, ...]]:
        return [decode_row(s, self.features) for s in self.bitstrings]


def encode_matrix(
    values: np.ndarray, names: list[str], config: EncodingConfig
) -> EncodedDataset:
    """Encode an already-loaded (rows, columns) float matrix."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("input contains non-finite values")
    if config.difference:
        if values.shape[0] < 2:
            raise ValueError("differencing needs at least 2 rows")
        values = np.diff(values, axis=0)
    widths = config.widths_for(values.shape[1])
    features = tuple(
        FeatureSpec(
            name=names[j],
            num_bits=widths[j],
            min_value=float(values[:, j].min()),
            max_value=float(values[:, j].max()),
        )
        for j in range(values.shape[1])
    )
    bitstrings = tuple(encode_row(tuple(row), features) for row in values)
    return EncodedDataset(features, bitstrings, config.difference)


def ingest_csv(path: str | Path, config: EncodingConfig) -> EncodedDataset:
    """Read a headered CSV, difference if configured, scan ranges, encode every row."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if config.columns is not None:
            missing = [c for c in config.columns if c not in header]
            if missing:
                raise ValueError(f"{path}: columns not found: {missing}")
            cols = [header.index(c) for c in config.columns]
            names = list(config.columns)
        else:
            cols = list(range(len(header)))
            names = header
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(row[j]) for j in cols])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: line {lineno}: expected numeric row") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return encode_matrix(np.array(rows, dtype=np.float64), names, config)


def save_dataset(dataset: EncodedDataset, path: str | Path) -> None:
    """Canonical JSON serialization; byte-stable for identical inputs."""
    doc = {
        "differenced": dataset.differenced,
        "features": [
            {
                "name": f.name,
                "num_bits": f.num_bits,
                "min_value": f.min_value,
                "max_value": f.max_value,
            }
            for f in dataset.features
        ],
        "bitstrings": list(dataset.bitstrings),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_dataset(path: str | Path) -> EncodedDataset:
    doc = json.loads(Path(path).read_text())
    features = tuple(
        FeatureSpec(
            name=f["name"],
            num_bits=int(f["num_bits"]),
            min_value=float(f["min_value"]),
            max_value=float(f["max_value"]),
        )
        for f in doc["features"]
    )
    return EncodedDataset(features, tuple(doc["bitstrings"]), bool(doc["differenced"]))
