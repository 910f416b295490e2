"""Dense distributions over n-bit strings, plus the bitstring/index conventions.

A bitstring spells the register left to right: character i is qubit i, so "0111" on
four qubits means qubit 0 read 0 and qubits 1..3 read 1. The dense vector index of a
string is plain ``int(s, 2)``. Everything downstream (kernels, readout noise, CSV
columns) uses this one ordering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def index_of(bitstring: str) -> int:
    """Dense-vector index of a bitstring (most significant character first)."""
    if not bitstring or any(c not in "01" for c in bitstring):
        raise ValueError(f"not a bitstring: {bitstring!r}")
    return int(bitstring, 2)


def bitstring_of(index: int, num_qubits: int) -> str:
    """Inverse of index_of for a register of the given width."""
    if not 0 <= index < (1 << num_qubits):
        raise ValueError(f"index {index} out of range for {num_qubits} qubits")
    return format(index, f"0{num_qubits}b")


@dataclass(frozen=True)
class Distribution:
    """Probability vector over all 2**num_qubits bitstrings, in index_of order."""

    num_qubits: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} probabilities, got shape {p.shape}"
            )
        if np.any(p < -1e-12):
            raise ValueError("negative probability")
        p = np.maximum(p, 0.0)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def prob(self, bitstring: str) -> float:
        return float(self.probs[index_of(bitstring)])

    def total(self) -> float:
        return float(self.probs.sum())

    def support(self) -> list[tuple[str, float]]:
        """(bitstring, probability) pairs for the nonzero entries, in index order."""
        idx = np.flatnonzero(self.probs)
        return [(bitstring_of(int(i), self.num_qubits), float(self.probs[i])) for i in idx]

    def as_dict(self) -> dict[str, float]:
        return dict(self.support())

    def sample_counts(self, shots: int, seed: int) -> np.ndarray:
        """Multinomial draw; returns an integer count per bitstring index."""
        if shots <= 0:
            raise ValueError("shots must be positive")
        total = self.probs.sum()
        if not np.isclose(total, 1.0, atol=1e-9):
            raise ValueError(f"cannot sample: probabilities sum to {total}")
        rng = np.random.default_rng(seed)
        return rng.multinomial(shots, self.probs / total)

    def sample(self, shots: int, seed: int) -> "Distribution":
        """Empirical distribution of a multinomial draw."""
        counts = self.sample_counts(shots, seed)
        return Distribution(self.num_qubits, counts / shots)


def from_counts(counts: dict[str, int] | np.ndarray, num_qubits: int) -> Distribution:
    """Normalize observed counts (dict keyed by bitstring, or dense vector) to frequencies."""
    if isinstance(counts, dict):
        dense = np.zeros(1 << num_qubits, dtype=np.float64)
        for s, c in counts.items():
            if c < 0:
                raise ValueError(f"negative count for {s!r}")
            dense[index_of(s)] += c
    else:
        dense = np.asarray(counts, dtype=np.float64)
    total = dense.sum()
    if total <= 0:
        raise ValueError("counts are empty")
    return Distribution(num_qubits, dense / total)
