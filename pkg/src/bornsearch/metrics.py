"""Training and evaluation metrics: Gaussian-kernel MMD and reverse KL divergence.

Both metrics compare dense probability vectors in bitstring-index order (see
``distributions``). MMD uses a precomputed kernel matrix over all 2**n outcomes; the
kernel's notion of distance between bitstrings is configurable because treating the
register as one integer, as raw bits, or as a tuple of decoded features changes which
outcomes count as "near" each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution

REPRESENTATIONS = ("feature-vector", "scalar-integer", "binary-vector")

# A dense kernel is 2**n x 2**n float64; 12 qubits is 134 MB and the practical cap.
DENSE_KERNEL_LIMIT = 12


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel exp(-||v(x) - v(y)||^2 / (2 sigma^2)) with a choice of v.

    feature-vector: split the string into per-feature fields of the given widths and
    decode each to an integer. scalar-integer: the whole string as one integer.
    binary-vector: the raw 0/1 characters.
    """

    sigma: float = 3.0
    representation: str = "feature-vector"
    feature_widths: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(
                f"representation must be one of {REPRESENTATIONS}, got {self.representation!r}"
            )
        if self.representation == "feature-vector":
            if not self.feature_widths:
                raise ValueError("feature-vector representation requires feature_widths")
            if any(w <= 0 for w in self.feature_widths):
                raise ValueError("feature widths must be positive")
            object.__setattr__(self, "feature_widths", tuple(int(w) for w in self.feature_widths))


def representation_vectors(spec: KernelSpec, num_qubits: int) -> np.ndarray:
    """v(x) for every bitstring index, as a (2**n, dim) float matrix."""
    if num_qubits <= 0:
        raise ValueError("num_qubits must be positive")
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    if spec.representation == "scalar-integer":
        return idx[:, None].astype(np.float64)
    if spec.representation == "binary-vector":
        shifts = np.arange(num_qubits - 1, -1, -1)
        return ((idx[:, None] >> shifts) & 1).astype(np.float64)
    widths = spec.feature_widths
    if sum(widths) != num_qubits:
        raise ValueError(
            f"feature widths {widths} sum to {sum(widths)}, circuit has {num_qubits} qubits"
        )
    cols = []
    offset = 0
    for w in widths:
        shift = num_qubits - offset - w
        cols.append((idx >> shift) & ((1 << w) - 1))
        offset += w
    return np.stack(cols, axis=1).astype(np.float64)


def kernel(spec: KernelSpec, num_qubits: int) -> np.ndarray:
    """Dense Gaussian kernel matrix over all bitstring pairs, index order both axes."""
    if num_qubits > DENSE_KERNEL_LIMIT:
        raise ValueError(
            f"dense kernel matrix not supported above {DENSE_KERNEL_LIMIT} qubits"
        )
    v = representation_vectors(spec, num_qubits)
    sq = np.sum(v * v, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (v @ v.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * spec.sigma**2))


def _dense(p: Distribution | np.ndarray) -> np.ndarray:
    if isinstance(p, Distribution):
        return p.probs
    return np.asarray(p, dtype=np.float64)


def mmd(p: Distribution | np.ndarray, q: Distribution | np.ndarray, kernel_matrix: np.ndarray) -> float:
    """Squared MMD as the full V-statistic: E_pp[k] + E_qq[k] - 2 E_pq[k].

    With a symmetric kernel this collapses to (p - q)^T K (p - q), which is what gets
    computed; it is nonnegative whenever K is positive semidefinite.
    """
    r = _dense(p) - _dense(q)
    return float(r @ kernel_matrix @ r)


@dataclass(frozen=True)
class KlConfig:
    """Smoothing for reverse KL: the model vector gets epsilon added to every bin."""

    epsilon: float = 1e-9

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def reverse_kl(
    q: Distribution | np.ndarray,
    p: Distribution | np.ndarray,
    config: KlConfig = KlConfig(),
) -> float:
    """D(Q || P~) = sum over Q's support of Q(x) ln(Q(x) / P~(x)), natural log.

    Q leads and is the model in our use; P is the reference (the data). Smoothing P
    as P~ = (P + eps) / (1 + eps * 2**n) keeps the value finite when the model puts
    mass on outcomes the data never produced, which is exactly what readout noise
    does, so those terms show up as a large but finite penalty.
    """
    qv = _dense(q)
    pv = _dense(p)
    if qv.shape != pv.shape:
        raise ValueError(f"shape mismatch: {qv.shape} vs {pv.shape}")
    bins = qv.shape[0]
    pt = (pv + config.epsilon) / (1.0 + config.epsilon * bins)
    mask = qv > 0.0
    terms = qv[mask] * (np.log(qv[mask]) - np.log(pt[mask]))
    return math.fsum(terms.tolist())
