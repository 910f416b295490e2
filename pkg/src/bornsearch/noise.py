"""Readout confusion noise, inversion-based mitigation, and post-selection.

The noise model is classical and per-qubit: qubit q flips 0->1 with probability
e01[q] and 1->0 with probability e10[q] at measurement, independently of the other
qubits. On dense probability vectors this is a tensor product of 2x2 column-stochastic
confusion matrices, applied one register axis at a time, so no 2**n x 2**n matrix is
ever built. Mitigation applies the per-qubit inverses and projects back onto valid
probabilities; post-selection throws away outcomes outside a whitelist.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import HardwareProfile
from .distributions import Distribution, index_of


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit flip rates; rates[q] is (p(read 1 | true 0), p(read 0 | true 1))."""

    rates: tuple[tuple[float, float], ...]

    def __post_init__(self):
        rates = tuple((float(a), float(b)) for a, b in self.rates)
        if not rates:
            raise ValueError("need at least one qubit")
        for q, (e01, e10) in enumerate(rates):
            if not (0.0 <= e01 <= 1.0 and 0.0 <= e10 <= 1.0):
                raise ValueError(f"rates[{q}] must lie in [0, 1]")
        object.__setattr__(self, "rates", rates)

    @property
    def num_qubits(self) -> int:
        return len(self.rates)

    @classmethod
    def uniform(cls, num_qubits: int, rate: float) -> "ReadoutModel":
        return cls(((rate, rate),) * num_qubits)

    @classmethod
    def from_profile(cls, profile: HardwareProfile, qubits: tuple[int, ...] | None = None) -> "ReadoutModel":
        """Model for a subset of device qubits (register order), default all of them."""
        chosen = qubits if qubits is not None else tuple(range(profile.num_qubits))
        return cls(tuple(profile.readout_error[q] for q in chosen))

    def confusion(self, q: int) -> np.ndarray:
        e01, e10 = self.rates[q]
        return np.array([[1.0 - e01, e10], [e01, 1.0 - e10]])


def _contract(probs: np.ndarray, mats: list[np.ndarray], num_qubits: int) -> np.ndarray:
    # dense index order puts qubit i on axis i of the (2,)*n view
    t = probs.reshape((2,) * num_qubits)
    for q, mat in enumerate(mats):
        t = np.moveaxis(t, q, 0)
        shape = t.shape
        t = (mat @ t.reshape(2, -1)).reshape(shape)
        t = np.moveaxis(t, 0, q)
    return t.reshape(-1)


def apply_readout_noise(dist: Distribution, model: ReadoutModel) -> Distribution:
    """Outcome distribution after the confusion channel."""
    if model.num_qubits != dist.num_qubits:
        raise ValueError(
            f"model describes {model.num_qubits} qubits, distribution has {dist.num_qubits}"
        )
    mats = [model.confusion(q) for q in range(model.num_qubits)]
    return Distribution(dist.num_qubits, _contract(dist.probs, mats, dist.num_qubits))


def mitigate(dist: Distribution, model: ReadoutModel) -> Distribution:
    """Invert the confusion channel, then clip negatives and renormalize.

    The inverse exists iff e01 + e10 != 1 on every qubit; inversion of sampled data
    can leave small negative entries, which is why the projection step exists.
    """
    if model.num_qubits != dist.num_qubits:
        raise ValueError(
            f"model describes {model.num_qubits} qubits, distribution has {dist.num_qubits}"
        )
    invs = []
    for q in range(model.num_qubits):
        e01, e10 = model.rates[q]
        det = 1.0 - e01 - e10
        if abs(det) < 1e-12:
            raise ValueError(f"confusion matrix for qubit {q} is singular")
        invs.append(np.array([[1.0 - e10, -e10], [-e01, 1.0 - e01]]) / det)
    raw = _contract(dist.probs, invs, dist.num_qubits)
    np.maximum(raw, 0.0, out=raw)
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("mitigation wiped out all probability mass")
    return Distribution(dist.num_qubits, raw / total)


@dataclass(frozen=True)
class PostSelectRule:
    """Keep only the listed bitstrings and renormalize."""

    valid_bitstrings: frozenset[str]

    def __post_init__(self):
        if not self.valid_bitstrings:
            raise ValueError("valid set is empty")
        widths = {len(s) for s in self.valid_bitstrings}
        if len(widths) != 1:
            raise ValueError("valid bitstrings have mixed widths")
        object.__setattr__(self, "valid_bitstrings", frozenset(self.valid_bitstrings))

    @property
    def num_qubits(self) -> int:
        return len(next(iter(self.valid_bitstrings)))

    @classmethod
    def from_support(cls, dist: Distribution) -> "PostSelectRule":
        return cls(frozenset(s for s, _ in dist.support()))


def post_select(dist: Distribution, rule: PostSelectRule) -> tuple[Distribution, float]:
    """(conditioned distribution, fraction of mass retained). Raises if nothing survives."""
    if rule.num_qubits != dist.num_qubits:
        raise ValueError(
            f"rule is over {rule.num_qubits}-bit strings, distribution has {dist.num_qubits}"
        )
    keep = np.zeros_like(dist.probs)
    for s in rule.valid_bitstrings:
        i = index_of(s)
        keep[i] = dist.probs[i]
    retained = float(keep.sum())
    if retained <= 0.0:
        raise ValueError("post-selection removed all probability mass")
    return Distribution(dist.num_qubits, keep / retained), retained
