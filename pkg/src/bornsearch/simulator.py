"""Dense statevector simulation of bound circuits.

Amplitude indexing is little-endian: bit i of a basis-state index is qubit i, so the
amplitude at index 5 on three qubits is the state with qubits 0 and 2 set.
``exact_distribution`` converts to the bitstring ordering used everywhere else
(character i of the string is qubit i), which is a bit-reversal permutation away.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .circuits import BoundCircuit
from .distributions import Distribution

MAX_QUBITS = 20

_SQ2 = 1.0 / np.sqrt(2.0)

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128)
_CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
# cx matrix indexed |control target>: control is the gate's first qubit
_CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128
    )


def gate_matrix(name: str, angle: float | None = None) -> np.ndarray:
    """Unitary for one gate; 2x2 for single-qubit names, 4x4 (first qubit major) else."""
    if name == "rx":
        return _rx(angle)
    if name == "ry":
        return _ry(angle)
    if name == "rz":
        return _rz(angle)
    if name == "x":
        return _X
    if name == "sx":
        return _SX
    if name == "h":
        return _H
    if name == "cz":
        return _CZ
    if name == "cx":
        return _CX
    raise ValueError(f"cannot simulate unknown gate {name!r}")


def _apply(psi: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    # view the state as an n-axis tensor; axis j holds qubit n-1-j
    t = psi.reshape((2,) * n)
    axes = tuple(n - 1 - q for q in qubits)
    t = np.moveaxis(t, axes, range(len(axes)))
    shape = t.shape
    k = 1 << len(qubits)
    t = (mat @ t.reshape(k, -1)).reshape(shape)
    t = np.moveaxis(t, range(len(axes)), axes)
    return t.reshape(-1)


def run(circuit: BoundCircuit) -> np.ndarray:
    """Statevector after applying the circuit to the all-zeros state."""
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the simulator ceiling of {MAX_QUBITS}")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    for g in circuit.gates:
        psi = _apply(psi, gate_matrix(g.name, g.angle), g.qubits, n)
    return psi


@lru_cache(maxsize=None)
def _bitrev_indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for i in range(n):
        rev |= ((idx >> i) & 1) << (n - 1 - i)
    rev.setflags(write=False)
    return rev


def exact_distribution(circuit: BoundCircuit) -> Distribution:
    """Born-rule outcome distribution, reindexed to bitstring order."""
    psi = run(circuit)
    probs = np.abs(psi) ** 2
    if circuit.num_qubits == 0:
        return Distribution(0, probs)
    return Distribution(circuit.num_qubits, probs[_bitrev_indices(circuit.num_qubits)])


def sample(distribution: Distribution, shots: int, seed: int) -> Distribution:
    """Empirical distribution of a finite-shot measurement."""
    return distribution.sample(shots, seed)
