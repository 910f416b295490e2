"""MMD training of parameterized circuits with parameter-shift gradients and Adam.

The loss is the squared MMD between the circuit's outcome distribution and the data
distribution under a fixed Gaussian kernel matrix. Each gradient entry comes from the
parameter-shift rule: simulate with one rotation angle moved by +pi/2 and -pi/2 and
take (p_plus - p_minus) . K (p - d). A parameter name shared by several gates gets one
shift pair per occurrence (product rule), so a step costs 2P + 1 simulations with P
the number of parameterized gates.

One epoch is one Adam update on one mini-batch; the recorded loss history is always
measured against the full data distribution.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circuits import BoundCircuit, BoundGate, Circuit
from .distributions import Distribution, from_counts
from .encoding import EncodedDataset
from .metrics import KernelSpec, kernel, mmd
from .simulator import exact_distribution

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 30
    batch_size: int = 1000
    shots: int = 10000
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    kernel: KernelSpec | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 0 or self.shots < 0:
            raise ValueError("batch_size and shots must be nonnegative (0 means exact/full)")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")


@dataclass(frozen=True)
class TrainResult:
    params: dict[str, float]
    loss_history: tuple[float, ...]
    sim_count: int
    wall_seconds: float

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, num_params: int) -> "AdamState":
        return cls(np.zeros(num_params), np.zeros(num_params), 0)


def adam_step(
    params: np.ndarray, grads: np.ndarray, state: AdamState, config: TrainConfig
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns the new parameters and state."""
    t = state.step + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grads
    v = config.beta2 * state.v + (1.0 - config.beta2) * grads * grads
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    new = params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)
    return new, AdamState(m, v, t)


def _nominal_gates(circuit: Circuit, values: dict[str, float]) -> list[BoundGate]:
    return [
        BoundGate(g.name, g.qubits, float(values[g.param]) if g.param is not None else None)
        for g in circuit.gates
    ]


def _measure(
    num_qubits: int,
    gates: list[BoundGate],
    shots: int,
    shot_rng: np.random.Generator | None,
) -> np.ndarray:
    dist = exact_distribution(BoundCircuit(num_qubits, tuple(gates)))
    if shots > 0:
        seed = int(shot_rng.integers(0, 2**63 - 1))
        dist = dist.sample(shots, seed)
    return dist.probs


def mmd_gradient(
    circuit: Circuit,
    values: dict[str, float],
    data: Distribution | np.ndarray,
    kernel_matrix: np.ndarray,
    shots: int = 0,
    shot_rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Parameter-shift gradient of mmd(p_theta, data) at the given values.

    Returns (gradient ordered like circuit.param_names, unshifted outcome probabilities,
    number of simulations used).
    """
    d = data.probs if isinstance(data, Distribution) else np.asarray(data, dtype=np.float64)
    nominal = _nominal_gates(circuit, values)
    n = circuit.num_qubits
    p = _measure(n, nominal, shots, shot_rng)
    u = kernel_matrix @ (p - d)
    grad = np.zeros(len(circuit.param_names))
    sims = 1
    name_to_slot = {name: j for j, name in enumerate(circuit.param_names)}
    for gi, g in enumerate(circuit.gates):
        if g.param is None:
            continue
        base = nominal[gi]
        shifted = list(nominal)
        shifted[gi] = BoundGate(base.name, base.qubits, base.angle + HALF_PI)
        p_plus = _measure(n, shifted, shots, shot_rng)
        shifted[gi] = BoundGate(base.name, base.qubits, base.angle - HALF_PI)
        p_minus = _measure(n, shifted, shots, shot_rng)
        sims += 2
        grad[name_to_slot[g.param]] += (p_plus - p_minus) @ u
    return grad, p, sims


def _full_distribution(data: EncodedDataset | Distribution) -> Distribution:
    return data.empirical() if isinstance(data, EncodedDataset) else data


def _batch_distribution(
    data: EncodedDataset | Distribution,
    full: Distribution,
    batch_size: int,
    batch_rng: np.random.Generator,
) -> Distribution:
    # batching only applies to sample sets; an explicit target distribution is exact
    if not isinstance(data, EncodedDataset):
        return full
    if batch_size == 0 or batch_size >= data.num_samples:
        return full
    picks = batch_rng.integers(0, data.num_samples, size=batch_size)
    counts: dict[str, int] = {}
    for i in picks:
        s = data.bitstrings[i]
        counts[s] = counts.get(s, 0) + 1
    return from_counts(counts, data.num_qubits)


def default_kernel_spec(data: EncodedDataset | Distribution) -> KernelSpec:
    """Feature-vector kernel when the data carries a feature layout, else scalar-integer."""
    if isinstance(data, EncodedDataset):
        return KernelSpec(
            representation="feature-vector",
            feature_widths=tuple(f.num_bits for f in data.features),
        )
    return KernelSpec(representation="scalar-integer")


def initial_parameters(circuit: Circuit, rng: np.random.Generator) -> dict[str, float]:
    vals = rng.uniform(-np.pi, np.pi, size=len(circuit.param_names))
    return {name: float(v) for name, v in zip(circuit.param_names, vals)}


def train(
    circuit: Circuit,
    data: EncodedDataset | Distribution,
    config: TrainConfig = TrainConfig(),
    initial_params: dict[str, float] | None = None,
    callback=None,
) -> TrainResult:
    """Run the full training loop; deterministic for a fixed config.seed.

    loss_history[0] is the starting loss and loss_history[e] the loss after epoch e,
    both against the full data distribution. ``callback(epoch, loss)`` fires after
    each epoch if given.
    """
    t0 = time.monotonic()
    full = _full_distribution(data)
    if full.num_qubits != circuit.num_qubits:
        raise ValueError(
            f"data register width {full.num_qubits} does not match "
            f"circuit width {circuit.num_qubits}"
        )
    spec = config.kernel if config.kernel is not None else default_kernel_spec(data)
    kmat = kernel(spec, circuit.num_qubits)

    root = np.random.SeedSequence(config.seed)
    init_ss, batch_ss, shot_ss = root.spawn(3)
    batch_rng = np.random.default_rng(batch_ss)
    shot_rng = np.random.default_rng(shot_ss)

    if initial_params is None:
        values = initial_parameters(circuit, np.random.default_rng(init_ss))
    else:
        missing = [n for n in circuit.param_names if n not in initial_params]
        if missing:
            raise KeyError(f"initial_params missing {missing}")
        values = {n: float(initial_params[n]) for n in circuit.param_names}

    theta = np.array([values[n] for n in circuit.param_names])
    state = AdamState.zeros(len(theta))
    sim_count = 0

    def loss_now() -> float:
        nonlocal sim_count
        nominal = _nominal_gates(circuit, _to_dict(theta))
        p = _measure(circuit.num_qubits, nominal, config.shots, shot_rng)
        sim_count += 1
        return mmd(p, full, kmat)

    def _to_dict(vec: np.ndarray) -> dict[str, float]:
        return {n: float(v) for n, v in zip(circuit.param_names, vec)}

    history = [loss_now()]
    for epoch in range(1, config.epochs + 1):
        batch = _batch_distribution(data, full, config.batch_size, batch_rng)
        grad, _, sims = mmd_gradient(
            circuit, _to_dict(theta), batch, kmat, config.shots, shot_rng
        )
        sim_count += sims
        theta, state = adam_step(theta, grad, state, config)
        history.append(loss_now())
        if callback is not None:
            callback(epoch, history[-1])
    return TrainResult(
        params=_to_dict(theta),
        loss_history=tuple(history),
        sim_count=sim_count,
        wall_seconds=time.monotonic() - t0,
    )
