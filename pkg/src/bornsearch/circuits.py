"""Circuit IR, hardware profiles, validity checking, depth, and the two-local baseline.

Circuits live on a compact register of wires 0..num_qubits-1. Each wire can carry a
physical qubit identity (``physical_qubits``) so that a circuit proposed on, say,
device qubits (3, 7, 9) simulates as a 3-wire circuit while still being checkable
against the device's coupling map and basis gates. Everything here is immutable and
safe to share across threads.

Gate names outside the closed set are representable on purpose: proposals arrive as
untrusted text, and ``validate`` must be able to diagnose an unknown gate rather than
crash while constructing the circuit that contains it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

ROTATION_GATES = frozenset({"rx", "ry", "rz"})
SINGLE_QUBIT_GATES = ROTATION_GATES | {"x", "sx", "h"}
TWO_QUBIT_GATES = frozenset({"cz", "cx"})
KNOWN_GATES = SINGLE_QUBIT_GATES | TWO_QUBIT_GATES


@dataclass(frozen=True)
class Gate:
    """One gate application: a name, the wires it acts on, and an optional parameter name.

    Rotation gates (rx/ry/rz) require a symbolic parameter name; other known gates
    forbid one. Unknown names pass construction (arity 1 or 2, any parameter) and are
    reported by ``validate``.
    """

    name: str
    qubits: tuple[int, ...]
    param: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"gate {self.name!r}: negative qubit index {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.name!r}: repeated qubit index {self.qubits}")
        if self.name in KNOWN_GATES:
            arity = 2 if self.name in TWO_QUBIT_GATES else 1
            if len(self.qubits) != arity:
                raise ValueError(
                    f"gate {self.name!r} takes {arity} qubit(s), got {len(self.qubits)}"
                )
            if self.name in ROTATION_GATES and self.param is None:
                raise ValueError(f"rotation gate {self.name!r} requires a parameter name")
            if self.name not in ROTATION_GATES and self.param is not None:
                raise ValueError(f"gate {self.name!r} does not take a parameter")
        elif not 1 <= len(self.qubits) <= 2:
            raise ValueError(f"gate {self.name!r}: only 1- and 2-qubit gates are representable")


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over wires 0..num_qubits-1.

    ``param_names`` is derived: the distinct parameter names in first-appearance
    order. ``physical_qubits[j]`` is the physical identity of wire j and defaults to
    the identity mapping.
    """

    num_qubits: int
    gates: tuple[Gate, ...]
    physical_qubits: tuple[int, ...] = ()
    param_names: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be nonnegative")
        object.__setattr__(self, "gates", tuple(self.gates))
        phys = self.physical_qubits or tuple(range(self.num_qubits))
        phys = tuple(int(p) for p in phys)
        if len(phys) != self.num_qubits:
            raise ValueError(
                f"physical_qubits has {len(phys)} entries for {self.num_qubits} wires"
            )
        if len(set(phys)) != len(phys):
            raise ValueError(f"physical_qubits must be distinct, got {phys}")
        if any(p < 0 for p in phys):
            raise ValueError(f"physical_qubits must be nonnegative, got {phys}")
        object.__setattr__(self, "physical_qubits", phys)
        names: list[str] = []
        for g in self.gates:
            for q in g.qubits:
                if q >= self.num_qubits:
                    raise ValueError(
                        f"gate {g.name!r} touches wire {q} of a {self.num_qubits}-wire circuit"
                    )
            if g.param is not None and g.param not in names:
                names.append(g.param)
        object.__setattr__(self, "param_names", tuple(names))


@dataclass(frozen=True)
class BoundGate:
    """A gate with its rotation angle (radians) resolved to a number."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None


@dataclass(frozen=True)
class BoundCircuit:
    """Concrete gate sequence ready for simulation."""

    num_qubits: int
    gates: tuple[BoundGate, ...]


def bind_parameters(circuit: Circuit, values: dict[str, float]) -> BoundCircuit:
    """Substitute numeric angles for every symbolic parameter.

    ``values`` must cover circuit.param_names exactly; missing or extra names are
    errors so that a trainer/circuit mismatch fails loudly.
    """
    missing = [n for n in circuit.param_names if n not in values]
    if missing:
        raise KeyError(f"missing parameter values: {missing}")
    extra = [n for n in values if n not in circuit.param_names]
    if extra:
        raise KeyError(f"unknown parameter names: {extra}")
    bound = tuple(
        BoundGate(g.name, g.qubits, float(values[g.param]) if g.param is not None else None)
        for g in circuit.gates
    )
    return BoundCircuit(circuit.num_qubits, bound)


def depth(circuit: Circuit) -> int:
    """Longest chain of gates sharing a qubit; every gate counts 1.

    Equivalent to the longest path in the gate dependency DAG where gate B depends
    on an earlier gate A iff they share a wire.
    """
    level = [0] * circuit.num_qubits
    out = 0
    for g in circuit.gates:
        d = 1 + max((level[q] for q in g.qubits), default=0)
        for q in g.qubits:
            level[q] = d
        if d > out:
            out = d
    return out


@dataclass(frozen=True)
class HardwareProfile:
    """Device description: native gates, connectivity, error rates, depth budget.

    coupling_map holds undirected pairs as sorted (lo, hi) tuples. readout_error[q]
    is (p(read 1 | prepared 0), p(read 0 | prepared 1)).
    """

    num_qubits: int
    basis_gates: frozenset[str]
    coupling_map: frozenset[tuple[int, int]]
    readout_error: tuple[tuple[float, float], ...]
    gate_error: dict[str, float]
    max_depth: int

    def __post_init__(self):
        if self.num_qubits <= 0:
            raise ValueError("num_qubits must be positive")
        if self.max_depth <= 0:
            raise ValueError("max_depth must be positive")
        pairs = set()
        for pair in self.coupling_map:
            a, b = pair
            if a == b:
                raise ValueError(f"coupling pair ({a}, {b}) is a self-loop")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"coupling pair ({a}, {b}) out of range")
            pairs.add((min(a, b), max(a, b)))
        object.__setattr__(self, "coupling_map", frozenset(pairs))
        object.__setattr__(self, "basis_gates", frozenset(self.basis_gates))
        ro = tuple((float(p01), float(p10)) for p01, p10 in self.readout_error)
        if len(ro) != self.num_qubits:
            raise ValueError(f"readout_error needs {self.num_qubits} entries, got {len(ro)}")
        for q, (p01, p10) in enumerate(ro):
            if not (0.0 <= p01 <= 1.0 and 0.0 <= p10 <= 1.0):
                raise ValueError(f"readout_error[{q}] rates must lie in [0, 1]")
        object.__setattr__(self, "readout_error", ro)
        for name, rate in self.gate_error.items():
            if not 0.0 <= float(rate) <= 1.0:
                raise ValueError(f"gate_error[{name!r}] must lie in [0, 1]")

    def coupled(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.coupling_map


def load_hardware_profile(path: str | Path) -> HardwareProfile:
    """Read a profile from its JSON file format."""
    data = json.loads(Path(path).read_text())
    return HardwareProfile(
        num_qubits=int(data["num_qubits"]),
        basis_gates=frozenset(data["basis_gates"]),
        coupling_map=frozenset((int(a), int(b)) for a, b in data["coupling_map"]),
        readout_error=tuple((float(p01), float(p10)) for p01, p10 in data["readout_error"]),
        gate_error={str(k): float(v) for k, v in data.get("gate_error", {}).items()},
        max_depth=int(data["max_depth"]),
    )


def profile_doc(profile: HardwareProfile) -> dict:
    """The profile as its canonical JSON-ready dict."""
    return {
        "num_qubits": profile.num_qubits,
        "basis_gates": sorted(profile.basis_gates),
        "coupling_map": sorted(list(p) for p in profile.coupling_map),
        "readout_error": [list(p) for p in profile.readout_error],
        "gate_error": dict(sorted(profile.gate_error.items())),
        "max_depth": profile.max_depth,
    }


def save_hardware_profile(profile: HardwareProfile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profile_doc(profile), indent=2) + "\n")


VIOLATION_KINDS = (
    "unknown-gate",
    "not-in-basis",
    "uncoupled-pair",
    "bad-qubit-index",
    "depth-exceeded",
)


@dataclass(frozen=True)
class Violation:
    """One diagnostic: which gate (None for circuit-level issues), what kind, and why."""

    gate_index: int | None
    kind: str
    message: str


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[Violation, ...]


def validate(circuit: Circuit, profile: HardwareProfile) -> ValidityReport:
    """Check every gate against the profile; collects all violations, never raises.

    Physical identities (circuit.physical_qubits) are what get checked against the
    coupling map and qubit count; the wire indices themselves are already bounded by
    circuit construction.
    """
    violations: list[Violation] = []
    touched: set[int] = set()
    for i, g in enumerate(circuit.gates):
        touched.update(g.qubits)
        phys = tuple(circuit.physical_qubits[q] for q in g.qubits)
        known = g.name in KNOWN_GATES
        if not known:
            violations.append(
                Violation(i, "unknown-gate", f"gate {i}: {g.name!r} is not a recognized gate")
            )
        elif g.name not in profile.basis_gates:
            violations.append(
                Violation(
                    i,
                    "not-in-basis",
                    f"gate {i}: {g.name!r} is not in the device basis "
                    f"{{{', '.join(sorted(profile.basis_gates))}}}",
                )
            )
        in_range = True
        for p in phys:
            if p >= profile.num_qubits:
                in_range = False
                violations.append(
                    Violation(
                        i,
                        "bad-qubit-index",
                        f"gate {i}: physical qubit {p} outside the {profile.num_qubits}-qubit device",
                    )
                )
        if known and g.name in TWO_QUBIT_GATES and in_range and not profile.coupled(*phys):
            violations.append(
                Violation(
                    i,
                    "uncoupled-pair",
                    f"gate {i}: qubits ({phys[0]}, {phys[1]}) are not coupled on this device",
                )
            )
    for w, p in enumerate(circuit.physical_qubits):
        if w not in touched and p >= profile.num_qubits:
            violations.append(
                Violation(
                    None,
                    "bad-qubit-index",
                    f"wire {w} is mapped to physical qubit {p} outside the "
                    f"{profile.num_qubits}-qubit device",
                )
            )
    d = depth(circuit)
    if d > profile.max_depth:
        violations.append(
            Violation(
                None,
                "depth-exceeded",
                f"circuit depth {d} exceeds the budget of {profile.max_depth}",
            )
        )
    return ValidityReport(valid=not violations, violations=tuple(violations))


def ring_pairs(num_qubits: int) -> list[tuple[int, int]]:
    """Ring entangler pairs (i, i+1 mod n), scheduled even pairs, odd pairs, then wrap.

    The grouping packs CZs into conflict-free layers so the construction has a
    deterministic depth.
    """
    even = [(i, i + 1) for i in range(0, num_qubits - 1, 2)]
    odd = [(i, i + 1) for i in range(1, num_qubits - 1, 2)]
    wrap = [(num_qubits - 1, 0)]
    return even + odd + wrap


def build_two_local(num_qubits: int, reps: int) -> Circuit:
    """Alternating rx/rz rotation layers with a CZ ring entangler, plus a final rotation layer.

    Parameter count is 2 * num_qubits * (reps + 1); every rotation gets its own name.
    """
    if num_qubits < 2:
        raise ValueError("two-local needs at least 2 qubits (ring undefined below that)")
    if reps < 1:
        raise ValueError("reps must be positive")
    gates: list[Gate] = []
    counter = 0

    def rotation_layer(name: str) -> None:
        nonlocal counter
        for q in range(num_qubits):
            gates.append(Gate(name, (q,), f"p{counter}"))
            counter += 1

    for _ in range(reps):
        rotation_layer("rx")
        rotation_layer("rz")
        for a, b in ring_pairs(num_qubits):
            gates.append(Gate("cz", (a, b)))
    rotation_layer("rx")
    rotation_layer("rz")
    return Circuit(num_qubits, tuple(gates))
