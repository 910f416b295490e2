"""The JSON circuit interchange format and its tolerant-but-strict parser.

A proposal document is one JSON object:

    {"qubits": [3, 5, 6],
     "gates": [{"name": "rx", "qubits": [3], "param": "a"},
               {"name": "cz", "qubits": [3, 5]}],
     "params": ["a"]}

``qubits`` lists physical qubit ids; gate qubit entries refer to those ids and are
relabeled to register wires in declaration order. Extraction is tolerant (the object
may be wrapped in prose or markdown code fences), validation is strict (unknown keys,
wrong types, undeclared qubits or params are all errors). Every error carries a
position: a byte offset into the text for syntax problems, a JSON path for schema
problems.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .circuits import Circuit, Gate

MAX_DSL_BYTES = 1 << 20
_MAX_DECODE_ATTEMPTS = 32


class DslError(ValueError):
    """Parse or schema failure, annotated with where in the document it happened."""

    def __init__(self, message: str, offset: int | None = None, path: str | None = None):
        self.message = message
        self.offset = offset
        self.path = path
        where = []
        if path is not None:
            where.append(f"at {path}")
        if offset is not None:
            where.append(f"offset {offset}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class DslGate:
    name: str
    qubits: tuple[int, ...]
    param: str | None = None


@dataclass(frozen=True)
class CircuitDsl:
    """Validated document contents, still in physical-qubit terms."""

    qubits: tuple[int, ...]
    gates: tuple[DslGate, ...]
    params: tuple[str, ...]

    def to_circuit(self) -> Circuit:
        wire = {p: i for i, p in enumerate(self.qubits)}
        gates = tuple(
            Gate(g.name, tuple(wire[q] for q in g.qubits), g.param) for g in self.gates
        )
        return Circuit(len(self.qubits), gates, physical_qubits=self.qubits)

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "CircuitDsl":
        phys = circuit.physical_qubits
        gates = tuple(
            DslGate(g.name, tuple(phys[q] for q in g.qubits), g.param)
            for g in circuit.gates
        )
        return cls(phys, gates, circuit.param_names)

    def to_json(self) -> str:
        doc = {
            "qubits": list(self.qubits),
            "gates": [
                {"name": g.name, "qubits": list(g.qubits)}
                | ({"param": g.param} if g.param is not None else {})
                for g in self.gates
            ],
            "params": list(self.params),
        }
        return json.dumps(doc, indent=2)


def extract_json(text: str) -> tuple[dict, int]:
    """Find and decode the first JSON object embedded in free-form text.

    Returns (document, offset of its first byte). Tries each '{' position in order,
    up to a cap that keeps adversarial inputs from going quadratic; the error from
    the first attempt is reported if nothing decodes.
    """
    if len(text) > MAX_DSL_BYTES:
        raise DslError(f"document is {len(text)} bytes, limit is {MAX_DSL_BYTES}")
    decoder = json.JSONDecoder()
    first_error: DslError | None = None
    attempts = 0
    pos = text.find("{")
    if pos < 0:
        raise DslError("no JSON object found in the text", offset=0)
    while pos >= 0 and attempts < _MAX_DECODE_ATTEMPTS:
        attempts += 1
        try:
            doc, _end = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as e:
            if first_error is None:
                first_error = DslError(f"invalid JSON: {e.msg}", offset=e.pos)
        except RecursionError:
            if first_error is None:
                first_error = DslError("JSON nesting too deep", offset=pos)
        else:
            if isinstance(doc, dict):
                return doc, pos
            if first_error is None:
                first_error = DslError(
                    f"expected a JSON object, found {type(doc).__name__}", offset=pos
                )
        pos = text.find("{", pos + 1)
    raise first_error if first_error is not None else DslError(
        "no decodable JSON object found", offset=0
    )


def _require(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise DslError(message, path=path)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate_document(doc: dict) -> CircuitDsl:
    """Strict schema check of a decoded document; errors carry JSON paths."""
    allowed = {"qubits", "gates", "params"}
    for key in doc:
        _require(key in allowed, f"unknown key {key!r}", path=f"$.{key}")
    for key in ("qubits", "gates", "params"):
        _require(key in doc, f"missing required key {key!r}", path="$")

    qubits = doc["qubits"]
    _require(isinstance(qubits, list), "qubits must be a list", path="$.qubits")
    _require(len(qubits) > 0, "qubits must be non-empty", path="$.qubits")
    for i, q in enumerate(qubits):
        _require(_is_int(q), "qubit id must be an integer", path=f"$.qubits[{i}]")
        _require(q >= 0, "qubit id must be nonnegative", path=f"$.qubits[{i}]")
    _require(len(set(qubits)) == len(qubits), "qubit ids must be distinct", path="$.qubits")
    declared = set(qubits)

    params = doc["params"]
    _require(isinstance(params, list), "params must be a list", path="$.params")
    for i, p in enumerate(params):
        _require(isinstance(p, str) and p != "", "param name must be a non-empty string",
                 path=f"$.params[{i}]")
    _require(len(set(params)) == len(params), "param names must be distinct", path="$.params")
    declared_params = set(params)

    gates_doc = doc["gates"]
    _require(isinstance(gates_doc, list), "gates must be a list", path="$.gates")
    gates: list[DslGate] = []
    used_params: set[str] = set()
    for i, g in enumerate(gates_doc):
        gpath = f"$.gates[{i}]"
        _require(isinstance(g, dict), "gate must be an object", path=gpath)
        for key in g:
            _require(key in {"name", "qubits", "param"}, f"unknown key {key!r}",
                     path=f"{gpath}.{key}")
        _require("name" in g and "qubits" in g, "gate needs 'name' and 'qubits'", path=gpath)
        name = g["name"]
        _require(isinstance(name, str) and name != "", "gate name must be a non-empty string",
                 path=f"{gpath}.name")
        gq = g["qubits"]
        _require(isinstance(gq, list) and len(gq) > 0, "gate qubits must be a non-empty list",
                 path=f"{gpath}.qubits")
        for j, q in enumerate(gq):
            _require(_is_int(q), "gate qubit must be an integer", path=f"{gpath}.qubits[{j}]")
            _require(q in declared, f"qubit {q} is not in the declared qubits list",
                     path=f"{gpath}.qubits[{j}]")
        param = g.get("param")
        if param is not None:
            _require(isinstance(param, str) and param != "",
                     "param must be a non-empty string", path=f"{gpath}.param")
            _require(param in declared_params,
                     f"param {param!r} is not in the declared params list",
                     path=f"{gpath}.param")
            used_params.add(param)
        try:
            Gate(name, tuple(range(len(gq))), param)
        except ValueError as e:
            raise DslError(str(e), path=gpath) from None
        _require(len(set(gq)) == len(gq), "gate qubits must be distinct", path=f"{gpath}.qubits")
        gates.append(DslGate(name, tuple(gq), param))

    unused = [p for p in params if p not in used_params]
    _require(not unused, f"declared params never used by any gate: {unused}", path="$.params")
    return CircuitDsl(tuple(qubits), tuple(gates), tuple(params))


def parse_dsl(text: str) -> Circuit:
    """Extract, validate, and build the circuit a proposal document describes."""
    doc, offset = extract_json(text)
    try:
        return validate_document(doc).to_circuit()
    except DslError as e:
        if offset > 0 and e.offset is None:
            raise DslError(e.message, path=e.path, offset=offset) from None
        raise


def to_dsl(circuit: Circuit) -> str:
    """Canonical document for a circuit; parse_dsl(to_dsl(c)) reproduces c."""
    return CircuitDsl.from_circuit(circuit).to_json()
