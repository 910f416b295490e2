import json

import numpy as np
import pytest

from bornsearch.circuits import (
    Circuit,
    Gate,
    HardwareProfile,
    bind_parameters,
    build_two_local,
    depth,
    load_hardware_profile,
    ring_pairs,
    save_hardware_profile,
    validate,
)
from conftest import line_profile, ring_profile
from oracles import dag_depth, random_circuit


class TestGate:
    def test_rotation_requires_param(self):
        with pytest.raises(ValueError, match="requires a parameter"):
            Gate("rx", (0,))

    def test_non_rotation_rejects_param(self):
        with pytest.raises(ValueError, match="does not take a parameter"):
            Gate("h", (0,), "a")

    def test_arity_checked_for_known_gates(self):
        with pytest.raises(ValueError, match="takes 2 qubit"):
            Gate("cz", (0,))
        with pytest.raises(ValueError, match="takes 1 qubit"):
            Gate("rx", (0, 1), "a")

    def test_unknown_names_are_representable(self):
        g = Gate("ccx_ish", (0, 1), "a")
        assert g.name == "ccx_ish"
        with pytest.raises(ValueError, match="1- and 2-qubit"):
            Gate("mystery", (0, 1, 2))

    def test_repeated_and_negative_qubits_rejected(self):
        with pytest.raises(ValueError, match="repeated"):
            Gate("cz", (1, 1))
        with pytest.raises(ValueError, match="negative"):
            Gate("x", (-1,))


class TestCircuit:
    def test_param_names_first_appearance_order(self):
        c = Circuit(2, (
            Gate("rz", (1,), "b"),
            Gate("rx", (0,), "a"),
            Gate("ry", (1,), "b"),
        ))
        assert c.param_names == ("b", "a")

    def test_wire_bound_checked(self):
        with pytest.raises(ValueError, match="touches wire 2"):
            Circuit(2, (Gate("x", (2,)),))

    def test_default_physical_mapping_is_identity(self):
        c = Circuit(3, (Gate("h", (0,)),))
        assert c.physical_qubits == (0, 1, 2)

    def test_physical_mapping_validated(self):
        with pytest.raises(ValueError, match="distinct"):
            Circuit(2, (), physical_qubits=(5, 5))
        with pytest.raises(ValueError, match="2 entries"):
            Circuit(3, (), physical_qubits=(0, 1))

    def test_bind_parameters(self):
        c = Circuit(1, (Gate("rx", (0,), "a"), Gate("rz", (0,), "b")))
        bound = bind_parameters(c, {"a": 0.5, "b": -1.0})
        assert [g.angle for g in bound.gates] == [0.5, -1.0]
        with pytest.raises(KeyError, match="missing"):
            bind_parameters(c, {"a": 0.5})
        with pytest.raises(KeyError, match="unknown"):
            bind_parameters(c, {"a": 0.5, "b": 1.0, "c": 2.0})


class TestDepth:
    def test_small_examples(self):
        assert depth(Circuit(2, ())) == 0
        c = Circuit(2, (Gate("rx", (0,), "a"), Gate("rx", (1,), "b"), Gate("cz", (0, 1))))
        assert depth(c) == 2
        c2 = Circuit(1, (Gate("h", (0,)), Gate("x", (0,)), Gate("sx", (0,))))
        assert depth(c2) == 3

    def test_matches_dag_longest_path(self, rng):
        for _ in range(60):
            n = int(rng.integers(1, 6))
            circuit, _ = random_circuit(rng, n, int(rng.integers(0, 25)))
            assert depth(circuit) == dag_depth(circuit)


class TestTwoLocal:
    def test_frozen_shape_12_18(self):
        c = build_two_local(12, 18)
        assert len(c.param_names) == 456
        assert len(c.gates) == 672
        assert 74 <= depth(c) <= 92

    def test_frozen_shape_2_1(self):
        c = build_two_local(2, 1)
        assert len(c.param_names) == 8
        assert len(c.gates) == 10
        assert sum(1 for g in c.gates if g.name == "cz") == 2

    def test_param_count_formula(self):
        for n, reps in [(3, 1), (4, 2), (6, 3), (8, 4)]:
            c = build_two_local(n, reps)
            assert len(c.param_names) == 2 * n * (reps + 1)
            assert len(set(c.param_names)) == len(c.param_names)

    def test_entangler_is_ring(self):
        n = 5
        pairs = {frozenset(p) for p in ring_pairs(n)}
        assert pairs == {frozenset((i, (i + 1) % n)) for i in range(n)}
        c = build_two_local(n, 2)
        seen = {frozenset(g.qubits) for g in c.gates if g.name == "cz"}
        assert seen == pairs

    def test_valid_on_ring_device(self):
        c = build_two_local(6, 2)
        assert validate(c, ring_profile(6)).valid

    def test_bad_args(self):
        with pytest.raises(ValueError):
            build_two_local(1, 1)
        with pytest.raises(ValueError):
            build_two_local(4, 0)


class TestHardwareProfile:
    def test_validation(self):
        with pytest.raises(ValueError, match="self-loop"):
            ring = ring_profile(3)
            HardwareProfile(3, ring.basis_gates, frozenset({(1, 1)}),
                            ring.readout_error, {}, 10)
        with pytest.raises(ValueError, match="out of range"):
            ring = ring_profile(3)
            HardwareProfile(3, ring.basis_gates, frozenset({(0, 7)}),
                            ring.readout_error, {}, 10)
        with pytest.raises(ValueError, match="readout_error"):
            HardwareProfile(3, frozenset({"rx"}), frozenset(), ((0.1, 0.1),), {}, 10)
        with pytest.raises(ValueError, match="max_depth"):
            ring = ring_profile(3)
            HardwareProfile(3, ring.basis_gates, ring.coupling_map,
                            ring.readout_error, {}, 0)

    def test_coupled_is_undirected(self):
        p = line_profile(3)
        assert p.coupled(0, 1) and p.coupled(1, 0)
        assert not p.coupled(0, 2)

    def test_json_round_trip(self, tmp_path):
        p = line_profile(4, readout_errors=((0.01, 0.02), (0.0, 0.0), (0.3, 0.1), (0.05, 0.05)))
        path = tmp_path / "profile.json"
        save_hardware_profile(p, path)
        assert load_hardware_profile(path) == p
        doc = json.loads(path.read_text())
        assert doc["num_qubits"] == 4


class TestValidate:
    def test_all_violation_kinds_reported(self):
        profile = line_profile(4, max_depth=2)
        c = Circuit(3, (
            Gate("wiggle", (0,)),          # unknown-gate
            Gate("ry", (0,), "a"),
            Gate("cz", (0, 2)),            # uncoupled: physical 0 and 2
            Gate("ry", (0,), "b"),         # pushes depth to 4 > 2
        ))
        report = validate(c, profile)
        kinds = {v.kind for v in report.violations}
        assert not report.valid
        assert kinds == {"unknown-gate", "uncoupled-pair", "depth-exceeded"}

    def test_not_in_basis(self):
        profile = HardwareProfile(2, frozenset({"rx", "cz"}), frozenset({(0, 1)}),
                                  ((0.0, 0.0),) * 2, {}, 50)
        c = Circuit(2, (Gate("h", (0,)), Gate("cz", (0, 1))))
        report = validate(c, profile)
        assert [v.kind for v in report.violations] == ["not-in-basis"]
        assert report.violations[0].gate_index == 0

    def test_bad_physical_index(self):
        profile = line_profile(3)
        c = Circuit(2, (Gate("x", (1,)),), physical_qubits=(0, 9))
        report = validate(c, profile)
        assert [v.kind for v in report.violations] == ["bad-qubit-index"]
        assert "9" in report.violations[0].message

    def test_unused_wire_out_of_range_flagged_without_gate(self):
        profile = line_profile(3)
        c = Circuit(2, (Gate("x", (0,)),), physical_qubits=(0, 9))
        report = validate(c, profile)
        assert report.violations[0].gate_index is None

    def test_coupling_checked_on_physical_ids(self):
        profile = line_profile(4)
        # wires 0,1 sit on physical qubits 0 and 2: not coupled even though the
        # wire indices are adjacent
        c = Circuit(2, (Gate("cz", (0, 1)),), physical_qubits=(0, 2))
        assert not validate(c, profile).valid
        c2 = Circuit(2, (Gate("cz", (0, 1)),), physical_qubits=(2, 1))
        assert validate(c2, profile).valid

    def test_every_offending_gate_reported(self):
        profile = line_profile(4)
        c = Circuit(2, (Gate("cz", (0, 1)), Gate("cz", (0, 1))), physical_qubits=(0, 3))
        report = validate(c, profile)
        assert len(report.violations) == 2
        assert [v.gate_index for v in report.violations] == [0, 1]

    def test_valid_circuit_empty_report(self):
        report = validate(build_two_local(4, 1), ring_profile(4))
        assert report.valid and report.violations == ()
