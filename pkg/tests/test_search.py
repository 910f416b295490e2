import json

import numpy as np
import pytest

from conftest import line_profile

from bornsearch.distributions import Distribution
from bornsearch.dsl import parse_dsl
from bornsearch.encoding import EncodingConfig, encode_matrix
from bornsearch.metrics import KlConfig
from bornsearch.proposers import MockProposer
from bornsearch.search import (
    RoundRecord,
    SearchConfig,
    SearchExhausted,
    SearchResult,
    result_doc,
    run_search,
)
from bornsearch.trainer import TrainConfig


def toy_target():
    probs = np.zeros(8)
    probs[0] = 0.5
    probs[-1] = 0.5
    return Distribution(3, probs)


def quick_config(rounds=3, retries=2, seed=0, epochs=2):
    return SearchConfig(
        rounds=rounds,
        retries_per_round=retries,
        seed=seed,
        train=TrainConfig(epochs=epochs, shots=0, seed=seed),
        kl=KlConfig(),
    )


def gate_doc(name, qubits, param=None):
    g = {"name": name, "qubits": list(qubits)}
    if param is not None:
        g["param"] = param
    return g


def circuit_doc(qubits, gates, params):
    return json.dumps({"qubits": list(qubits), "gates": gates, "params": params})


VALID_3Q = circuit_doc(
    [0, 1, 2],
    [
        gate_doc("rx", [0], "a"),
        gate_doc("rx", [1], "b"),
        gate_doc("rx", [2], "c"),
        gate_doc("cz", [0, 1]),
        gate_doc("cz", [1, 2]),
        gate_doc("rz", [0], "d"),
    ],
    ["a", "b", "c", "d"],
)

UNCOUPLED_3Q = circuit_doc(
    [0, 1, 2],
    [gate_doc("rx", [0], "a"), gate_doc("cz", [0, 2])],
    ["a"],
)

TWO_WIDE = circuit_doc([0, 1], [gate_doc("rx", [0], "a")], ["a"])


class ScriptedProposer:
    def __init__(self, replies):
        self.replies = list(replies)
        self.prompts = []
        self.seeds = []

    def propose(self, prompt, seed):
        self.prompts.append(prompt)
        self.seeds.append(seed)
        if not self.replies:
            raise AssertionError("scripted proposer ran out of replies")
        return self.replies.pop(0)


class TestSearchLoop:
    def test_mock_search_produces_full_result(self):
        result = run_search(toy_target(), line_profile(4), MockProposer(), quick_config())
        assert len(result.rounds) == 3
        assert all(rec.accepted for rec in result.rounds)
        best = result.best
        assert best.kl == min(rec.kl for rec in result.rounds)
        assert best.depth is not None and best.num_params is not None
        circuit = result.best_circuit()
        assert circuit.num_qubits == 3
        assert set(best.params) == set(circuit.param_names)

    def test_deterministic_rerun(self):
        a = run_search(toy_target(), line_profile(4), MockProposer(), quick_config(seed=7))
        b = run_search(toy_target(), line_profile(4), MockProposer(), quick_config(seed=7))
        assert result_doc(a) == result_doc(b)
        json.dumps(result_doc(a))  # must be serializable as-is

    def test_callback_order(self):
        seen = []
        run_search(toy_target(), line_profile(4), MockProposer(), quick_config(),
                   callback=seen.append)
        assert [rec.round for rec in seen] == [1, 2, 3]
        assert all(isinstance(rec, RoundRecord) for rec in seen)

    def test_each_round_trains_with_its_own_seed(self):
        result = run_search(toy_target(), line_profile(4), MockProposer(), quick_config())
        first, second = result.rounds[0], result.rounds[1]
        # the mock re-emits the same circuit, so differing params prove a fresh seed
        assert first.dsl == second.dsl
        assert first.params != second.params

    def test_proposer_seed_derivation(self):
        proposer = ScriptedProposer([VALID_3Q, VALID_3Q])
        run_search(toy_target(), line_profile(3), proposer,
                   quick_config(rounds=2, retries=0, seed=5, epochs=1))
        assert proposer.seeds == [5 * 1009 + 31 + 0, 5 * 1009 + 62 + 0]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(rounds=0)
        with pytest.raises(ValueError):
            SearchConfig(retries_per_round=-1)


class TestRetries:
    def test_invalid_then_valid_gets_diagnostics(self):
        proposer = ScriptedProposer([UNCOUPLED_3Q, VALID_3Q])
        result = run_search(toy_target(), line_profile(3), proposer,
                            quick_config(rounds=1, retries=1, epochs=1))
        rec = result.rounds[0]
        assert rec.accepted and rec.attempts == 2
        assert any("not coupled" in f for f in rec.failures)
        retry_prompt = proposer.prompts[1]
        assert "## Diagnostics" in retry_prompt
        assert "(0, 2) are not coupled" in retry_prompt

    def test_width_mismatch_diagnostic_wording(self):
        proposer = ScriptedProposer([TWO_WIDE, VALID_3Q])
        result = run_search(toy_target(), line_profile(3), proposer,
                            quick_config(rounds=1, retries=1, epochs=1))
        assert result.rounds[0].attempts == 2
        assert (
            "width-mismatch: circuit has 2 qubits, the data register needs exactly 3"
            in proposer.prompts[1]
        )

    def test_unparseable_reply_reported(self):
        proposer = ScriptedProposer(["gibberish with no json", VALID_3Q])
        result = run_search(toy_target(), line_profile(3), proposer,
                            quick_config(rounds=1, retries=1, epochs=1))
        assert any("parse error" in f for f in result.rounds[0].failures)

    def test_failed_round_recorded_and_skipped(self):
        proposer = ScriptedProposer([UNCOUPLED_3Q, UNCOUPLED_3Q, VALID_3Q, VALID_3Q])
        result = run_search(toy_target(), line_profile(3), proposer,
                            quick_config(rounds=3, retries=1, epochs=1))
        first, second, third = result.rounds
        assert not first.accepted
        assert first.kl is None and first.dsl is None
        assert first.attempts == 2 and len(first.failures) == 2
        assert second.accepted and third.accepted
        # a fully failed round leaves no circuit to refine: round 2 starts fresh
        assert "## History" not in proposer.prompts[2]
        # once there is a previous circuit, history shows round 1 as unusable
        assert '"accepted": false' in proposer.prompts[3]
        assert '"kl": null' in proposer.prompts[3]

    def test_exhaustion(self):
        proposer = ScriptedProposer([UNCOUPLED_3Q] * 4)
        with pytest.raises(SearchExhausted, match="2 rounds"):
            run_search(toy_target(), line_profile(3), proposer,
                       quick_config(rounds=2, retries=1, epochs=1))


class TestDatasetIntegration:
    def test_encoded_dataset_summary_names_features(self, rng):
        walk = np.cumsum(rng.normal(size=(50, 1)), axis=0)
        ds = encode_matrix(walk, ["close"], EncodingConfig(bits_per_feature=3))
        proposer = ScriptedProposer([VALID_3Q])
        run_search(ds, line_profile(3), proposer,
                   quick_config(rounds=1, retries=0, epochs=1))
        assert "close (3 bits)" in proposer.prompts[0]

    def test_best_circuit_round_trips(self):
        result = run_search(toy_target(), line_profile(4), MockProposer(),
                            quick_config(rounds=2))
        assert parse_dsl(result.best.dsl) == result.best_circuit()


class TestResultDoc:
    def test_field_order_and_content(self):
        result = run_search(toy_target(), line_profile(3),
                            ScriptedProposer([VALID_3Q]),
                            quick_config(rounds=1, retries=0, epochs=1))
        doc = result_doc(result)
        assert list(doc) == ["best_round", "rounds"]
        assert list(doc["rounds"][0]) == [
            "round", "accepted", "attempts", "failures", "dsl", "depth",
            "num_params", "kl", "final_mmd", "params",
        ]

    def test_best_lookup_error(self):
        record = RoundRecord(round=1, accepted=True, attempts=1, failures=())
        broken = SearchResult(rounds=(record,), best_round=9)
        with pytest.raises(LookupError):
            broken.best
