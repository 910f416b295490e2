import json

from conftest import line_profile

from bornsearch.dsl import parse_dsl, to_dsl
from bornsearch.circuits import build_two_local
from bornsearch.prompts import (
    build_feedback_prompt,
    build_initial_prompt,
    section_json,
    section_text,
)


class TestInitialPrompt:
    def test_sections_present(self):
        prompt = build_initial_prompt(line_profile(4), 4, "Match the target.")
        for header in ("## Task", "## Device profile", "## Circuit format"):
            assert header in prompt
        assert "## History" not in prompt
        assert "## Previous circuit" not in prompt

    def test_states_exact_width(self):
        prompt = build_initial_prompt(line_profile(5), 5, "x")
        assert "exactly 5 qubits" in prompt

    def test_profile_block_is_valid_json(self):
        profile = line_profile(3, readout_errors=[(0.01, 0.02)] * 3)
        prompt = build_initial_prompt(profile, 3, "x")
        doc = section_json(prompt, "Device profile")
        assert doc["num_qubits"] == 3
        assert doc["coupling_map"] == [[0, 1], [1, 2]]
        assert doc["max_depth"] == profile.max_depth
        assert doc["readout_error"][0] == [0.01, 0.02]

    def test_format_rules_describe_the_interchange(self):
        prompt = build_initial_prompt(line_profile(2), 2, "x")
        body = section_text(prompt, "Circuit format")
        assert '"qubits"' in body and '"gates"' in body and '"params"' in body
        assert "coupling map" in body


class TestFeedbackPrompt:
    def test_history_and_previous_sections(self):
        history = [
            {"round": 1, "accepted": True, "kl": 0.8, "depth": 6},
            {"round": 2, "accepted": False, "kl": None, "depth": None},
        ]
        previous = to_dsl(build_two_local(3, 1))
        prompt = build_feedback_prompt(line_profile(3), 3, "x", history, previous)
        assert section_json(prompt, "History") == history
        parsed = parse_dsl(section_text(prompt, "Previous circuit"))
        assert parsed == build_two_local(3, 1)
        assert "## Diagnostics" not in prompt

    def test_diagnostics_rendered_as_bullets(self):
        diags = ["uncoupled-pair: cz on (0, 2)", "depth-exceeded: depth 40 over budget 10"]
        prompt = build_feedback_prompt(line_profile(3), 3, "x", [], None, diags)
        body = section_text(prompt, "Diagnostics")
        for d in diags:
            assert f"- {d}" in body
        assert "## Previous circuit" not in prompt

    def test_no_diagnostics_section_when_empty(self):
        prompt = build_feedback_prompt(line_profile(3), 3, "x", [], None, [])
        assert "## Diagnostics" not in prompt


class TestSectionHelpers:
    def test_missing_section_is_none(self):
        assert section_text("## A\n\nbody\n", "B") is None
        assert section_json("## A\n\nno fence here\n", "A") is None

    def test_section_boundaries(self):
        prompt = "## A\n\nfirst\n\n## B\n\nsecond\n"
        assert section_text(prompt, "A").strip() == "first"
        assert section_text(prompt, "B").strip() == "second"

    def test_first_fence_wins(self):
        body = "## A\n\n```json\n{\"x\": 1}\n```\n\n```json\n{\"x\": 2}\n```\n"
        assert section_json(body, "A") == {"x": 1}

    def test_round_trips_arbitrary_payload(self):
        payload = [{"round": 1, "kl": 0.25, "note": "has ## not a header"}]
        prompt = "## History\n\n```json\n" + json.dumps(payload) + "\n```\n"
        assert section_json(prompt, "History") == payload
