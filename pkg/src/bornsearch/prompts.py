"""Prompt construction for the architecture-search proposer.

Prompts are markdown with fixed '## ' section headers, and all machine-relevant
state (device profile, round history, previous circuit) rides in fenced JSON blocks.
That makes the prompt a complete, self-contained task statement for a language
model while staying mechanically parseable, which is what lets the offline mock
proposer act on exactly the text an LLM would see. The section extraction helpers
at the bottom are that shared reading side.
"""
from __future__ import annotations

import json
import re

from .circuits import SINGLE_QUBIT_GATES, TWO_QUBIT_GATES, HardwareProfile, profile_doc

_FORMAT_RULES = """\
Respond with exactly one JSON object and nothing else. The object has three keys:

- "qubits": the physical qubit ids you use, as a list of distinct integers.
- "gates": the gate sequence, in order. Each gate is an object with "name",
  "qubits" (physical ids from your list), and, for rotation gates only, "param"
  (the name of the angle parameter).
- "params": every parameter name used by your gates, each listed once.

Example:

```json
{"qubits": [0, 1], "gates": [{"name": "rx", "qubits": [0], "param": "t0"}, {"name": "cz", "qubits": [0, 1]}], "params": ["t0"]}
```

Rules:
- Known gate names: %s (single qubit) and %s (two qubit). Rotation gates rx/ry/rz
  take a "param"; the others must not.
- Two-qubit gates may only connect qubit pairs present in the device coupling map.
- Use only gates from the device basis list.
- Circuit depth must stay within the device depth budget.
- Parameters are trained from scratch; more parameters cost 2 extra circuit
  evaluations per training step each.
""" % (
    ", ".join(sorted(SINGLE_QUBIT_GATES)),
    ", ".join(sorted(TWO_QUBIT_GATES)),
)


def _fenced(doc) -> str:
    return "```json\n" + json.dumps(doc, indent=2) + "\n```"


def _task_section(num_qubits: int, task_summary: str) -> str:
    return (
        f"## Task\n\n"
        f"Design a parameterized quantum circuit on exactly {num_qubits} qubits. "
        f"The circuit is trained as a Born machine: it should be expressive enough "
        f"to match the target distribution, and shallow enough to survive hardware "
        f"noise. {task_summary}\n"
    )


def _profile_section(profile: HardwareProfile) -> str:
    return "## Device profile\n\n" + _fenced(profile_doc(profile)) + "\n"


def _format_section() -> str:
    return "## Circuit format\n\n" + _FORMAT_RULES


def build_initial_prompt(profile: HardwareProfile, num_qubits: int, task_summary: str) -> str:
    """First-round prompt: the task, the device, and the answer format."""
    return "\n".join(
        [
            _task_section(num_qubits, task_summary),
            _profile_section(profile),
            _format_section(),
        ]
    )


def build_feedback_prompt(
    profile: HardwareProfile,
    num_qubits: int,
    task_summary: str,
    history: list[dict],
    previous_dsl: str | None,
    diagnostics: list[str] | None = None,
) -> str:
    """Later-round prompt: adds results so far, the circuit being iterated on, and
    (when the last proposal was rejected) what exactly was wrong with it."""
    parts = [
        _task_section(num_qubits, task_summary),
        _profile_section(profile),
        _format_section(),
        "## History\n\nPer-round results so far; lower kl is better, null means the "
        "round produced no usable circuit.\n\n" + _fenced(history) + "\n",
    ]
    if previous_dsl is not None:
        parts.append(
            "## Previous circuit\n\nThe best starting point so far. Refine it: make "
            "it deeper if it underfits, shallower if it is near the depth budget.\n\n"
            + "```json\n" + previous_dsl.strip() + "\n```\n"
        )
    if diagnostics:
        bullets = "\n".join(f"- {d}" for d in diagnostics)
        parts.append(
            "## Diagnostics\n\nYour last reply was rejected for these reasons. "
            "Fix them and answer again.\n\n" + bullets + "\n"
        )
    return "\n".join(parts)


_SECTION_RE = re.compile(r"^## (.+)$", re.MULTILINE)
_FENCE_RE = re.compile(r"```json\n(.*?)```", re.DOTALL)


def section_text(prompt: str, header: str) -> str | None:
    """Body of the named '## ' section, or None if the prompt has no such section."""
    matches = list(_SECTION_RE.finditer(prompt))
    for i, m in enumerate(matches):
        if m.group(1).strip() == header:
            end = matches[i + 1].start() if i + 1 < len(matches) else len(prompt)
            return prompt[m.end() : end]
    return None


def section_json(prompt: str, header: str):
    """Decoded first fenced JSON block of the named section, or None."""
    body = section_text(prompt, header)
    if body is None:
        return None
    m = _FENCE_RE.search(body)
    if m is None:
        return None
    return json.loads(m.group(1))
