"""Circuit proposers: an offline deterministic mock and an LLM-backed client.

Both expose the same call shape, ``propose(prompt, seed) -> str``, returning raw
text for the DSL parser. The mock reads the same prompt an LLM would get (the fenced
JSON sections carry everything it needs) and runs a small fixed policy: start on the
best-measuring connected patch of the device, then per round either prune when close
to the depth budget, grow when the loss got worse, or stand pat. That gives the
search loop a fully reproducible counterparty for tests and offline runs.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass

import httpx

from .circuits import ROTATION_GATES, TWO_QUBIT_GATES, depth
from .dsl import CircuitDsl, DslGate, validate_document
from .prompts import section_json, section_text

PRUNE_FRACTION = 0.9


class ProposerError(RuntimeError):
    """The proposer could not produce a reply at all."""


class CredentialsError(ProposerError):
    """Missing or unusable API credentials."""


def _register_width(prompt: str) -> int:
    body = section_text(prompt, "Task")
    if body is not None:
        m = re.search(r"exactly (\d+) qubits", body)
        if m:
            return int(m.group(1))
    raise ProposerError("prompt has no parseable Task section")


def _mean_rates(profile: dict) -> list[float]:
    return [(float(a) + float(b)) / 2.0 for a, b in profile["readout_error"]]


def _adjacency(profile: dict) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {q: set() for q in range(int(profile["num_qubits"]))}
    for a, b in profile["coupling_map"]:
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    return adj


def _best_subset(profile: dict, n: int) -> tuple[list[int], list[tuple[int, int]]]:
    """Connected n-qubit patch grown greedily by readout quality, with its tree edges."""
    num = int(profile["num_qubits"])
    if n > num:
        raise ProposerError(f"need {n} qubits, device has {num}")
    rates = _mean_rates(profile)
    adj = _adjacency(profile)
    start = min(range(num), key=lambda q: (rates[q], q))
    chosen = [start]
    edges: list[tuple[int, int]] = []
    while len(chosen) < n:
        frontier = [
            (rates[q], q, anchor)
            for anchor in chosen
            for q in adj[anchor]
            if q not in chosen
        ]
        if not frontier:
            raise ProposerError(f"device has no connected {n}-qubit region")
        _, q, anchor = min(frontier)
        chosen.append(q)
        edges.append((anchor, q))
    return chosen, edges


def _tree_edges(declared: tuple[int, ...], profile: dict) -> list[tuple[int, int]]:
    """Spanning edges over an already-chosen qubit set, declaration order first."""
    coupled = {frozenset(map(int, p)) for p in profile["coupling_map"]}
    seen = {declared[0]}
    pending = list(declared[1:])
    edges: list[tuple[int, int]] = []
    while pending:
        hit = None
        for q in pending:
            anchors = sorted(a for a in seen if frozenset((a, q)) in coupled)
            if anchors:
                hit = (anchors[0], q)
                break
        if hit is None:
            break
        edges.append(hit)
        seen.add(hit[1])
        pending.remove(hit[1])
    return edges


def _rotation_layers(qubits: list[int] | tuple[int, ...], counter: int) -> tuple[list[DslGate], list[str], int]:
    gates: list[DslGate] = []
    params: list[str] = []
    for name in ("rx", "rz"):
        for q in qubits:
            pname = f"p{counter}"
            counter += 1
            gates.append(DslGate(name, (q,), pname))
            params.append(pname)
    return gates, params, counter


class MockProposer:
    """Deterministic stand-in for an LLM; same prompt in, canonical DSL out."""

    def propose(self, prompt: str, seed: int) -> str:
        profile = section_json(prompt, "Device profile")
        if profile is None:
            raise ProposerError("prompt has no Device profile section")
        n = _register_width(prompt)
        previous = section_json(prompt, "Previous circuit")
        if previous is None:
            return self._initial(profile, n)
        history = section_json(prompt, "History") or []
        return self._refine(profile, previous, history)

    def _initial(self, profile: dict, n: int) -> str:
        chosen, edges = _best_subset(profile, n)
        gates: list[DslGate] = []
        params: list[str] = []
        counter = 0
        g, p, counter = _rotation_layers(chosen, counter)
        gates += g
        params += p
        gates += [DslGate("cz", e) for e in edges]
        g, p, counter = _rotation_layers(chosen, counter)
        gates += g
        params += p
        return CircuitDsl(tuple(chosen), tuple(gates), tuple(params)).to_json()

    def _refine(self, profile: dict, previous: dict, history: list[dict]) -> str:
        dsl = validate_document(previous)
        budget = int(profile["max_depth"])
        if depth(dsl.to_circuit()) > PRUNE_FRACTION * budget:
            return self._pruned(dsl)
        # grow only when the last two usable rounds show the loss moving the wrong way
        kls = [h["kl"] for h in history if h.get("kl") is not None]
        if len(kls) >= 2 and kls[-1] > kls[-2]:
            return self._grown(dsl, profile)
        return dsl.to_json()

    def _pruned(self, dsl: CircuitDsl) -> str:
        gates = list(dsl.gates)
        i = len(gates)
        while i > 0 and gates[i - 1].name in ROTATION_GATES:
            i -= 1
        while i > 0 and gates[i - 1].name in TWO_QUBIT_GATES:
            i -= 1
        kept = gates[:i]
        if not any(g.param for g in kept):
            return dsl.to_json()
        params = []
        for g in kept:
            if g.param and g.param not in params:
                params.append(g.param)
        return CircuitDsl(dsl.qubits, tuple(kept), tuple(params)).to_json()

    def _grown(self, dsl: CircuitDsl, profile: dict) -> str:
        edges = _tree_edges(dsl.qubits, profile)
        gates = list(dsl.gates) + [DslGate("cz", e) for e in edges]
        params = list(dsl.params)
        counter = len(params)
        existing = set(params)
        for name in ("rx", "rz"):
            for q in dsl.qubits:
                while f"p{counter}" in existing:
                    counter += 1
                pname = f"p{counter}"
                counter += 1
                existing.add(pname)
                gates.append(DslGate(name, (q,), pname))
                params.append(pname)
        return CircuitDsl(dsl.qubits, tuple(gates), tuple(params)).to_json()


@dataclass(frozen=True)
class LlmConfig:
    """Connection settings for an OpenAI-style chat completions endpoint."""

    base_url: str
    model: str
    api_key: str | None = None
    api_key_env: str = "BORNSEARCH_API_KEY"
    temperature: float = 0.2
    max_tokens: int = 4096
    timeout: float = 120.0

    def resolved_key(self) -> str:
        if self.api_key:
            return self.api_key
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise CredentialsError(
                f"no API key: set {self.api_key_env} or pass one explicitly"
            )
        return key


class LlmProposer:
    """Thin chat-completions client; the whole prompt goes in one user message."""

    def __init__(self, config: LlmConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout,
            transport=transport,
        )

    def propose(self, prompt: str, seed: int) -> str:
        key = self.config.resolved_key()
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "seed": seed,
        }
        try:
            resp = self._client.post(
                "/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {key}"},
            )
        except httpx.HTTPError as e:
            raise ProposerError(f"LLM request failed: {e}") from None
        if resp.status_code in (401, 403):
            raise CredentialsError(f"LLM endpoint rejected credentials ({resp.status_code})")
        if resp.status_code != 200:
            raise ProposerError(
                f"LLM endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError):
            raise ProposerError("LLM reply had no message content") from None

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "LlmProposer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
