"""The propose / validate / train / feed-back architecture search loop.

Each round asks the proposer for a circuit, checks it against the hardware profile
(retrying with concrete diagnostics when it is unusable), trains the accepted
circuit from scratch, and scores it by reverse KL between the data and the trained
model evaluated exactly. The best round is the lowest KL, with depth and then
earliness breaking ties. A round where every retry failed is recorded and skipped;
a search where every round failed raises SearchExhausted.

Everything is deterministic for a fixed (config.seed, proposer) pair: proposer
seeds and per-round training seeds are derived, never drawn from global state.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .circuits import Circuit, HardwareProfile, bind_parameters, depth, validate
from .distributions import Distribution
from .dsl import DslError, parse_dsl, to_dsl
from .encoding import EncodedDataset
from .metrics import KlConfig, reverse_kl
from .prompts import build_feedback_prompt, build_initial_prompt
from .simulator import exact_distribution
from .trainer import TrainConfig, train


class SearchExhausted(RuntimeError):
    """No round produced a valid circuit."""


@dataclass(frozen=True)
class SearchConfig:
    rounds: int = 10
    retries_per_round: int = 3
    seed: int = 0
    train: TrainConfig = TrainConfig()
    kl: KlConfig = KlConfig()

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.retries_per_round < 0:
            raise ValueError("retries_per_round must be nonnegative")


@dataclass(frozen=True)
class RoundRecord:
    """Everything one round produced, including why proposals were rejected."""

    round: int
    accepted: bool
    attempts: int
    failures: tuple[str, ...]
    dsl: str | None = None
    depth: int | None = None
    num_params: int | None = None
    kl: float | None = None
    final_mmd: float | None = None
    params: dict[str, float] | None = None


@dataclass(frozen=True)
class SearchResult:
    rounds: tuple[RoundRecord, ...]
    best_round: int

    @property
    def best(self) -> RoundRecord:
        for rec in self.rounds:
            if rec.round == self.best_round:
                return rec
        raise LookupError(f"no record for round {self.best_round}")

    def best_circuit(self) -> Circuit:
        return parse_dsl(self.best.dsl)


def _task_summary(data: EncodedDataset | Distribution) -> str:
    if isinstance(data, EncodedDataset):
        layout = ", ".join(f"{f.name} ({f.num_bits} bits)" for f in data.features)
        return (
            f"The register packs these features in order: {layout}. "
            f"Success is a low reverse KL between the data and your trained circuit."
        )
    return "Success is a low reverse KL between the data and your trained circuit."


def run_search(
    data: EncodedDataset | Distribution,
    profile: HardwareProfile,
    proposer,
    config: SearchConfig = SearchConfig(),
    callback=None,
) -> SearchResult:
    target = data.empirical() if isinstance(data, EncodedDataset) else data
    n = target.num_qubits
    summary = _task_summary(data)

    history: list[dict] = []
    last_dsl: str | None = None
    records: list[RoundRecord] = []

    for r in range(1, config.rounds + 1):
        if last_dsl is None:
            prompt = build_initial_prompt(profile, n, summary)
        else:
            prompt = build_feedback_prompt(profile, n, summary, history, last_dsl)

        circuit: Circuit | None = None
        failures: list[str] = []
        attempts = 0
        for attempt in range(config.retries_per_round + 1):
            attempts += 1
            text = proposer.propose(prompt, seed=config.seed * 1009 + r * 31 + attempt)
            diagnostics: list[str] = []
            try:
                candidate = parse_dsl(text)
            except DslError as e:
                diagnostics.append(f"parse error: {e}")
            else:
                if candidate.num_qubits != n:
                    diagnostics.append(
                        f"width-mismatch: circuit has {candidate.num_qubits} qubits, "
                        f"the data register needs exactly {n}"
                    )
                report = validate(candidate, profile)
                diagnostics.extend(v.message for v in report.violations)
                if not diagnostics:
                    circuit = candidate
                    break
            failures.extend(diagnostics)
            if attempt < config.retries_per_round:
                prompt = build_feedback_prompt(
                    profile, n, summary, history, last_dsl, diagnostics=diagnostics
                )

        if circuit is None:
            rec = RoundRecord(round=r, accepted=False, attempts=attempts,
                              failures=tuple(failures))
            records.append(rec)
            history.append({"round": r, "accepted": False, "kl": None, "depth": None})
            if callback is not None:
                callback(rec)
            continue

        # every round trains from scratch with its own derived seed
        train_config = replace(config.train, seed=config.train.seed + r)
        result = train(circuit, data, train_config)
        model = exact_distribution(bind_parameters(circuit, result.params))
        kl = reverse_kl(model, target, config.kl)
        d = depth(circuit)
        rec = RoundRecord(
            round=r,
            accepted=True,
            attempts=attempts,
            failures=tuple(failures),
            dsl=to_dsl(circuit),
            depth=d,
            num_params=len(circuit.param_names),
            kl=kl,
            final_mmd=result.final_loss,
            params=result.params,
        )
        records.append(rec)
        history.append({"round": r, "accepted": True, "kl": kl, "depth": d})
        last_dsl = rec.dsl
        if callback is not None:
            callback(rec)

    accepted = [rec for rec in records if rec.accepted]
    if not accepted:
        raise SearchExhausted(
            f"no valid circuit in {config.rounds} rounds "
            f"({config.retries_per_round + 1} attempts each)"
        )
    best = min(accepted, key=lambda rec: (rec.kl, rec.depth, rec.round))
    return SearchResult(tuple(records), best.round)


def result_doc(result: SearchResult) -> dict:
    """JSON-ready dict; stable field order for byte-identical reruns."""
    return {
        "best_round": result.best_round,
        "rounds": [
            {
                "round": rec.round,
                "accepted": rec.accepted,
                "attempts": rec.attempts,
                "failures": list(rec.failures),
                "dsl": rec.dsl,
                "depth": rec.depth,
                "num_params": rec.num_params,
                "kl": rec.kl,
                "final_mmd": rec.final_mmd,
                "params": rec.params,
            }
            for rec in result.rounds
        ],
    }
