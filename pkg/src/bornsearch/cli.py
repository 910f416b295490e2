"""Command-line front end: encode, train, search, eval-noisy.

Exit codes: 0 success, 2 input error (files, formats, shape mismatches), 3
configuration or credential error, 4 search exhausted with no valid circuit.
Every command resolves its effective configuration as flags > config file >
defaults, snapshots it into a manifest next to the outputs, and writes all
artifacts atomically so an error exit never leaves partial files.
"""
from __future__ import annotations

import json
import os
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .circuits import (
    HardwareProfile,
    bind_parameters,
    build_two_local,
    depth,
    load_hardware_profile,
    validate,
)
from .distributions import Distribution, bitstring_of
from .dsl import DslError, parse_dsl, to_dsl
from .encoding import EncodedDataset, EncodingConfig, ingest_csv, load_dataset, save_dataset
from .metrics import KernelSpec, reverse_kl
from .noise import PostSelectRule, ReadoutModel, apply_readout_noise, mitigate, post_select
from .proposers import CredentialsError, LlmConfig, LlmProposer, MockProposer, ProposerError
from .report import (
    svg_grouped_bars,
    svg_line_chart,
    write_histogram_csv,
    write_loss_csv,
    write_table_csv,
)
from .runio import start_manifest, write_json
from .search import SearchConfig, SearchExhausted, result_doc, run_search
from .simulator import exact_distribution
from .trainer import TrainConfig, train


class ConfigError(Exception):
    """Bad config file or unusable LLM settings; exits with code 3."""


EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_EXHAUSTED = 4


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def _guard(body) -> None:
    """Map exception families onto the exit-code contract."""
    try:
        body()
    except (ConfigError, CredentialsError, ProposerError) as e:
        _fail(EXIT_CONFIG, str(e))
    except SearchExhausted as e:
        _fail(EXIT_EXHAUSTED, str(e))
    except (OSError, ValueError, KeyError, DslError) as e:
        _fail(EXIT_INPUT, str(e))


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _pick(flag, cfg: dict, key: str, default):
    """flags > config file > defaults."""
    if flag is not None:
        return flag
    if key in cfg:
        return cfg[key]
    return default


def _parse_ints(text: str | int | list) -> int | tuple[int, ...]:
    if isinstance(text, int):
        return text
    if isinstance(text, list):
        return tuple(int(x) for x in text)
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("expected an integer or comma-separated integers")
    values = tuple(int(p) for p in parts)
    return values[0] if len(values) == 1 else values


def _load_dataset(path: str) -> EncodedDataset:
    try:
        return load_dataset(path)
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ValueError(f"{path}: not a dataset file ({e})") from None


def _load_profile(path: str) -> HardwareProfile:
    try:
        return load_hardware_profile(path)
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ValueError(f"{path}: not a hardware profile ({e})") from None


def _load_circuit(path: str):
    return parse_dsl(Path(path).read_text())


def _kernel_spec(sigma: float, representation: str, dataset: EncodedDataset) -> KernelSpec:
    widths = tuple(f.num_bits for f in dataset.features)
    if representation == "feature-vector":
        return KernelSpec(sigma=sigma, representation=representation, feature_widths=widths)
    return KernelSpec(sigma=sigma, representation=representation)


def _metrics_doc(kl, mmd_final, circuit_depth, valid, params) -> dict:
    return {
        "kl": kl,
        "mmd_final": mmd_final,
        "depth": circuit_depth,
        "valid": valid,
        "params": params,
    }


@click.group()
@click.version_option(__version__)
def main():
    """Born machine training and hardware-aware circuit search."""


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--bits", default=None, help="Bits per feature: one int or comma list.")
@click.option("--columns", default=None, help="Comma-separated column names (default: all).")
@click.option("--difference/--no-difference", "difference", default=None,
              help="Model day-to-day deltas instead of levels (default on).")
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
def encode(csv_path, out_path, bits, columns, difference, config_path):
    """Discretize a CSV time series into a bitstring dataset file."""

    def body():
        cfg = _load_config_file(config_path)
        bits_eff = _parse_ints(_pick(bits, cfg, "bits", 4))
        columns_eff = _pick(columns, cfg, "columns", None)
        if isinstance(columns_eff, str):
            columns_eff = tuple(c.strip() for c in columns_eff.split(",") if c.strip())
        elif isinstance(columns_eff, list):
            columns_eff = tuple(columns_eff)
        difference_eff = bool(_pick(difference, cfg, "difference", True))

        effective = {
            "csv_path": csv_path,
            "out": out_path,
            "bits": list(bits_eff) if isinstance(bits_eff, tuple) else bits_eff,
            "columns": list(columns_eff) if columns_eff else None,
            "difference": difference_eff,
        }
        manifest = start_manifest("encode", __version__, None, effective)
        manifest.add_input(csv_path)

        dataset = ingest_csv(
            csv_path,
            EncodingConfig(bits_per_feature=bits_eff, difference=difference_eff,
                           columns=columns_eff),
        )
        save_dataset(dataset, out_path)
        manifest.outputs.append(out_path)
        manifest.write(out_path + ".manifest.json")
        click.echo(
            f"encoded {dataset.num_samples} rows into {dataset.num_qubits}-bit strings "
            f"({len(dataset.features)} features) -> {out_path}"
        )

    _guard(body)


def _train_options(fn):
    fn = click.option("--epochs", type=int, default=None)(fn)
    fn = click.option("--lr", "learning_rate", type=float, default=None)(fn)
    fn = click.option("--batch-size", type=int, default=None)(fn)
    fn = click.option("--shots", type=int, default=None,
                      help="Shots per simulated measurement; 0 means exact.")(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--sigma", type=float, default=None, help="Kernel bandwidth.")(fn)
    fn = click.option("--representation", default=None,
                      type=click.Choice(["feature-vector", "scalar-integer", "binary-vector"]))(fn)
    return fn


def _resolve_train_config(cfg: dict, dataset: EncodedDataset, *, epochs, learning_rate,
                          batch_size, shots, seed, sigma, representation) -> tuple[TrainConfig, dict]:
    epochs_eff = int(_pick(epochs, cfg, "epochs", 30))
    lr_eff = float(_pick(learning_rate, cfg, "learning_rate", 0.1))
    batch_eff = int(_pick(batch_size, cfg, "batch_size", 1000))
    shots_eff = int(_pick(shots, cfg, "shots", 10000))
    seed_eff = int(_pick(seed, cfg, "seed", 0))
    sigma_eff = float(_pick(sigma, cfg, "sigma", 3.0))
    rep_eff = str(_pick(representation, cfg, "representation", "feature-vector"))
    config = TrainConfig(
        learning_rate=lr_eff,
        epochs=epochs_eff,
        batch_size=batch_eff,
        shots=shots_eff,
        seed=seed_eff,
        kernel=_kernel_spec(sigma_eff, rep_eff, dataset),
    )
    effective = {
        "epochs": epochs_eff,
        "learning_rate": lr_eff,
        "batch_size": batch_eff,
        "shots": shots_eff,
        "seed": seed_eff,
        "sigma": sigma_eff,
        "representation": rep_eff,
    }
    return config, effective


@main.command()
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--circuit", "circuit_path", default=None, type=click.Path(dir_okay=False),
              help="Circuit DSL file to train.")
@click.option("--baseline", default=None, type=click.Choice(["two-local"]),
              help="Train a built-in ansatz instead of a circuit file.")
@click.option("--reps", type=int, default=None, help="Repetition blocks for --baseline.")
@click.option("--out-dir", default="train-run", type=click.Path(file_okay=False))
@click.option("--verbose", is_flag=True, default=False)
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
@_train_options
def train_cmd(dataset_path, circuit_path, baseline, reps, out_dir, verbose, config_path, **flags):
    """Train a circuit on an encoded dataset and emit params, loss history, metrics."""

    def body():
        cfg = _load_config_file(config_path)
        dataset = _load_dataset(dataset_path)
        baseline_eff = _pick(baseline, cfg, "baseline", None)
        circuit_eff = _pick(circuit_path, cfg, "circuit", None)
        if (baseline_eff is None) == (circuit_eff is None):
            raise ValueError("pass exactly one of --circuit or --baseline")
        if baseline_eff is not None:
            reps_eff = int(_pick(reps, cfg, "reps", 1))
            circuit = build_two_local(dataset.num_qubits, reps_eff)
            source = {"baseline": baseline_eff, "reps": reps_eff}
        else:
            circuit = _load_circuit(circuit_eff)
            source = {"circuit": circuit_eff}
        if circuit.num_qubits != dataset.num_qubits:
            raise ValueError(
                f"circuit is {circuit.num_qubits} qubits wide, dataset needs "
                f"{dataset.num_qubits}"
            )

        config, effective = _resolve_train_config(cfg, dataset, **flags)
        effective |= source | {"dataset": dataset_path, "out_dir": out_dir}
        manifest = start_manifest("train", __version__, config.seed, effective)
        manifest.add_input(dataset_path)
        if baseline_eff is None:
            manifest.add_input(circuit_eff)

        callback = None
        if verbose:
            callback = lambda e, loss: click.echo(f"epoch {e:4d}  mmd {loss:.6f}")
        result = train(circuit, dataset, config, callback=callback)

        model = exact_distribution(bind_parameters(circuit, result.params))
        kl = reverse_kl(model, dataset.empirical())
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "circuit.json", json.loads(to_dsl(circuit)))
        write_json(out / "params.json", result.params)
        write_loss_csv(out / "loss.csv", list(result.loss_history[1:]))
        svg_line_chart(out / "loss.svg", list(result.loss_history), "Training loss", "MMD")
        write_json(
            out / "metrics.json",
            _metrics_doc(kl, result.final_loss, depth(circuit), None, result.params),
        )
        manifest.outputs += [str(out / p) for p in
                             ("circuit.json", "params.json", "loss.csv", "loss.svg",
                              "metrics.json")]
        manifest.write(out / "manifest.json")
        click.echo(
            f"trained {len(circuit.param_names)} params for {config.epochs} epochs: "
            f"final mmd {result.final_loss:.6f}, reverse kl {kl:.4f} -> {out_dir}"
        )

    _guard(body)


main.add_command(train_cmd, name="train")


def _make_proposer(kind: str, cfg: dict, llm_url, llm_model):
    if kind == "mock":
        return MockProposer()
    url = _pick(llm_url, cfg, "llm_url", os.environ.get("BORNSEARCH_LLM_URL"))
    model = _pick(llm_model, cfg, "llm_model", os.environ.get("BORNSEARCH_LLM_MODEL"))
    if not url or not model:
        raise ConfigError(
            "llm proposer needs an endpoint and model: pass --llm-url/--llm-model "
            "or set BORNSEARCH_LLM_URL/BORNSEARCH_LLM_MODEL"
        )
    config = LlmConfig(base_url=url, model=model)
    config.resolved_key()  # fail fast on missing credentials, before any network call
    return LlmProposer(config)


@main.command()
@click.argument("profile_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--proposer", "proposer_kind", default=None, type=click.Choice(["mock", "llm"]))
@click.option("--rounds", type=int, default=None)
@click.option("--retries", type=int, default=None, help="Extra attempts per round after a reject.")
@click.option("--max-depth", type=int, default=None, help="Override the profile depth budget.")
@click.option("--llm-url", default=None)
@click.option("--llm-model", default=None)
@click.option("--out-dir", default="search-run", type=click.Path(file_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
@_train_options
def search(profile_path, dataset_path, proposer_kind, rounds, retries, max_depth,
           llm_url, llm_model, out_dir, config_path, **flags):
    """Iteratively propose, validate, and train circuits against a hardware profile."""

    def body():
        cfg = _load_config_file(config_path)
        profile = _load_profile(profile_path)
        dataset = _load_dataset(dataset_path)
        kind = str(_pick(proposer_kind, cfg, "proposer", "mock"))
        rounds_eff = int(_pick(rounds, cfg, "rounds", 10))
        retries_eff = int(_pick(retries, cfg, "retries", 3))
        max_depth_eff = _pick(max_depth, cfg, "max_depth", None)
        if max_depth_eff is not None:
            profile_eff = replace(profile, max_depth=int(max_depth_eff))
        else:
            profile_eff = profile

        train_config, effective = _resolve_train_config(cfg, dataset, **flags)
        effective |= {
            "profile": profile_path,
            "dataset": dataset_path,
            "proposer": kind,
            "rounds": rounds_eff,
            "retries": retries_eff,
            "max_depth": max_depth_eff,
            "out_dir": out_dir,
        }
        manifest = start_manifest("search", __version__, train_config.seed, effective)
        manifest.add_input(profile_path)
        manifest.add_input(dataset_path)

        proposer = _make_proposer(kind, cfg, llm_url, llm_model)
        config = SearchConfig(
            rounds=rounds_eff,
            retries_per_round=retries_eff,
            seed=train_config.seed,
            train=train_config,
        )

        def on_round(rec):
            if rec.accepted:
                click.echo(
                    f"round {rec.round:2d}: kl {rec.kl:.4f}  depth {rec.depth}  "
                    f"params {rec.num_params}  attempts {rec.attempts}"
                )
            else:
                click.echo(f"round {rec.round:2d}: no valid circuit "
                           f"({rec.attempts} attempts)")

        try:
            result = run_search(dataset, profile_eff, proposer, config, callback=on_round)
        finally:
            if hasattr(proposer, "close"):
                proposer.close()

        out = Path(out_dir)
        rows = []
        for rec in result.rounds:
            rdir = out / "rounds" / f"round-{rec.round:02d}"
            rdir.mkdir(parents=True, exist_ok=True)
            write_json(
                rdir / "metrics.json",
                _metrics_doc(rec.kl, rec.final_mmd, rec.depth, rec.accepted, rec.params),
            )
            if rec.accepted:
                write_json(rdir / "circuit.json", json.loads(rec.dsl))
                write_json(rdir / "params.json", rec.params)
            if rec.failures:
                write_json(rdir / "failures.json", list(rec.failures))
            rows.append([rec.round, rec.accepted, rec.attempts,
                         rec.depth if rec.depth is not None else "",
                         rec.num_params if rec.num_params is not None else "",
                         format(rec.kl, ".12g") if rec.kl is not None else ""])
        write_table_csv(out / "summary.csv",
                        ["round", "accepted", "attempts", "depth", "num_params", "kl"], rows)

        best = result.best
        bdir = out / "best"
        bdir.mkdir(parents=True, exist_ok=True)
        write_json(bdir / "circuit.json", json.loads(best.dsl))
        write_json(bdir / "params.json", best.params)
        write_json(
            bdir / "metrics.json",
            _metrics_doc(best.kl, best.final_mmd, best.depth, best.accepted, best.params),
        )
        write_json(out / "result.json", result_doc(result))
        manifest.outputs += [str(out / "summary.csv"), str(out / "result.json"),
                             str(bdir / "circuit.json")]
        manifest.write(out / "manifest.json")
        click.echo(f"best: round {best.round} with kl {best.kl:.4f} "
                   f"(depth {best.depth}) -> {out_dir}")

    _guard(body)


@main.command(name="eval-noisy")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("profile_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--circuit", "circuit_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--params", "params_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--em/--no-em", default=None, help="Also report error-mitigated KL.")
@click.option("--post-select/--no-post-select", "post_sel", default=None,
              help="Also report KL after post-selecting onto the data support.")
@click.option("--repeats", type=int, default=None, help="Seeded repetitions for mean/std.")
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", default="eval-run", type=click.Path(file_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
def eval_noisy(dataset_path, profile_path, circuit_path, params_path, em, post_sel,
               repeats, shots, seed, out_dir, config_path):
    """Measure a trained model under the profile's readout noise, with and without
    mitigation and post-selection."""

    def body():
        cfg = _load_config_file(config_path)
        dataset = _load_dataset(dataset_path)
        profile = _load_profile(profile_path)
        circuit = _load_circuit(circuit_path)
        params_doc = json.loads(Path(params_path).read_text())
        if not isinstance(params_doc, dict):
            raise ValueError(f"{params_path}: expected a JSON object of parameter values")
        params = {str(k): float(v) for k, v in params_doc.items()}

        em_eff = bool(_pick(em, cfg, "em", False))
        post_eff = bool(_pick(post_sel, cfg, "post_select", False))
        repeats_eff = int(_pick(repeats, cfg, "repeats", 10))
        shots_eff = int(_pick(shots, cfg, "shots", 10000))
        seed_eff = int(_pick(seed, cfg, "seed", 0))
        if repeats_eff < 1 or shots_eff < 1:
            raise ValueError("repeats and shots must be positive")

        if circuit.num_qubits != dataset.num_qubits:
            raise ValueError(
                f"circuit is {circuit.num_qubits} qubits wide, dataset needs "
                f"{dataset.num_qubits}"
            )
        report = validate(circuit, profile)
        if not report.valid:
            raise ValueError(
                "circuit does not fit the profile:\n  "
                + "\n  ".join(v.message for v in report.violations)
            )

        effective = {
            "dataset": dataset_path, "profile": profile_path, "circuit": circuit_path,
            "params": params_path, "em": em_eff, "post_select": post_eff,
            "repeats": repeats_eff, "shots": shots_eff, "seed": seed_eff,
            "out_dir": out_dir,
        }
        manifest = start_manifest("eval-noisy", __version__, seed_eff, effective)
        for p in (dataset_path, profile_path, circuit_path, params_path):
            manifest.add_input(p)

        data = dataset.empirical()
        model = exact_distribution(bind_parameters(circuit, params))
        noise_model = ReadoutModel.from_profile(profile, circuit.physical_qubits)
        noisy = apply_readout_noise(model, noise_model)
        rule = PostSelectRule.from_support(data) if post_eff else None

        kl_raw, kl_em, kl_post, retained = [], [], [], []
        for k in range(repeats_eff):
            empirical = noisy.sample(shots_eff, seed_eff + k)
            kl_raw.append(reverse_kl(empirical, data))
            if em_eff:
                kl_em.append(reverse_kl(mitigate(empirical, noise_model), data))
            if post_eff:
                selected, frac = post_select(empirical, rule)
                kl_post.append(reverse_kl(selected, data))
                retained.append(frac)

        def stat_row(name, values):
            arr = np.asarray(values)
            return [name, format(arr.mean(), ".12g"), format(arr.std(ddof=0), ".12g")]

        rows = [stat_row("kl_raw", kl_raw)]
        if em_eff:
            rows.append(stat_row("kl_em", kl_em))
        if post_eff:
            rows.append(stat_row("kl_post", kl_post))
            rows.append(stat_row("retained_fraction", retained))
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_table_csv(out / "metrics.csv", ["metric", "mean", "std"], rows)

        n = dataset.num_qubits
        bitstrings = [bitstring_of(i, n) for i in range(1 << n)]
        series: dict[str, np.ndarray] = {
            "data": data.probs, "model": model.probs, "noisy": noisy.probs,
        }
        if em_eff:
            series["mitigated"] = mitigate(noisy, noise_model).probs
        if post_eff:
            series["postselected"] = post_select(noisy, rule)[0].probs
        write_histogram_csv(out / "histogram.csv", bitstrings, series)

        top = sorted(range(1 << n), key=lambda i: (-data.probs[i], i))[:32]
        top.sort()
        svg_grouped_bars(
            out / "histogram.svg",
            [bitstrings[i] for i in top],
            {name: [float(col[i]) for i in top] for name, col in series.items()},
            "Data vs model outcome probabilities",
        )
        write_json(
            out / "metrics.json",
            _metrics_doc(float(np.mean(kl_raw)), None, depth(circuit), True, params),
        )
        manifest.outputs += [str(out / p) for p in
                             ("metrics.csv", "histogram.csv", "histogram.svg", "metrics.json")]
        manifest.write(out / "manifest.json")
        for row in rows:
            click.echo(f"{row[0]}: {row[1]} +/- {row[2]}")
        click.echo(f"artifacts -> {out_dir}")

    _guard(body)


if __name__ == "__main__":
    main()
