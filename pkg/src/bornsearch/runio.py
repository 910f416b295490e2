"""Run artifacts: atomic file writes, input hashing, and the run manifest.

Every command snapshots what it ran with (effective config, input digests, seed,
tool version) into a manifest next to its outputs, so a run can be re-executed
bit-identically later. Writes go through a temp-file-then-rename so an error exit
never leaves a half-written artifact behind.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partial content."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str | Path, doc) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """What a command ran with; enough to reproduce its outputs."""

    command: str
    version: str
    seed: int | None
    config: dict
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def write(self, path: str | Path) -> None:
        if not self.finished_at:
            self.finished_at = utc_now()
        write_json(
            path,
            {
                "command": self.command,
                "version": self.version,
                "seed": self.seed,
                "config": self.config,
                "inputs": self.inputs,
                "outputs": sorted(self.outputs),
                "started_at": self.started_at,
                "finished_at": self.finished_at,
            },
        )


def start_manifest(command: str, version: str, seed: int | None, config: dict) -> RunManifest:
    return RunManifest(
        command=command,
        version=version,
        seed=seed,
        config=config,
        started_at=utc_now(),
    )
