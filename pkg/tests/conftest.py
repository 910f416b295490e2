import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bornsearch.circuits import HardwareProfile
from bornsearch.distributions import Distribution

ALL_GATES = frozenset({"rx", "ry", "rz", "x", "sx", "h", "cz", "cx"})


def ring_profile(n: int, readout: float = 0.02, max_depth: int = 100) -> HardwareProfile:
    return HardwareProfile(
        num_qubits=n,
        basis_gates=ALL_GATES,
        coupling_map=frozenset((i, (i + 1) % n) for i in range(n)),
        readout_error=((readout, readout),) * n,
        gate_error={"cz": 0.005},
        max_depth=max_depth,
    )


def line_profile(n: int, readout_errors=None, max_depth: int = 100) -> HardwareProfile:
    if readout_errors is None:
        readout_errors = ((0.02, 0.02),) * n
    return HardwareProfile(
        num_qubits=n,
        basis_gates=ALL_GATES,
        coupling_map=frozenset((i, i + 1) for i in range(n - 1)),
        readout_error=tuple(readout_errors),
        gate_error={},
        max_depth=max_depth,
    )


def bimodal_target(num_qubits: int = 8, floor: float = 1e-4) -> Distribution:
    """Two well-separated peaks on the integer line, tiny tails zeroed out."""
    x = np.arange(1 << num_qubits)
    lo, hi = (1 << num_qubits) // 4, 3 * (1 << num_qubits) // 4
    width = (1 << num_qubits) / 21.0
    probs = np.exp(-0.5 * ((x - lo) / width) ** 2) + np.exp(-0.5 * ((x - hi) / width) ** 2)
    probs[probs < floor] = 0.0
    return Distribution(num_qubits, probs / probs.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
