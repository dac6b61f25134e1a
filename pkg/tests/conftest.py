import math

import numpy as np
import pytest

from eraser_sim.engine import EraserSetup
from eraser_sim.unitary import IDENTITY, symmetric_splitter

SYM = symmetric_splitter()


def symmetric_setup(delta_phi=0.0, phi=None, phi_d=None, setup2=False, R3=None):
    """All-50/50 device; optionally pin the loop phases."""
    S3 = SYM
    if R3 is not None:
        from eraser_sim.unitary import BeamSplitterSpec, build_beam_splitter

        S3 = build_beam_splitter(BeamSplitterSpec(R3))
    s = EraserSetup(SYM, SYM, S3, SYM if setup2 else IDENTITY, delta_phi=delta_phi)
    if phi is not None:
        s = s.with_phi(phi)
    if phi_d is not None:
        s = s.with_phi_d(phi_d)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


PHI_GRID_64 = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)


ACCEPTANCE_LINES = []


def report(criterion: str, passed: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
