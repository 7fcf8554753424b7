"""Shared scenario builders and the acceptance-report hook."""

import dataclasses

import numpy as np
import pytest

from flyq import ControlSchedule, Segment, Waveform, qubit_system

# one (criterion, ok, detail) entry per acceptance criterion; printed in the
# terminal summary so the pass/fail lines survive output capturing
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status} criterion {criterion}: {detail}")


def excited_qubit(gamma: float, horizon: float):
    """Initially excited, undriven qubit with constant coupling rate."""
    system = qubit_system(
        ControlSchedule(
            u=Waveform.constant(0.0, horizon),
            epsilon=Waveform.constant(0.0, horizon),
            gamma=Waveform.constant(gamma, horizon, tail="hold"),
        )
    )
    return dataclasses.replace(
        system, initial_state=np.array([0.0, 1.0], dtype=complex)
    )


def rect_pulse_qubit(Omega: float, T: float, gamma: float, t_final: float):
    """Ground-state qubit under a resonant rectangular drive on [0, T]."""
    return qubit_system(
        ControlSchedule(
            u=Waveform((Segment(0.0, T, "const", a=Omega),), tail="zero"),
            epsilon=Waveform.constant(0.0, t_final),
            gamma=Waveform.constant(gamma, t_final, tail="hold"),
        )
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
