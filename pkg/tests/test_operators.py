"""Unit tests for the shared operator and waveform types."""

import math

import numpy as np
import pytest

from flyq import (
    ControlSchedule,
    DimensionError,
    Impulse,
    Segment,
    SingularMatrixError,
    ValidationError,
    Waveform,
    adjoint,
    matmul,
    pauli_ops,
    qubit_system,
    solve,
)


class TestLinearAlgebra:
    def test_adjoint(self):
        a = np.array([[1.0, 2.0j], [3.0, 4.0]])
        assert np.array_equal(adjoint(a), a.conj().T)

    def test_matmul_shape_check(self):
        with pytest.raises(DimensionError):
            matmul(np.eye(2), np.eye(3))

    def test_solve_roundtrip(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 2))
        x = solve(a, b)
        assert np.allclose(a @ x, b, atol=1e-12)

    def test_solve_singular(self):
        with pytest.raises(SingularMatrixError):
            solve(np.zeros((2, 2)), np.eye(2))

    def test_pauli_algebra(self):
        sp, sm, sx = pauli_ops()
        assert np.array_equal(sp, sm.conj().T)
        assert np.array_equal(sx, sp + sm)
        # number operator has the excited state at index 1
        n = sp @ sm
        assert np.array_equal(np.diag(n), [0.0, 1.0])


class TestSegment:
    def test_const(self):
        s = Segment(0.0, 1.0, "const", a=2.5)
        assert s.value(0.3) == 2.5

    def test_linear(self):
        s = Segment(0.0, 2.0, "linear", a=0.0, b=4.0)
        assert s.value(0.5) == pytest.approx(1.0)

    def test_exp(self):
        s = Segment(0.0, 1.0, "exp", a=2.0, rate=-1.0)
        assert s.value(0.5) == pytest.approx(2.0 * math.exp(-0.5))

    def test_samples_interpolates(self):
        s = Segment(0.0, 1.0, "samples", times=(0.0, 0.5, 1.0), values=(0.0, 1.0, 0.0))
        assert s.value(0.25) == pytest.approx(0.5)
        assert s.value(0.75) == pytest.approx(0.5)

    def test_samples_matches_interp(self, rng):
        ts = np.linspace(0.0, 3.0, 41)
        vs = rng.normal(size=ts.size)
        s = Segment(0.0, 3.0, "samples", times=tuple(ts), values=tuple(vs))
        probe = rng.uniform(0.0, 3.0, 200)
        got = np.array([s.value(t) for t in probe])
        assert np.allclose(got, np.interp(probe, ts, vs), atol=1e-12)

    def test_bad_kind(self):
        with pytest.raises(ValidationError):
            Segment(0.0, 1.0, "spline")

    def test_nonmonotone_samples(self):
        with pytest.raises(ValidationError):
            Segment(0.0, 1.0, "samples", times=(0.0, 0.7, 0.5, 1.0), values=(0,) * 4)


class TestWaveform:
    def test_left_limit_at_breakpoint(self):
        w = Waveform(
            (Segment(0.0, 1.0, "const", a=1.0), Segment(1.0, 2.0, "const", a=5.0))
        )
        assert w(1.0) == 1.0
        assert w(1.0 + 1e-9) == 5.0

    def test_tail_zero_and_hold(self):
        z = Waveform.constant(3.0, 1.0, tail="zero")
        h = Waveform.constant(3.0, 1.0, tail="hold")
        assert z(2.0) == 0.0
        assert h(2.0) == 3.0

    def test_gap_rejected(self):
        with pytest.raises(ValidationError):
            Waveform((Segment(0.0, 1.0, "const"), Segment(1.5, 2.0, "const")))

    def test_must_start_at_zero(self):
        with pytest.raises(ValidationError):
            Waveform((Segment(0.5, 1.0, "const"),))

    def test_breakpoints_include_sample_times(self):
        w = Waveform.from_samples([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
        assert w.breakpoints == [0.0, 0.5, 1.0]

    def test_negative_time_rejected(self):
        with pytest.raises(ValidationError):
            Waveform.constant(1.0, 1.0)(-0.5)


class TestImpulse:
    def test_non_unitary_rejected(self):
        with pytest.raises(ValidationError):
            Impulse(0.0, np.array([[1.0, 0.0], [0.0, 2.0]]))

    def test_sigma_x_ok(self):
        _, _, sx = pauli_ops()
        imp = Impulse(0.5, sx)
        assert imp.time == 0.5


class TestControlSchedule:
    def test_negative_gamma_rejected(self):
        with pytest.raises(ValidationError):
            ControlSchedule(
                u=Waveform.constant(0.0, 1.0),
                epsilon=Waveform.constant(0.0, 1.0),
                gamma=Waveform.constant(-1.0, 1.0),
            )

    def test_horizon_and_breakpoints(self):
        sched = ControlSchedule(
            u=Waveform((Segment(0.0, 0.5, "const", a=1.0),)),
            epsilon=Waveform.constant(0.0, 2.0),
            gamma=Waveform.constant(1.0, 3.0, tail="hold"),
        )
        assert sched.horizon == 3.0
        assert 0.5 in sched.breakpoints

    def test_impulse_outside_horizon_rejected(self):
        _, _, sx = pauli_ops()
        with pytest.raises(ValidationError):
            ControlSchedule(
                u=Waveform.constant(0.0, 1.0),
                epsilon=Waveform.constant(0.0, 1.0),
                gamma=Waveform.constant(1.0, 1.0),
                impulses=(Impulse(5.0, sx),),
            )


class TestQubitSystem:
    def test_hamiltonian_and_coupling(self):
        sched = ControlSchedule(
            u=Waveform.constant(1.0 + 2.0j, 1.0),
            epsilon=Waveform.constant(0.7, 1.0),
            gamma=Waveform.constant(2.0, 1.0),
        )
        system = qubit_system(sched)
        system.check_hermitian()
        h = system.hamiltonian(0.5)
        assert h[1, 1] == pytest.approx(0.7)
        assert h[1, 0] == pytest.approx((1.0 + 2.0j) / 2.0)
        l = system.coupling(0.5)
        assert l[0, 1] == pytest.approx(math.sqrt(4.0))
        assert l[1, 0] == 0.0

    def test_initial_state_dimension_check(self):
        import dataclasses

        sched = ControlSchedule(
            u=Waveform.constant(0.0, 1.0),
            epsilon=Waveform.constant(0.0, 1.0),
            gamma=Waveform.constant(1.0, 1.0),
        )
        system = qubit_system(sched)
        with pytest.raises(ValidationError):
            dataclasses.replace(system, initial_state=np.ones(3))
