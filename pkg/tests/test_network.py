"""Series-product composition, source design and the catching template."""

import dataclasses
import math
import warnings

import numpy as np
import pytest

from flyq import (
    ControlSchedule,
    ValidationError,
    Waveform,
    design_absorber,
    design_source,
    output_amplitudes,
    photon_probabilities,
    propagate,
    qubit_system,
    series_product,
    spontaneous_packet,
    transformation_scenario,
)

from conftest import excited_qubit, rect_pulse_qubit


def trivial_system(horizon):
    """Uncoupled, undriven qubit: identity element of the series product."""
    return qubit_system(
        ControlSchedule(
            u=Waveform.constant(0.0, horizon),
            epsilon=Waveform.constant(0.0, horizon),
            gamma=Waveform.constant(0.0, horizon),
        )
    )


class TestSeriesProduct:
    def test_trivial_downstream_preserves_output(self):
        T = 15.0
        a = excited_qubit(0.5, T)
        composed = series_product(a, trivial_system(T)).composed
        ta = propagate(a, step=0.005, t_final=T)
        tc = propagate(composed, step=0.005, t_final=T)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            xa = output_amplitudes(ta, a, 1)
            xc = output_amplitudes(tc, composed, 1)
        assert np.max(np.abs(xa.levels[1].values - xc.levels[1].values)) < 1e-10
        assert abs(xa.xi - xc.xi) < 1e-10

    def test_associative(self):
        T = 2.0
        a = excited_qubit(0.5, T)
        b = rect_pulse_qubit(1.0, 1.0, 0.7, t_final=T)
        c = excited_qubit(1.3, T)
        left = series_product(series_product(a, b).composed, c).composed
        right = series_product(a, series_product(b, c).composed).composed
        for t in (0.0, 0.4, 1.3, 1.9):
            assert np.allclose(left.hamiltonian(t), right.hamiltonian(t), atol=1e-12)
            assert np.allclose(left.coupling(t), right.coupling(t), atol=1e-12)

    def test_decoupled_upstream_factorizes(self):
        T = 3.0
        a = trivial_system(T)
        b = rect_pulse_qubit(2.0, 1.0, 1.0, t_final=T)
        composed = series_product(a, b).composed
        tc = propagate(composed, step=0.01, t_final=T)
        tb = propagate(b, step=0.01, t_final=T)
        expected = np.kron(np.eye(2), tb.V[-1])
        assert np.max(np.abs(tc.V[-1] - expected)) < 1e-10

    def test_hermitian_composition(self):
        a = excited_qubit(0.5, 2.0)
        b = rect_pulse_qubit(1.0, 1.0, 1.0, t_final=2.0)
        series_product(a, b).composed.check_hermitian(tol=1e-10)

    def test_horizon_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            series_product(excited_qubit(0.5, 1.0), excited_qubit(0.5, 2.0))

    def test_cross_term_matrix(self):
        # H_cross = (L_A x L_B^dag - L_A^dag x L_B) / 2i maps |10> -> |01> only
        a = excited_qubit(1.0, 1.0)
        b = excited_qubit(1.0, 1.0)
        composed = series_product(a, b).composed
        h = composed.hamiltonian(0.5)
        # basis order |00>, |01>, |10>, |11>
        expected = np.zeros((4, 4), dtype=complex)
        expected[1, 2] = -1j  # <01| H |10> = (1/2i) * 2 sqrt(g_a g_b) = -1j
        expected[2, 1] = 1j
        assert np.allclose(h, expected, atol=1e-12)


class TestDesignSource:
    def test_exponential_gives_constant_gamma(self):
        g0 = 1.0
        times = np.linspace(0.0, 10.0, 4001)
        nu = math.sqrt(2.0 * g0) * np.exp(-g0 * times)
        design = design_source(times, nu)
        # discretization error of the tail integral grows as the tail empties;
        # check the bulk of the packet support
        body = design.gamma[times < 5.0]
        assert np.max(np.abs(body - g0)) < 1e-3

    def test_gaussian_round_trip(self):
        times = np.linspace(0.0, 8.0, 1601)
        nu = np.exp(-0.5 * ((times - 3.0) / 0.8) ** 2)
        phi = 0.5 * times
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            design = design_source(times, nu, phi)
        nu_n = design.nu
        # forward-simulate the designed schedules with the analytic packet law
        probe = times[(times > 0.5) & (times < 7.5)][::40]
        got = np.array(
            [
                spontaneous_packet(design.schedule.gamma, design.schedule.epsilon, t)
                for t in probe
            ]
        )
        target = np.interp(probe, times, nu_n) * np.exp(1j * np.interp(probe, times, phi))
        mask = np.interp(probe, times, nu_n) > 0.05
        assert np.max(np.abs(np.abs(got) - np.abs(target))) < 1e-3
        dphi = np.angle(got[mask] / target[mask])
        assert np.max(np.abs(dphi)) < 1e-3

    def test_renormalization_warns(self):
        times = np.linspace(0.0, 5.0, 501)
        nu = 2.0 * np.exp(-times)
        with pytest.warns(UserWarning, match="renormalizing"):
            design_source(times, nu)

    def test_unnormalizable_rejected(self):
        times = np.linspace(0.0, 5.0, 501)
        with pytest.raises(ValidationError):
            design_source(times, np.zeros_like(times))

    def test_gamma_clipped(self):
        times = np.linspace(0.0, 5.0, 2001)
        nu = np.sqrt(2.0) * np.exp(-times)
        design = design_source(times, nu, gamma_max=50.0)
        assert np.max(design.gamma) <= 50.0
        assert design.clipped_mass > 0.0


class TestCatching:
    def test_absorber_catches_exponential(self):
        g0 = 1.0
        T = 8.0
        times = np.linspace(0.0, T, 3201)
        nu = math.sqrt(2.0 * g0) * np.exp(-g0 * times)
        source = design_source(times, nu)
        absorber = design_absorber(times, nu)
        cascade = transformation_scenario(source, absorber).composed
        table = propagate(cascade, step=0.0025, t_final=T)
        # success metric: no-jump survival probability of the cascade
        psi = table.V[-1] @ cascade.initial_state
        p0 = float(np.linalg.norm(psi) ** 2)
        assert p0 > 0.9

    def test_transformation_requires_covering_horizon(self):
        times = np.linspace(0.0, 5.0, 501)
        nu = np.sqrt(2.0) * np.exp(-times)
        source = design_source(times, nu)
        short = excited_qubit(1.0, 2.0)
        with pytest.raises(ValidationError):
            transformation_scenario(source, short)

    def test_cascade_ground_index(self):
        times = np.linspace(0.0, 5.0, 501)
        nu = np.sqrt(2.0) * np.exp(-times)
        source = design_source(times, nu)
        b = excited_qubit(1.0, 5.0)
        composed = transformation_scenario(source, b).composed
        assert composed.ground_state_index == 0
        assert composed.dim == 4
