"""
Soft pi-pulses and multi-photon leakage
=======================================

Driving a ground-state emitter with a rectangular pulse of area
Omega * T = pi flips it to the excited level, which then decays into the
waveguide.  For a finite pulse power Omega the emitter can already emit
*during* the pulse and be re-excited, so a soft pi-pulse never produces a
perfect single photon: part of the output leaks into two- and three-photon
components.  Sweeping Omega at fixed pulse area shows P_1 climbing toward 1
only in the hard-pulse limit.
"""

import math
import warnings

import numpy as np

from flyq import (
    ControlSchedule,
    RectangularPulseParams,
    Segment,
    Waveform,
    output_amplitudes,
    photon_probabilities,
    propagate,
    qubit_system,
    rect_pulse_amplitudes,
)


def pi_pulse(Omega, gamma=1.0):
    """Photon ladder for a rectangular pulse with Omega * T = pi."""
    T = math.pi / Omega
    t_final = T + 14.0
    system = qubit_system(
        ControlSchedule(
            u=Waveform((Segment(0.0, T, "const", a=Omega),), tail="zero"),
            epsilon=Waveform.constant(0.0, t_final),
            gamma=Waveform.constant(gamma, t_final, tail="hold"),
        )
    )
    table = propagate(system, step=0.0025, t_final=t_final)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tensor = output_amplitudes(table, system, ell_max=3)
    return system, table, tensor, photon_probabilities(tensor)


# ---------------------------------------------------------------------------
# Sweep the driving strength from the weak to the strong regime.
# ---------------------------------------------------------------------------
print(f"{'Omega/gamma':>12} {'P_0':>10} {'P_1':>10} {'P_2':>10} {'P_3':>10}")
for Omega in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
    _, _, _, ladder = pi_pulse(Omega)
    p = ladder.probs
    print(f"{Omega:>12.1f} {p[0]:>10.6f} {p[1]:>10.6f} {p[2]:>10.6f} {p[3]:>10.6f}")

# ---------------------------------------------------------------------------
# In the strong-driving regime the single-photon wavepacket has a closed
# form: damped Rabi oscillation under the pulse, bare exponential decay
# afterwards.  Check the engine against it at Omega = 4.
# ---------------------------------------------------------------------------
Omega, gamma = 4.0, 1.0
params = RectangularPulseParams(Omega, math.pi / Omega, gamma)
xi0, xi1 = rect_pulse_amplitudes(params)
_, _, tensor, _ = pi_pulse(Omega)
level = tensor.levels[1]
err = np.max(np.abs(level.values - xi1(level.times)))
print(f"\nstrong driving (Omega={Omega}): sup |xi engine - closed form| = {err:.3e}")
print(f"vacuum amplitude: engine {tensor.xi:.6f}, closed form {xi0:.6f}")
