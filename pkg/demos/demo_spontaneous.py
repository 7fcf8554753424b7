"""
Spontaneous emission of a single flying qubit
=============================================

An initially excited two-level emitter with a constant coupling rate
releases exactly one photon into the waveguide.  This is the simplest
scenario the toolkit handles, and it has a closed form: the outgoing
single-photon amplitude is

    xi(tau) = sqrt(2 gamma) exp(-gamma tau),

so it doubles as a first sanity check of the jump engine.
"""

import math
import warnings

import numpy as np

from flyq import (
    ControlSchedule,
    Waveform,
    output_amplitudes,
    photon_probabilities,
    propagate,
    qubit_system,
    spontaneous_packet,
)

# ---------------------------------------------------------------------------
# Build the emitter.  The control schedule fixes the drive u, the detuning
# epsilon and the coupling gamma as functions of time; here only gamma is
# nonzero.  Replacing the initial state puts the qubit in its excited level.
# ---------------------------------------------------------------------------
import dataclasses

gamma = 0.5
t_final = 20.0
system = qubit_system(
    ControlSchedule(
        u=Waveform.constant(0.0, t_final),
        epsilon=Waveform.constant(0.0, t_final),
        gamma=Waveform.constant(gamma, t_final, tail="hold"),
    )
)
system = dataclasses.replace(system, initial_state=np.array([0.0, 1.0], dtype=complex))

# ---------------------------------------------------------------------------
# Propagate the non-unitary effective dynamics and extract the outgoing
# amplitudes for 0, 1 and 2 photons.  The norm lost by the propagator is the
# photon mass that has been emitted.
# ---------------------------------------------------------------------------
table = propagate(system, step=0.0025, t_final=t_final)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    tensor = output_amplitudes(table, system, ell_max=2)
ladder = photon_probabilities(tensor)

print("photon-number probabilities:")
for ell, p in enumerate(ladder.probs):
    print(f"  P_{ell} = {p:.9f}")
print(f"  expected P_1 = 1 - e^(-2 gamma T) = {1.0 - math.exp(-2 * gamma * t_final):.9f}")

# ---------------------------------------------------------------------------
# Compare the numerical wavepacket with the closed form on the full grid.
# ---------------------------------------------------------------------------
level = tensor.levels[1]
oracle = np.array([spontaneous_packet(gamma, 0.0, t) for t in level.times])
print(f"sup |xi_numeric - xi_closed_form| = {np.max(np.abs(level.values - oracle)):.3e}")
