"""
Reshaping an incoming photon with a genetic algorithm
=====================================================

A single photon with an exponentially decaying waveform arrives at a driven
emitter.  Without control the emitter partially scatters the photon and the
single-photon fidelity of the output degrades; a shaped coherent drive
u(t) = u_x(t) + i u_y(t) can absorb and re-emit the photon so that the
output is again a clean single-photon state.

This demo runs a reduced-budget genetic search over piecewise-constant
pulses on the window [0, 4] (16 bins per quadrature, |u| <= 8) maximizing
the single-photon probability P_1.  The full-budget experiment (population
64, 200 generations) is available through the CLI golden config
``fig4_optimize.json``.
"""

import time
import warnings

import numpy as np

from flyq import (
    GAConfig,
    Objective,
    PulseParametrization,
    PulseScenario,
    Waveform,
    design_source,
    run_ga,
)

# ---------------------------------------------------------------------------
# Fixed part of the scenario: the incoming exponential packet (realized as a
# designed auxiliary source) and the emitter's constant coupling gamma = 1.
# ---------------------------------------------------------------------------
times = np.linspace(0.0, 10.0, 201)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    incoming = design_source(times, np.sqrt(2.0) * np.exp(-times))
scenario = PulseScenario(
    gamma=Waveform.constant(1.0, 12.0, tail="hold"),
    epsilon=Waveform.constant(0.0, 12.0),
    incoming=incoming,
)

# ---------------------------------------------------------------------------
# Search space and objective.
# ---------------------------------------------------------------------------
parametrization = PulseParametrization(
    n_bins=16, t1=4.0, channels=("u_x", "u_y"),
    bounds={"u_x": (-8.0, 8.0), "u_y": (-8.0, 8.0)},
)
objective = Objective(kind="maximize_P", ell=1, step=0.02, t_final=12.0, ell_max=1)
config = GAConfig(population=16, generations=40, seed=0, mutation_scale=0.08)

start = time.perf_counter()
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    result = run_ga(config, parametrization, scenario, objective)
print(f"search finished in {time.perf_counter() - start:.0f}s")

# ---------------------------------------------------------------------------
# Report: best score, convergence history, and the optimized pulse.
# ---------------------------------------------------------------------------
print(f"best P_1 = {result.best_score:.4f} (converged: {result.converged})")
print("best-so-far history (every 5 generations):")
for gen, best, _, mean in result.history[::5]:
    print(f"  gen {int(gen):3d}: best {best:.4f}, population mean {mean:.4f}")

channels = parametrization.channel_values(result.best_params)
print("\noptimized pulse bins:")
print("  u_x:", np.array2string(channels["u_x"], precision=2, suppress_small=True))
print("  u_y:", np.array2string(channels["u_y"], precision=2, suppress_small=True))
