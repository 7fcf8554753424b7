"""Non-unitary propagator of the standing system.

Integrates V'(t) = -i H_eff(t) V(t), V(0) = I, with
H_eff(t) = H(t) - (i/2) L(t)^dag L(t), and exposes the transition operator
G(s, s') and the dressed coupling V^-1 L V.

Rate convention: with the qubit coupling L = sqrt(2 gamma) sigma_minus the
anti-Hermitian part of H_eff is -i gamma |1><1|, i.e. the excited *amplitude*
decays at rate gamma (the population at 2 gamma).  Some references quote the
same physics with a decay term -i (gamma/2) |1><1|; every closed form in
:mod:`flyq.analytic` is stated and tested in the L-based convention used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConditioningError, DivergenceError, ValidationError
from .operators import SLHSystem, adjoint, solve

__all__ = [
    "effective_hamiltonian",
    "propagate",
    "green",
    "dressed_coupling",
    "PropagatorTable",
]

_GRID_TOL = 1e-9


def _heff(system: SLHSystem, t: float) -> np.ndarray:
    h = np.asarray(system.hamiltonian(t), dtype=complex)
    l = np.asarray(system.coupling(t), dtype=complex)
    return h - 0.5j * (adjoint(l) @ l)


def effective_hamiltonian(system: SLHSystem, t: float) -> np.ndarray:
    """H(t) - (i/2) L(t)^dag L(t); ``t`` must lie in [0, horizon]."""
    if t < -_GRID_TOL or t > system.horizon + _GRID_TOL:
        raise ValidationError(f"t={t} outside horizon [0, {system.horizon}]")
    return _heff(system, float(t))


@dataclass(frozen=True)
class PropagatorTable:
    """V(t) sampled on a refined grid, plus the per-step propagators.

    ``step_ops[k]`` maps V(t_k) to V(t_{k+1}); an impulsive unitary at t_{k+1}
    is folded into step_ops[k] (and into V[0] for an impulse at t=0), so V[k]
    is the right limit at t_k and jump chains evaluated at an impulse time
    act on the post-impulse state.
    ``residual_excitation`` is the norm of the non-ground rows of V(t_final):
    a large value means the system has not finished decaying and the horizon
    should be extended.
    """

    grid: np.ndarray
    V: np.ndarray
    step_ops: np.ndarray
    step: float
    residual_excitation: float
    ground_state_index: int

    @property
    def t_final(self) -> float:
        return float(self.grid[-1])

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; rejects off-grid times."""
        k = int(np.searchsorted(self.grid, t - _GRID_TOL))
        if k >= self.grid.size or abs(self.grid[k] - t) > _GRID_TOL:
            raise ValidationError(f"time {t} is not on the propagator grid")
        return k


def _build_grid(system: SLHSystem, step: float, t_final: float) -> np.ndarray:
    bps = [b for b in system.breakpoints if b < t_final - _GRID_TOL]
    bps.append(t_final)
    pieces = [np.array([0.0])]
    prev = 0.0
    for b in bps:
        if b <= prev + _GRID_TOL:
            continue
        n = max(1, int(math.ceil((b - prev) / step - 1e-9)))
        pieces.append(np.linspace(prev, b, n + 1)[1:])
        prev = b
    return np.concatenate(pieces)


def default_t_final(system: SLHSystem) -> float:
    """Horizon end plus ten lifetimes of the slowest nonzero coupling rate."""
    last = max(system.breakpoints)
    if system.min_gamma > 0:
        return last + 10.0 / system.min_gamma
    return last


def default_step(system: SLHSystem) -> float:
    rate = max(system.max_rate, system.min_gamma, 1e-3)
    return min(0.01 / rate, 0.05)


def _rk4_step(system: SLHSystem, t0: float, h: float) -> np.ndarray:
    eye = np.eye(system.dim, dtype=complex)

    def f(t, v):
        return -1j * (_heff(system, t) @ v)

    k1 = f(t0, eye)
    k2 = f(t0 + h / 2, eye + (h / 2) * k1)
    k3 = f(t0 + h / 2, eye + (h / 2) * k2)
    k4 = f(t0 + h, eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate(
    system: SLHSystem,
    step: float | None = None,
    integrator: str = "expm_midpoint",
    t_final: float | None = None,
) -> PropagatorTable:
    """Integrate the propagator over a grid refined to the control breakpoints.

    ``expm_midpoint`` is exact per step for piecewise-constant controls and
    second-order otherwise; ``rk4`` is fourth-order for smooth controls.
    Impulsive unitaries are left-multiplied exactly at their timestamps, with
    V sampled at the right (post-impulse) limit there.
    """
    if integrator not in ("expm_midpoint", "rk4"):
        raise ValidationError(f"unknown integrator {integrator!r}")
    if step is None:
        step = default_step(system)
    if step <= 0:
        raise ValidationError("step must be positive")
    if t_final is None:
        t_final = default_t_final(system)

    grid = _build_grid(system, step, t_final)
    n = grid.size - 1
    d = system.dim
    impulse_at = {}
    for imp in system.impulses:
        k = int(np.argmin(np.abs(grid - imp.time)))
        if abs(grid[k] - imp.time) > _GRID_TOL:
            raise ValidationError(f"impulse time {imp.time} missing from grid")
        impulse_at[k] = imp.unitary

    V = np.empty((n + 1, d, d), dtype=complex)
    U = np.empty((n, d, d), dtype=complex)
    # V[k] is the post-impulse value at t_k: an impulse is folded into the
    # step ending at its timestamp (applied to V[0] directly for t=0), so
    # jump chains evaluated at an impulse time see the flipped state.
    V[0] = impulse_at.get(0, np.eye(d))

    cache_key = None
    cache_u = None
    for k in range(n):
        t0, t1 = grid[k], grid[k + 1]
        h = t1 - t0
        if integrator == "expm_midpoint":
            hm = _heff(system, 0.5 * (t0 + t1))
            if cache_key is not None and abs(h - cache_key[0]) < 1e-15 and np.array_equal(hm, cache_key[1]):
                u = cache_u
            else:
                u = expm(-1j * h * hm)
                cache_key = (h, hm)
                cache_u = u
        else:
            u = _rk4_step(system, t0, h)
        r = impulse_at.get(k + 1)
        if r is not None:
            u = r @ u
        U[k] = u
        V[k + 1] = u @ V[k]
        if not np.all(np.isfinite(V[k + 1].view(float))):
            raise DivergenceError(f"non-finite propagator entries at t={t1}", time=float(t1))

    g = system.ground_state_index
    mask = np.ones(d, dtype=bool)
    mask[g] = False
    residual = float(np.linalg.norm(V[-1][mask, :]))

    V.setflags(write=False)
    U.setflags(write=False)
    grid.setflags(write=False)
    return PropagatorTable(
        grid=grid,
        V=V,
        step_ops=U,
        step=float(step),
        residual_excitation=residual,
        ground_state_index=g,
    )


def green(table: PropagatorTable, s: float, s_prime: float) -> np.ndarray:
    """Transition operator G(s, s') = V(s) V^-1(s') for grid times s >= s'.

    Computed as the ordered product of per-step propagators, never through an
    explicit inverse of V(s').
    """
    i = table.index_of(s)
    j = table.index_of(s_prime)
    if i < j:
        raise ValidationError(f"green requires s >= s' (got s={s}, s'={s_prime})")
    d = table.V.shape[1]
    g = np.eye(d, dtype=complex)
    for k in range(j, i):
        g = table.step_ops[k] @ g
    return g


def dressed_coupling(
    table: PropagatorTable, system: SLHSystem, tau: float, cond_max: float = 1e12
) -> np.ndarray:
    """Jump operator in the propagator frame, V^-1(tau) L(tau) V(tau).

    Solved as V X = L V.  For decaying systems V(tau) becomes exponentially
    ill conditioned at large tau; callers computing amplitude chains should
    use the green-chain form instead (see :mod:`flyq.wavepacket`), which is
    the same mathematics without the inverse.
    """
    k = table.index_of(tau)
    v = table.V[k]
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > cond_max:
        raise ConditioningError(
            f"V({tau}) too ill conditioned to invert (cond ~ {cond:.3e})", cond=cond
        )
    l = np.asarray(system.coupling(float(tau)), dtype=complex)
    return solve(v, l @ v, cond_max=cond_max)
