"""SLH series-product composition and inverse source design.

Cascading an upstream system A into a downstream system B through one chiral
waveguide gives an equivalent standing system on the tensor-product space

    H = H_A (x) I + I (x) H_B + (1/2i) [L_A (x) L_B^dag - L_A^dag (x) L_B]
    L = L_A (x) I + I (x) L_B

(upstream system on the left/slow factor).  A non-vacuum input is handled by
composing an auxiliary source, designed here to emit a prescribed
single-photon wavepacket nu(tau) e^{i phi(tau)}, with the actual system; the
composition then receives vacuum input and the jump machinery applies
unchanged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .operators import (
    ControlSchedule,
    Impulse,
    SLHSystem,
    Waveform,
    adjoint,
    qubit_system,
)

__all__ = [
    "CascadedSystem",
    "SourceDesign",
    "series_product",
    "design_source",
    "design_absorber",
    "transformation_scenario",
]

_TOL = 1e-9


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """np.kron for small dense matrices without its shape-juggling overhead;
    the composed hamiltonian/coupling are evaluated once per integrator step,
    so this is on the hot path of every fitness evaluation."""
    na, nb = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(na * nb, na * nb)


@dataclass(frozen=True)
class CascadedSystem:
    """Ordered cascade (upstream first) and the composed standing system."""

    parts: tuple[SLHSystem, ...]
    composed: SLHSystem


def _pad_impulses(system: SLHSystem, left_dim: int, right_dim: int) -> list[Impulse]:
    out = []
    for imp in system.impulses:
        u = np.kron(np.kron(np.eye(left_dim), imp.unitary), np.eye(right_dim))
        out.append(Impulse(imp.time, u))
    return out


def series_product(a: SLHSystem, b: SLHSystem) -> CascadedSystem:
    """Compose two systems sharing one waveguide; A feeds B."""
    if abs(a.horizon - b.horizon) > _TOL:
        raise ValidationError(
            f"horizon mismatch: upstream ends at {a.horizon}, downstream at {b.horizon}"
        )
    da, db = a.dim, b.dim
    eye_a = np.eye(da, dtype=complex)
    eye_b = np.eye(db, dtype=complex)

    def hamiltonian(t: float) -> np.ndarray:
        ha = np.asarray(a.hamiltonian(t), dtype=complex)
        hb = np.asarray(b.hamiltonian(t), dtype=complex)
        la = np.asarray(a.coupling(t), dtype=complex)
        lb = np.asarray(b.coupling(t), dtype=complex)
        cross = _kron(la, adjoint(lb)) - _kron(adjoint(la), lb)
        return _kron(ha, eye_b) + _kron(eye_a, hb) + cross / 2j

    def coupling(t: float) -> np.ndarray:
        la = np.asarray(a.coupling(t), dtype=complex)
        lb = np.asarray(b.coupling(t), dtype=complex)
        return _kron(la, eye_b) + _kron(eye_a, lb)

    impulses = _pad_impulses(a, 1, db) + [
        Impulse(imp.time, np.kron(eye_a, imp.unitary)) for imp in b.impulses
    ]
    # coincident impulses act in cascade order: downstream first
    impulses.sort(key=lambda imp: imp.time)
    merged: list[Impulse] = []
    for imp in impulses:
        if merged and abs(merged[-1].time - imp.time) < _TOL:
            merged[-1] = Impulse(imp.time, imp.unitary @ merged[-1].unitary)
        else:
            merged.append(imp)

    gammas = [g for g in (a.min_gamma, b.min_gamma) if g > 0]
    composed = SLHSystem(
        dim=da * db,
        hamiltonian=hamiltonian,
        coupling=coupling,
        initial_state=np.kron(a.initial_state, b.initial_state),
        horizon=max(a.horizon, b.horizon),
        ground_state_index=a.ground_state_index * db + b.ground_state_index,
        breakpoints=tuple(sorted(set(a.breakpoints) | set(b.breakpoints))),
        impulses=tuple(merged),
        max_rate=max(a.max_rate, b.max_rate),
        min_gamma=min(gammas) if gammas else 0.0,
    )
    return CascadedSystem(parts=(a, b), composed=composed)


@dataclass(frozen=True)
class SourceDesign:
    """Coupling/detuning schedules that emit the target packet
    nu(tau) e^{i phi(tau)} from an initially excited, undriven qubit."""

    times: np.ndarray
    nu: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    epsilon: np.ndarray
    tail_mass: np.ndarray
    clipped_mass: float
    schedule: ControlSchedule
    system: SLHSystem

    @property
    def support_end(self) -> float:
        return float(self.times[-1])


def _excited(system: SLHSystem) -> SLHSystem:
    psi = np.zeros(system.dim, dtype=complex)
    psi[1] = 1.0
    return replace(system, initial_state=psi)


def design_source(
    times,
    nu,
    phi=None,
    gamma_max: float = 1e3,
    tail_floor: float = 1e-12,
) -> SourceDesign:
    """Inverse design: gamma(tau) = nu^2 / (2 * tail), epsilon = -dphi/dtau.

    ``nu`` is renormalized to unit L2 mass (with a warning when off by more
    than 1e-4).  gamma is clipped at ``gamma_max`` once the remaining tail
    empties; the excitation mass affected by the clip is reported in
    ``clipped_mass``.
    """
    times = np.asarray(times, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if times.ndim != 1 or times.size < 3 or np.any(np.diff(times) <= 0):
        raise ValidationError("times must be a strictly increasing 1-d grid")
    if nu.shape != times.shape or not np.all(np.isfinite(nu)):
        raise ValidationError("nu must be finite and match the time grid")
    if np.any(nu < -1e-12):
        raise ValidationError("nu must be nonnegative")
    nu = np.clip(nu, 0.0, None)
    if phi is None:
        phi = np.zeros_like(times)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != times.shape or not np.all(np.isfinite(phi)):
        raise ValidationError("phi must be finite and match the time grid")

    norm = float(np.trapezoid(nu**2, times))
    if not np.isfinite(norm) or norm <= 1e-12:
        raise ValidationError(f"target amplitude is unnormalizable (L2 mass {norm:.3e})")
    if abs(norm - 1.0) > 1e-4:
        warnings.warn(f"target L2 mass {norm:.6f} != 1; renormalizing", stacklevel=2)
    nu = nu / np.sqrt(norm)

    nu2 = nu**2
    seg = 0.5 * np.diff(times) * (nu2[:-1] + nu2[1:])
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])

    with np.errstate(divide="ignore", invalid="ignore"):
        gamma_raw = nu2 / (2.0 * np.maximum(tail, tail_floor))
    gamma_raw[tail <= tail_floor] = gamma_max
    clip_hit = gamma_raw > gamma_max
    clipped_mass = float(tail[np.argmax(clip_hit)]) if np.any(clip_hit) else 0.0
    gamma = np.clip(gamma_raw, 0.0, gamma_max)

    epsilon = -np.gradient(phi, times)

    t_end = float(times[-1])
    schedule = ControlSchedule(
        u=Waveform.constant(0.0, t_end),
        epsilon=Waveform.from_samples(times, epsilon, tail="hold"),
        gamma=Waveform.from_samples(times, gamma, tail="hold"),
    )
    system = _excited(qubit_system(schedule))
    return SourceDesign(
        times=times,
        nu=nu,
        phi=phi,
        gamma=gamma,
        epsilon=epsilon,
        tail_mass=tail,
        clipped_mass=clipped_mass,
        schedule=schedule,
        system=system,
    )


def design_absorber(times, nu, gamma_max: float = 1e3) -> SLHSystem:
    """Catching template: the time-reversed coupling law
    gamma(t) = nu^2(t) / (2 * integral_0^t nu^2) absorbs the packet nu into an
    initially ground qubit (success is measured by the no-emission norm of the
    cascaded propagator over the packet support)."""
    times = np.asarray(times, dtype=float)
    nu = np.asarray(nu, dtype=float)
    norm = float(np.trapezoid(nu**2, times))
    if not np.isfinite(norm) or norm <= 1e-12:
        raise ValidationError("absorber target is unnormalizable")
    nu = nu / np.sqrt(norm)
    nu2 = nu**2
    seg = 0.5 * np.diff(times) * (nu2[:-1] + nu2[1:])
    head = np.concatenate([[0.0], np.cumsum(seg)])
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = nu2 / (2.0 * head)
    gamma[head <= 1e-12] = gamma_max
    gamma = np.clip(gamma, 0.0, gamma_max)
    schedule = ControlSchedule(
        u=Waveform.constant(0.0, float(times[-1])),
        epsilon=Waveform.constant(0.0, float(times[-1])),
        gamma=Waveform.from_samples(times, gamma, tail="hold"),
    )
    return qubit_system(schedule)


def transformation_scenario(incoming: SourceDesign, b: SLHSystem) -> CascadedSystem:
    """Reduce a non-vacuum input to a generation problem: cascade the designed
    source ahead of ``b``; the composition receives vacuum input."""
    if b.horizon < incoming.support_end - _TOL:
        raise ValidationError(
            f"downstream horizon {b.horizon} does not cover the incoming "
            f"packet support [0, {incoming.support_end}]"
        )
    src = incoming.system
    horizon = max(src.horizon, b.horizon)
    src = replace(src, horizon=horizon)
    b = replace(b, horizon=horizon)
    return series_product(src, b)
