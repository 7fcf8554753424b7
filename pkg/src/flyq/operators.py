"""Dense linear-algebra helpers and the domain types shared by every module.

Matrices and state vectors are plain complex numpy arrays.  Basis
convention: index 0 is the ground state |0>, index 1 the excited state |1>;
the qubit coupling operator is L(t) = sqrt(2*gamma(t)) * sigma_minus, so an
undriven excited amplitude decays as exp(-gamma*t).  All rates are
dimensionless (gamma-scaled natural units).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, SingularMatrixError, ValidationError

__all__ = [
    "adjoint",
    "matmul",
    "solve",
    "pauli_ops",
    "Segment",
    "Waveform",
    "Impulse",
    "ControlSchedule",
    "SLHSystem",
    "qubit_system",
]

_BREAK_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(a)).T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit conformability check."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def solve(a: np.ndarray, b: np.ndarray, cond_max: float = 1e12) -> np.ndarray:
    """Solve A X = B for X; rejects singular or badly conditioned A."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"left operand must be square, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"incompatible shapes {a.shape} and {b.shape}")
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > cond_max:
        raise SingularMatrixError(
            f"matrix is singular or ill conditioned (cond ~ {cond:.3e})", cond=cond
        )
    return np.linalg.solve(a, b)


def pauli_ops(dim_check: int = 2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (sigma_plus, sigma_minus, sigma_x) for a two-level system.

    sigma_plus = |1><0| with index 0 the ground state.
    """
    if dim_check != 2:
        raise DimensionError(f"Pauli operators are only defined for dim 2, got {dim_check}")
    sp = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    sm = adjoint(sp)
    sx = sp + sm
    return _freeze(sp), _freeze(sm), _freeze(sx)


# ---------------------------------------------------------------------------
# Control waveforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """One piece of a piecewise control waveform on [t0, t1].

    Kinds:
      ``const``    value(t) = a
      ``linear``   value(t) interpolates a -> b over the segment
      ``exp``      value(t) = a * exp(rate * (t - t0))
      ``samples``  piecewise-linear through (times, values); times must
                   cover [t0, t1]
      ``callable`` value(t) = fn(t); not serializable, library use only
    """

    t0: float
    t1: float
    kind: str
    a: complex = 0.0
    b: complex = 0.0
    rate: float = 0.0
    times: tuple[float, ...] = ()
    values: tuple[complex, ...] = ()
    fn: Callable[[float], complex] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or self.t1 < self.t0:
            raise ValidationError(f"bad segment interval [{self.t0}, {self.t1}]")
        if self.kind not in ("const", "linear", "exp", "samples", "callable"):
            raise ValidationError(f"unknown segment kind {self.kind!r}")
        if self.kind == "samples":
            if len(self.times) != len(self.values) or len(self.times) < 2:
                raise ValidationError("samples segment needs matching times/values, >= 2 points")
            if np.any(np.diff(self.times) <= 0):
                raise ValidationError("sample times must be strictly increasing")
        if self.kind == "callable" and self.fn is None:
            raise ValidationError("callable segment without fn")

    def value(self, t: float) -> complex:
        if self.kind == "const":
            return self.a
        if self.kind == "linear":
            w = 0.0 if self.t1 == self.t0 else (t - self.t0) / (self.t1 - self.t0)
            return self.a + (self.b - self.a) * w
        if self.kind == "exp":
            return self.a * math.exp(self.rate * (t - self.t0))
        if self.kind == "samples":
            # scalar linear interpolation via bisect; much cheaper than
            # np.interp for the one-point-at-a-time integrator loop
            ts, vs = self.times, self.values
            if t <= ts[0]:
                return vs[0]
            if t >= ts[-1]:
                return vs[-1]
            k = bisect.bisect_right(ts, t)
            w = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
            v = vs[k - 1] + (vs[k] - vs[k - 1]) * w
            return v if isinstance(v, complex) and v.imag else float(np.real(v))
        return self.fn(t)


@dataclass(frozen=True)
class Waveform:
    """Piecewise control waveform on [0, t_end].

    Evaluation is exact inside segments and uses the left limit at interior
    breakpoints.  Beyond ``t_end`` the waveform evaluates to 0 (``tail`` =
    "zero", for drives) or holds its final value (``tail`` = "hold", for
    coupling rates that stay on while the system decays).
    """

    segments: tuple[Segment, ...]
    tail: str = "zero"

    def __post_init__(self):
        if not self.segments:
            raise ValidationError("waveform needs at least one segment")
        if self.tail not in ("zero", "hold"):
            raise ValidationError(f"unknown tail behavior {self.tail!r}")
        t = self.segments[0].t0
        if abs(t) > _BREAK_TOL:
            raise ValidationError("waveform must start at t=0")
        for seg in self.segments:
            if abs(seg.t0 - t) > _BREAK_TOL:
                raise ValidationError(
                    f"segments must cover the horizon contiguously (gap/overlap at t={seg.t0})"
                )
            t = seg.t1

    @property
    def t_end(self) -> float:
        return self.segments[-1].t1

    @property
    def breakpoints(self) -> list[float]:
        pts = [self.segments[0].t0]
        for seg in self.segments:
            if seg.kind == "samples":
                pts.extend(x for x in seg.times if seg.t0 < x < seg.t1)
            pts.append(seg.t1)
        return pts

    def __call__(self, t: float) -> complex:
        if t < -_BREAK_TOL:
            raise ValidationError(f"waveform evaluated at negative time {t}")
        if t > self.t_end:
            if self.tail == "zero":
                return 0.0
            return self.segments[-1].value(self.t_end)
        # left limit at breakpoints: pick the segment with t0 < t <= t1
        for seg in self.segments:
            if t <= seg.t1 + _BREAK_TOL:
                return seg.value(min(max(t, seg.t0), seg.t1))
        return self.segments[-1].value(self.t_end)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self(float(t)) for t in times])

    @classmethod
    def constant(cls, value: complex, t_end: float, tail: str = "zero") -> "Waveform":
        return cls((Segment(0.0, float(t_end), "const", a=value),), tail=tail)

    @classmethod
    def from_samples(
        cls, times: Sequence[float], values: Sequence[complex], tail: str = "zero"
    ) -> "Waveform":
        times = tuple(float(t) for t in times)
        values = tuple(values)
        return cls(
            (Segment(times[0], times[-1], "samples", times=times, values=values),),
            tail=tail,
        )

    @classmethod
    def from_callable(cls, fn: Callable[[float], complex], t_end: float,
                      tail: str = "zero") -> "Waveform":
        return cls((Segment(0.0, float(t_end), "callable", fn=fn),), tail=tail)


@dataclass(frozen=True)
class Impulse:
    """Instantaneous unitary applied to the standing system at ``time``.

    Delta-like drives (hard pi pulses) are represented this way; they are
    left-multiplied into the propagator exactly at their timestamp and never
    sampled as waveform values.
    """

    time: float
    unitary: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError("impulse unitary must be square")
        if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
            raise ValidationError(f"impulse at t={self.time} is not unitary")
        object.__setattr__(self, "unitary", _freeze(u))


@dataclass(frozen=True)
class ControlSchedule:
    """Classical controls for a driven qubit: drive envelope u(t), detuning
    epsilon(t), coupling rate gamma(t), plus impulsive unitaries."""

    u: Waveform
    epsilon: Waveform
    gamma: Waveform
    impulses: tuple[Impulse, ...] = ()

    def __post_init__(self):
        # gamma(t) >= 0 sampled over the horizon
        ts = np.linspace(0.0, max(self.gamma.t_end, 1e-9), 257)
        g = np.real(self.gamma.sample(ts))
        if np.any(g < -1e-12):
            raise ValidationError("gamma(t) must be nonnegative")
        times = [imp.time for imp in self.impulses]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValidationError("impulse times must be strictly increasing")
        if any(t < 0 or t > self.horizon for t in times):
            raise ValidationError("impulse times must lie inside the horizon")

    @property
    def horizon(self) -> float:
        return max(self.u.t_end, self.epsilon.t_end, self.gamma.t_end)

    @property
    def breakpoints(self) -> list[float]:
        pts = set()
        for wf in (self.u, self.epsilon, self.gamma):
            pts.update(wf.breakpoints)
        pts.update(imp.time for imp in self.impulses)
        pts.update((0.0, self.horizon))
        return sorted(pts)

    def max_rate(self) -> float:
        """Largest control magnitude over the horizon; sets the default step."""
        ts = np.linspace(0.0, self.horizon, 513)
        vals = [
            np.max(np.abs(self.u.sample(ts))),
            np.max(np.abs(self.epsilon.sample(ts))),
            np.max(np.abs(self.gamma.sample(ts))),
        ]
        return float(max(vals))

    def min_gamma_tail(self) -> float:
        """Smallest nonzero gamma over the horizon tail; sets the decay horizon."""
        ts = np.linspace(0.0, self.horizon, 513)
        g = np.real(self.gamma.sample(ts))
        g_end = float(np.real(self.gamma(self.horizon)))
        nz = g[g > 1e-12]
        if self.gamma.tail == "hold" and g_end > 1e-12:
            return g_end
        return float(np.min(nz)) if nz.size else 0.0


# ---------------------------------------------------------------------------
# Standing systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SLHSystem:
    """A standing system coupled to one chiral waveguide: the (L, H) data of
    the quantum stochastic model with S = identity.

    ``hamiltonian`` and ``coupling`` evaluate H(t) and L(t) at any time in
    [0, horizon] and hold/zero consistently beyond it.  ``breakpoints`` are
    times where the controls may be non-smooth; integrators align their grids
    with them.
    """

    dim: int
    hamiltonian: Callable[[float], np.ndarray]
    coupling: Callable[[float], np.ndarray]
    initial_state: np.ndarray
    horizon: float
    ground_state_index: int = 0
    breakpoints: tuple[float, ...] = ()
    impulses: tuple[Impulse, ...] = ()
    max_rate: float = 1.0
    min_gamma: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.initial_state, dtype=complex).reshape(-1)
        if psi.shape[0] != self.dim:
            raise ValidationError(
                f"initial state has dim {psi.shape[0]}, system has dim {self.dim}"
            )
        if not np.all(np.isfinite(psi.view(float))):
            raise ValidationError("initial state has non-finite amplitudes")
        object.__setattr__(self, "initial_state", _freeze(psi))
        bps = sorted(set([0.0, float(self.horizon)])
                     | set(float(b) for b in self.breakpoints)
                     | set(imp.time for imp in self.impulses))
        object.__setattr__(self, "breakpoints", tuple(bps))

    def check_hermitian(self, times: Sequence[float] | None = None, tol: float = 1e-12):
        """Raise unless H(t) is Hermitian at the sampled times."""
        if times is None:
            times = np.linspace(0.0, self.horizon, 33)
        for t in times:
            h = self.hamiltonian(float(t))
            dev = np.max(np.abs(h - h.conj().T))
            if dev > tol:
                raise ValidationError(f"H(t) not Hermitian at t={t} (|H-H^dag| = {dev:.2e})")


def qubit_system(schedule: ControlSchedule) -> SLHSystem:
    """Two-level standing system under the schedule's controls.

    H(t) = epsilon(t) sp sm + u(t)/2 sp + conj(u(t))/2 sm,
    L(t) = sqrt(2 gamma(t)) sm.
    """
    sp, sm, _ = pauli_ops()
    n_op = sp @ sm

    u, eps, gam = schedule.u, schedule.epsilon, schedule.gamma

    def hamiltonian(t: float) -> np.ndarray:
        uv = complex(u(t))
        ev = float(np.real(eps(t)))
        return ev * n_op + (uv / 2.0) * sp + (np.conj(uv) / 2.0) * sm

    def coupling(t: float) -> np.ndarray:
        gv = float(np.real(gam(t)))
        if gv < 0 and gv > -1e-12:
            gv = 0.0
        return math.sqrt(2.0 * gv) * sm

    return SLHSystem(
        dim=2,
        hamiltonian=hamiltonian,
        coupling=coupling,
        initial_state=np.array([1.0, 0.0], dtype=complex),
        horizon=schedule.horizon,
        ground_state_index=0,
        breakpoints=tuple(schedule.breakpoints),
        impulses=schedule.impulses,
        max_rate=schedule.max_rate(),
        min_gamma=schedule.min_gamma_tail(),
    )
