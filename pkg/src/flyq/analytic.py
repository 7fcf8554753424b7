"""Closed-form amplitudes used as ground truth for the numeric engine.

All formulas follow the coupling convention L = sqrt(2 gamma) sigma_minus,
under which an undriven excited amplitude decays as exp(-gamma*t) (see the
note in :mod:`flyq.propagator`).  Rectangular-pulse forms are available in
the strong-driving regime only (Omega > gamma); the balanced and weak
regimes are served by the numeric engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import UnsupportedRegimeError, ValidationError
from .operators import Waveform

__all__ = [
    "RectangularPulseParams",
    "StepSchedule",
    "StimulatedEmissionParams",
    "spontaneous_packet",
    "rect_pulse_amplitudes",
    "stimulated_two_photon",
    "stimulated_two_photon_compact",
]


def _integral(fn, tau: float, points=None) -> float:
    # quad rejects more break points than subintervals; densely sampled
    # waveforms are smooth enough for the adaptive rule on its own
    if points is not None and len(points) > 50:
        points = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(fn, 0.0, tau, points=points, limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def spontaneous_packet(gamma, epsilon, tau: float) -> complex:
    """Single-photon amplitude of an initially excited, undriven qubit:

        xi(tau) = sqrt(2 gamma(tau)) exp(-int_0^tau gamma) exp(-i int_0^tau epsilon)

    ``gamma`` and ``epsilon`` may be waveforms or plain callables.
    """
    g = gamma if callable(gamma) else (lambda t: gamma)
    e = epsilon if callable(epsilon) else (lambda t: epsilon)
    gpts = [b for b in gamma.breakpoints if 0 < b < tau] if isinstance(gamma, Waveform) else None
    epts = [b for b in epsilon.breakpoints if 0 < b < tau] if isinstance(epsilon, Waveform) else None
    gv = float(np.real(g(tau)))
    if gv < 0:
        raise ValidationError(f"gamma({tau}) = {gv} is negative")
    amp = math.sqrt(2.0 * gv) * math.exp(-_integral(lambda s: float(np.real(g(s))), tau, gpts))
    phase = -_integral(lambda s: float(np.real(e(s))), tau, epts)
    return amp * complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class RectangularPulseParams:
    """Resonant rectangular drive of power Omega on [0, T] with constant
    coupling rate gamma."""

    Omega: float
    T: float
    gamma: float

    def __post_init__(self):
        if self.Omega <= 0 or self.T <= 0 or self.gamma <= 0:
            raise ValidationError("Omega, T and gamma must be positive")

    @property
    def regime(self) -> str:
        if self.Omega > self.gamma:
            return "strong"
        if self.Omega == self.gamma:
            return "balanced"
        return "weak"

    @property
    def omega(self) -> float:
        if self.regime != "strong":
            raise UnsupportedRegimeError("omega = sqrt(Omega^2 - gamma^2) needs Omega > gamma")
        return math.sqrt(self.Omega**2 - self.gamma**2)

    @property
    def varphi(self) -> float:
        return math.asin(self.gamma / self.Omega)


def rect_pulse_amplitudes(p: RectangularPulseParams):
    """Vacuum amplitude and single-photon packet in the strong regime.

    Returns ``(xi0, xi1)`` with ``xi1`` a vectorized function of tau.  Both
    carry full complex phase.  The vacuum amplitude includes the 1/cos(varphi)
    factor of the damped Rabi solution; omitting it (as some transcriptions
    do) breaks the sum-to-one check against the numeric engine.
    """
    if p.regime != "strong":
        raise UnsupportedRegimeError(
            f"closed forms cover the strong regime only (Omega={p.Omega}, "
            f"gamma={p.gamma}); use the numeric engine"
        )
    w, phi, g, T = p.omega, p.varphi, p.gamma, p.T
    pref = math.exp(-g * T / 2.0)
    xi0 = pref * math.cos(w * T / 2.0 - phi) / math.cos(phi)

    def xi1(tau):
        tau = np.asarray(tau, dtype=float)
        during = (
            -1j * math.sqrt(2 * g) * pref / math.cos(phi) ** 2
            * np.sin(w * tau / 2.0)
            * np.cos(w * (T - tau) / 2.0 - phi)
        )
        after = (
            -1j * math.sqrt(2 * g) * pref / math.cos(phi)
            * math.sin(w * T / 2.0)
            * np.exp(-g * (tau - T))
        )
        out = np.where(tau < T, during, after)
        return out if out.ndim else complex(out)

    return xi0, xi1


# ---------------------------------------------------------------------------
# Stimulated two-photon emission
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepSchedule:
    """Piecewise-constant rate: values[i] holds on [times[i], times[i+1]),
    values[-1] beyond times[-1].  Cumulative integrals are exact."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if t.shape != v.shape or t.size < 1 or abs(t[0]) > 1e-12:
            raise ValidationError("schedule needs matching times/values starting at t=0")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("schedule times must be strictly increasing")
        if np.any(v < 0):
            raise ValidationError("rates must be nonnegative")
        for a in (t, v):
            a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float) -> "StepSchedule":
        return cls(np.array([0.0]), np.array([float(value)]))

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        j = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, None)
        out = self.values[j]
        return out if out.ndim else float(out)

    def cumulative(self, t):
        """int_0^t of the rate, exact."""
        t = np.asarray(t, dtype=float)
        seg = np.diff(self.times) * self.values[:-1]
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        j = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, None)
        out = cum[j] + self.values[j] * (t - self.times[j])
        return out if out.ndim else float(out)


def _expm1_ratio(x):
    """(e^x - 1)/x, stable near 0."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) < 1e-8, 1.0 + x / 2.0, np.expm1(np.where(x == 0, 1, x)) / np.where(x == 0, 1, x))
    return out


@dataclass(frozen=True)
class StimulatedEmissionParams:
    """Rates of the cascade: gamma0 for the upstream source, gamma for the
    downstream qubit, both piecewise constant.  Exposes the exact helper
    integrals Gamma_A, Gamma_B and the cross integral Xi."""

    gamma0: StepSchedule
    gamma: StepSchedule
    _merged: np.ndarray = field(init=False, repr=False)
    _xi_cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.gamma.values[-1] <= 0:
            raise ValidationError("downstream gamma must stay positive so the tail integral converges")
        merged = np.unique(np.concatenate([self.gamma0.times, self.gamma.times]))
        xi_cum = np.zeros(merged.size)
        for i in range(merged.size - 1):
            a, b = merged[i], merged[i + 1]
            xi_cum[i + 1] = xi_cum[i] + self._xi_piece(a, b)
        merged.setflags(write=False)
        xi_cum.setflags(write=False)
        object.__setattr__(self, "_merged", merged)
        object.__setattr__(self, "_xi_cum", xi_cum)

    def _xi_piece(self, a: float, b: float) -> float:
        g0 = float(self.gamma0.rate(a))
        g = float(self.gamma.rate(a))
        c = self.gamma.cumulative(a) - self.gamma0.cumulative(a)
        r = g - g0
        return 2.0 * math.sqrt(g0 * g) * math.exp(c) * (b - a) * float(_expm1_ratio(r * (b - a)))

    def Gamma_A(self, t):
        return self.gamma0.cumulative(t)

    def Gamma_B(self, t):
        return self.gamma.cumulative(t)

    def Xi(self, t):
        """2 int_0^t sqrt(gamma0 gamma) e^{Gamma_B - Gamma_A}, exact per segment."""
        t = np.asarray(t, dtype=float)
        j = np.clip(np.searchsorted(self._merged, t, side="right") - 1, 0, None)
        base = self._xi_cum[j]
        a = self._merged[j]
        g0 = self.gamma0.rate(a)
        g = self.gamma.rate(a)
        c = self.gamma.cumulative(a) - self.gamma0.cumulative(a)
        r = g - g0
        part = 2.0 * np.sqrt(g0 * g) * np.exp(c) * (t - a) * _expm1_ratio(r * (t - a))
        out = base + part
        return out if out.ndim else float(out)

    def xi_in(self, t):
        """Wavepacket emitted by the source alone."""
        return np.sqrt(2.0 * self.gamma0.rate(t)) * np.exp(-self.Gamma_A(t))

    def xi_spont(self, t):
        """Wavepacket the downstream qubit would emit spontaneously."""
        return np.sqrt(2.0 * self.gamma.rate(t)) * np.exp(-self.Gamma_B(t))


def stimulated_two_photon(p: StimulatedEmissionParams, tau1, tau2):
    """Two-photon amplitude of the hard-flip stimulated-emission scenario
    (source excited, downstream qubit flipped to |1> at t=0), three-term form:

        2 sqrt(g0(t2) g(t1)) e^{-G_A(t2)-G_B(t1)}
      + 2 sqrt(g0(t1) g(t2)) e^{-G_A(t1)-G_B(t2)}
      + 2 sqrt(g(t1) g(t2)) e^{-G_B(t1)-G_B(t2)} [Xi(t1) - Xi(t2)]

    for 0 <= tau1 <= tau2.  Vectorized over broadcastable arrays.
    """
    t1 = np.asarray(tau1, dtype=float)
    t2 = np.asarray(tau2, dtype=float)
    if np.any(t1 > t2 + 1e-12) or np.any(t1 < -1e-12):
        raise ValidationError("need 0 <= tau1 <= tau2")
    g0 = p.gamma0.rate
    g = p.gamma.rate
    ga, gb, xi = p.Gamma_A, p.Gamma_B, p.Xi
    term1 = 2.0 * np.sqrt(g0(t2) * g(t1)) * np.exp(-ga(t2) - gb(t1))
    term2 = 2.0 * np.sqrt(g0(t1) * g(t2)) * np.exp(-ga(t1) - gb(t2))
    term3 = 2.0 * np.sqrt(g(t1) * g(t2)) * np.exp(-gb(t1) - gb(t2)) * (xi(t1) - xi(t2))
    out = term1 + term2 + term3
    return out if out.ndim else float(out)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gauss(fn, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, fn(x)))


def stimulated_two_photon_compact(p: StimulatedEmissionParams, tau1: float, tau2: float) -> float:
    """Compact cross-check of :func:`stimulated_two_photon`:

        xi0(t1) xi1(t2) + xi0(t2) xi1(t1)
          - xi1(t1) xi1(t2) int_{t1}^{t2} xi0(s) xi1(s) / int_s^inf |xi1|^2 ds

    The inner integral is the *remaining* spontaneous mass int_s^inf |xi1|^2
    (equal to e^{-2 Gamma_B(s)} when the downstream coupling never switches
    off), and the cross term carries a minus sign; with these the form agrees
    with the three-term expression identically.
    """
    if tau1 > tau2 + 1e-12:
        raise ValidationError("need tau1 <= tau2")

    def integrand(s):
        tail = np.exp(-2.0 * p.Gamma_B(s))
        return p.xi_in(s) * p.xi_spont(s) / tail

    pts = [tau1] + [float(b) for b in p._merged if tau1 < b < tau2] + [tau2]
    cross = sum(_gauss(integrand, a, b) for a, b in zip(pts, pts[1:]))
    return (
        p.xi_in(tau1) * p.xi_spont(tau2)
        + p.xi_in(tau2) * p.xi_spont(tau1)
        - p.xi_spont(tau1) * p.xi_spont(tau2) * cross
    )
