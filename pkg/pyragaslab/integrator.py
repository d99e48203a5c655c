"""Method-of-steps integration for the ODE, the retarded DDE and the neutral DDE.

Every step has length h = τ/n, so the delayed argument of step j always
falls in step j − n (or in the history when j < n). Delayed values and
derivatives are read from that step's cubic Hermite interpolant, which is
smooth inside the step even where the solution's derivative jumps at the
step joints — the usual situation for neutral equations.

Usage:
    orbit = periodic_orbit(p)
    hist = perturbed_orbit_history(orbit, eps_r=0.05, eps_phi=0.0)
    traj = integrate_dde(p, control, hist, t_end=30 * orbit.period)
    verdict = classify(deviation(traj, orbit, 0.05), horizon=30 * orbit.period)
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DenominatorZero, DomainError, StepUnderflow, UndefinedPhase
from .model import (
    ModelParams,
    NeutralControl,
    PeriodicOrbit,
    RetardedControl,
    controlled_rhs,
    neutral_rhs,
    uncontrolled_rhs,
    variational_rhs,
)

log = logging.getLogger(__name__)

DEFAULT_STEPS_PER_DELAY = 100
MIN_STEP = 1e-12
# Finite-difference step for histories given without a derivative.
_FD_STEP = 1e-6

# (z, z(t−τ), ż(t−τ)) -> ż(t)
StageRhs = Callable[[complex, complex, complex], complex]


# ── History ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class HistoryFunction:
    """Initial data on [start, 0] giving (value, derivative).

    Attributes:
        value: t ↦ z(t).
        derivative: t ↦ ż(t); central differences of ``value`` when None.
        start: Left end of the domain (−inf for analytic data).
    """
    value: Callable[[float], complex]
    derivative: Callable[[float], complex] | None = None
    start: float = -math.inf

    def __call__(self, t: float) -> tuple[complex, complex]:
        if t > 0 or t < self.start:
            raise DomainError(f'history queried at t={t} outside [{self.start}, 0]')
        z = complex(self.value(t))
        if self.derivative is not None:
            return z, complex(self.derivative(t))
        lo = max(t - _FD_STEP, self.start)
        hi = min(t + _FD_STEP, 0.0)
        return z, (complex(self.value(hi)) - complex(self.value(lo))) / (hi - lo)

    def covers(self, tau: float) -> bool:
        return self.start <= -tau * (1 + 1e-12)

    @classmethod
    def constant(cls, z: complex) -> HistoryFunction:
        return cls(lambda t: z, lambda t: 0j)

    @classmethod
    def zero(cls) -> HistoryFunction:
        return cls.constant(0j)

    @classmethod
    def from_orbit(cls, orbit: PeriodicOrbit) -> HistoryFunction:
        return cls(orbit.value, orbit.derivative)


def perturbed_orbit_history(orbit: PeriodicOrbit, eps_r: float, eps_phi: float) -> HistoryFunction:
    """t ↦ R_p e^{iω_p t}(1 + ε_r + iε_φ), the deviation ansatz frozen at (ε_r, ε_φ)."""
    if abs(eps_r) >= 0.5 or abs(eps_phi) >= 0.5:
        raise DomainError(f'perturbations must stay below 0.5, got ({eps_r}, {eps_phi})')
    factor = complex(1.0 + eps_r, eps_phi)
    R, w = orbit.radius, orbit.omega

    def value(t: float) -> complex:
        return R * cmath.exp(1j * w * t) * factor

    def derivative(t: float) -> complex:
        return 1j * w * value(t)

    return HistoryFunction(value, derivative)


# ── Dense output ──────────────────────────────────────────────────────────────

def _hermite(s, h, z0, z1, f0, f1):
    """Cubic Hermite value and derivative at local coordinate s ∈ [0, 1]."""
    s2 = s * s
    s3 = s2 * s
    value = ((2 * s3 - 3 * s2 + 1) * z0 + (s3 - 2 * s2 + s) * h * f0
             + (-2 * s3 + 3 * s2) * z1 + (s3 - s2) * h * f1)
    deriv = ((6 * s2 - 6 * s) * (z0 - z1) / h + (3 * s2 - 4 * s + 1) * f0
             + (3 * s2 - 2 * s) * f1)
    return value, deriv


@dataclass
class Trajectory:
    """Piecewise-cubic solution on [t0 − τ, t_end].

    Step k covers [t0 + kh, t0 + (k+1)h] and carries the endpoint values
    z[k], z[k+1] and the one-sided derivatives f_left[k], f_right[k].
    Times before t0 are served by ``history``.

    Attributes:
        t0: Start of integration.
        h: Step length.
        z: Node values, one more than the number of steps.
        f_left: Derivative at the left end of each step.
        f_right: Derivative at the right end of each step.
        tau: Delay (0 for ODE runs).
        history: Initial data, None for ODE runs.
        escaped: True when the run stopped at the escape radius.
    """
    t0: float
    h: float
    z: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    tau: float = 0.0
    history: HistoryFunction | None = field(default=None, repr=False)
    escaped: bool = False

    @property
    def n_steps(self) -> int:
        return len(self.f_left)

    @property
    def t_end(self) -> float:
        return self.t0 + self.n_steps * self.h

    @property
    def t_start(self) -> float:
        return self.t0 - self.tau

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def final(self) -> complex:
        return complex(self.z[-1])

    def query(self, t: float) -> tuple[complex, complex]:
        """(value, derivative) at t; steps are closed on the left."""
        if t < self.t0:
            if self.history is None or t < self.t_start - 1e-12 * max(1.0, abs(self.t_start)):
                raise DomainError(f't={t} lies before the trajectory domain')
            return self.history(t - self.t0)
        span = self.t_end - self.t0
        if t > self.t_end + 1e-12 * max(1.0, abs(self.t_end)) or self.n_steps == 0:
            raise DomainError(f't={t} lies beyond t_end={self.t_end}')
        k = min(int((t - self.t0) / self.h), self.n_steps - 1)
        s = min(max((t - self.t0 - k * self.h) / self.h, 0.0), 1.0) if span > 0 else 0.0
        v, d = _hermite(s, self.h, self.z[k], self.z[k + 1], self.f_left[k], self.f_right[k])
        return complex(v), complex(d)

    def sample(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised query for times inside [t0, t_end]."""
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < self.t0 or ts.max() > self.t_end + 1e-9):
            raise DomainError('sample times must lie inside [t0, t_end]')
        if self.n_steps == 0:
            # Escaped on the first step: only the initial node exists.
            return np.full(ts.shape, self.z[0], dtype=complex), np.full(ts.shape, complex('nan'))
        k = np.minimum(((ts - self.t0) / self.h).astype(int), self.n_steps - 1)
        s = np.clip((ts - self.t0 - k * self.h) / self.h, 0.0, 1.0)
        return _hermite(s, self.h, self.z[k], self.z[k + 1], self.f_left[k], self.f_right[k])


# ── Stepping core ─────────────────────────────────────────────────────────────

def _check_step(h: float, t_end: float) -> None:
    if not h > 0 or not t_end > 0:
        raise DomainError(f'need h > 0 and t_end > 0, got h={h}, t_end={t_end}')
    if h < MIN_STEP:
        raise StepUnderflow(f'step {h} below the {MIN_STEP} floor')


def _escape_radius(z0: complex, escape_radius: float | None) -> float:
    if escape_radius is not None:
        return escape_radius
    return 1e3 * max(1.0, abs(z0))


def _march(
    rhs: StageRhs,
    t_end: float,
    h: float,
    *,
    tau: float,
    history: HistoryFunction | None,
    start: Trajectory | None,
    z0: complex,
    escape_radius: float | None,
) -> Trajectory:
    """Classical RK4 on a fixed grid, reading delayed data one delay back."""
    n_delay = round(tau / h) if tau > 0 else 0
    if start is not None:
        if start.escaped:
            return start
        if not math.isclose(start.h, h, rel_tol=1e-12) or start.tau != tau:
            raise DomainError('a continued run must keep the step and the delay')
        zs = list(start.z)
        fl = list(start.f_left)
        fr = list(start.f_right)
        t0 = start.t0
    else:
        zs, fl, fr = [complex(z0)], [], []
        t0 = 0.0

    n_total = max(1, math.ceil((t_end - t0) / h - 1e-9))
    limit = _escape_radius(zs[0], escape_radius)
    half = 0.5 * h
    escaped = False

    for j in range(len(fl), n_total):
        tj = t0 + j * h
        if n_delay == 0:
            d0 = dm = d1 = (0j, 0j)
        elif j >= n_delay:
            k = j - n_delay
            za, zb, fa, fb = zs[k], zs[k + 1], fl[k], fr[k]
            d0 = (za, fa)
            dm = (0.5 * (za + zb) + 0.125 * h * (fa - fb), 1.5 * (zb - za) / h - 0.25 * (fa + fb))
            d1 = (zb, fb)
        else:
            d0 = history(tj - tau)
            dm = history(tj + half - tau)
            d1 = history(min(tj + h - tau, 0.0))

        z = zs[j]
        k1 = rhs(z, *d0)
        k2 = rhs(z + half * k1, *dm)
        k3 = rhs(z + half * k2, *dm)
        k4 = rhs(z + h * k3, *d1)
        z_next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if not cmath.isfinite(z_next) or abs(z_next) > limit:
            escaped = True
            log.info('escape at t=%.4g (|z| > %.3g)', tj + h, limit)
            break
        zs.append(z_next)
        fl.append(k1)
        fr.append(rhs(z_next, *d1))

    traj = Trajectory(
        t0=t0,
        h=h,
        z=np.asarray(zs, dtype=complex),
        f_left=np.asarray(fl, dtype=complex),
        f_right=np.asarray(fr, dtype=complex),
        tau=tau,
        history=history,
        escaped=escaped,
    )
    log.debug('integrated %d steps to t=%.6g', traj.n_steps, traj.t_end)
    return traj


def _delay_step(tau: float, h: float | None, steps_per_delay: int) -> float:
    if h is None:
        if steps_per_delay < 1:
            raise DomainError(f'steps_per_delay must be positive, got {steps_per_delay}')
        return tau / steps_per_delay
    n = round(tau / h)
    if n < 1 or abs(n * h - tau) > 1e-12 * tau:
        raise DomainError(f'h={h} does not divide tau={tau}')
    return tau / n


def _check_history(hist: HistoryFunction | None, tau: float, start: Trajectory | None) -> HistoryFunction:
    if start is not None and start.history is not None:
        return start.history
    if hist is None or not hist.covers(tau):
        raise DomainError(f'history must be defined on [-{tau}, 0]')
    return hist


# ── Public integrators ────────────────────────────────────────────────────────

def integrate_ode(
    p: ModelParams,
    z0: complex,
    t_end: float,
    h: float,
    *,
    escape_radius: float | None = None,
) -> Trajectory:
    """Uncontrolled normal form, classical RK4 with Hermite dense output."""
    _check_step(h, t_end)

    def rhs(z, _zd, _fd):
        return uncontrolled_rhs(z, p)

    return _march(rhs, t_end, h, tau=0.0, history=None, start=None, z0=z0, escape_radius=escape_radius)


def integrate_dde(
    p: ModelParams,
    c: RetardedControl,
    hist: HistoryFunction | None,
    t_end: float,
    h: float | None = None,
    *,
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY,
    start: Trajectory | None = None,
    escape_radius: float | None = None,
) -> Trajectory:
    """Pyragas-controlled normal form by the method of steps.

    Pass ``start`` to continue an earlier run on the same grid.
    """
    h = _delay_step(c.tau, h, steps_per_delay)
    _check_step(h, t_end)
    hist = _check_history(hist, c.tau, start)

    def rhs(z, zd, _fd):
        return controlled_rhs(z, zd, p, c)

    z0 = hist(0.0)[0] if start is None else start.z[0]
    return _march(rhs, t_end, h, tau=c.tau, history=hist, start=start, z0=z0, escape_radius=escape_radius)


def integrate_ndde(
    p: ModelParams,
    n: NeutralControl,
    hist: HistoryFunction | None,
    t_end: float,
    h: float | None = None,
    *,
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY,
    start: Trajectory | None = None,
    escape_radius: float | None = None,
) -> Trajectory:
    """Neutral-controlled normal form; stages read ż(t − τ) from the earlier step."""
    if n.singular:
        raise DenominatorZero(f'1 + K2 e^(i beta2) vanishes for {n}')
    h = _delay_step(n.tau, h, steps_per_delay)
    _check_step(h, t_end)
    hist = _check_history(hist, n.tau, start)

    def rhs(z, zd, fd):
        return neutral_rhs(z, zd, fd, p, n)

    z0 = hist(0.0)[0] if start is None else start.z[0]
    return _march(rhs, t_end, h, tau=n.tau, history=hist, start=start, z0=z0, escape_radius=escape_radius)


def integrate_variational(
    p: ModelParams,
    c: RetardedControl,
    hist: HistoryFunction,
    t_end: float,
    h: float | None = None,
    *,
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY,
) -> Trajectory:
    """Linear variational DDE around the rotating wave, w = r + iφ."""
    h = _delay_step(c.tau, h, steps_per_delay)
    _check_step(h, t_end)
    hist = _check_history(hist, c.tau, None)

    def rhs(w, wd, _fd):
        return variational_rhs(w, wd, p, c)

    return _march(rhs, t_end, h, tau=c.tau, history=hist, start=None, z0=hist(0.0)[0], escape_radius=math.inf)


# ── Deviation from the rotating wave ──────────────────────────────────────────

class StabilityVerdict(enum.Enum):
    CONVERGING = 'converging'
    DIVERGING = 'diverging'
    INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class DeviationSeries:
    """Samples of (t, |z| − R_p, unwrapped arg z − ω_p t)."""
    t: np.ndarray
    radial: np.ndarray
    phase: np.ndarray
    escaped: bool = False

    def __post_init__(self) -> None:
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise DomainError('deviation sample times must be strictly increasing')


def deviation(traj: Trajectory, orbit: PeriodicOrbit, sample_dt: float) -> DeviationSeries:
    if not sample_dt > 0:
        raise DomainError(f'sample_dt must be positive, got {sample_dt}')
    n = int(math.floor((traj.t_end - traj.t0) / sample_dt + 1e-9))
    ts = traj.t0 + sample_dt * np.arange(n + 1)
    z, _ = traj.sample(ts)
    mod = np.abs(z)
    if np.any(mod < 1e-12):
        bad = float(ts[np.argmax(mod < 1e-12)])
        raise UndefinedPhase(f'|z| < 1e-12 at t={bad}')
    phase = np.unwrap(np.angle(z)) - orbit.omega * ts
    return DeviationSeries(t=ts, radial=mod - orbit.radius, phase=phase, escaped=traj.escaped)


def classify(
    series: DeviationSeries,
    horizon: float,
    *,
    window: float = 0.1,
    factor: float = 10.0,
) -> StabilityVerdict:
    """Compare the largest radial deviation in the first and last windows.

    Converging when the last window's peak is at most 1/factor of the
    first's, Diverging when at least factor times; escaped runs diverge.
    """
    if series.escaped:
        return StabilityVerdict.DIVERGING
    t0 = series.t[0]
    if series.t[-1] - t0 < horizon * (1 - 1e-9):
        raise DomainError(f'series spans {series.t[-1] - t0}, shorter than horizon {horizon}')
    r = np.abs(series.radial)
    first = r[series.t <= t0 + window * horizon].max()
    last_mask = (series.t >= t0 + (1 - window) * horizon) & (series.t <= t0 + horizon * (1 + 1e-9))
    last = r[last_mask].max()
    if last == 0 and first == 0:
        return StabilityVerdict.INCONCLUSIVE
    if last <= first / factor:
        return StabilityVerdict.CONVERGING
    if last >= first * factor:
        return StabilityVerdict.DIVERGING
    return StabilityVerdict.INCONCLUSIVE
