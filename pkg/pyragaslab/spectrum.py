"""Characteristic functions, argument-principle root counting and root refinement.

Every characteristic function is vectorised over numpy arrays of μ, so a
whole contour or seed grid is evaluated in one call.

Usage:
    f = ControlledEquilibrium(ModelParams(0.0, -10.0), RetardedControl(0.25, math.pi / 4, 2 * math.pi))
    roots = find_roots(f, SearchBox(-0.1, 2.0, -20.0, 20.0))
    ok = spectral_gap(f, DEFAULT_BOX, excluded=[1j, -1j], gap=-0.01)
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, runtime_checkable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    BoundaryRoot,
    ContinuationBreakdown,
    CountMismatch,
    DenominatorZero,
    DomainError,
    NonIntegerWinding,
)
from .model import ModelParams, NeutralControl, RetardedControl, equilibrium_eigenvalues

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
RESIDUAL_TOL = 1e-10
DEDUPE_RADIUS = 1e-6
MULTIPLICITY_RADIUS = 1e-4
EXCLUSION_RADIUS = 1e-8
BOUNDARY_CLEARANCE = 1e-6
DEFAULT_GRID_N = 24
MAX_BOX_PERTURBATIONS = 3

_MAX_NEWTON_ITER = 100
_MAX_REFINE_LEVEL = 18
_PHASE_JUMP = math.pi / 4


# ── Characteristic functions ──────────────────────────────────────────────────

@runtime_checkable
class CharFunction(Protocol):
    """Holomorphic characteristic function of one linearisation.

    ``scale`` is the magnitude of the largest term at μ; residuals are
    measured relative to max(1, scale).
    """
    variant: str

    def evaluate(self, mu): ...
    def derivative(self, mu): ...
    def scale(self, mu): ...
    def params(self) -> dict[str, Any]: ...


def _decay(mu, tau: float):
    return np.exp(-mu * tau)


@dataclass(frozen=True, slots=True)
class UncontrolledEquilibrium:
    p: ModelParams
    variant: str = field(default='uncontrolled', init=False)

    def evaluate(self, mu):
        return mu - self.p.linear

    def derivative(self, mu):
        return np.ones_like(mu) if np.ndim(mu) else 1.0 + 0j

    def scale(self, mu):
        return np.maximum(np.abs(mu), abs(self.p.linear))

    def params(self) -> dict[str, Any]:
        return {'lambda': self.p.lam, 'gamma': self.p.gamma}


@dataclass(frozen=True, slots=True)
class ControlledEquilibrium:
    """μ − (λ + i) + Ke^{iβ}(1 − e^{−μτ})"""
    p: ModelParams
    c: RetardedControl
    variant: str = field(default='controlled', init=False)

    def evaluate(self, mu):
        return mu - self.p.linear + self.c.gain * (1.0 - _decay(mu, self.c.tau))

    def derivative(self, mu):
        return 1.0 + self.c.gain * self.c.tau * _decay(mu, self.c.tau)

    def scale(self, mu):
        big = abs(self.c.K) * (1.0 + np.abs(_decay(mu, self.c.tau)))
        return np.maximum(np.maximum(np.abs(mu), abs(self.p.linear)), big)

    def params(self) -> dict[str, Any]:
        return {'lambda': self.p.lam, 'gamma': self.p.gamma,
                'K': self.c.K, 'beta': self.c.beta, 'tau': self.c.tau}


@dataclass(frozen=True, slots=True)
class VariationalFloquet:
    """Determinant of the 2×2 characteristic matrix around the rotating wave.

    (μ + 2λ + K cosβ·u)(μ + K cosβ·u) + (2λγ + K sinβ·u)K sinβ·u, u = 1 − e^{−μτ}
    """
    p: ModelParams
    c: RetardedControl
    variant: str = field(default='variational', init=False)

    def _terms(self, mu):
        e = _decay(mu, self.c.tau)
        u = 1.0 - e
        kc = self.c.K * math.cos(self.c.beta)
        ks = self.c.K * math.sin(self.c.beta)
        lam, gamma = self.p.lam, self.p.gamma
        a = mu + 2.0 * lam + kc * u
        b = mu + kc * u
        c = 2.0 * lam * gamma + ks * u
        d = ks * u
        return a, b, c, d, e, kc, ks

    def evaluate(self, mu):
        a, b, c, d, *_ = self._terms(mu)
        return a * b + c * d

    def derivative(self, mu):
        a, b, c, d, e, kc, ks = self._terms(mu)
        du = self.c.tau * e
        return (1.0 + kc * du) * (a + b) + ks * du * (c + d)

    def scale(self, mu):
        a, b, c, d, *_ = self._terms(mu)
        return np.maximum(np.abs(a) * np.abs(b), np.abs(c) * np.abs(d))

    def params(self) -> dict[str, Any]:
        return {'lambda': self.p.lam, 'gamma': self.p.gamma,
                'K': self.c.K, 'beta': self.c.beta, 'tau': self.c.tau}


@dataclass(frozen=True, slots=True)
class NeutralEquilibrium:
    """μ − (λ + i) + K₁e^{iβ₁}(1 − e^{−μτ}) + K₂e^{iβ₂}μ(1 − e^{−μτ})"""
    p: ModelParams
    n: NeutralControl
    variant: str = field(default='neutral', init=False)

    def evaluate(self, mu):
        u = 1.0 - _decay(mu, self.n.tau)
        return mu - self.p.linear + self.n.gain1 * u + self.n.gain2 * mu * u

    def derivative(self, mu):
        e = _decay(mu, self.n.tau)
        u = 1.0 - e
        tau = self.n.tau
        return 1.0 + self.n.gain1 * tau * e + self.n.gain2 * (u + mu * tau * e)

    def scale(self, mu):
        spread = 1.0 + np.abs(_decay(mu, self.n.tau))
        big = np.maximum(abs(self.n.K1) * spread, abs(self.n.K2) * np.abs(mu) * spread)
        return np.maximum(np.maximum(np.abs(mu), abs(self.p.linear)), big)

    def params(self) -> dict[str, Any]:
        return {'lambda': self.p.lam, 'gamma': self.p.gamma,
                'K1': self.n.K1, 'beta1': self.n.beta1,
                'K2': self.n.K2, 'beta2': self.n.beta2, 'tau': self.n.tau}


def char_controlled(mu: complex, p: ModelParams, c: RetardedControl) -> complex:
    return complex(ControlledEquilibrium(p, c).evaluate(mu))


def char_variational(mu: complex, p: ModelParams, c: RetardedControl) -> complex:
    return complex(VariationalFloquet(p, c).evaluate(mu))


def char_neutral(mu: complex, p: ModelParams, n: NeutralControl) -> complex:
    return complex(NeutralEquilibrium(p, n).evaluate(mu))


def relative_residual(f: CharFunction, mu) -> float:
    return float(np.abs(f.evaluate(mu)) / np.maximum(1.0, f.scale(mu)))


# ── Boxes and roots ───────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class SearchBox:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self) -> None:
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f'box bounds must be finite, got {self}')
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError(f'box must be nonempty, got {self}')

    @property
    def corners(self) -> tuple[complex, complex, complex, complex]:
        """Counter-clockwise from the lower-left corner."""
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))

    def contains(self, mu) -> np.ndarray | bool:
        mu = np.asarray(mu)
        return ((mu.real >= self.re_min) & (mu.real <= self.re_max)
                & (mu.imag >= self.im_min) & (mu.imag <= self.im_max))

    def expanded(self, d: float) -> SearchBox:
        return SearchBox(self.re_min - d, self.re_max + d, self.im_min - d, self.im_max + d)

    def as_dict(self) -> dict[str, float]:
        return {'re_min': self.re_min, 're_max': self.re_max,
                'im_min': self.im_min, 'im_max': self.im_max}


DEFAULT_BOX = SearchBox(-5.0, 2.0, -20.0, 20.0)


@dataclass(frozen=True, slots=True)
class Root:
    mu: complex
    residual: float
    multiplicity: int = 1

    def as_dict(self) -> dict[str, float | int]:
        return {'re': self.mu.real, 'im': self.mu.imag,
                'residual': self.residual, 'multiplicity': self.multiplicity}


@dataclass(frozen=True, slots=True)
class EssentialSpectrumReport:
    radius: float
    stable_d: bool


# ── Argument principle ────────────────────────────────────────────────────────

def _segment_integral(
    f: CharFunction,
    z_of: Callable[[np.ndarray], np.ndarray],
    dz_of: Callable[[np.ndarray], np.ndarray],
    n0: int,
) -> complex:
    """∫ f′/f dz along one smooth piece by doubling trapezoid refinement.

    Refinement stops when consecutive phase samples differ by less than
    π/4 and two levels agree to 1e-3 in winding units.
    """
    prev = None
    n = n0
    for _ in range(_MAX_REFINE_LEVEL):
        s = np.linspace(0.0, 1.0, n + 1)
        z = z_of(s)
        fz = f.evaluate(z)
        dfz = f.derivative(z)
        if np.any(fz == 0) or not np.all(np.isfinite(fz)):
            raise BoundaryRoot('characteristic function vanishes on the contour')
        newton_dist = np.abs(fz / dfz)
        if np.min(newton_dist) < BOUNDARY_CLEARANCE:
            raise BoundaryRoot(f'root within {np.min(newton_dist):.2e} of the contour')
        g = dfz / fz * dz_of(s)
        value = complex(np.sum(0.5 * (g[1:] + g[:-1])) / n)
        jumps = np.abs(np.angle(fz[1:] / fz[:-1]))
        if prev is not None and jumps.max() < _PHASE_JUMP and abs(value - prev) < 2e-3 * math.pi:
            return value
        prev = value
        n *= 2
    log.debug('contour refinement hit the level cap with n=%d', n // 2)
    return prev


def _box_winding(f: CharFunction, box: SearchBox) -> complex:
    corners = box.corners
    total = 0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        length = abs(b - a)
        n0 = max(16, int(8 * length))
        total += _segment_integral(f, lambda s, a=a, b=b: a + (b - a) * s,
                                   lambda s, a=a, b=b: np.full(s.shape, b - a), n0)
    return total / (2j * math.pi)


def _circle_winding(f: CharFunction, center: complex, radius: float) -> complex:
    def z_of(s):
        return center + radius * np.exp(2j * math.pi * s)

    def dz_of(s):
        return 2j * math.pi * radius * np.exp(2j * math.pi * s)

    return _segment_integral(f, z_of, dz_of, 32) / (2j * math.pi)


def _round_winding(w: complex) -> int:
    k = round(w.real)
    if abs(w.real - k) > 0.25 or k < 0:
        raise NonIntegerWinding(f'winding number {w.real:.4f} is not near a nonnegative integer')
    return int(k)


def _census(f: CharFunction, box: SearchBox) -> tuple[int, SearchBox]:
    """Root count and the box actually used after any perturbation."""
    size = min(box.re_max - box.re_min, box.im_max - box.im_min)
    current = box
    for attempt in range(MAX_BOX_PERTURBATIONS + 1):
        try:
            return _round_winding(_box_winding(f, current)), current
        except BoundaryRoot as exc:
            if attempt == MAX_BOX_PERTURBATIONS:
                raise
            # Irrational step so repeated expansions never land on a lattice.
            current = box.expanded(1e-3 * size * (attempt + 1) * (math.sqrt(5) - 1) / 2)
            log.debug('perturbing box after %s: %s', exc, current)
    raise AssertionError('unreachable')


def count_roots(f: CharFunction, box: SearchBox = DEFAULT_BOX) -> int:
    """Roots of f inside ``box`` counted with multiplicity."""
    return _census(f, box)[0]


def root_multiplicity(f: CharFunction, mu: complex, radius: float = MULTIPLICITY_RADIUS) -> int:
    return _round_winding(_circle_winding(f, mu, radius))


# ── Newton refinement ─────────────────────────────────────────────────────────

def _newton(f: CharFunction, seeds: np.ndarray, max_step: float) -> np.ndarray:
    """Vectorised Newton; diverged seeds come back as NaN."""
    mu = seeds.astype(complex)
    active = np.ones(mu.shape, dtype=bool)
    with np.errstate(all='ignore'):
        for _ in range(_MAX_NEWTON_ITER):
            if not active.any():
                break
            m = mu[active]
            step = f.evaluate(m) / f.derivative(m)
            big = np.abs(step) > max_step
            step[big] *= max_step / np.abs(step[big])
            m = m - step
            mu[active] = m
            done = np.abs(step) <= NEWTON_TOL * np.maximum(1.0, np.abs(m))
            done |= ~np.isfinite(m)
            idx = np.flatnonzero(active)
            active[idx[done]] = False
        bad = ~np.isfinite(mu)
        res = np.abs(f.evaluate(mu)) / np.maximum(1.0, f.scale(mu))
    mu[bad | ~(res <= RESIDUAL_TOL)] = np.nan
    return mu


def _dedupe(mus: Iterable[complex]) -> list[complex]:
    kept: list[complex] = []
    for m in sorted(mus, key=lambda z: (z.real, z.imag)):
        if all(abs(m - k) > DEDUPE_RADIUS for k in kept):
            kept.append(m)
    return kept


def _seed_grid(box: SearchBox, grid_n: int) -> np.ndarray:
    re = box.re_min + (np.arange(grid_n) + 0.5) * (box.re_max - box.re_min) / grid_n
    im = box.im_min + (np.arange(grid_n) + 0.5) * (box.im_max - box.im_min) / grid_n
    return (re[:, None] + 1j * im[None, :]).ravel()


def find_roots(f: CharFunction, box: SearchBox = DEFAULT_BOX, grid_n: int = DEFAULT_GRID_N) -> list[Root]:
    """Newton-refined roots in ``box``, ordered by decreasing real part.

    The multiplicities must add up to the argument-principle count; the
    seed grid is doubled once before giving up with CountMismatch.
    """
    if grid_n < 8:
        raise DomainError(f'grid_n must be at least 8, got {grid_n}')
    expected, used = _census(f, box)
    if expected == 0:
        return []
    found: list[complex] = []
    max_step = 0.5 * max(used.re_max - used.re_min, used.im_max - used.im_min)
    roots: list[Root] = []
    for n in (grid_n, 2 * grid_n):
        mus = _newton(f, _seed_grid(used, n), max_step)
        mus = mus[np.isfinite(mus)]
        mus = mus[used.contains(mus)]
        found = _dedupe(list(found) + [complex(m) for m in mus])
        roots = [Root(m, relative_residual(f, m), root_multiplicity(f, m)) for m in found]
        total = sum(r.multiplicity for r in roots)
        if total == expected:
            log.info('%s: %d roots in box', f.variant, expected)
            return sorted(roots, key=lambda r: (-r.mu.real, r.mu.imag))
        log.debug('%s: %d of %d roots with grid %d', f.variant, total, expected, n)
    raise CountMismatch(f'found multiplicity {sum(r.multiplicity for r in roots)}, '
                        f'argument principle counts {expected}')


# ── Stability tests ───────────────────────────────────────────────────────────

def essential_spectrum(n: NeutralControl) -> EssentialSpectrumReport:
    if n.singular:
        raise DenominatorZero(f'1 + K2 e^(i beta2) vanishes for {n}')
    radius = abs(n.gain2 / n.denominator)
    return EssentialSpectrumReport(radius=radius, stable_d=radius < 1.0)


@dataclass(frozen=True)
class GapCensus:
    """Roots found in the box and which of them break the spectral gap."""
    box: SearchBox
    gap: float
    roots: list[Root]
    offending: list[Root]
    stable_d: bool | None = None

    @property
    def holds(self) -> bool:
        return not self.offending and self.stable_d is not False


def gap_census(
    f: CharFunction,
    box: SearchBox = DEFAULT_BOX,
    excluded: Iterable[complex] = (),
    gap: float = -0.01,
    grid_n: int = DEFAULT_GRID_N,
) -> GapCensus:
    if not gap < 0:
        raise DomainError(f'gap must be negative, got {gap}')
    excluded = list(excluded)
    roots = find_roots(f, box, grid_n)
    offending = [
        r for r in roots
        if r.mu.real >= gap and all(abs(r.mu - e) > EXCLUSION_RADIUS for e in excluded)
    ]
    stable_d = essential_spectrum(f.n).stable_d if isinstance(f, NeutralEquilibrium) else None
    return GapCensus(box=box, gap=gap, roots=roots, offending=offending, stable_d=stable_d)


def spectral_gap(
    f: CharFunction,
    box: SearchBox = DEFAULT_BOX,
    excluded: Iterable[complex] = (),
    gap: float = -0.01,
) -> bool:
    """True iff every non-excluded root in the box lies left of ``gap``."""
    return gap_census(f, box, excluded, gap).holds


# ── Floquet data of the uncontrolled orbit ────────────────────────────────────

@dataclass(frozen=True, slots=True)
class FloquetReport:
    """Exponents {0, −2λ} and multipliers {1, e^{−2λT}}.

    ``sign_warning`` is set when ω_p = 1 − γλ ≤ 0, where the period taken
    from the formula is negative.
    """
    exponents: tuple[float, float]
    multipliers: tuple[float, float]
    period: float
    stable: bool
    sign_warning: bool


def floquet_uncontrolled(p: ModelParams) -> FloquetReport:
    if p.lam >= 0:
        raise DomainError(f'the rotating wave needs lambda < 0, got {p.lam}')
    omega = 1.0 - p.gamma * p.lam
    if omega == 0:
        raise DomainError('omega_p = 1 - gamma*lambda vanishes')
    period = 2.0 * math.pi / omega
    warn = omega <= 0
    if warn:
        log.warning('omega_p = %.4g <= 0; multipliers follow the formula with T = %.4g', omega, period)
    return FloquetReport(
        exponents=(0.0, -2.0 * p.lam),
        multipliers=(1.0, math.exp(-2.0 * p.lam * period)),
        period=period,
        stable=p.gamma * p.lam > 1.0,
        sign_warning=warn,
    )


def monodromy_uncontrolled(p: ModelParams, rtol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Period map of the variational ODE in (r, φ) and its eigenvalues.

    ṙ = −2λr, φ̇ = −2λγr, integrated independently with an adaptive
    Runge–Kutta method over one period.
    """
    if p.lam >= 0 or 1.0 - p.gamma * p.lam <= 0:
        raise DomainError(f'monodromy needs lambda < 0 and omega_p > 0, got {p}')
    period = 2.0 * math.pi / (1.0 - p.gamma * p.lam)

    def rhs(_t, y):
        return [-2.0 * p.lam * y[0], -2.0 * p.lam * p.gamma * y[0]]

    cols = []
    for y0 in ((1.0, 0.0), (0.0, 1.0)):
        sol = solve_ivp(rhs, (0.0, period), y0, method='DOP853', rtol=rtol, atol=1e-12)
        if not sol.success:
            raise ArithmeticError(f'monodromy integration failed: {sol.message}')
        cols.append(sol.y[:, -1])
    M = np.column_stack(cols)
    ev = np.linalg.eigvals(M)
    return M, ev[np.argsort(np.abs(ev))]


def equilibrium_stability(p: ModelParams) -> tuple[np.ndarray, bool]:
    """Eigenvalues λ ± i of the origin and whether both lie in Re < 0."""
    ev = equilibrium_eigenvalues(p)
    return ev, bool(np.all(ev.real < 0))


# ── Continuation ──────────────────────────────────────────────────────────────

def _newton_scalar(f: CharFunction, seed: complex) -> complex | None:
    mu = complex(seed)
    for _ in range(_MAX_NEWTON_ITER):
        d = complex(f.derivative(mu))
        if d == 0:
            return None
        step = complex(f.evaluate(mu)) / d
        mu -= step
        if not cmath.isfinite(mu):
            return None
        if abs(step) <= NEWTON_TOL * max(1.0, abs(mu)):
            break
    return mu if relative_residual(f, mu) <= RESIDUAL_TOL else None


def track_root(
    family: Callable[[float], CharFunction],
    mu0: complex,
    thetas: Iterable[float],
    *,
    max_move: float = 0.5,
    max_bisections: int = 12,
) -> list[complex]:
    """Follow a root of θ ↦ family(θ) through ``thetas``, seeding with the previous root.

    A step whose Newton solve fails or moves further than ``max_move`` is
    bisected; after ``max_bisections`` halvings ContinuationBreakdown is raised.
    """
    thetas = list(thetas)
    if not thetas:
        return []
    f0 = family(thetas[0])
    if relative_residual(f0, mu0) > RESIDUAL_TOL:
        raise DomainError(f'mu0={mu0} is not a root at theta={thetas[0]}')
    mu = _newton_scalar(f0, mu0)
    if mu is None:
        mu = complex(mu0)
    path = [mu]

    def advance(theta_a: float, theta_b: float, seed: complex, depth: int) -> complex:
        nxt = _newton_scalar(family(theta_b), seed)
        if nxt is not None and abs(nxt - seed) <= max_move:
            return nxt
        if depth >= max_bisections:
            raise ContinuationBreakdown(f'lost the root between theta={theta_a} and {theta_b}')
        mid = 0.5 * (theta_a + theta_b)
        log.debug('bisecting continuation step at theta=%g', mid)
        half = advance(theta_a, mid, seed, depth + 1)
        return advance(mid, theta_b, half, depth + 1)

    for a, b in zip(thetas, thetas[1:]):
        mu = advance(a, b, mu, 0)
        path.append(mu)
    return path
