"""Hopf bifurcation of the controlled origin: vectors, transversality, c and μ₂.

The generic pipeline works on the 2×2 real form
Δ(z) = zI − A − Be^{−zτ}, with products q·v taken bilinearly (no
conjugation). Closed forms are exposed next to it for cross-checks.

Usage:
    point = pyragas_point()
    mu2, direction = mu2(ModelParams(0.0, -10.0), control, point, Approach.PYRAGAS_LEFT)
"""

from __future__ import annotations

import cmath
import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import BoundaryCase, DegenerateTransversality, DomainError, SimplicityViolation
from .model import (
    CurveKind,
    ModelParams,
    NeutralControl,
    RetardedControl,
    curve_point,
    real_form,
)
from .spectrum import (
    DEFAULT_BOX,
    ControlledEquilibrium,
    GapCensus,
    NeutralEquilibrium,
    SearchBox,
    find_roots,
    gap_census,
    relative_residual,
    root_multiplicity,
    track_root,
)

log = logging.getLogger(__name__)

SIMPLICITY_TOL = 1e-12
POINT_RESIDUAL_TOL = 1e-10
BOUNDARY_TOL = 1e-10
SMALL_LAMBDA = 0.1
# Half-width of the strip searched for imaginary-axis roots, and the on-axis tolerance.
AXIS_STRIP = 0.05
AXIS_TOL = 1e-8
TWO_PI = 2.0 * math.pi


class Approach(enum.Enum):
    PYRAGAS_LEFT = 'pyragas-left'
    PYRAGAS_RIGHT = 'pyragas-right'
    LAMBDA_AXIS = 'lambda-axis'


class Direction(enum.Enum):
    SUBCRITICAL = 'subcritical'
    SUPERCRITICAL = 'supercritical'


class Verdict(enum.Enum):
    STABLE = 'stable'
    UNSTABLE = 'unstable'
    UNDETERMINED = 'undetermined'


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class HopfPoint:
    lambda0: float
    tau0: float
    omega0: float

    def __post_init__(self) -> None:
        if self.omega0 == 0:
            raise DomainError('a Hopf point needs omega0 != 0')

    @property
    def phi(self) -> float:
        return self.omega0 * self.tau0


@dataclass(frozen=True, slots=True)
class HopfVectors:
    """Right null vector p, left null vector q and the normaliser α."""
    p: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    alpha: complex


@dataclass(frozen=True, slots=True)
class HopfReport:
    point: HopfPoint
    vectors: HopfVectors
    approach: Approach
    transversality: float
    c: complex
    mu2: float
    direction: Direction

    def as_dict(self) -> dict[str, Any]:
        def cpx(z: complex) -> dict[str, float]:
            return {'re': z.real, 'im': z.imag}

        return {
            'point': {'lambda0': self.point.lambda0, 'tau0': self.point.tau0,
                      'omega0': self.point.omega0, 'phi': self.point.phi},
            'vectors': {'p': [cpx(complex(z)) for z in self.vectors.p],
                        'q': [cpx(complex(z)) for z in self.vectors.q],
                        'alpha': cpx(self.vectors.alpha)},
            'approach': self.approach.value,
            'transversality': self.transversality,
            'c': cpx(self.c),
            'mu2': self.mu2,
            'direction': self.direction.value,
        }


def pyragas_point() -> HopfPoint:
    """(λ, τ) = (0, 2π) with ω₀ = 1, where every Pyragas curve ends."""
    return HopfPoint(0.0, TWO_PI, 1.0)


def hopf_point(c: RetardedControl, phi: float) -> HopfPoint:
    """Point on the Hopf curve of the gains (K, β) at φ = ω₀τ."""
    lam, tau = curve_point(CurveKind.HOPF, phi, control=c)
    if tau <= 0:
        raise DomainError(f'phi={phi} gives a non-positive delay {tau}')
    return HopfPoint(lam, tau, phi / tau)


def _at(c: RetardedControl, point: HopfPoint) -> RetardedControl:
    return RetardedControl(c.K, c.beta, point.tau0)


def _simplicity_denominator(c: RetardedControl, point: HopfPoint) -> complex:
    """1 + Kτe^{i(β−φ)}"""
    den = 1.0 + c.K * point.tau0 * cmath.exp(1j * (c.beta - point.phi))
    if abs(den) < SIMPLICITY_TOL:
        raise SimplicityViolation(f'1 + K tau e^(i(beta - phi)) = {den:.3g} vanishes')
    return den


# ── Characteristic matrix and its derivatives ─────────────────────────────────

def characteristic_matrix(z: complex, lam: float, c: RetardedControl) -> np.ndarray:
    A, B, _ = real_form(ModelParams(lam, 0.0), c)
    return z * np.eye(2) - A - B * cmath.exp(-z * c.tau)


def d1_delta(z: complex, lam: float, c: RetardedControl) -> np.ndarray:
    """∂Δ/∂z = I + τBe^{−zτ}"""
    _, B, _ = real_form(ModelParams(lam, 0.0), c)
    return np.eye(2) + c.tau * B * cmath.exp(-z * c.tau)


def approach_tangent(approach: Approach, point: HopfPoint, gamma: float) -> tuple[float, float]:
    """(dλ, dτ) along which the parameter moves into the point."""
    if approach is Approach.LAMBDA_AXIS:
        return 1.0, 0.0
    den = 1.0 - gamma * point.lambda0
    if den == 0:
        raise DomainError('the Pyragas curve is undefined at lambda = 1/gamma')
    dtau = TWO_PI * gamma / den ** 2
    if approach is Approach.PYRAGAS_LEFT:
        return 1.0, dtau
    return -1.0, -dtau


def d2_delta(
    c: RetardedControl,
    point: HopfPoint,
    approach: Approach,
    gamma: float = 0.0,
) -> np.ndarray:
    """Directional parameter derivative −dλ·I + dτ·zBe^{−zτ} at z = iω₀."""
    dlam, dtau = approach_tangent(approach, point, gamma)
    ctl = _at(c, point)
    _, B, _ = real_form(ModelParams(point.lambda0, 0.0), ctl)
    z = 1j * point.omega0
    return -dlam * np.eye(2) + dtau * z * B * cmath.exp(-z * ctl.tau)


# ── Pipeline ──────────────────────────────────────────────────────────────────

def hopf_vectors(c: RetardedControl, point: HopfPoint) -> HopfVectors:
    den = _simplicity_denominator(c, point)
    alpha = 1.0 / (2.0 * den)
    p = np.array([1.0, -1j])
    q = alpha * np.array([1.0, 1j])

    ctl = _at(c, point)
    z = 1j * point.omega0
    delta = characteristic_matrix(z, point.lambda0, ctl)
    if np.linalg.norm(delta @ p) > POINT_RESIDUAL_TOL or np.linalg.norm(delta.T @ q) > POINT_RESIDUAL_TOL:
        raise DomainError(f'i*omega0 is not a root of the characteristic matrix at {point}')
    norm = q @ d1_delta(z, point.lambda0, ctl) @ p
    if abs(norm - 1.0) > 1e-12:
        raise SimplicityViolation(f'normalisation q.D1(Delta)p = {norm} differs from 1')
    return HopfVectors(p=p, q=q, alpha=alpha)


def transversality(
    c: RetardedControl,
    point: HopfPoint,
    approach: Approach,
    *,
    gamma: float = 0.0,
) -> float:
    """Re(q·D₂Δ(iω₀)p) for the chosen approach; Pyragas approaches need γ."""
    v = hopf_vectors(c, point)
    return float((v.q @ d2_delta(c, point, approach, gamma) @ v.p).real)


def transversality_closed_form(
    c: RetardedControl,
    point: HopfPoint,
    approach: Approach,
    *,
    gamma: float = 0.0,
) -> float:
    den = _simplicity_denominator(c, point)
    if approach is Approach.LAMBDA_AXIS:
        return -(1.0 + c.K * point.tau0 * math.cos(c.beta - point.phi)) / abs(den) ** 2
    s = 1.0 + TWO_PI * c.K * (math.cos(c.beta) + gamma * math.sin(c.beta))
    value = -s / abs(den) ** 2
    return value if approach is Approach.PYRAGAS_LEFT else -value


def _trilinear(C: np.ndarray, f1: np.ndarray, f2: np.ndarray, f3: np.ndarray) -> np.ndarray:
    """D³g for g(x) = ⟨x, x⟩Cx: sum over the orderings of ⟨fσ1, fσ2⟩ C fσ3."""
    out = np.zeros(2, dtype=complex)
    for a, b, d in itertools.permutations((f1, f2, f3)):
        out += (a @ b) * (C @ d)
    return out


def _zero_bilinear(_a: np.ndarray, _b: np.ndarray) -> np.ndarray:
    return np.zeros(2, dtype=complex)


def _solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        if not np.any(rhs):
            return np.zeros(2, dtype=complex)
        raise SimplicityViolation('resonant characteristic matrix in the quadratic correction')


def cubic_c(
    p_model: ModelParams,
    c: RetardedControl,
    point: HopfPoint,
    v: HopfVectors,
    *,
    second: Callable[[np.ndarray, np.ndarray], np.ndarray] = _zero_bilinear,
) -> complex:
    """½q·D³g(p,p,p̄) + q·D²g(p, Δ(0)⁻¹D²g(p,p̄)) + ½q·D²g(p̄, Δ(2iω₀)⁻¹D²g(p,p)).

    ``second`` is the bilinear D²g; it vanishes for the cubic normal form,
    but the two correction terms are still evaluated.
    """
    ctl = _at(c, point)
    _, _, coupling = real_form(ModelParams(point.lambda0, p_model.gamma), ctl)
    p, q = v.p, v.q
    pbar = p.conj()
    w0 = _solve(characteristic_matrix(0j, point.lambda0, ctl), second(p, pbar))
    w2 = _solve(characteristic_matrix(2j * point.omega0, point.lambda0, ctl), second(p, p))
    value = (0.5 * q @ _trilinear(coupling.C, p, p, pbar)
             + q @ second(p, w0)
             + 0.5 * q @ second(pbar, w2))
    return complex(value)


def cubic_c_closed_form(gamma: float, c: RetardedControl, point: HopfPoint) -> complex:
    """4(1 + iγ)/(1 + Kτe^{i(β−φ)})"""
    return 4.0 * complex(1.0, gamma) / _simplicity_denominator(c, point)


def mu2(
    p_model: ModelParams,
    c: RetardedControl,
    point: HopfPoint,
    approach: Approach,
) -> tuple[float, Direction]:
    """μ₂ = Re c / transversality; negative means subcritical."""
    v = hopf_vectors(c, point)
    tr = float((v.q @ d2_delta(c, point, approach, p_model.gamma) @ v.p).real)
    if abs(tr) < 1e-14:
        raise DegenerateTransversality(f'transversality vanishes at {point} ({approach.value})')
    value = cubic_c(p_model, c, point, v).real / tr
    return value, Direction.SUBCRITICAL if value < 0 else Direction.SUPERCRITICAL


def mu2_lambda_axis_closed_form(c: RetardedControl, point: HopfPoint, gamma: float) -> float:
    """−4(1 + Kτ(cos(β−φ) + γ sin(β−φ)))/(1 + Kτ cos(β−φ))"""
    _simplicity_denominator(c, point)
    ang = c.beta - point.phi
    kt = c.K * point.tau0
    den = 1.0 + kt * math.cos(ang)
    if den == 0:
        raise DegenerateTransversality('1 + K tau cos(beta - phi) vanishes')
    return -4.0 * (1.0 + kt * (math.cos(ang) + gamma * math.sin(ang))) / den


def hopf_report(
    p_model: ModelParams,
    c: RetardedControl,
    point: HopfPoint,
    approach: Approach,
) -> HopfReport:
    v = hopf_vectors(c, point)
    tr = transversality(c, point, approach, gamma=p_model.gamma)
    value, direction = mu2(p_model, c, point, approach)
    return HopfReport(
        point=point,
        vectors=v,
        approach=approach,
        transversality=tr,
        c=cubic_c(p_model, c, point, v),
        mu2=value,
        direction=direction,
    )


# ── Hopf curve ────────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class HopfCurveCheck:
    occurs: bool
    point: HopfPoint
    simple: bool
    transversal: bool
    multiplicity: int
    resonant_harmonics: tuple[int, ...]


def hopf_curve_conditions(c: RetardedControl, phi: float) -> HopfCurveCheck:
    """Hopf point at φ and whether a bifurcation is certified there.

    Requires 1 + Kτe^{i(β−φ)} ≠ 0 and 1 + Kτcos(β−φ) > 0, a simple root
    at iω₀ by small-circle count, and no other root at ikω₀ among the
    roots found in a thin strip around the imaginary axis of the default box.
    """
    point = hopf_point(c, phi)
    ctl = _at(c, point)
    f = ControlledEquilibrium(ModelParams(point.lambda0, 0.0), ctl)
    z = 1j * point.omega0
    if relative_residual(f, z) > POINT_RESIDUAL_TOL:
        raise DomainError(f'constructed point {point} is not on the Hopf curve')

    den = 1.0 + c.K * point.tau0 * cmath.exp(1j * (c.beta - phi))
    simple = abs(den) >= SIMPLICITY_TOL
    transversal = 1.0 + c.K * point.tau0 * math.cos(c.beta - phi) > 0
    multiplicity = root_multiplicity(f, z)

    strip = SearchBox(-AXIS_STRIP, AXIS_STRIP, DEFAULT_BOX.im_min, DEFAULT_BOX.im_max)
    harmonics = set()
    for root in find_roots(f, strip):
        k = round(root.mu.imag / point.omega0)
        on_lattice = abs(root.mu - 1j * k * point.omega0) <= AXIS_TOL * max(1.0, abs(root.mu))
        if k != 1 and on_lattice:
            harmonics.add(k)
    resonant = tuple(sorted(harmonics))
    occurs = simple and transversal and multiplicity == 1 and not resonant
    if simple != (multiplicity == 1):
        log.warning('algebraic and counted simplicity disagree at phi=%g', phi)
    return HopfCurveCheck(occurs, point, simple, transversal, multiplicity, resonant)


# ── Root tendencies ───────────────────────────────────────────────────────────

def root_tendency(c: RetardedControl, gamma: float) -> float:
    """d Re μ/dθ at θ = 0 along the extended Pyragas curve."""
    den = 1.0 + TWO_PI * c.gain
    if abs(den) < SIMPLICITY_TOL:
        raise SimplicityViolation('1 + 2 pi K e^(i beta) vanishes')
    return (1.0 + TWO_PI * c.K * (math.cos(c.beta) + gamma * math.sin(c.beta))) / abs(den) ** 2


def root_tendency_neutral(n: NeutralControl, gamma: float) -> float:
    a = 1.0 + TWO_PI * n.gain1 + 2j * math.pi * n.gain2
    if abs(a) < SIMPLICITY_TOL:
        raise SimplicityViolation('1 + 2 pi K1 e^(i beta1) + 2 pi i K2 e^(i beta2) vanishes')
    num = (1.0 + TWO_PI * n.K1 * (math.cos(n.beta1) + gamma * math.sin(n.beta1))
           - TWO_PI * n.K2 * (math.sin(n.beta2) - gamma * math.cos(n.beta2)))
    return num / abs(a) ** 2


def pyragas_family(K: float, beta: float, gamma: float) -> Callable[[float], ControlledEquilibrium]:
    """θ ↦ controlled characteristic function at (λ, τ) = (θ, 2π/(1 − γθ))."""
    def family(theta: float) -> ControlledEquilibrium:
        lam, tau = curve_point(CurveKind.EXTENDED_PYRAGAS, theta, gamma=gamma)
        return ControlledEquilibrium(ModelParams(lam, gamma), RetardedControl(K, beta, tau))
    return family


def neutral_pyragas_family(n: NeutralControl, gamma: float) -> Callable[[float], NeutralEquilibrium]:
    def family(theta: float) -> NeutralEquilibrium:
        lam, tau = curve_point(CurveKind.EXTENDED_PYRAGAS, theta, gamma=gamma)
        return NeutralEquilibrium(ModelParams(lam, gamma),
                                  NeutralControl(n.K1, n.beta1, n.K2, n.beta2, tau))
    return family


def tendency_by_continuation(family: Callable[[float], Any], h: float = 1e-4) -> float:
    """d Re μ/dθ at θ = 0 from the root μ(0) = i, by continuation.

    Central differences at steps h and h/2 are combined by Richardson
    extrapolation, which cancels the O(h²) term.
    """
    def central(step: float) -> float:
        right = track_root(family, 1j, [0.0, step])[-1]
        left = track_root(family, 1j, [0.0, -step])[-1]
        return (right.real - left.real) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def direction_by_tendency(tendency: float, orbit_side: str) -> Direction:
    """Subcritical iff the orbit lives on the side where the equilibrium is stable.

    A positive tendency makes the equilibrium stable for θ < 0, so an orbit
    on the left (``orbit_side='left'``) is then subcritical.
    """
    if orbit_side not in ('left', 'right'):
        raise DomainError(f"orbit_side must be 'left' or 'right', got {orbit_side!r}")
    if abs(tendency) < BOUNDARY_TOL:
        raise BoundaryCase('root tendency vanishes')
    stable_side = 'left' if tendency > 0 else 'right'
    return Direction.SUBCRITICAL if orbit_side == stable_side else Direction.SUPERCRITICAL


# ── Geometry at the Pyragas point ─────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class CurveSlopes:
    """Tangents at (0, 2π): Pyragas per unit λ, Hopf per unit φ."""
    pyragas: tuple[float, float]
    hopf: tuple[float, float]
    pyragas_left_of_hopf: bool


def sign_expression(K: float, beta: float, gamma: float) -> float:
    """1 + 2πK(cos β + γ sin β)"""
    return 1.0 + TWO_PI * K * (math.cos(beta) + gamma * math.sin(beta))


def curve_slopes(c: RetardedControl, gamma: float) -> CurveSlopes:
    h = 1.0 + TWO_PI * c.K * math.cos(c.beta)
    if h == 0:
        raise DomainError('the Hopf curve has no tau-slope at the Pyragas point')
    s = sign_expression(c.K, c.beta, gamma)
    return CurveSlopes(
        pyragas=(1.0, TWO_PI * gamma),
        hopf=(-c.K * math.sin(c.beta), h),
        pyragas_left_of_hopf=s * h > 0,
    )


@dataclass(frozen=True, slots=True)
class LambdaAxisVerdict:
    mu2: float
    direction: Direction
    orbit_stable: bool


def lambda_axis_verdict(c: RetardedControl, gamma: float) -> LambdaAxisVerdict:
    """Crossing the Hopf curve along λ at τ = 2π.

    The equilibrium loses stability as λ increases, so a supercritical
    branch carries a stable orbit.
    """
    point = pyragas_point()
    if 1.0 + TWO_PI * c.K * math.cos(c.beta) <= 0:
        raise DomainError('the lambda-axis verdict needs 1 + 2 pi K cos(beta) > 0')
    value, direction = mu2(ModelParams(0.0, gamma), c, point, Approach.LAMBDA_AXIS)
    return LambdaAxisVerdict(value, direction, orbit_stable=direction is Direction.SUPERCRITICAL)


# ── Orbit verdict ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class OrbitVerdict:
    verdict: Verdict
    sign_expression: float
    census: GapCensus | None = None

    @property
    def certificate(self) -> dict[str, Any]:
        cert: dict[str, Any] = {
            'sign_expression': self.sign_expression,
            'sign_condition': self.sign_expression < 0,
        }
        if self.census is not None:
            cert['gap'] = self.census.gap
            cert['box'] = self.census.box.as_dict()
            cert['roots'] = [r.as_dict() for r in self.census.roots]
            cert['offending'] = [r.as_dict() for r in self.census.offending]
            if self.census.stable_d is not None:
                cert['stable_d'] = self.census.stable_d
        return cert


def neutral_sign_expression(n: NeutralControl, gamma: float) -> float:
    """1 + 2πK₁(cos β₁ + γ sin β₁) − 2πK₂(sin β₂ − γ cos β₂)"""
    return (sign_expression(n.K1, n.beta1, gamma)
            - TWO_PI * n.K2 * (math.sin(n.beta2) - gamma * math.cos(n.beta2)))


def orbit_verdict(
    p_model: ModelParams,
    control: RetardedControl | NeutralControl,
    *,
    box: SearchBox = DEFAULT_BOX,
    gap: float = -0.01,
) -> OrbitVerdict:
    """Stability of the rotating wave for small λ < 0.

    A positive sign expression certifies instability. A negative one is
    confirmed by a root census at (λ, τ) = (0, 2π) with ±i excluded,
    plus a stable D-operator in the neutral case.
    """
    if p_model.lam >= 0:
        raise DomainError(f'the orbit verdict needs lambda < 0, got {p_model.lam}')
    if abs(p_model.lam) > SMALL_LAMBDA:
        log.warning('lambda=%g is outside the small-lambda range |lambda| <= %g', p_model.lam, SMALL_LAMBDA)
    gamma = p_model.gamma
    at_bif = ModelParams(0.0, gamma)
    if isinstance(control, NeutralControl):
        s = neutral_sign_expression(control, gamma)
        f = NeutralEquilibrium(at_bif, NeutralControl(control.K1, control.beta1,
                                                      control.K2, control.beta2, TWO_PI))
    else:
        s = sign_expression(control.K, control.beta, gamma)
        f = ControlledEquilibrium(at_bif, RetardedControl(control.K, control.beta, TWO_PI))
    if abs(s) < BOUNDARY_TOL:
        raise BoundaryCase(f'sign expression {s:.3g} is on its zero set')
    if s > 0:
        return OrbitVerdict(Verdict.UNSTABLE, s)
    census = gap_census(f, box, excluded=(1j, -1j), gap=gap)
    verdict = Verdict.STABLE if census.holds else Verdict.UNDETERMINED
    log.info('orbit verdict %s (sign %.4g, %d roots in census)', verdict.value, s, len(census.roots))
    return OrbitVerdict(verdict, s, census)
