"""Stuart–Landau normal form with Pyragas and neutral control.

Complex state z is canonical. The 2×2 real form is provided for the Hopf
machinery, which works on ℝ².

Usage:
    p = ModelParams(lam=-0.005, gamma=-10.0)
    c = RetardedControl(K=0.25, beta=math.pi / 4, tau=periodic_orbit(p).period)
    dz = controlled_rhs(z_now, z_delayed, p, c)
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DenominatorZero, DomainError

# Angles may sit a rounding error past π when given as "pi".
_ANGLE_SLACK = 1e-12
# |1 + K₂e^{iβ₂}| below this counts as zero.
DENOMINATOR_TOL = 1e-12


def _check_angle(name: str, beta: float) -> None:
    if not math.isfinite(beta) or not (-math.pi < beta <= math.pi + _ANGLE_SLACK):
        raise DomainError(f'{name} must lie in (-pi, pi], got {beta!r}')


# ── Parameter types ───────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class ModelParams:
    """Bifurcation parameter λ and nonlinear frequency shift γ."""
    lam: float
    gamma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and math.isfinite(self.gamma)):
            raise DomainError(f'model parameters must be finite, got {self}')

    @property
    def linear(self) -> complex:
        """λ + i"""
        return complex(self.lam, 1.0)

    @property
    def cubic(self) -> complex:
        """1 + iγ"""
        return complex(1.0, self.gamma)


@dataclass(frozen=True, slots=True)
class RetardedControl:
    """Pyragas control −Ke^{iβ}[z(t) − z(t−τ)]."""
    K: float
    beta: float
    tau: float

    def __post_init__(self) -> None:
        _check_angle('beta', self.beta)
        if not (math.isfinite(self.K) and math.isfinite(self.tau)):
            raise DomainError(f'control parameters must be finite, got {self}')
        if self.tau <= 0:
            raise DomainError(f'tau must be positive, got {self.tau}')

    @property
    def gain(self) -> complex:
        """Ke^{iβ}"""
        return cmath.rect(self.K, self.beta)


@dataclass(frozen=True, slots=True)
class NeutralControl:
    """Control −K₁e^{iβ₁}[z(t) − z(t−τ)] − K₂e^{iβ₂}[ż(t) − ż(t−τ)]."""
    K1: float
    beta1: float
    K2: float
    beta2: float
    tau: float

    def __post_init__(self) -> None:
        _check_angle('beta1', self.beta1)
        _check_angle('beta2', self.beta2)
        if not all(math.isfinite(v) for v in (self.K1, self.K2, self.tau)):
            raise DomainError(f'control parameters must be finite, got {self}')
        if self.tau <= 0:
            raise DomainError(f'tau must be positive, got {self.tau}')

    @property
    def gain1(self) -> complex:
        return cmath.rect(self.K1, self.beta1)

    @property
    def gain2(self) -> complex:
        return cmath.rect(self.K2, self.beta2)

    @property
    def denominator(self) -> complex:
        """1 + K₂e^{iβ₂}, the coefficient of ż(t) after rearrangement."""
        return 1.0 + self.gain2

    @property
    def singular(self) -> bool:
        return abs(self.denominator) < DENOMINATOR_TOL

    def retarded(self) -> RetardedControl:
        """The (K₁, β₁, τ) part as a retarded control."""
        return RetardedControl(self.K1, self.beta1, self.tau)


@dataclass(frozen=True, slots=True)
class PeriodicOrbit:
    """The rotating wave √(−λ)e^{iω_p t}."""
    radius: float
    omega: float
    period: float

    def value(self, t):
        if np.ndim(t):
            return self.radius * np.exp(1j * self.omega * np.asarray(t))
        return self.radius * cmath.exp(1j * self.omega * t)

    def derivative(self, t):
        return 1j * self.omega * self.value(t)


class CurveKind(enum.Enum):
    PYRAGAS = 'pyragas'
    EXTENDED_PYRAGAS = 'extended-pyragas'
    HOPF = 'hopf'


@dataclass(frozen=True, slots=True)
class NonlinearCoupling:
    """C = [[1, −γ], [γ, 1]] in g(x) = ⟨x, x⟩ C x."""
    C: np.ndarray = field(repr=False)

    @classmethod
    def from_gamma(cls, gamma: float) -> NonlinearCoupling:
        return cls(np.array([[1.0, -gamma], [gamma, 1.0]]))

    @property
    def gamma(self) -> float:
        return float(self.C[1, 0])


# ── Right-hand sides ──────────────────────────────────────────────────────────
# Written with plain arithmetic so they accept Python complex and ndarrays.

def uncontrolled_rhs(z, p: ModelParams):
    """(λ + i)z + (1 + iγ)|z|²z"""
    return p.linear * z + p.cubic * (z.real * z.real + z.imag * z.imag) * z


def controlled_rhs(z_now, z_delayed, p: ModelParams, c: RetardedControl):
    return uncontrolled_rhs(z_now, p) - c.gain * (z_now - z_delayed)


def neutral_rhs(z_now, z_delayed, zdot_delayed, p: ModelParams, n: NeutralControl):
    """ż(t) solved from the neutral equation.

    [f(z) − K₁e^{iβ₁}(z − z_τ) + K₂e^{iβ₂}ż_τ] / (1 + K₂e^{iβ₂})
    """
    if n.singular:
        raise DenominatorZero(f'1 + K2 e^(i beta2) vanishes for {n}')
    num = uncontrolled_rhs(z_now, p) - n.gain1 * (z_now - z_delayed) + n.gain2 * zdot_delayed
    return num / n.denominator


def variational_rhs(w_now, w_delayed, p: ModelParams, c: RetardedControl | None = None):
    """Linear variational equation around the rotating wave, w = r + iφ.

    ẇ = −2λ(1 + iγ)Re w − Ke^{iβ}(w − w_τ). Real-linear, not complex-linear.
    """
    out = -2.0 * p.lam * p.cubic * w_now.real
    if c is not None:
        out = out - c.gain * (w_now - w_delayed)
    return out


# ── Periodic orbit and curves ─────────────────────────────────────────────────

def periodic_orbit(p: ModelParams) -> PeriodicOrbit:
    if p.lam >= 0:
        raise DomainError(f'the rotating wave needs lambda < 0, got {p.lam}')
    omega = 1.0 - p.gamma * p.lam
    if omega <= 0:
        raise DomainError(f'omega_p = 1 - gamma*lambda = {omega} must be positive')
    return PeriodicOrbit(radius=math.sqrt(-p.lam), omega=omega, period=2.0 * math.pi / omega)


def curve_point(
    kind: CurveKind,
    theta: float,
    *,
    gamma: float = 0.0,
    control: RetardedControl | None = None,
) -> tuple[float, float]:
    """(λ, τ) on a parameter-plane curve.

    Pyragas curves are parametrised by θ = λ and need ``gamma``. The Hopf
    curve is parametrised by φ = ω₀τ and needs the gains (K, β) of
    ``control``; its τ is ignored.
    """
    if kind is CurveKind.HOPF:
        if control is None:
            raise DomainError('the Hopf curve needs a control for its gains')
        if theta == 0:
            raise DomainError('the Hopf curve excludes phi = 0')
        K, beta = control.K, control.beta
        lam = K * (math.cos(beta) - math.cos(beta - theta))
        den = 1.0 - K * (math.sin(beta) - math.sin(beta - theta))
        if den == 0:
            raise DomainError(f'Hopf curve denominator vanishes at phi={theta}')
        return lam, theta / den

    den = 1.0 - gamma * theta
    if den == 0:
        raise DomainError(f'theta = 1/gamma = {theta} is excluded')
    if kind is CurveKind.PYRAGAS and theta > 0:
        raise DomainError(f'the Pyragas curve needs theta <= 0, got {theta}')
    if kind is CurveKind.EXTENDED_PYRAGAS and den < 0:
        raise DomainError(f'theta={theta} lies beyond 1/gamma on the extended Pyragas curve')
    return theta, 2.0 * math.pi / den


def control_on_pyragas_curve(p: ModelParams, K: float, beta: float) -> RetardedControl:
    """Control with τ equal to the orbit period, so the rotating wave persists."""
    return RetardedControl(K, beta, periodic_orbit(p).period)


# ── Real form on ℝ² ───────────────────────────────────────────────────────────

def _rotation(beta: float) -> np.ndarray:
    cb, sb = math.cos(beta), math.sin(beta)
    return np.array([[cb, -sb], [sb, cb]])


def real_form(p: ModelParams, c: RetardedControl) -> tuple[np.ndarray, np.ndarray, NonlinearCoupling]:
    """ẋ = A x(t) + B x(t−τ) + ⟨x, x⟩ C x."""
    cb, sb = math.cos(c.beta), math.sin(c.beta)
    A = np.array([
        [p.lam - c.K * cb, -1.0 + c.K * sb],
        [1.0 - c.K * sb, p.lam - c.K * cb],
    ])
    B = c.K * _rotation(c.beta)
    return A, B, NonlinearCoupling.from_gamma(p.gamma)


def real_form_rhs(x: np.ndarray, x_delayed: np.ndarray, p: ModelParams, c: RetardedControl) -> np.ndarray:
    A, B, coupling = real_form(p, c)
    return A @ x + B @ x_delayed + float(x @ x) * (coupling.C @ x)


def equilibrium_eigenvalues(p: ModelParams) -> np.ndarray:
    """Eigenvalues λ ± i of the uncontrolled linearisation, sorted by imaginary part."""
    A = np.array([[p.lam, -1.0], [1.0, p.lam]])
    ev = np.linalg.eigvals(A)
    return ev[np.argsort(ev.imag)]
