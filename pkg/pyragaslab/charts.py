"""Stability charts in the (λ, K) and (K₁, K₂) planes.

Cells are independent; rows go to a process pool and come back in grid
order, so the output does not depend on the number of workers.

Usage:
    grid = GridSpec((-0.2, 0.6), (-0.4, 0.4), 200, 200)
    cells = neutral_chart(-10.0, math.pi / 4, math.pi / 4, grid, jobs=8)
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from matplotlib.path import Path

from .errors import DenominatorZero, DomainError, LabError, UndefinedPhase
from .hopf import (
    TWO_PI,
    Verdict,
    sign_expression,
    hopf_curve_conditions,
    neutral_sign_expression,
)
from .integrator import (
    StabilityVerdict,
    classify,
    deviation,
    integrate_dde,
    integrate_ndde,
    perturbed_orbit_history,
)
from .model import ModelParams, NeutralControl, RetardedControl, periodic_orbit
from .spectrum import (
    ControlledEquilibrium,
    NeutralEquilibrium,
    SearchBox,
    char_neutral,
    count_roots,
    essential_spectrum,
)

log = logging.getLogger(__name__)

DEFAULT_GAP = -0.01
BOUNDARY_POINTS = 400
# Boundary polygon is clipped where a gain exceeds this multiple of the chart extent.
CLIP_FACTOR = 50.0
CROSS_LAMBDA = -0.005
CROSS_EPS_R = 0.05
CROSS_PERIODS = 30

ProgressFn = Callable[[int, int], None]


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class GridSpec:
    """Cell-centre grid; a single cell sits at the middle of its range."""
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise DomainError(f'grid needs at least one cell per axis, got {self.nx}x{self.ny}')
        for lo, hi in (self.x_range, self.y_range):
            if not lo < hi:
                raise DomainError(f'grid range ({lo}, {hi}) is empty')

    @staticmethod
    def _axis(lo: float, hi: float, n: int) -> np.ndarray:
        if n == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, n)

    @property
    def xs(self) -> np.ndarray:
        return self._axis(*self.x_range, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self._axis(*self.y_range, self.ny)

    @property
    def extent(self) -> float:
        return max(abs(v) for v in (*self.x_range, *self.y_range))


@dataclass(frozen=True, slots=True)
class RegionCell:
    """One chart cell. Flags that do not apply to a chart are None."""
    x: float
    y: float
    sign_condition: bool
    spectral_gap: bool | None = None
    inside_boundary: bool | None = None
    stable_d: bool | None = None
    verdict: Verdict = Verdict.UNDETERMINED

    def as_row(self) -> dict[str, object]:
        def flag(v: bool | None) -> str:
            return '' if v is None else str(int(v))

        return {
            'x': repr(self.x), 'y': repr(self.y),
            'inside_boundary': flag(self.inside_boundary),
            'stable_d': flag(self.stable_d),
            'sign_condition': flag(self.sign_condition),
            'spectral_gap': flag(self.spectral_gap),
            'verdict': self.verdict.value,
        }


def _verdict(sign_condition: bool, *required: bool | None) -> Verdict:
    """Stable needs every required flag; only a failed sign test certifies instability.

    A required flag of None is a census that could not be carried out.
    """
    if not sign_condition:
        return Verdict.UNSTABLE
    if all(r is True for r in required):
        return Verdict.STABLE
    return Verdict.UNDETERMINED


@dataclass(frozen=True, slots=True)
class BoundarySample:
    omega: float
    K1: float
    K2: float


@dataclass(frozen=True, slots=True)
class NecessaryCondition:
    value: float
    satisfied: bool


# ── Closed-form pieces ────────────────────────────────────────────────────────

def necessary_condition(p: ModelParams, c: RetardedControl) -> NecessaryCondition:
    """1 + τK(cos β + γ sin β) < 0 with τ on the Pyragas curve."""
    den = 1.0 - p.gamma * p.lam
    if den == 0:
        raise DomainError('1 - gamma*lambda vanishes')
    tau = TWO_PI / den
    value = 1.0 + tau * c.K * (math.cos(c.beta) + p.gamma * math.sin(c.beta))
    return NecessaryCondition(value, value < 0)


def _boundary_ratio(omega: float) -> float:
    """(1 − ω)/sin(πω), written in x = ω − 1 so the limit 1/π is reached smoothly."""
    x = omega - 1.0
    if x == 0:
        return 1.0 / math.pi
    return x / math.sin(math.pi * x)


def ndde_boundary(beta: float, omegas: Iterable[float]) -> list[BoundarySample]:
    """Gains (K₁, K₂) with Δ(iω) = 0 at λ = 0, τ = 2π and β₁ = β₂ = β."""
    out = []
    for w in omegas:
        if not 0.0 < w < 2.0:
            raise DomainError(f'omega must lie in (0, 2), got {w}')
        r = _boundary_ratio(w)
        ang = math.pi * w - beta
        out.append(BoundarySample(w, 0.5 * r * math.cos(ang), 0.5 * r * math.sin(ang) / w))
    return out


def boundary_omegas(n: int = BOUNDARY_POINTS) -> np.ndarray:
    return np.union1d(np.linspace(0.0, 2.0, n + 2)[1:-1], [1.0])


def boundary_residual(sample: BoundarySample, beta: float, gamma: float = 0.0) -> float:
    n = NeutralControl(sample.K1, beta, sample.K2, beta, TWO_PI)
    return abs(char_neutral(1j * sample.omega, ModelParams(0.0, gamma), n))


def boundary_path(samples: Sequence[BoundarySample], extent: float) -> Path:
    """Closed polygon from the contiguous run of samples around ω = 1 that stays in view."""
    limit = CLIP_FACTOR * max(extent, 1e-9)
    centre = min(range(len(samples)), key=lambda k: abs(samples[k].omega - 1.0))

    def ok(s: BoundarySample) -> bool:
        return abs(s.K1) <= limit and abs(s.K2) <= limit

    lo = hi = centre
    while lo > 0 and ok(samples[lo - 1]):
        lo -= 1
    while hi < len(samples) - 1 and ok(samples[hi + 1]):
        hi += 1
    verts = np.array([(s.K1, s.K2) for s in samples[lo:hi + 1]])
    if len(verts) < 3:
        raise DomainError('too few boundary samples inside the clip window')
    return Path(np.vstack([verts, verts[:1]]), closed=True)


# ── Cell evaluation ───────────────────────────────────────────────────────────

def _census_box(gap: float) -> SearchBox:
    return SearchBox(gap, 2.0, -20.0, 20.0)


def _only_critical_root(f, gap: float) -> bool | None:
    """True when i is the only root right of ``gap``; None if the census fails."""
    try:
        return count_roots(f, _census_box(gap)) == 1
    except ArithmeticError as exc:
        log.warning('census failed for %s: %s', f.params(), exc)
        return None


def _neutral_cell(args: tuple) -> RegionCell:
    K1, K2, gamma, beta1, beta2, gap, inside = args
    n = NeutralControl(K1, beta1, K2, beta2, TWO_PI)
    sign = neutral_sign_expression(n, gamma) < 0
    try:
        stable_d = essential_spectrum(n).stable_d
    except DenominatorZero:
        return RegionCell(K1, K2, sign, None, inside, False, _verdict(sign, False))
    if inside is not None:
        return RegionCell(K1, K2, sign, None, inside, stable_d, _verdict(sign, inside, stable_d))
    gap_ok = _only_critical_root(NeutralEquilibrium(ModelParams(0.0, gamma), n), gap)
    return RegionCell(K1, K2, sign, gap_ok, gap_ok, stable_d, _verdict(sign, gap_ok, stable_d))


def _neutral_row(args: tuple) -> list[RegionCell]:
    ys_k, xs, gamma, beta1, beta2, gap, inside_row = args
    return [
        _neutral_cell((x, ys_k, gamma, beta1, beta2, gap, None if inside_row is None else bool(inside_row[i])))
        for i, x in enumerate(xs)
    ]


def _run_rows(fn, tasks: list, jobs: int | None, progress: ProgressFn | None) -> list:
    jobs = jobs or os.cpu_count() or 1
    out = []
    if jobs == 1 or len(tasks) == 1:
        for k, t in enumerate(tasks):
            out.append(fn(t))
            if progress:
                progress(k + 1, len(tasks))
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for k, row in enumerate(pool.map(fn, tasks)):
            out.append(row)
            if progress:
                progress(k + 1, len(tasks))
    return out


def neutral_chart(
    gamma: float,
    beta1: float,
    beta2: float,
    grid: GridSpec,
    *,
    gap: float = DEFAULT_GAP,
    census: bool | None = None,
    jobs: int | None = None,
    progress: ProgressFn | None = None,
) -> list[list[RegionCell]]:
    """Rows of cells over (K₁, K₂) at λ = 0, τ = 2π.

    With β₁ = β₂ the inside test uses the explicit boundary polygon;
    otherwise (or with ``census=True``) each cell counts its roots.
    """
    if not gap < 0:
        raise DomainError(f'gap must be negative, got {gap}')
    xs, ys = grid.xs, grid.ys
    use_census = census if census is not None else not math.isclose(beta1, beta2)
    inside = None
    if not use_census:
        if not math.isclose(beta1, beta2):
            raise DomainError('the boundary polygon needs beta1 == beta2')
        path = boundary_path(ndde_boundary(beta1, boundary_omegas()), grid.extent)
        X, Y = np.meshgrid(xs, ys)
        inside = path.contains_points(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    tasks = [
        (float(y), [float(x) for x in xs], gamma, beta1, beta2, gap, None if inside is None else inside[k].tolist())
        for k, y in enumerate(ys)
    ]
    rows = _run_rows(_neutral_row, tasks, jobs if use_census else 1, progress)
    stable = sum(c.verdict is Verdict.STABLE for row in rows for c in row)
    log.info('neutral chart %dx%d: %d stable cells (%s)', grid.nx, grid.ny, stable,
             'census' if use_census else 'polygon')
    return rows


def _retarded_column(args: tuple) -> bool | None:
    K, beta, gamma, gap = args
    f = ControlledEquilibrium(ModelParams(0.0, gamma), RetardedControl(K, beta, TWO_PI))
    return _only_critical_root(f, gap)


def retarded_chart(
    gamma: float,
    beta: float,
    grid: GridSpec,
    *,
    gap: float = DEFAULT_GAP,
    jobs: int | None = None,
    progress: ProgressFn | None = None,
) -> list[list[RegionCell]]:
    """Rows over K (y axis) and columns over λ < 0 (x axis).

    The sign test and the census are taken at the bifurcation point, so a
    whole K row shares one verdict.
    """
    if grid.x_range[1] >= 0:
        raise DomainError('the retarded chart needs lambda < 0 across the grid')
    if not gap < 0:
        raise DomainError(f'gap must be negative, got {gap}')
    Ks = [float(k) for k in grid.ys]
    census = _run_rows(_retarded_column, [(K, beta, gamma, gap) for K in Ks], jobs, progress)
    rows = []
    for K, gap_ok in zip(Ks, census):
        sign = sign_expression(K, beta, gamma) < 0
        verdict = _verdict(sign, gap_ok)
        rows.append([RegionCell(float(lam), K, sign, gap_ok, verdict=verdict) for lam in grid.xs])
    return rows


# ── Hopf curve samples ────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class HopfCurveSample:
    phi: float
    lam: float
    tau: float
    occurs: bool


def hopf_curve_samples(c: RetardedControl, phis: Iterable[float]) -> list[HopfCurveSample]:
    """Hopf curve of the gains (K, β); excluded φ values are skipped."""
    out = []
    for phi in phis:
        try:
            chk = hopf_curve_conditions(c, float(phi))
        except (DomainError, ArithmeticError) as exc:
            log.debug('skipping phi=%g: %s', phi, exc)
            continue
        out.append(HopfCurveSample(float(phi), chk.point.lambda0, chk.point.tau0, chk.occurs))
    return out


# ── Simulation cross-check ────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class SampleOutcome:
    x: float
    y: float
    chart: Verdict
    simulated: StabilityVerdict
    agrees: bool | None


@dataclass(frozen=True)
class CrossValidation:
    outcomes: list[SampleOutcome]

    @property
    def compared(self) -> int:
        return sum(o.agrees is not None for o in self.outcomes)

    @property
    def agreed(self) -> int:
        return sum(bool(o.agrees) for o in self.outcomes)

    @property
    def agreement(self) -> float | None:
        return self.agreed / self.compared if self.compared else None


def _simulate_cell(args: tuple) -> StabilityVerdict:
    kind, x, y, gamma, beta1, beta2, lam, eps_r, periods = args
    p = ModelParams(lam, gamma)
    orbit = periodic_orbit(p)
    hist = perturbed_orbit_history(orbit, eps_r, 0.0)
    horizon = periods * orbit.period
    if kind == 'neutral':
        traj = integrate_ndde(p, NeutralControl(x, beta1, y, beta2, orbit.period), hist, horizon)
    else:
        traj = integrate_dde(p, RetardedControl(y, beta1, orbit.period), hist, horizon)
    try:
        series = deviation(traj, orbit, orbit.period / 50)
    except UndefinedPhase:
        return StabilityVerdict.DIVERGING
    verdict = classify(series, horizon)
    # A run that leaves the 2× tube around its starting deviation counts as diverging.
    if verdict is StabilityVerdict.INCONCLUSIVE and np.abs(series.radial).max() > 2 * eps_r * orbit.radius:
        return StabilityVerdict.DIVERGING
    return verdict


def _pick(n: int, k: int) -> list[int]:
    if n <= k:
        return list(range(n))
    return sorted({round(i * (n - 1) / (k - 1)) for i in range(k)})


def cross_validate(
    cells: list[list[RegionCell]],
    *,
    kind: str,
    gamma: float,
    beta1: float,
    beta2: float | None = None,
    lam: float = CROSS_LAMBDA,
    eps_r: float = CROSS_EPS_R,
    periods: int = CROSS_PERIODS,
    sample: int = 5,
    jobs: int | None = None,
) -> CrossValidation:
    """Simulate a sample×sample subgrid of definite cells and compare with the chart.

    ``kind`` is 'neutral' (x = K₁, y = K₂, simulated at ``lam``) or 'retarded'
    (x = λ, y = K, β = beta1, simulated at the cell's own λ).
    Inconclusive simulations stay out of the agreement rate.
    """
    if kind not in ('neutral', 'retarded'):
        raise DomainError(f"kind must be 'neutral' or 'retarded', got {kind!r}")
    beta2 = beta1 if beta2 is None else beta2
    picked = [cells[i][j] for i in _pick(len(cells), sample) for j in _pick(len(cells[0]), sample)]
    picked = [c for c in picked if c.verdict is not Verdict.UNDETERMINED]
    tasks = [(kind, c.x, c.y, gamma, beta1, beta2, c.x if kind == 'retarded' else lam, eps_r, periods)
             for c in picked]
    sims = _run_rows(_safe_simulate, tasks, jobs, None)
    outcomes = []
    for cell, sim in zip(picked, sims):
        if sim is StabilityVerdict.INCONCLUSIVE:
            agrees = None
        else:
            agrees = (sim is StabilityVerdict.CONVERGING) == (cell.verdict is Verdict.STABLE)
        if agrees is False:
            log.warning('chart says %s at (%g, %g) but simulation is %s',
                        cell.verdict.value, cell.x, cell.y, sim.value)
        outcomes.append(SampleOutcome(cell.x, cell.y, cell.verdict, sim, agrees))
    return CrossValidation(outcomes)


def _safe_simulate(args: tuple) -> StabilityVerdict:
    try:
        return _simulate_cell(args)
    except LabError as exc:
        log.warning('simulation at (%g, %g) failed: %s', args[1], args[2], exc)
        return StabilityVerdict.INCONCLUSIVE
