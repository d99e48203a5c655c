"""Self-checks: closed forms against the generic pipeline, residual oracles
and simulation cross-checks, each drawn from a seeded generator.

Every check returns a ``CheckResult`` with a measured figure, so a failing
run shows by how much it missed.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .charts import (
    GridSpec,
    boundary_residual,
    cross_validate,
    ndde_boundary,
    neutral_chart,
    retarded_chart,
)
from .errors import LabError
from .hopf import (
    Approach,
    Verdict,
    hopf_point,
    mu2,
    mu2_lambda_axis_closed_form,
    neutral_pyragas_family,
    orbit_verdict,
    pyragas_family,
    pyragas_point,
    root_tendency,
    root_tendency_neutral,
    sign_expression,
    tendency_by_continuation,
    transversality,
)
from .integrator import (
    StabilityVerdict,
    classify,
    deviation,
    integrate_dde,
    integrate_ndde,
    integrate_ode,
    perturbed_orbit_history,
)
from .model import ModelParams, NeutralControl, RetardedControl, periodic_orbit
from .spectrum import (
    ControlledEquilibrium,
    NeutralEquilibrium,
    SearchBox,
    UncontrolledEquilibrium,
    VariationalFloquet,
    char_controlled,
    char_neutral,
    char_variational,
    count_roots,
    find_roots,
    floquet_uncontrolled,
    monodromy_uncontrolled,
    relative_residual,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 0
SEED_ENV = 'PYRAGAS_LAB_SEED'
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    seed: int
    passed: bool
    figure: float
    detail: str = ''


def resolve_seed(seed: int | None = None) -> int:
    """Explicit seed, else $PYRAGAS_LAB_SEED, else 0."""
    if seed is not None:
        return seed
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == '':
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f'{SEED_ENV} must be an integer, got {raw!r}') from None


def _angle(rng: np.random.Generator) -> float:
    return float(rng.uniform(-math.pi, math.pi))


# ── Hopf ──────────────────────────────────────────────────────────────────────

def check_mu2_pyragas(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst, n = 0.0, 0
    point = pyragas_point()
    while n < 200:
        K, beta, gamma = float(rng.uniform(0, 1)), _angle(rng), float(rng.uniform(-20, 20))
        c = RetardedControl(K, beta, TWO_PI)
        if abs(1 + TWO_PI * c.gain) < 1e-3 or abs(sign_expression(K, beta, gamma)) < 1e-2:
            continue
        p = ModelParams(0.0, gamma)
        left, _ = mu2(p, c, point, Approach.PYRAGAS_LEFT)
        right, _ = mu2(p, c, point, Approach.PYRAGAS_RIGHT)
        worst = max(worst, abs(left + 4.0), abs(right - 4.0))
        n += 1
    return worst <= 1e-10, worst, f'{n} draws, max |mu2 -/+ 4|'


def check_mu2_lambda_axis(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst, n = 0.0, 0
    while n < 200:
        K, beta, gamma = float(rng.uniform(0, 1)), _angle(rng), float(rng.uniform(-20, 20))
        phi = float(rng.uniform(0.5, 4 * math.pi))
        try:
            point = hopf_point(RetardedControl(K, beta, 1.0), phi)
        except LabError:
            continue
        c = RetardedControl(K, beta, point.tau0)
        if 1 + K * point.tau0 * math.cos(beta - phi) <= 0.05:
            continue
        got, _ = mu2(ModelParams(point.lambda0, gamma), c, point, Approach.LAMBDA_AXIS)
        want = mu2_lambda_axis_closed_form(c, point, gamma)
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
        n += 1
    return worst <= 1e-10, worst, f'{n} draws, relative error'


def check_transversality_antisymmetry(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    point = pyragas_point()
    for _ in range(100):
        c = RetardedControl(float(rng.uniform(0, 1)), _angle(rng), TWO_PI)
        if abs(1 + TWO_PI * c.gain) < 1e-3:
            continue
        gamma = float(rng.uniform(-20, 20))
        left = transversality(c, point, Approach.PYRAGAS_LEFT, gamma=gamma)
        right = transversality(c, point, Approach.PYRAGAS_RIGHT, gamma=gamma)
        worst = max(worst, abs(left + right))
    return worst <= 1e-12, worst, 'max |left + right|'


def check_hopf_curve_residual(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst, n = 0.0, 0
    while n < 100:
        K, beta, phi = float(rng.uniform(0, 1)), _angle(rng), float(rng.uniform(0.1, 4 * math.pi))
        try:
            point = hopf_point(RetardedControl(K, beta, 1.0), phi)
        except LabError:
            continue
        f = ControlledEquilibrium(ModelParams(point.lambda0, 0.0), RetardedControl(K, beta, point.tau0))
        worst = max(worst, relative_residual(f, 1j * point.omega0))
        n += 1
    return worst <= 1e-10, worst, f'{n} points, max relative residual'


def check_tendencies(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    n = 0
    while n < 50:
        K, beta, gamma = float(rng.uniform(0, 0.5)), _angle(rng), float(rng.uniform(-5, 5))
        c = RetardedControl(K, beta, TWO_PI)
        if abs(1 + TWO_PI * c.gain) < 0.1:
            continue
        fd = tendency_by_continuation(pyragas_family(K, beta, gamma), h=1e-5)
        worst = max(worst, abs(fd - root_tendency(c, gamma)))
        n += 1
    m = 0
    while m < 50:
        nc = NeutralControl(float(rng.uniform(0, 0.3)), _angle(rng),
                            float(rng.uniform(0, 0.3)), _angle(rng), TWO_PI)
        gamma = float(rng.uniform(-5, 5))
        a = 1 + TWO_PI * nc.gain1 + 2j * math.pi * nc.gain2
        if abs(a) < 0.1:
            continue
        fd = tendency_by_continuation(neutral_pyragas_family(nc, gamma), h=1e-5)
        worst = max(worst, abs(fd - root_tendency_neutral(nc, gamma)))
        m += 1
    return worst <= 1e-6, worst, '50 retarded + 50 neutral draws'


# ── Spectrum ──────────────────────────────────────────────────────────────────

def check_trivial_floquet_root(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    for _ in range(10_000):
        p = ModelParams(float(rng.uniform(-1, 1)), float(rng.uniform(-20, 20)))
        c = RetardedControl(float(rng.uniform(0, 2)), _angle(rng), float(rng.uniform(0.1, 20)))
        worst = max(worst, abs(char_variational(0j, p, c)))
    return worst <= 1e-12, worst, '10^4 draws of |det Delta(0)|'


def check_uncontrolled_floquet(rng: np.random.Generator) -> tuple[bool, float, str]:
    p = ModelParams(-1.0, 0.0)
    formula = floquet_uncontrolled(p).multipliers[1]
    _, ev = monodromy_uncontrolled(p)
    rel = abs(ev[-1].real - formula) / formula
    return rel <= 0.01, rel, f'multiplier {formula:.6g} vs monodromy {ev[-1].real:.6g}'


def check_derivatives(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    for _ in range(25):
        p = ModelParams(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-10, 10)))
        c = RetardedControl(float(rng.uniform(0, 1)), _angle(rng), float(rng.uniform(1, 8)))
        n = NeutralControl(c.K, c.beta, float(rng.uniform(0, 0.8)), _angle(rng), c.tau)
        fs = (UncontrolledEquilibrium(p), ControlledEquilibrium(p, c), VariationalFloquet(p, c), NeutralEquilibrium(p, n))
        for _ in range(4):
            mu = complex(rng.uniform(-1, 1), rng.uniform(-5, 5))
            h = 1e-6
            for f in fs:
                fd = (f.evaluate(mu + h) - f.evaluate(mu - h)) / (2 * h)
                exact = complex(f.derivative(mu))
                worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return worst <= 1e-6, worst, '100 points per variant'


def check_count_refine(rng: np.random.Generator) -> tuple[bool, float, str]:
    mismatches = 0
    for _ in range(6):
        p = ModelParams(float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-10, 10)))
        c = RetardedControl(float(rng.uniform(0, 0.5)), _angle(rng), TWO_PI)
        box = SearchBox(-1.0, 1.0, -6.0, 6.0)
        for f in (ControlledEquilibrium(p, c), VariationalFloquet(p, c)):
            total = sum(r.multiplicity for r in find_roots(f, box))
            mismatches += total != count_roots(f, box)
    return mismatches == 0, float(mismatches), 'boxes where refinement disagrees with the count'


def check_conjugate_symmetry(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    for _ in range(5):
        p = ModelParams(float(rng.uniform(-0.2, 0.0)), float(rng.uniform(-10, 10)))
        c = RetardedControl(float(rng.uniform(0, 0.5)), _angle(rng), TWO_PI)
        roots = find_roots(VariationalFloquet(p, c), SearchBox(-1.0, 1.0, -6.0, 6.0))
        for r in roots:
            worst = max(worst, min(abs(r.mu.conjugate() - s.mu) for s in roots))
    return worst <= 1e-6, worst, 'max distance from a conjugate partner'


# ── Charts ────────────────────────────────────────────────────────────────────

def check_boundary_residual(rng: np.random.Generator) -> tuple[bool, float, str]:
    beta = math.pi / 4
    omegas = sorted(set(np.linspace(0.02, 1.98, 99).tolist()) | {1.0})
    worst = max(boundary_residual(s, beta, -10.0) for s in ndde_boundary(beta, omegas))
    return worst <= 1e-8, worst, f'{len(omegas)} samples including omega = 1'


def check_reductions(rng: np.random.Generator) -> tuple[bool, float, str]:
    worst = 0.0
    for _ in range(50):
        p = ModelParams(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-10, 10)))
        K, beta = float(rng.uniform(0, 1)), _angle(rng)
        c = RetardedControl(K, beta, TWO_PI)
        n = NeutralControl(K, beta, 0.0, _angle(rng), TWO_PI)
        mu = complex(rng.uniform(-1, 1), rng.uniform(-5, 5))
        worst = max(worst, abs(char_neutral(mu, p, n) - char_controlled(mu, p, c)))
        if abs(1 + TWO_PI * c.gain) > 1e-3:
            worst = max(worst, abs(root_tendency_neutral(n, p.gamma) - root_tendency(c, p.gamma)))

    p = ModelParams(-0.005, -10.0)
    orbit = periodic_orbit(p)
    hist = perturbed_orbit_history(orbit, 0.05, 0.0)
    a = integrate_dde(p, RetardedControl(0.25, math.pi / 4, orbit.period), hist, 5 * orbit.period)
    b = integrate_ndde(p, NeutralControl(0.25, math.pi / 4, 0.0, 0.0, orbit.period), hist, 5 * orbit.period)
    worst = max(worst, float(np.max(np.abs(a.z - b.z))))

    gamma, beta = -10.0, math.pi / 4
    neutral = neutral_chart(gamma, beta, beta, GridSpec((-0.1, 0.25), (-0.01, 0.01), 4, 3), census=True, jobs=1)
    retarded = retarded_chart(gamma, beta, GridSpec((-0.01, -0.001), (-0.1, 0.25), 2, 4), jobs=1)
    flags_differ = sum(
        (nc.sign_condition, nc.spectral_gap, nc.verdict) != (rr[0].sign_condition, rr[0].spectral_gap, rr[0].verdict)
        for nc, rr in zip(neutral[1], retarded)
    )
    return worst <= 1e-10 and flags_differ == 0, worst, f'K2 = 0 paths; {flags_differ} chart cells differ'


# ── Simulation ────────────────────────────────────────────────────────────────

def _run(p: ModelParams, K: float, beta: float, periods: int = 30) -> StabilityVerdict:
    orbit = periodic_orbit(p)
    hist = perturbed_orbit_history(orbit, 0.05, 0.0)
    horizon = periods * orbit.period
    traj = integrate_dde(p, RetardedControl(K, beta, orbit.period), hist, horizon)
    return classify(deviation(traj, orbit, orbit.period / 50), horizon)


def check_stabilisation(rng: np.random.Generator) -> tuple[bool, float, str]:
    p = ModelParams(-0.005, -10.0)
    beta, K = math.pi / 4, 0.25
    verdict = orbit_verdict(p, RetardedControl(K, beta, TWO_PI)).verdict
    controlled = _run(p, K, beta)
    free = _run(p, 0.0, beta)
    ok = verdict is Verdict.STABLE and controlled is StabilityVerdict.CONVERGING and free is StabilityVerdict.DIVERGING
    return ok, float(ok), f'census {verdict.value}, K={K}: {controlled.value}, K=0: {free.value}'


def check_ode_path(rng: np.random.Generator) -> tuple[bool, float, str]:
    p = ModelParams(-0.005, -10.0)
    orbit = periodic_orbit(p)
    hist = perturbed_orbit_history(orbit, 0.05, 0.0)
    c = RetardedControl(0.0, 0.0, orbit.period)
    dde = integrate_dde(p, c, hist, 3 * orbit.period)
    ode = integrate_ode(p, hist(0.0)[0], 3 * orbit.period, dde.h)
    same = dde.z.shape == ode.z.shape and bool(np.array_equal(dde.z, ode.z))
    return same, float(np.max(np.abs(dde.z - ode.z))) if dde.z.shape == ode.z.shape else math.inf, 'K = 0 against the ODE path'


def check_chart_agreement(rng: np.random.Generator) -> tuple[bool, float, str]:
    beta = math.pi / 4
    cells = neutral_chart(-10.0, beta, beta, GridSpec((-0.3, 0.4), (-0.3, 0.4), 25, 25), jobs=1)
    report = cross_validate(cells, kind='neutral', gamma=-10.0, beta1=beta, jobs=1)
    rate = report.agreement
    if rate is None:
        return False, 0.0, 'no definite samples'
    return rate >= 0.9, rate, f'{report.agreed}/{report.compared} samples agree'


CHECKS: dict[str, Callable[[np.random.Generator], tuple[bool, float, str]]] = {
    'mu2-pyragas': check_mu2_pyragas,
    'mu2-lambda-axis': check_mu2_lambda_axis,
    'transversality-antisymmetry': check_transversality_antisymmetry,
    'hopf-curve-residual': check_hopf_curve_residual,
    'root-tendencies': check_tendencies,
    'trivial-floquet-root': check_trivial_floquet_root,
    'uncontrolled-floquet': check_uncontrolled_floquet,
    'analytic-derivatives': check_derivatives,
    'count-refine-agreement': check_count_refine,
    'conjugate-symmetry': check_conjugate_symmetry,
    'boundary-residual': check_boundary_residual,
    'reductions': check_reductions,
    'ode-path': check_ode_path,
    'stabilisation': check_stabilisation,
    'chart-agreement': check_chart_agreement,
}


def run_check(args: tuple[str, int]) -> CheckResult:
    name, seed = args
    # Per-check stream, independent of execution order.
    rng = np.random.default_rng([seed, sum(map(ord, name))])
    try:
        passed, figure, detail = CHECKS[name](rng)
    except LabError as exc:
        log.warning('%s raised %s', name, exc)
        return CheckResult(name, seed, False, math.nan, f'{type(exc).__name__}: {exc}')
    return CheckResult(name, seed, bool(passed), float(figure), detail)


def run_checks(
    seed: int,
    names: list[str] | None = None,
    jobs: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[CheckResult]:
    names = list(CHECKS) if names is None else names
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f'unknown checks: {", ".join(unknown)}')
    tasks = [(n, seed) for n in names]
    jobs = jobs or os.cpu_count() or 1
    results: list[CheckResult] = []
    if jobs == 1:
        for k, t in enumerate(tasks):
            results.append(run_check(t))
            if progress:
                progress(k + 1, len(tasks))
        return results
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for k, r in enumerate(pool.map(run_check, tasks)):
            results.append(r)
            if progress:
                progress(k + 1, len(tasks))
    return results
