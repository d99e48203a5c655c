"""Command-line surface: ``pyragas-lab simulate|spectrum|hopf|chart|verify``.

Every command writes machine-readable files (CSV, JSON with ``"schema": 1``,
SVG) and prints a short table. Options may come from a TOML or JSON file
passed with ``--config``; flags given on the command line win. Exit codes:
0 success, 1 failed verification checks, 2 bad parameters or config,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from . import __version__, export
from .charts import (
    DEFAULT_GAP,
    GridSpec,
    RegionCell,
    boundary_omegas,
    cross_validate,
    hopf_curve_samples,
    ndde_boundary,
    neutral_chart,
    retarded_chart,
)
from .errors import LabError
from .hopf import (
    Approach,
    Verdict,
    curve_slopes,
    hopf_point,
    hopf_report,
    orbit_verdict,
    pyragas_point,
    root_tendency,
    root_tendency_neutral,
)
from .integrator import (
    DEFAULT_STEPS_PER_DELAY,
    classify,
    deviation,
    integrate_dde,
    integrate_ndde,
    integrate_ode,
    perturbed_orbit_history,
)
from .model import ModelParams, NeutralControl, RetardedControl, periodic_orbit
from .report import Column, LabTheme, Progress, Table, color_enabled, lab_theme
from .spectrum import (
    DEFAULT_BOX,
    DEFAULT_GRID_N,
    ControlledEquilibrium,
    NeutralEquilibrium,
    SearchBox,
    UncontrolledEquilibrium,
    VariationalFloquet,
    count_roots,
    gap_census,
)
from .verify import CHECKS, resolve_seed, run_checks

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

TWO_PI = 2.0 * math.pi

# Options that steer the run but do not belong in output metadata.
_NOT_ECHOED = frozenset({'command', 'config', 'log_level', 'verbose', 'output_dir', 'prefix'})


# ── Value parsing ─────────────────────────────────────────────────────────────

_PI_FRACTION = re.compile(r'^([+-]?)(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$')


def parse_angle(text: str | float) -> float:
    """Radians, or a π-fraction such as ``pi/4``, ``-pi/4``, ``3pi/4``, ``3*pi/4``."""
    if not isinstance(text, str):
        return float(text)
    s = text.strip().lower().replace('π', 'pi')
    m = _PI_FRACTION.match(s)
    if m:
        sign, coef, den = m.groups()
        value = (float(coef) if coef not in ('', '.') else 1.0) * math.pi
        if den is not None:
            if float(den) == 0:
                raise argparse.ArgumentTypeError(f'zero denominator in angle {text!r}')
            value /= float(den)
        return -value if sign == '-' else value
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'not an angle: {text!r}') from None


def parse_complex(text: str | complex) -> complex:
    """Complex literal with ``i`` or ``j`` as the imaginary unit."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = text.strip().replace(' ', '').replace('i', 'j')
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a complex number: {text!r}') from None


# ── Config files ──────────────────────────────────────────────────────────────

_KEY_ALIASES = {'lambda': 'lam', 'eps-r': 'eps_r', 'eps-phi': 'eps_phi'}


def _normalise_key(key: str) -> str:
    return _KEY_ALIASES.get(key, key).replace('-', '_')


def load_config(path: str | Path, command: str) -> dict[str, Any]:
    """Top-level keys merged with the table named after ``command``.

    ``.toml`` files are read with tomllib, anything else as JSON.
    """
    path = Path(path)
    raw = path.read_bytes()
    data = tomllib.loads(raw.decode()) if path.suffix == '.toml' else json.loads(raw)
    if not isinstance(data, dict):
        raise ValueError(f'config {path} must hold a table of options')
    commands = set(_COMMANDS)
    merged = {k: v for k, v in data.items() if k not in commands}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ValueError(f'config section [{command}] must be a table')
    merged.update(section)
    return {_normalise_key(k): v for k, v in merged.items()}


# ── Run configuration ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RunConfig:
    """Resolved options for one command.

    Attributes:
        command: Subcommand name.
        options: Every option after config-file layering.
        output_dir: Directory receiving the output files.
        prefix: Prepended to every output file name.
    """
    command: str
    options: Mapping[str, Any] = field(default_factory=dict)
    output_dir: Path = Path('.')
    prefix: str = ''

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> RunConfig:
        opts = {k: v for k, v in vars(ns).items() if k not in ('command', 'output_dir', 'prefix')}
        return cls(ns.command, opts, Path(getattr(ns, 'output_dir', '.')), getattr(ns, 'prefix', '') or '')

    def __getattr__(self, name: str) -> Any:
        options = self.__dict__.get('options', {})
        if name in options:
            return options[name]
        raise AttributeError(name)

    def path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f'{self.prefix}{name}'

    def metadata(self, **extra: Any) -> dict[str, Any]:
        """Every option echoed for provenance, plus the package version."""
        meta = {k: v for k, v in self.options.items() if k not in _NOT_ECHOED}
        meta.update(extra)
        meta['command'] = self.command
        meta['version'] = __version__
        return meta


# ── Parser ────────────────────────────────────────────────────────────────────

def _add_model(p: argparse.ArgumentParser, *, lam_required: bool = False) -> None:
    p.add_argument('--lambda', dest='lam', type=float, default=None,
                   help='bifurcation parameter' + (' (required)' if lam_required else ' (default 0)'))
    p.add_argument('--gamma', type=float, default=0.0, help='nonlinear frequency shift')


def _add_control(p: argparse.ArgumentParser) -> None:
    p.add_argument('--K', dest='K', type=float, default=0.0, help='control gain')
    p.add_argument('--beta', type=parse_angle, default=0.0, help='control phase (radians or pi/4)')
    p.add_argument('--K2', dest='K2', type=float, default=None,
                   help='derivative gain; switches to the neutral control')
    p.add_argument('--beta2', type=parse_angle, default=0.0, help='derivative phase')
    p.add_argument('--tau', type=float, default=None, help='delay')


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument('-o', '--output-dir', default='.', help='directory for output files')
    p.add_argument('--prefix', default='', help='prefix for output file names')


def _add_jobs(p: argparse.ArgumentParser) -> None:
    p.add_argument('-j', '--jobs', type=int, default=None,
                   help='worker processes (default: all cores; 1 runs in-process)')


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog='pyragas-lab',
        description='Pyragas control of the Hopf normal form: simulation, spectra, Hopf analysis, charts.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', default=None, help='TOML or JSON file with option defaults')
    parser.add_argument('--log-level', default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], type=str.upper)
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    sub = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    subs: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser('simulate', help='integrate a perturbed rotating wave and classify it')
    _add_model(p, lam_required=True)
    _add_control(p)
    p.add_argument('--periods', type=float, default=30.0, help='horizon in orbit periods')
    p.add_argument('--eps-r', dest='eps_r', type=float, default=0.05, help='radial perturbation')
    p.add_argument('--eps-phi', dest='eps_phi', type=float, default=0.0, help='phase perturbation')
    p.add_argument('--steps-per-delay', type=int, default=DEFAULT_STEPS_PER_DELAY)
    p.add_argument('--sample-dt', type=float, default=None, help='deviation sampling (default period/50)')
    p.add_argument('--window', type=float, default=0.1, help='classification window fraction')
    p.add_argument('--factor', type=float, default=10.0, help='classification ratio')
    p.add_argument('--ode', action='store_true', help='integrate the uncontrolled ODE instead')
    _add_output(p)
    subs['simulate'] = p

    p = sub.add_parser('spectrum', help='count and list characteristic roots in a box')
    p.add_argument('--variant', choices=['uncontrolled', 'controlled', 'variational', 'neutral'],
                   default='controlled')
    _add_model(p)
    _add_control(p)
    p.add_argument('--box', type=float, nargs=4, metavar=('RE_MIN', 'RE_MAX', 'IM_MIN', 'IM_MAX'),
                   default=None, help=f'search box (default {DEFAULT_BOX.as_dict()})')
    p.add_argument('--grid-n', type=int, default=DEFAULT_GRID_N, help='Newton seeds per axis')
    p.add_argument('--gap', type=float, default=DEFAULT_GAP)
    p.add_argument('--exclude', type=parse_complex, action='append', default=None,
                   help='root left out of the gap test (repeatable, e.g. i, -i, 0)')
    _add_output(p)
    subs['spectrum'] = p

    p = sub.add_parser('hopf', help='Hopf report: transversality, cubic coefficient, mu2')
    p.add_argument('--gamma', type=float, default=0.0)
    _add_control(p)
    p.add_argument('--approach', choices=[a.value for a in Approach], default=Approach.PYRAGAS_LEFT.value)
    p.add_argument('--phi', type=parse_angle, default=None,
                   help='point on the Hopf curve (default: the Pyragas point)')
    p.add_argument('--lambda', dest='lam', type=float, default=None,
                   help='also give the orbit verdict at this lambda < 0')
    p.add_argument('--curve', type=float, nargs=3, metavar=('PHI_MIN', 'PHI_MAX', 'N'), default=None,
                   help='sample the Hopf curve and plot it against the Pyragas curve')
    _add_output(p)
    subs['hopf'] = p

    p = sub.add_parser('chart', help='stability chart over a parameter grid')
    p.add_argument('kind', choices=['neutral', 'retarded'])
    p.add_argument('--gamma', type=float, default=0.0)
    p.add_argument('--beta', type=parse_angle, default=0.0, help='control phase (retarded chart)')
    p.add_argument('--beta1', type=parse_angle, default=0.0, help='proportional phase (neutral chart)')
    p.add_argument('--beta2', type=parse_angle, default=0.0, help='derivative phase (neutral chart)')
    p.add_argument('--x-range', type=float, nargs=2, default=None, metavar=('LO', 'HI'),
                   help='K1 (neutral, default -0.3 0.4) or lambda (retarded, default -0.1 -0.001)')
    p.add_argument('--y-range', type=float, nargs=2, default=None, metavar=('LO', 'HI'),
                   help='K2 (neutral) or K (retarded), default -0.3 0.4')
    p.add_argument('--nx', type=int, default=200)
    p.add_argument('--ny', type=int, default=200)
    p.add_argument('--gap', type=float, default=DEFAULT_GAP)
    p.add_argument('--census', action='store_true', default=None,
                   help='count roots per cell even when the boundary polygon applies')
    p.add_argument('--cross-validate', action='store_true', help='simulate a subgrid and compare')
    p.add_argument('--sample', type=int, default=5, help='subgrid size per axis for --cross-validate')
    _add_jobs(p)
    _add_output(p)
    subs['chart'] = p

    p = sub.add_parser('verify', help='run the property suite')
    p.add_argument('--seed', type=int, default=None, help='RNG seed (default $PYRAGAS_LAB_SEED or 0)')
    p.add_argument('--only', action='append', default=None, choices=list(CHECKS), metavar='CHECK',
                   help='run only this check (repeatable)')
    p.add_argument('--list', action='store_true', help='list check names and exit')
    _add_jobs(p)
    subs['verify'] = p

    return parser, subs


def _known_dests(p: argparse.ArgumentParser) -> set[str]:
    return {a.dest for a in p._actions if a.dest != argparse.SUPPRESS}


def _configure_logging(ns: argparse.Namespace) -> None:
    if ns.log_level:
        level = getattr(logging, ns.log_level)
    else:
        level = {0: logging.WARNING, 1: logging.INFO}.get(ns.verbose, logging.DEBUG)
    root = logging.getLogger()
    for h in list(root.handlers):
        if getattr(h, '_pyragas_lab', False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    handler._pyragas_lab = True  # type: ignore[attr-defined]
    root.addHandler(handler)
    root.setLevel(level)


# ── Commands ──────────────────────────────────────────────────────────────────

def _kv_table(rows: Sequence[tuple[str, object]]) -> Table:
    t = Table([Column('quantity'), Column('value', numeric=True)])
    for k, v in rows:
        t.add_row(k, v)
    return t


def cmd_simulate(cfg: RunConfig, theme: LabTheme) -> int:
    p = ModelParams(cfg.lam, cfg.gamma)
    orbit = periodic_orbit(p)
    tau = cfg.tau if cfg.tau is not None else orbit.period
    hist = perturbed_orbit_history(orbit, cfg.eps_r, cfg.eps_phi)
    horizon = cfg.periods * orbit.period
    h = tau / cfg.steps_per_delay
    if cfg.ode:
        traj = integrate_ode(p, hist(0.0)[0], horizon, h)
        mode = 'ode'
    elif cfg.K2 is not None:
        traj = integrate_ndde(p, NeutralControl(cfg.K, cfg.beta, cfg.K2, cfg.beta2, tau), hist, horizon, h)
        mode = 'neutral'
    else:
        traj = integrate_dde(p, RetardedControl(cfg.K, cfg.beta, tau), hist, horizon, h)
        mode = 'retarded'
    log.info('%s run: h=%g, horizon=%g, escaped=%s', mode, h, horizon, traj.escaped)
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else orbit.period / 50
    series = deviation(traj, orbit, sample_dt)
    verdict = classify(series, horizon, window=cfg.window, factor=cfg.factor)

    export.trajectory_csv(cfg.path('trajectory.csv'), traj, sample_dt)
    export.deviation_csv(cfg.path('deviation.csv'), series)
    payload = {
        'verdict': verdict,
        'mode': mode,
        'escaped': traj.escaped,
        'orbit': {'radius': orbit.radius, 'omega': orbit.omega, 'period': orbit.period},
        'tau': tau,
        'h': h,
        'horizon': horizon,
        'n_steps': traj.n_steps,
        'final_radial_deviation': float(series.radial[-1]),
        'final_phase_deviation': float(series.phase[-1]),
    }
    export.write_json(cfg.path('verdict.json'), 'simulation', payload, cfg.metadata())

    print(theme.heading.render(f'simulate ({mode})'))
    print(_kv_table([
        ('orbit radius', orbit.radius),
        ('orbit period', orbit.period),
        ('steps', traj.n_steps),
        ('escaped', traj.escaped),
        ('final |z| - R', float(series.radial[-1])),
    ]).view())
    ok = {'converging': True, 'diverging': False}.get(verdict.value)
    style = theme.passed if ok else theme.failed if ok is False else theme.warn
    print(theme.label.render('verdict: ') + style.render(verdict.value))
    return EXIT_OK


def _char_function(cfg: RunConfig):
    lam = cfg.lam if cfg.lam is not None else 0.0
    p = ModelParams(lam, cfg.gamma)
    tau = cfg.tau if cfg.tau is not None else TWO_PI
    if cfg.variant == 'uncontrolled':
        return UncontrolledEquilibrium(p)
    if cfg.variant == 'neutral':
        return NeutralEquilibrium(p, NeutralControl(cfg.K, cfg.beta, cfg.K2 or 0.0, cfg.beta2, tau))
    c = RetardedControl(cfg.K, cfg.beta, tau)
    if cfg.variant == 'variational':
        return VariationalFloquet(p, c)
    return ControlledEquilibrium(p, c)


def cmd_spectrum(cfg: RunConfig, theme: LabTheme) -> int:
    f = _char_function(cfg)
    box = DEFAULT_BOX if cfg.box is None else SearchBox(*map(float, cfg.box))
    excluded = [parse_complex(e) for e in (cfg.exclude or [])]
    count = count_roots(f, box)
    census = gap_census(f, box, excluded=excluded, gap=cfg.gap, grid_n=cfg.grid_n)
    payload = export.roots_payload(f, box, census.roots, count)
    payload['gap'] = {
        'gap': census.gap,
        'excluded': excluded,
        'holds': census.holds,
        'offending': [r.as_dict() for r in census.offending],
        'stable_d': census.stable_d,
    }
    export.write_json(cfg.path('roots.json'), 'spectrum', payload, cfg.metadata())

    print(theme.heading.render(f'spectrum ({f.variant})'))
    t = Table([Column('mu', numeric=True), Column('residual', numeric=True, fmt='.2e'),
               Column('mult', numeric=True)])
    for r in census.roots:
        t.add_row(r.mu, r.residual, r.multiplicity)
    print(t.view())
    print(theme.label.render('roots in box: ') + str(count))
    print(theme.label.render(f'spectral gap at {cfg.gap:g}: ') + theme.status(census.holds))
    return EXIT_OK


def cmd_hopf(cfg: RunConfig, theme: LabTheme) -> int:
    gains = RetardedControl(cfg.K, cfg.beta, TWO_PI)
    point = pyragas_point() if cfg.phi is None else hopf_point(gains, cfg.phi)
    control = RetardedControl(cfg.K, cfg.beta, point.tau0)
    approach = Approach(cfg.approach)
    report = hopf_report(ModelParams(point.lambda0, cfg.gamma), control, point, approach)
    payload: dict[str, Any] = {'report': report.as_dict()}
    rows: list[tuple[str, object]] = [
        ('lambda0', point.lambda0),
        ('tau0', point.tau0),
        ('omega0', point.omega0),
        ('transversality', report.transversality),
        ('c', report.c),
        ('mu2', report.mu2),
        ('direction', report.direction.value),
    ]
    if cfg.phi is None:
        neutral = NeutralControl(cfg.K, cfg.beta, cfg.K2, cfg.beta2, TWO_PI) if cfg.K2 is not None else None
        tendency = root_tendency_neutral(neutral, cfg.gamma) if neutral else root_tendency(control, cfg.gamma)
        slopes = curve_slopes(control, cfg.gamma)
        payload['tendency'] = tendency
        payload['slopes'] = slopes
        rows += [('root tendency', tendency), ('Pyragas left of Hopf', slopes.pyragas_left_of_hopf)]
    if cfg.lam is not None:
        ctl: RetardedControl | NeutralControl = (
            NeutralControl(cfg.K, cfg.beta, cfg.K2, cfg.beta2, TWO_PI) if cfg.K2 is not None else control
        )
        ov = orbit_verdict(ModelParams(cfg.lam, cfg.gamma), ctl)
        payload['orbit'] = {'verdict': ov.verdict, 'certificate': ov.certificate}
        rows.append(('orbit verdict', ov.verdict.value))
    export.write_json(cfg.path('hopf.json'), 'hopf', payload, cfg.metadata())

    if cfg.curve is not None:
        lo, hi, n = cfg.curve
        if int(n) < 2:
            raise ValueError('--curve needs at least 2 samples')
        step = (hi - lo) / (int(n) - 1)
        samples = hopf_curve_samples(gains, [lo + k * step for k in range(int(n))])
        export.write_json(cfg.path('hopf_curve.json'), 'hopf-curve',
                          export.hopf_curve_payload(samples), cfg.metadata())
        export.hopf_curve_svg(cfg.path('hopf_curve.svg'), samples, cfg.gamma)
        rows.append(('curve samples', len(samples)))

    print(theme.heading.render(f'hopf ({approach.value})'))
    print(_kv_table(rows).view())
    return EXIT_OK


def _count(cells: list[list[RegionCell]], verdict: Verdict) -> int:
    return sum(c.verdict is verdict for row in cells for c in row)


def cmd_chart(cfg: RunConfig, theme: LabTheme) -> int:
    neutral = cfg.kind == 'neutral'
    x_range = tuple(cfg.x_range) if cfg.x_range else ((-0.3, 0.4) if neutral else (-0.1, -0.001))
    y_range = tuple(cfg.y_range) if cfg.y_range else (-0.3, 0.4)
    grid = GridSpec(x_range, y_range, cfg.nx, cfg.ny)
    bar = Progress(label=f'chart {cfg.kind}', fill_style=theme.heading, empty_style=theme.dim)
    boundary = None
    if neutral:
        cells = neutral_chart(cfg.gamma, cfg.beta1, cfg.beta2, grid, gap=cfg.gap,
                              census=cfg.census, jobs=cfg.jobs, progress=bar.update)
        if not cfg.census and math.isclose(cfg.beta1, cfg.beta2):
            boundary = ndde_boundary(cfg.beta1, boundary_omegas())
            export.write_json(cfg.path('boundary.json'), 'ndde-boundary',
                              export.boundary_payload(cfg.beta1, boundary), cfg.metadata())
        x_name, y_name = 'K1', 'K2'
        title = f'neutral control, γ={cfg.gamma:g}, β1={cfg.beta1:.4g}, β2={cfg.beta2:.4g}'
    else:
        cells = retarded_chart(cfg.gamma, cfg.beta, grid, gap=cfg.gap, jobs=cfg.jobs, progress=bar.update)
        x_name, y_name = 'lambda', 'K'
        title = f'Pyragas control, γ={cfg.gamma:g}, β={cfg.beta:.4g}'

    export.chart_csv(cfg.path(f'chart_{cfg.kind}.csv'), cells, x_name, y_name)
    export.chart_svg(cfg.path(f'chart_{cfg.kind}.svg'), cells, x_label=x_name, y_label=y_name,
                     title=title, boundary=boundary)

    rows: list[tuple[str, object]] = [
        ('cells', grid.nx * grid.ny),
        ('stable', _count(cells, Verdict.STABLE)),
        ('unstable', _count(cells, Verdict.UNSTABLE)),
        ('undetermined', _count(cells, Verdict.UNDETERMINED)),
    ]
    if cfg.cross_validate:
        beta1 = cfg.beta1 if neutral else cfg.beta
        cv = cross_validate(cells, kind=cfg.kind, gamma=cfg.gamma, beta1=beta1,
                            beta2=cfg.beta2 if neutral else None, sample=cfg.sample, jobs=cfg.jobs)
        export.write_json(cfg.path(f'cross_validation_{cfg.kind}.json'), 'cross-validation', {
            'compared': cv.compared,
            'agreed': cv.agreed,
            'agreement': cv.agreement,
            'outcomes': cv.outcomes,
        }, cfg.metadata())
        rows += [('simulated', len(cv.outcomes)), ('agreement', cv.agreement)]

    print(theme.heading.render(f'chart ({cfg.kind})'))
    print(_kv_table(rows).view())
    return EXIT_OK


def cmd_verify(cfg: RunConfig, theme: LabTheme) -> int:
    if cfg.list:
        for name in CHECKS:
            print(name)
        return EXIT_OK
    seed = resolve_seed(cfg.seed)
    bar = Progress(label='verify', fill_style=theme.heading, empty_style=theme.dim)
    results = run_checks(seed, cfg.only, jobs=cfg.jobs, progress=bar.update)
    t = Table([Column('check'), Column('seed', numeric=True), Column('status'),
               Column('figure', numeric=True, fmt='.3g'), Column('detail')])
    for r in results:
        t.add_row(r.name, r.seed, theme.status(r.passed), r.figure, r.detail)
    print(theme.heading.render(f'verify (seed {seed})'))
    print(t.view())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(theme.failed.render(f'{len(failed)} of {len(results)} checks failed: {", ".join(failed)}'))
        return EXIT_CHECKS_FAILED
    print(theme.passed.render(f'all {len(results)} checks passed'))
    return EXIT_OK


_COMMANDS: dict[str, Callable[[RunConfig, LabTheme], int]] = {
    'simulate': cmd_simulate,
    'spectrum': cmd_spectrum,
    'hopf': cmd_hopf,
    'chart': cmd_chart,
    'verify': cmd_verify,
}


# ── Entry point ───────────────────────────────────────────────────────────────

def _parse(argv: Sequence[str] | None) -> argparse.Namespace:
    parser, subs = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        sub = subs[ns.command]
        defaults = load_config(ns.config, ns.command)
        unknown = sorted(set(defaults) - _known_dests(sub))
        if unknown:
            sub.error(f'unknown option(s) in {ns.config}: {", ".join(unknown)}')
        sub.set_defaults(**defaults)
        ns = parser.parse_args(argv)
    if ns.command == 'simulate' and ns.lam is None:
        subs['simulate'].error('the following arguments are required: --lambda')
    return ns


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    theme = lab_theme()
    err = lab_theme(color=color_enabled(sys.stderr))
    try:
        ns = _parse(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(err.error.render(f'error: {exc}'), file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(ns)
    cfg = RunConfig.from_namespace(ns)
    try:
        return _COMMANDS[cfg.command](cfg, theme)
    except ArithmeticError as exc:
        name = type(exc).__name__ if isinstance(exc, LabError) else 'numerical failure'
        print(err.error.render(f'{name}: {exc}'), file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        name = type(exc).__name__ if isinstance(exc, LabError) else 'error'
        print(err.error.render(f'{name}: {exc}'), file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
