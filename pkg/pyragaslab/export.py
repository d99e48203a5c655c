"""CSV, JSON and SVG writers.

JSON documents carry ``"schema": 1`` and a ``metadata`` block echoing the
run's parameters. Floats are written with repr precision and keys sorted,
so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .charts import BoundarySample, HopfCurveSample, RegionCell
from .hopf import Verdict
from .integrator import DeviationSeries, Trajectory
from .spectrum import CharFunction, Root, SearchBox

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Stable element ids in SVG output.
matplotlib.rcParams['svg.hashsalt'] = 'pyragas-lab'


def jsonable(obj: Any) -> Any:
    """Plain JSON types for complex numbers, enums, dataclasses and numpy values."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': float(obj.real), 'im': float(obj.imag)}
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f'cannot serialise {type(obj).__name__}')


def write_json(path: str | Path, kind: str, payload: dict[str, Any], metadata: dict[str, Any]) -> Path:
    path = Path(path)
    doc = {'schema': SCHEMA_VERSION, 'kind': kind, 'metadata': metadata, **payload}
    path.write_text(json.dumps(jsonable(doc), indent=2, sort_keys=True) + '\n')
    log.info('wrote %s', path)
    return path


def _write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with path.open('w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    log.info('wrote %s', path)
    return path


# ── Payload builders ──────────────────────────────────────────────────────────

def roots_payload(f: CharFunction, box: SearchBox, roots: list[Root], count: int) -> dict[str, Any]:
    return {
        'variant': f.variant,
        'params': f.params(),
        'box': box.as_dict(),
        'roots': [r.as_dict() for r in roots],
        'count': count,
    }


def boundary_payload(beta: float, samples: Sequence[BoundarySample]) -> dict[str, Any]:
    return {'beta': beta, 'samples': [{'omega': s.omega, 'K1': s.K1, 'K2': s.K2} for s in samples]}


def hopf_curve_payload(samples: Sequence[HopfCurveSample]) -> dict[str, Any]:
    return {'samples': [{'phi': s.phi, 'lambda': s.lam, 'tau': s.tau, 'occurs': s.occurs} for s in samples]}


# ── CSV ───────────────────────────────────────────────────────────────────────

def trajectory_csv(path: str | Path, traj: Trajectory, sample_dt: float | None = None) -> Path:
    """Columns t, re, im, abs, phase; the step grid unless ``sample_dt`` is given."""
    if sample_dt is None:
        ts, z = traj.times, traj.z
    else:
        n = int(math.floor((traj.t_end - traj.t0) / sample_dt + 1e-9))
        ts = traj.t0 + sample_dt * np.arange(n + 1)
        z, _ = traj.sample(ts)
    phase = np.unwrap(np.angle(z))
    rows = zip(ts, z.real, z.imag, np.abs(z), phase)
    return _write_rows(path, ('t', 're', 'im', 'abs', 'phase'), rows)


def deviation_csv(path: str | Path, series: DeviationSeries) -> Path:
    return _write_rows(path, ('t', 'radial', 'phase'), zip(series.t, series.radial, series.phase))


def chart_csv(path: str | Path, cells: list[list[RegionCell]], x_name: str, y_name: str) -> Path:
    header = (x_name, y_name, 'inside_boundary', 'stable_d', 'sign_condition', 'spectral_gap', 'verdict')
    rows = []
    for row in cells:
        for cell in row:
            r = cell.as_row()
            rows.append((r['x'], r['y'], r['inside_boundary'], r['stable_d'],
                         r['sign_condition'], r['spectral_gap'], r['verdict']))
    return _write_rows(path, header, rows)


# ── SVG ───────────────────────────────────────────────────────────────────────

def chart_svg(
    path: str | Path,
    cells: list[list[RegionCell]],
    *,
    x_label: str,
    y_label: str,
    title: str = '',
    boundary: Sequence[BoundarySample] | None = None,
) -> Path:
    """Shaded stable region with the boundary curve on top.

    A grid with a single row or column has no area to shade, so only the
    curves and the cell markers are drawn.
    """
    path = Path(path)
    xs = np.array([c.x for c in cells[0]])
    ys = np.array([row[0].y for row in cells])
    stable = np.array([[c.verdict is Verdict.STABLE for c in row] for row in cells], dtype=float)

    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot()
    if len(xs) > 1 and len(ys) > 1:
        ax.contourf(xs, ys, stable, levels=[0.5, 1.5], colors=['#9ecae1'])
    else:
        ax.scatter([c.x for row in cells for c in row], [c.y for row in cells for c in row],
                   c=['#3182bd' if c.verdict is Verdict.STABLE else '#bdbdbd' for row in cells for c in row])
    if boundary:
        ax.plot([s.K1 for s in boundary], [s.K2 for s in boundary], color='black', linewidth=1.0)
    if len(xs) > 1:
        ax.set_xlim(xs.min(), xs.max())
    if len(ys) > 1:
        ax.set_ylim(ys.min(), ys.max())
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    fig.savefig(path, format='svg', metadata={'Date': None})
    log.info('wrote %s', path)
    return path


def hopf_curve_svg(
    path: str | Path,
    samples: Sequence[HopfCurveSample],
    gamma: float,
) -> Path:
    """Hopf curve in the (λ, τ) plane, occurring stretches solid, with the Pyragas curve."""
    path = Path(path)
    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot()
    lam = np.array([s.lam for s in samples])
    tau = np.array([s.tau for s in samples])
    occurs = np.array([s.occurs for s in samples])
    ax.plot(lam, np.where(occurs, tau, np.nan), color='#de2d26', linewidth=1.2, label='Hopf')
    ax.plot(lam, np.where(occurs, np.nan, tau), color='#de2d26', linewidth=0.8, linestyle=':')
    if len(lam):
        lo, hi = float(lam.min()), float(lam.max())
        theta = np.linspace(lo, hi, 200)
        den = 1.0 - gamma * theta
        ax.plot(theta, np.where(den > 0, 2 * np.pi / np.where(den > 0, den, 1.0), np.nan),
                color='black', linewidth=1.0, label='Pyragas')
    ax.set_xlabel('λ')
    ax.set_ylabel('τ')
    ax.legend()
    fig.savefig(path, format='svg', metadata={'Date': None})
    log.info('wrote %s', path)
    return path
