"""pyragaslab — numerical lab for Pyragas control of the Hopf normal form.

Delay-equation integration, characteristic-root census, Hopf normal-form
coefficients and stability charts for the rotating wave of
ż = (λ + i)z + (1 + iγ)|z|²z under time-delayed feedback.
"""

__version__ = '0.1.0'

from .errors import (
    BoundaryCase,
    BoundaryRoot,
    ContinuationBreakdown,
    CountMismatch,
    DegenerateTransversality,
    DenominatorZero,
    DomainError,
    LabError,
    NonIntegerWinding,
    SimplicityViolation,
    StepUnderflow,
    UndefinedPhase,
)
from .model import ModelParams, NeutralControl, PeriodicOrbit, RetardedControl, periodic_orbit
from .integrator import (
    HistoryFunction,
    StabilityVerdict,
    Trajectory,
    classify,
    deviation,
    integrate_dde,
    integrate_ndde,
    integrate_ode,
    integrate_variational,
)
from .spectrum import (
    ControlledEquilibrium,
    NeutralEquilibrium,
    Root,
    SearchBox,
    UncontrolledEquilibrium,
    VariationalFloquet,
    count_roots,
    find_roots,
    spectral_gap,
    track_root,
)
from .hopf import Approach, Direction, HopfPoint, HopfReport, Verdict, hopf_report, mu2, orbit_verdict
from .charts import GridSpec, RegionCell, neutral_chart, retarded_chart

__all__ = [
    '__version__',
    # Errors
    'LabError', 'DomainError', 'DenominatorZero', 'BoundaryCase', 'SimplicityViolation',
    'DegenerateTransversality', 'StepUnderflow', 'UndefinedPhase', 'BoundaryRoot',
    'NonIntegerWinding', 'CountMismatch', 'ContinuationBreakdown',
    # Model
    'ModelParams', 'RetardedControl', 'NeutralControl', 'PeriodicOrbit', 'periodic_orbit',
    # Integration
    'HistoryFunction', 'Trajectory', 'StabilityVerdict',
    'integrate_ode', 'integrate_dde', 'integrate_ndde', 'integrate_variational', 'deviation', 'classify',
    # Spectrum
    'UncontrolledEquilibrium', 'ControlledEquilibrium', 'VariationalFloquet', 'NeutralEquilibrium',
    'SearchBox', 'Root', 'count_roots', 'find_roots', 'spectral_gap', 'track_root',
    # Hopf
    'Approach', 'Direction', 'Verdict', 'HopfPoint', 'HopfReport', 'hopf_report', 'mu2', 'orbit_verdict',
    # Charts
    'GridSpec', 'RegionCell', 'neutral_chart', 'retarded_chart',
]
