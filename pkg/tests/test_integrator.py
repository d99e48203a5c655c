"""Tests for integrator — RK4 method of steps, dense output, deviation and verdicts."""

import math

import numpy as np
import pytest

from pyragaslab.errors import DenominatorZero, DomainError, StepUnderflow, UndefinedPhase
from pyragaslab.integrator import (
    DeviationSeries,
    HistoryFunction,
    StabilityVerdict,
    Trajectory,
    _hermite,
    classify,
    deviation,
    integrate_dde,
    integrate_ndde,
    integrate_ode,
    integrate_variational,
    perturbed_orbit_history,
)
from pyragaslab.model import ModelParams, NeutralControl, RetardedControl, periodic_orbit


def exact_uncontrolled(t, r0, lam):
    """Closed form of ż = (λ + i)z + |z|²z for γ = 0 and a real start."""
    inv = (r0 ** -2 + 1 / lam) * np.exp(-2 * lam * t) - 1 / lam
    return inv ** -0.5 * np.exp(1j * t)


class TestHermite:
    def test_reproduces_cubic(self):
        h = 0.5
        poly = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.7])
        dpoly = poly.deriv()
        for s in (0.0, 0.25, 0.5, 0.9, 1.0):
            v, d = _hermite(s, h, poly(0.0), poly(h), dpoly(0.0), dpoly(h))
            assert v == pytest.approx(poly(s * h), abs=1e-14)
            assert d == pytest.approx(dpoly(s * h), abs=1e-13)


class TestHistory:
    def test_constant(self):
        hist = HistoryFunction.constant(0.5j)
        assert hist(-3.0) == (0.5j, 0j)

    def test_finite_difference_derivative(self):
        hist = HistoryFunction(lambda t: complex(math.exp(t)))
        z, dz = hist(-1.0)
        assert dz == pytest.approx(math.exp(-1.0), rel=1e-8)

    def test_rejects_positive_time(self):
        with pytest.raises(DomainError):
            HistoryFunction.zero()(0.1)

    def test_bounded_domain(self):
        hist = HistoryFunction(lambda t: 0j, start=-0.5)
        assert not hist.covers(1.0)
        with pytest.raises(DomainError):
            hist(-0.7)

    def test_perturbed_orbit(self):
        orbit = periodic_orbit(ModelParams(-0.04, 0.0))
        hist = perturbed_orbit_history(orbit, 0.05, 0.01)
        z, dz = hist(-1.0)
        assert abs(z) == pytest.approx(orbit.radius * abs(complex(1.05, 0.01)))
        assert dz == pytest.approx(1j * orbit.omega * z)

    def test_perturbation_bound(self):
        orbit = periodic_orbit(ModelParams(-0.04, 0.0))
        with pytest.raises(DomainError):
            perturbed_orbit_history(orbit, 0.5, 0.0)


class TestOde:
    def test_matches_closed_form(self):
        p = ModelParams(-1.0, 0.0)
        traj = integrate_ode(p, 0.1 + 0j, 5.0, 0.01)
        exact = exact_uncontrolled(traj.times, 0.1, -1.0)
        assert np.max(np.abs(traj.z - exact)) < 1e-9

    def test_fourth_order(self):
        p = ModelParams(-1.0, 0.0)
        errs = []
        for h in (0.1, 0.05):
            traj = integrate_ode(p, 0.5 + 0j, 2.0, h)
            errs.append(abs(traj.final - exact_uncontrolled(traj.t_end, 0.5, -1.0)))
        assert 10 < errs[0] / errs[1] < 22

    def test_dense_output_between_nodes(self):
        p = ModelParams(-1.0, 0.0)
        traj = integrate_ode(p, 0.1 + 0j, 2.0, 0.01)
        ts = np.array([0.005, 0.777, 1.2345])
        z, _ = traj.sample(ts)
        assert np.max(np.abs(z - exact_uncontrolled(ts, 0.1, -1.0))) < 1e-9

    def test_query_matches_nodes(self):
        traj = integrate_ode(ModelParams(-1.0, 2.0), 0.3 + 0.1j, 1.0, 0.1)
        v, d = traj.query(traj.times[4])
        assert v == pytest.approx(traj.z[4], abs=1e-15)
        assert d == pytest.approx(traj.f_left[4], abs=1e-15)

    def test_query_outside_domain(self):
        traj = integrate_ode(ModelParams(-1.0, 0.0), 0.1 + 0j, 1.0, 0.1)
        with pytest.raises(DomainError):
            traj.query(-0.5)
        with pytest.raises(DomainError):
            traj.query(2.0)

    def test_step_underflow(self):
        with pytest.raises(StepUnderflow):
            integrate_ode(ModelParams(-1.0, 0.0), 0.1 + 0j, 1.0, 1e-13)

    def test_escape(self):
        traj = integrate_ode(ModelParams(1.0, 0.0), 1.0 + 0j, 10.0, 0.01)
        assert traj.escaped
        assert traj.t_end < 10.0


class TestDde:
    def test_zero_gain_is_ode_bitwise(self):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        hist = perturbed_orbit_history(orbit, 0.05, 0.0)
        h = orbit.period / 100
        dde = integrate_dde(p, RetardedControl(0.0, 0.0, orbit.period), hist, 3 * orbit.period)
        ode = integrate_ode(p, hist(0.0)[0], 3 * orbit.period, h)
        assert dde.h == ode.h
        assert np.array_equal(dde.z, ode.z)

    def test_orbit_is_invariant(self):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        c = RetardedControl(0.25, math.pi / 4, orbit.period)
        traj = integrate_dde(p, c, HistoryFunction.from_orbit(orbit), 2 * orbit.period)
        assert np.max(np.abs(np.abs(traj.z) - orbit.radius)) < 1e-7
        assert np.max(np.abs(traj.z - orbit.value(traj.times))) < 1e-5

    def test_reads_history_before_start(self):
        p = ModelParams(-0.1, 0.0)
        c = RetardedControl(0.5, 0.0, 1.0)
        hist = HistoryFunction.constant(0.2 + 0j)
        traj = integrate_dde(p, c, hist, 2.0)
        assert traj.query(-0.5) == (0.2 + 0j, 0j)
        assert traj.t_start == -1.0

    def test_continuation_is_seamless(self):
        p = ModelParams(-0.1, 1.0)
        c = RetardedControl(0.3, 0.5, 1.0)
        hist = HistoryFunction.constant(0.2 + 0.1j)
        first = integrate_dde(p, c, hist, 1.5)
        resumed = integrate_dde(p, c, None, 3.0, start=first)
        direct = integrate_dde(p, c, hist, 3.0)
        assert np.array_equal(resumed.z, direct.z)

    def test_continuation_keeps_step(self):
        p = ModelParams(-0.1, 1.0)
        hist = HistoryFunction.constant(0.2 + 0j)
        first = integrate_dde(p, RetardedControl(0.3, 0.5, 1.0), hist, 1.0)
        with pytest.raises(DomainError):
            integrate_dde(p, RetardedControl(0.3, 0.5, 1.0), None, 2.0, h=0.05, start=first)

    def test_step_must_divide_delay(self):
        with pytest.raises(DomainError):
            integrate_dde(ModelParams(-0.1, 0.0), RetardedControl(0.3, 0.0, 1.0),
                          HistoryFunction.zero(), 2.0, h=0.3)

    def test_history_must_cover_delay(self):
        hist = HistoryFunction(lambda t: 0.1 + 0j, start=-0.5)
        with pytest.raises(DomainError):
            integrate_dde(ModelParams(-0.1, 0.0), RetardedControl(0.3, 0.0, 1.0), hist, 2.0)

    def test_delay_step_rounding(self):
        traj = integrate_dde(ModelParams(-0.1, 0.0), RetardedControl(0.3, 0.0, 1.0),
                             HistoryFunction.zero(), 1.0, steps_per_delay=7)
        assert traj.h == pytest.approx(1 / 7)
        assert traj.n_steps == 7


class TestNdde:
    def test_zero_derivative_gain_matches_retarded(self):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        hist = perturbed_orbit_history(orbit, 0.05, 0.0)
        T = orbit.period
        a = integrate_ndde(p, NeutralControl(0.25, math.pi / 4, 0.0, 0.0, T), hist, 2 * T)
        b = integrate_dde(p, RetardedControl(0.25, math.pi / 4, T), hist, 2 * T)
        assert np.max(np.abs(a.z - b.z)) < 1e-14

    def test_orbit_is_invariant(self):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        n = NeutralControl(0.1, 0.3, 0.2, -0.4, orbit.period)
        traj = integrate_ndde(p, n, HistoryFunction.from_orbit(orbit), 2 * orbit.period)
        assert np.max(np.abs(traj.z - orbit.value(traj.times))) < 1e-5

    def test_singular_denominator(self):
        n = NeutralControl(0.0, 0.0, 1.0, math.pi, 1.0)
        with pytest.raises(DenominatorZero):
            integrate_ndde(ModelParams(-0.1, 0.0), n, HistoryFunction.zero(), 1.0)


class TestVariational:
    def test_phase_shift_is_neutral_without_gain(self):
        p = ModelParams(-0.1, 2.0)
        traj = integrate_variational(p, RetardedControl(0.0, 0.0, 1.0), HistoryFunction.constant(1j), 3.0)
        assert np.all(traj.z == 1j)

    def test_phase_shift_is_neutral_with_gain(self):
        p = ModelParams(-0.1, 2.0)
        traj = integrate_variational(p, RetardedControl(0.4, 0.3, 1.0), HistoryFunction.constant(1j), 3.0)
        assert np.max(np.abs(traj.z - 1j)) < 1e-14

    def test_radial_growth_without_gain(self):
        p = ModelParams(-0.1, 0.0)
        traj = integrate_variational(p, RetardedControl(0.0, 0.0, 1.0), HistoryFunction.constant(1 + 0j), 2.0)
        assert traj.final.real == pytest.approx(math.exp(0.4), rel=1e-8)


class TestDeviation:
    def test_on_orbit_is_zero(self):
        p = ModelParams(-0.04, 1.0)
        orbit = periodic_orbit(p)
        c = RetardedControl(0.2, 0.0, orbit.period)
        traj = integrate_dde(p, c, HistoryFunction.from_orbit(orbit), orbit.period)
        series = deviation(traj, orbit, orbit.period / 20)
        assert np.max(np.abs(series.radial)) < 1e-6
        assert np.max(np.abs(series.phase)) < 1e-5
        assert len(series.t) == 21

    def test_undefined_phase(self):
        p = ModelParams(-0.04, 1.0)
        traj = integrate_ode(p, 0j, 1.0, 0.1)
        with pytest.raises(UndefinedPhase):
            deviation(traj, periodic_orbit(p), 0.1)

    def test_sample_dt_positive(self):
        p = ModelParams(-0.04, 1.0)
        traj = integrate_ode(p, 0.2 + 0j, 1.0, 0.1)
        with pytest.raises(DomainError):
            deviation(traj, periodic_orbit(p), 0.0)

    def test_times_increasing(self):
        with pytest.raises(DomainError):
            DeviationSeries(np.array([0.0, 1.0, 1.0]), np.zeros(3), np.zeros(3))


class TestClassify:
    @staticmethod
    def series(radial_fn, horizon=100.0, n=1001, escaped=False):
        t = np.linspace(0.0, horizon, n)
        return DeviationSeries(t, radial_fn(t), np.zeros(n), escaped)

    def test_converging(self):
        s = self.series(lambda t: 0.05 * np.exp(-0.05 * t))
        assert classify(s, 100.0) is StabilityVerdict.CONVERGING

    def test_diverging(self):
        s = self.series(lambda t: 0.01 * np.exp(0.05 * t))
        assert classify(s, 100.0) is StabilityVerdict.DIVERGING

    def test_flat_is_inconclusive(self):
        s = self.series(lambda t: 0.01 + 0 * t)
        assert classify(s, 100.0) is StabilityVerdict.INCONCLUSIVE

    def test_zero_is_inconclusive(self):
        s = self.series(lambda t: 0 * t)
        assert classify(s, 100.0) is StabilityVerdict.INCONCLUSIVE

    def test_escaped_diverges(self):
        s = self.series(lambda t: 0 * t, escaped=True)
        assert classify(s, 100.0) is StabilityVerdict.DIVERGING

    def test_thresholds_are_tunable(self):
        s = self.series(lambda t: 0.05 * np.exp(-0.02 * t))
        assert classify(s, 100.0) is StabilityVerdict.INCONCLUSIVE
        assert classify(s, 100.0, factor=3.0) is StabilityVerdict.CONVERGING

    def test_short_series(self):
        s = self.series(lambda t: 0 * t, horizon=50.0)
        with pytest.raises(DomainError):
            classify(s, 100.0)

    def test_escape_on_first_step(self):
        p = ModelParams(-1.0, 0.0)
        empty = np.array([], dtype=complex)
        traj = Trajectory(0.0, 0.1, np.array([50.0 + 0j]), empty, empty, escaped=True)
        series = deviation(traj, periodic_orbit(p), 0.1)
        assert series.t.tolist() == [0.0]
        assert series.radial[0] == pytest.approx(49.0)
        assert classify(series, 10.0) is StabilityVerdict.DIVERGING

    def test_escaped_run_end_to_end(self):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        traj = integrate_dde(p, RetardedControl(0.0, 0.0, orbit.period),
                             perturbed_orbit_history(orbit, 0.3, 0.0), 40 * orbit.period)
        assert traj.escaped
        series = deviation(traj, orbit, orbit.period / 50)
        assert classify(series, 40 * orbit.period) is StabilityVerdict.DIVERGING


@pytest.mark.slow
class TestStabilisation:
    def run(self, K):
        p = ModelParams(-0.005, -10.0)
        orbit = periodic_orbit(p)
        c = RetardedControl(K, math.pi / 4, orbit.period)
        horizon = 30 * orbit.period
        traj = integrate_dde(p, c, perturbed_orbit_history(orbit, 0.05, 0.0), horizon)
        return classify(deviation(traj, orbit, orbit.period / 50), horizon)

    def test_control_stabilises(self):
        assert self.run(0.25) is StabilityVerdict.CONVERGING

    def test_uncontrolled_diverges(self):
        assert self.run(0.0) is StabilityVerdict.DIVERGING
