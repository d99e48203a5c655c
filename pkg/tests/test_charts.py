"""Tests for charts — grids, the neutral boundary, chart cells and cross-validation."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pyragaslab.charts import (
    GridSpec,
    RegionCell,
    _pick,
    _verdict,
    boundary_omegas,
    boundary_path,
    boundary_residual,
    cross_validate,
    hopf_curve_samples,
    ndde_boundary,
    necessary_condition,
    neutral_chart,
    retarded_chart,
)
from pyragaslab.errors import DomainError
from pyragaslab.hopf import Verdict
from pyragaslab.integrator import StabilityVerdict
from pyragaslab.model import ModelParams, RetardedControl

TWO_PI = 2 * math.pi
BETA = math.pi / 4


class TestGridSpec:
    def test_axes(self):
        grid = GridSpec((0.0, 1.0), (-1.0, 1.0), 3, 5)
        assert grid.xs.tolist() == [0.0, 0.5, 1.0]
        assert len(grid.ys) == 5
        assert grid.extent == 1.0

    def test_single_cell_is_centred(self):
        grid = GridSpec((0.0, 1.0), (-2.0, 0.0), 1, 1)
        assert grid.xs.tolist() == [0.5]
        assert grid.ys.tolist() == [-1.0]

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            GridSpec((0.0, 1.0), (0.0, 1.0), 0, 3)
        with pytest.raises(DomainError):
            GridSpec((1.0, 1.0), (0.0, 1.0), 3, 3)


class TestVerdictRule:
    def test_failed_sign_is_unstable(self):
        assert _verdict(False, True, True) is Verdict.UNSTABLE

    def test_all_required(self):
        assert _verdict(True, True, True) is Verdict.STABLE
        assert _verdict(True, True, False) is Verdict.UNDETERMINED

    def test_missing_census_is_undetermined(self):
        assert _verdict(True, None) is Verdict.UNDETERMINED

    def test_row_flags(self):
        row = RegionCell(0.5, -0.25, True, None, True, False, Verdict.UNDETERMINED).as_row()
        assert row["spectral_gap"] == ""
        assert row["inside_boundary"] == "1"
        assert row["stable_d"] == "0"
        assert row["verdict"] == "undetermined"


class TestBoundary:
    def test_unit_frequency_limit(self):
        [s] = ndde_boundary(BETA, [1.0])
        assert s.K1 == pytest.approx(math.cos(math.pi - BETA) / TWO_PI)
        assert s.K2 == pytest.approx(math.sin(math.pi - BETA) / TWO_PI)

    def test_limit_is_continuous(self):
        [a, b] = ndde_boundary(BETA, [1.0, 1.0 + 1e-7])
        assert abs(a.K1 - b.K1) < 1e-6
        assert abs(a.K2 - b.K2) < 1e-6

    @given(st.floats(min_value=0.05, max_value=1.95), st.floats(min_value=-math.pi + 1e-9, max_value=math.pi),
           st.floats(min_value=-10.0, max_value=10.0))
    def test_samples_are_roots(self, omega, beta, gamma):
        [s] = ndde_boundary(beta, [omega])
        assert boundary_residual(s, beta, gamma) < 1e-10 * max(1.0, abs(s.K1) + abs(s.K2))

    def test_omega_range(self):
        with pytest.raises(DomainError):
            ndde_boundary(BETA, [0.0])
        with pytest.raises(DomainError):
            ndde_boundary(BETA, [2.0])

    def test_omegas_include_one(self):
        omegas = boundary_omegas(10)
        assert 1.0 in omegas
        assert omegas.min() > 0 and omegas.max() < 2

    def test_path_is_closed(self):
        path = boundary_path(ndde_boundary(BETA, boundary_omegas()), 0.5)
        assert np.allclose(path.vertices[0], path.vertices[-1])

    def test_necessary_condition(self):
        cond = necessary_condition(ModelParams(-0.005, -10.0), RetardedControl(0.25, BETA, 1.0))
        assert cond.satisfied
        assert not necessary_condition(ModelParams(-0.005, -10.0), RetardedControl(0.0, BETA, 1.0)).satisfied


class TestNeutralChart:
    def test_polygon_mode(self):
        grid = GridSpec((-0.2, 0.2), (-0.2, 0.2), 3, 3)
        rows = neutral_chart(-10.0, BETA, BETA, grid, jobs=1)
        assert len(rows) == 3 and all(len(r) == 3 for r in rows)
        for row in rows:
            for cell in row:
                assert cell.inside_boundary is not None
                assert cell.spectral_gap is None
                if not cell.sign_condition:
                    assert cell.verdict is Verdict.UNSTABLE

    def test_census_mode_at_origin(self):
        grid = GridSpec((-0.01, 0.01), (-0.01, 0.01), 1, 1)
        [[cell]] = neutral_chart(-10.0, BETA, 0.0, grid, jobs=1)
        assert cell.spectral_gap is True
        assert cell.stable_d is True
        # Without gains the sign test fails.
        assert cell.verdict is Verdict.UNSTABLE

    def test_polygon_needs_equal_angles(self):
        with pytest.raises(DomainError):
            neutral_chart(-10.0, BETA, 0.0, GridSpec((0, 1), (0, 1), 2, 2), census=False, jobs=1)

    def test_gap_must_be_negative(self):
        with pytest.raises(DomainError):
            neutral_chart(-10.0, BETA, BETA, GridSpec((0, 1), (0, 1), 2, 2), gap=0.0)

    def test_progress_callback(self):
        seen = []
        neutral_chart(-10.0, BETA, 0.0, GridSpec((-0.01, 0.01), (-0.01, 0.01), 1, 2),
                      jobs=1, progress=lambda k, n: seen.append((k, n)))
        assert seen == [(1, 2), (2, 2)]


class TestRetardedChart:
    def test_rows_share_verdict(self):
        grid = GridSpec((-0.02, -0.001), (0.0, 0.25), 3, 2)
        rows = retarded_chart(-10.0, BETA, grid, jobs=1)
        assert [row[0].y for row in rows] == [0.0, 0.25]
        uncontrolled, controlled = rows
        assert all(c.verdict is Verdict.UNSTABLE for c in uncontrolled)
        assert all(c.verdict is Verdict.STABLE for c in controlled)
        assert len({c.verdict for c in controlled}) == 1

    def test_needs_negative_lambda(self):
        with pytest.raises(DomainError):
            retarded_chart(-10.0, BETA, GridSpec((-0.1, 0.1), (0.0, 0.5), 2, 2))


class TestHopfCurveSamples:
    def test_skips_excluded_phi(self):
        samples = hopf_curve_samples(RetardedControl(0.1, 0.3, 1.0), [0.0, TWO_PI])
        assert len(samples) == 1
        assert samples[0].tau == pytest.approx(TWO_PI)
        assert samples[0].occurs


class TestCrossValidation:
    def test_pick(self):
        assert _pick(2, 5) == [0, 1]
        assert _pick(10, 3)[0] == 0 and _pick(10, 3)[-1] == 9

    def test_kind_checked(self):
        with pytest.raises(DomainError):
            cross_validate([[]], kind="ode", gamma=-10.0, beta1=BETA)

    def test_undetermined_cells_are_skipped(self):
        cells = [[RegionCell(0.0, 0.0, True, None, None, None, Verdict.UNDETERMINED)]]
        cv = cross_validate(cells, kind="neutral", gamma=-10.0, beta1=BETA, jobs=1)
        assert cv.outcomes == []
        assert cv.agreement is None

    def test_retarded_cells_simulate_at_their_own_lambda(self, monkeypatch):
        seen = []

        def record(args):
            seen.append(args)
            return StabilityVerdict.CONVERGING

        monkeypatch.setattr("pyragaslab.charts._simulate_cell", record)
        cells = [[RegionCell(-0.02, 0.25, True, None, None, None, Verdict.STABLE),
                  RegionCell(-0.03, 0.25, True, None, None, None, Verdict.STABLE)]]
        cv = cross_validate(cells, kind="retarded", gamma=-10.0, beta1=BETA, jobs=1)
        assert [args[6] for args in seen] == [-0.02, -0.03]
        assert cv.agreement == 1.0

    @pytest.mark.slow
    def test_retarded_agreement(self):
        grid = GridSpec((-0.006, -0.004), (0.0, 0.25), 1, 2)
        rows = retarded_chart(-10.0, BETA, grid, jobs=1)
        cv = cross_validate(rows, kind="retarded", gamma=-10.0, beta1=BETA, sample=2, jobs=1)
        assert cv.compared >= 1
        assert cv.agreement == 1.0
