"""Tests for model — parameters, right-hand sides, orbit and curves."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pyragaslab.errors import DenominatorZero, DomainError
from pyragaslab.model import (
    CurveKind,
    ModelParams,
    NeutralControl,
    NonlinearCoupling,
    RetardedControl,
    control_on_pyragas_curve,
    controlled_rhs,
    curve_point,
    equilibrium_eigenvalues,
    neutral_rhs,
    periodic_orbit,
    real_form,
    real_form_rhs,
    uncontrolled_rhs,
    variational_rhs,
)

angles = st.floats(min_value=-math.pi + 1e-9, max_value=math.pi)
gains = st.floats(min_value=-2.0, max_value=2.0)
small_complex = st.complex_numbers(max_magnitude=2.0)


class TestParams:
    def test_linear_and_cubic(self):
        p = ModelParams(-0.5, 3.0)
        assert p.linear == complex(-0.5, 1.0)
        assert p.cubic == complex(1.0, 3.0)

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            ModelParams(float("nan"), 0.0)

    def test_angle_range(self):
        RetardedControl(0.1, math.pi, 1.0)
        with pytest.raises(DomainError):
            RetardedControl(0.1, -math.pi, 1.0)
        with pytest.raises(DomainError):
            RetardedControl(0.1, 4.0, 1.0)

    def test_tau_positive(self):
        with pytest.raises(DomainError):
            RetardedControl(0.1, 0.0, 0.0)

    def test_gain(self):
        c = RetardedControl(2.0, math.pi / 2, 1.0)
        assert abs(c.gain - 2j) < 1e-15

    def test_neutral_retarded_part(self):
        n = NeutralControl(0.3, 0.2, 0.1, -0.4, 5.0)
        assert n.retarded() == RetardedControl(0.3, 0.2, 5.0)
        assert n.denominator == 1 + n.gain2

    def test_frozen(self):
        p = ModelParams(0.0, 0.0)
        with pytest.raises(AttributeError):
            p.lam = 1.0


class TestRightHandSides:
    def test_uncontrolled_is_linear_plus_cubic(self):
        p = ModelParams(-0.2, 1.5)
        z = complex(0.3, -0.7)
        expected = (p.lam + 1j) * z + (1 + 1.5j) * abs(z) ** 2 * z
        assert abs(uncontrolled_rhs(z, p) - expected) < 1e-14

    def test_vectorised(self):
        p = ModelParams(-0.2, 1.5)
        z = np.array([0.1 + 0.2j, -0.3j])
        out = uncontrolled_rhs(z, p)
        assert out.shape == (2,)
        assert abs(out[1] - uncontrolled_rhs(-0.3j, p)) < 1e-15

    @given(small_complex, small_complex, gains, angles)
    def test_control_vanishes_on_equal_states(self, z, zd, K, beta):
        p = ModelParams(-0.1, 2.0)
        c = RetardedControl(K, beta, 1.0)
        assert abs(controlled_rhs(z, z, p, c) - uncontrolled_rhs(z, p)) < 1e-12

    @given(small_complex, small_complex, small_complex, gains, angles)
    def test_neutral_with_zero_derivative_gain_is_retarded(self, z, zd, fd, K, beta):
        p = ModelParams(-0.1, 2.0)
        n = NeutralControl(K, beta, 0.0, 0.0, 1.0)
        c = RetardedControl(K, beta, 1.0)
        assert abs(neutral_rhs(z, zd, fd, p, n) - controlled_rhs(z, zd, p, c)) < 1e-12

    def test_neutral_solves_for_derivative(self):
        p = ModelParams(-0.1, 2.0)
        n = NeutralControl(0.2, 0.3, 0.4, -0.5, 1.0)
        z, zd, fd = 0.4 + 0.1j, 0.2 - 0.3j, 0.5 + 0.5j
        dz = neutral_rhs(z, zd, fd, p, n)
        # ż = f(z) − K₁e^{iβ₁}(z − z_τ) − K₂e^{iβ₂}(ż − ż_τ)
        rhs = uncontrolled_rhs(z, p) - n.gain1 * (z - zd) - n.gain2 * (dz - fd)
        assert abs(dz - rhs) < 1e-13

    def test_neutral_denominator_zero(self):
        n = NeutralControl(0.0, 0.0, 1.0, math.pi, 1.0)
        with pytest.raises(DenominatorZero):
            neutral_rhs(0.1, 0.1, 0.0, ModelParams(-0.1, 0.0), n)

    def test_variational_real_linear(self):
        p = ModelParams(-0.3, 2.0)
        # Imaginary (phase) perturbations are neutral without control.
        assert variational_rhs(1j, 0j, p) == 0
        assert abs(variational_rhs(1.0 + 0j, 0j, p) - 0.6 * (1 + 2j)) < 1e-15

    def test_variational_control_term(self):
        p = ModelParams(-0.3, 2.0)
        c = RetardedControl(0.5, 0.0, 1.0)
        assert abs(variational_rhs(1j, 1j, p, c)) < 1e-15
        assert abs(variational_rhs(1j, 0j, p, c) - (-0.5j)) < 1e-15


class TestPeriodicOrbit:
    def test_orbit_quantities(self):
        orbit = periodic_orbit(ModelParams(-0.005, -10.0))
        assert orbit.radius == pytest.approx(math.sqrt(0.005))
        assert orbit.omega == pytest.approx(0.95)
        assert orbit.period == pytest.approx(2 * math.pi / 0.95)

    def test_orbit_solves_uncontrolled(self):
        p = ModelParams(-0.04, 3.0)
        orbit = periodic_orbit(p)
        for t in (0.0, 0.7, 5.3):
            assert abs(orbit.derivative(t) - uncontrolled_rhs(orbit.value(t), p)) < 1e-14

    def test_orbit_is_periodic(self):
        orbit = periodic_orbit(ModelParams(-0.2, 1.0))
        assert abs(orbit.value(orbit.period) - orbit.value(0.0)) < 1e-14

    def test_vector_value(self):
        orbit = periodic_orbit(ModelParams(-0.2, 1.0))
        vals = orbit.value(np.array([0.0, 1.0]))
        assert vals.shape == (2,)

    def test_needs_negative_lambda(self):
        with pytest.raises(DomainError):
            periodic_orbit(ModelParams(0.0, 0.0))

    def test_needs_positive_frequency(self):
        with pytest.raises(DomainError):
            periodic_orbit(ModelParams(-0.5, -4.0))

    @given(st.floats(min_value=-0.09, max_value=-1e-4), gains, angles)
    def test_pyragas_control_keeps_orbit(self, lam, K, beta):
        p = ModelParams(lam, -10.0)
        c = control_on_pyragas_curve(p, K, beta)
        orbit = periodic_orbit(p)
        for t in (0.0, 1.3):
            z = orbit.value(t)
            zd = orbit.value(t - c.tau)
            assert abs(controlled_rhs(z, zd, p, c) - orbit.derivative(t)) < 1e-12


class TestCurves:
    def test_pyragas_point(self):
        lam, tau = curve_point(CurveKind.PYRAGAS, -0.01, gamma=-10.0)
        assert lam == -0.01
        assert tau == pytest.approx(2 * math.pi / 0.9)

    def test_pyragas_endpoint_is_hopf_point(self):
        assert curve_point(CurveKind.PYRAGAS, 0.0, gamma=-10.0) == (0.0, 2 * math.pi)

    def test_pyragas_rejects_positive_theta(self):
        with pytest.raises(DomainError):
            curve_point(CurveKind.PYRAGAS, 0.01, gamma=1.0)

    def test_extended_allows_positive_theta(self):
        lam, tau = curve_point(CurveKind.EXTENDED_PYRAGAS, 0.01, gamma=-10.0)
        assert tau == pytest.approx(2 * math.pi / 1.1)

    def test_extended_excludes_far_side(self):
        with pytest.raises(DomainError):
            curve_point(CurveKind.EXTENDED_PYRAGAS, 2.0, gamma=1.0)
        with pytest.raises(DomainError):
            curve_point(CurveKind.EXTENDED_PYRAGAS, 1.0, gamma=1.0)

    def test_hopf_curve_passes_pyragas_point(self):
        c = RetardedControl(0.3, 0.4, 1.0)
        lam, tau = curve_point(CurveKind.HOPF, 2 * math.pi, control=c)
        assert abs(lam) < 1e-15
        assert tau == pytest.approx(2 * math.pi)

    def test_hopf_curve_needs_control(self):
        with pytest.raises(DomainError):
            curve_point(CurveKind.HOPF, 1.0)
        with pytest.raises(DomainError):
            curve_point(CurveKind.HOPF, 0.0, control=RetardedControl(0.3, 0.4, 1.0))

    @given(gains, angles, st.floats(min_value=0.5, max_value=12.0))
    def test_hopf_curve_root_on_axis(self, K, beta, phi):
        c = RetardedControl(K, beta, 1.0)
        try:
            lam, tau = curve_point(CurveKind.HOPF, phi, control=c)
        except DomainError:
            return
        if tau <= 0:
            return
        omega = phi / tau
        value = 1j * omega - (lam + 1j) + c.gain * (1 - cmath.exp(-1j * phi))
        assert abs(value) < 1e-9 * max(1.0, abs(omega), abs(lam))


class TestRealForm:
    def test_matches_complex_field(self):
        p = ModelParams(-0.1, 2.0)
        c = RetardedControl(0.4, 0.7, 2.0)
        z, zd = 0.3 - 0.2j, -0.1 + 0.5j
        dz = controlled_rhs(z, zd, p, c)
        dx = real_form_rhs(np.array([z.real, z.imag]), np.array([zd.real, zd.imag]), p, c)
        assert dx == pytest.approx([dz.real, dz.imag], abs=1e-14)

    def test_coupling(self):
        coupling = NonlinearCoupling.from_gamma(-3.0)
        assert coupling.gamma == -3.0
        assert coupling.C[0, 1] == 3.0

    def test_undelayed_limit(self):
        p = ModelParams(-0.1, 2.0)
        A, B, _ = real_form(p, RetardedControl(0.4, 0.7, 2.0))
        assert np.allclose(A + B, [[-0.1, -1.0], [1.0, -0.1]])

    def test_equilibrium_eigenvalues(self):
        ev = equilibrium_eigenvalues(ModelParams(-0.3, 5.0))
        assert ev == pytest.approx([-0.3 - 1j, -0.3 + 1j])
