import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from etalab.exceptions import SingularFit
from etalab.kronecker import (
    CLASSICAL_EXPONENTS,
    STATED_EXPONENTS,
    KroneckerRecord,
    analytic_discriminant_l2,
    calibrate_discriminant_norm,
    default_tau_grid,
    fit_kronecker_exponents,
    kronecker_compare,
    kronecker_report,
    l2_norm_holomorphic_form,
    wp_curvature_check,
)
from etalab.modular import eta
from etalab.torus import Normalization, TauPoint
from etalab.zeta import regularized_determinant_epstein

TEN = default_tau_grid(2, 5)
taus = st.builds(TauPoint, st.floats(-0.5, 0.5), st.floats(0.8, 2.5))


def test_default_grid_shape():
    grid = default_tau_grid()
    assert len(grid) == 20
    assert len({(t.re, t.im) for t in grid}) == 20
    assert min(t.im for t in grid) == pytest.approx(0.8)


class TestCompare:
    def test_classical_ratio_constant(self):
        records = [kronecker_compare(t) for t in TEN]
        classical = np.array([r.ratio_classical for r in records])
        stated = np.array([r.ratio_stated for r in records])
        assert np.ptp(classical) / classical.mean() < 1e-6
        assert np.ptp(stated) / stated.mean() > 1e-2

    def test_translation(self):
        a, b = kronecker_compare(1j), kronecker_compare(1 + 1j)
        assert a.determinant == pytest.approx(b.determinant, rel=1e-13)
        assert a.ratio_classical == pytest.approx(b.ratio_classical, rel=1e-13)

    def test_cusp_asymptotics(self):
        # |eta(iy)|^4 ~ e^{-pi y / 3}: det(10i) ~ 100 e^{-10 pi / 3}
        rec = kronecker_compare(10j)
        assert rec.determinant == pytest.approx(100 * math.exp(-10 * math.pi / 3), rel=1e-12)
        assert rec.candidate_stated == pytest.approx(10 * math.exp(-10 * math.pi / 6), rel=1e-12)
        assert rec.ratio_classical == pytest.approx(1.0, rel=1e-12)

    def test_record_validation(self):
        with pytest.raises(ValueError):
            KroneckerRecord(TauPoint(0, 1), -1.0, 1.0, 1.0, 1.0, 1.0)


class TestFit:
    def test_induced_exponents(self):
        fit = fit_kronecker_exponents(default_tau_grid())
        assert fit.integer_exponents
        assert fit.rounded == CLASSICAL_EXPONENTS
        assert fit.C == pytest.approx(1.0, rel=1e-10)
        assert fit.rms_residual < 1e-8

    def test_unit_volume_shifts_alpha(self):
        ind = fit_kronecker_exponents(default_tau_grid())
        unit = fit_kronecker_exponents(default_tau_grid(), Normalization.UNIT_VOLUME)
        # det_unit = det_induced / Im tau since zeta(0) = -1
        assert unit.alpha == pytest.approx(ind.alpha - 1, abs=1e-8)
        assert unit.beta == pytest.approx(ind.beta, abs=1e-8)

    def test_fixed_im_is_singular(self):
        with pytest.raises(SingularFit):
            fit_kronecker_exponents([complex(x, 1.3) for x in np.linspace(-0.4, 0.4, 12)])

    def test_needs_ten_samples(self):
        with pytest.raises(ValueError):
            fit_kronecker_exponents(default_tau_grid(3, 3))

    def test_report(self):
        report = kronecker_report(fit_kronecker_exponents(default_tau_grid()))
        assert report["matches_classical_form"] and not report["matches_stated_form"]
        assert "(2, 4)" in report["discrepancy"]
        assert report["fitted_law"].startswith("det = ")
        assert STATED_EXPONENTS == (1, 2)


class TestL2:
    @pytest.mark.parametrize("tau,expected", [(1j, 1.0), (2j, 2.0), (0.5 + 0.25j, 0.25)])
    def test_holomorphic_form(self, tau, expected):
        assert l2_norm_holomorphic_form(tau) == expected

    def test_calibration(self):
        w, p, c = calibrate_discriminant_norm(default_tau_grid())
        assert (w, p) == (1.0, 1.0 / 6.0)
        assert c == pytest.approx(4 * math.pi ** 2, rel=1e-10)

    def test_invariance(self):
        z = 1 + 1.3j
        a = analytic_discriminant_l2(z).value
        b = analytic_discriminant_l2(-1 / z).value
        assert a == pytest.approx(b, rel=1e-9)

    @given(taus)
    def test_invariance_property(self, tau):
        z = tau.z
        base = analytic_discriminant_l2(z).value
        for other in (z + 1, -1 / z, (2 * z + 1) / (z + 1)):
            assert analytic_discriminant_l2(other).value == pytest.approx(base, rel=1e-9)

    def test_proportional_to_unit_determinant(self):
        ratios = []
        for t in TEN:
            norm = analytic_discriminant_l2(t)
            det = regularized_determinant_epstein(t, Normalization.UNIT_VOLUME).determinant
            ratios.append(norm.value / det)
            assert ratios[-1] == pytest.approx(norm.constant, rel=1e-6)
        assert np.ptp(ratios) / np.mean(ratios) < 1e-6

    def test_cusp_decay(self):
        assert analytic_discriminant_l2(10j).value < 1e-3 * analytic_discriminant_l2(1j).value

    def test_matches_eta_form(self):
        z = 0.2 + 1.4j
        value = analytic_discriminant_l2(z).value
        expected = z.imag * (2 * math.pi) ** 2 * abs(eta(z)) ** 4
        assert value == pytest.approx(expected, rel=1e-12)


class TestCurvature:
    def test_square(self):
        assert wp_curvature_check(1j) == pytest.approx(-0.5, rel=1e-5)

    def test_tall(self):
        assert wp_curvature_check(2j) == pytest.approx(-0.125, rel=1e-5)

    def test_translation(self):
        assert wp_curvature_check(1j) == pytest.approx(wp_curvature_check(0.5 + 1j), abs=1e-5)

    def test_scaled_constant_on_grid(self):
        values = [wp_curvature_check(t) * t.im ** 2 for t in default_tau_grid(2, 3)]
        assert np.ptp(values) < 1e-4
        assert np.mean(values) == pytest.approx(-0.5, abs=1e-4)

    def test_step_bounds(self):
        with pytest.raises(ValueError):
            wp_curvature_check(1j, h=1e-6)
