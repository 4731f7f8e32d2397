import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from etalab.exceptions import ConvergenceFailure
from etalab.torus import (
    Normalization,
    TauPoint,
    crossover_time,
    eigenvalues,
    heat_trace,
    heat_trace_direct,
    heat_trace_poisson,
    lattice_geometry,
    torus_trace,
    trace_from_eigenvalues,
)

PI2 = math.pi ** 2
GRID = [TauPoint(0.0, 1.0), TauPoint(0.0, 2.0), TauPoint(0.5, 0.9), TauPoint(-0.3, 1.4),
        TauPoint(0.1, 3.0), TauPoint(0.45, 0.6), TauPoint(0.2, 1.1), TauPoint(-0.5, 0.87),
        TauPoint(0.33, 2.2), TauPoint(0.0, 0.7)]

taus = st.builds(TauPoint, st.floats(-0.5, 0.5), st.floats(0.6, 3.0))


def brute_eigenvalues(tau: complex, r: int = 6):
    y = tau.imag
    vals = [4 * PI2 * abs(m * tau - n) ** 2 / y ** 2
            for m, n in itertools.product(range(-r, r + 1), repeat=2)]
    return sorted(vals)


class TestTauPoint:
    def test_rejects_lower_half_plane(self):
        with pytest.raises(ValueError):
            TauPoint(0.0, 0.0)
        with pytest.raises(ValueError):
            TauPoint(0.3, -1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TauPoint(float("nan"), 1.0)

    def test_from_complex_round_trip(self):
        t = TauPoint.from_complex(0.25 + 1.5j)
        assert t.z == 0.25 + 1.5j


class TestEigenvalues:
    def test_square_torus(self):
        got = eigenvalues(1j, Normalization.INDUCED, 6).eigenvalues
        np.testing.assert_allclose(got, [0, 4 * PI2, 4 * PI2, 4 * PI2, 4 * PI2, 8 * PI2],
                                   rtol=1e-14)

    def test_tall_torus(self):
        got = eigenvalues(2j, Normalization.INDUCED, 2).eigenvalues
        np.testing.assert_allclose(got, [0, PI2], rtol=1e-14)

    def test_unit_volume_agrees_at_i(self):
        got = eigenvalues(1j, Normalization.UNIT_VOLUME, 2).eigenvalues
        np.testing.assert_allclose(got, [0, 4 * PI2], rtol=1e-14)

    def test_rejects_zero_count(self):
        with pytest.raises(ValueError):
            eigenvalues(1j, Normalization.INDUCED, 0)

    @pytest.mark.parametrize("tau", [1j, 0.5 + 0.9j, -0.37 + 0.61j, 0.2 + 2.5j])
    def test_matches_brute_force(self, tau):
        got = eigenvalues(tau, Normalization.INDUCED, 25).eigenvalues
        np.testing.assert_allclose(got, brute_eigenvalues(tau)[:25], rtol=1e-12)

    @given(taus)
    def test_structure(self, tau):
        vals = np.array(eigenvalues(tau, Normalization.INDUCED, 41).eigenvalues)
        assert vals[0] == 0 and np.all(vals[1:] > 0)
        assert np.all(np.diff(vals) >= 0)
        # +-(m, n) pairs: positive eigenvalues come in pairs
        pos = vals[1:]
        assert np.allclose(pos[0::2], pos[1::2], rtol=1e-12)

    @given(taus)
    def test_unit_volume_is_scaled_induced(self, tau):
        a = np.array(eigenvalues(tau, Normalization.INDUCED, 9).eigenvalues)
        b = np.array(eigenvalues(tau, Normalization.UNIT_VOLUME, 9).eigenvalues)
        np.testing.assert_allclose(b, a * tau.im, rtol=1e-12)


class TestHeatTrace:
    def test_direct_at_t1(self):
        value = heat_trace_direct(1j, Normalization.INDUCED, 1.0, 1e-15)
        assert value - 1.0 == pytest.approx(4 * math.exp(-4 * PI2), rel=1e-6)

    def test_direct_large_t_is_zero_mode(self):
        assert heat_trace_direct(1j, Normalization.INDUCED, 50.0, 1e-15) == 1.0

    def test_direct_small_t_fails(self):
        with pytest.raises(ConvergenceFailure):
            heat_trace_direct(1j, Normalization.INDUCED, 0.001, 1e-12)

    def test_poisson_large_t_fails(self):
        with pytest.raises(ConvergenceFailure):
            heat_trace_poisson(1j, Normalization.INDUCED, 100.0, 1e-12)

    def test_poisson_small_t(self):
        value = heat_trace_poisson(1j, Normalization.INDUCED, 0.001, 1e-12)
        assert value == pytest.approx(1 / (4 * math.pi * 0.001), abs=1e-12)

    def test_poisson_tall_torus(self):
        value = heat_trace_poisson(2j, Normalization.INDUCED, 0.01, 1e-12)
        assert value == pytest.approx(2 / (4 * math.pi * 0.01), rel=1e-6)

    def test_overlap_at_half(self):
        d = heat_trace_direct(1j, Normalization.INDUCED, 0.5, 1e-13)
        p = heat_trace_poisson(1j, Normalization.INDUCED, 0.5, 1e-13)
        h = heat_trace(1j, Normalization.INDUCED, 0.5, 1e-12)
        assert abs(d - p) < 1e-12
        assert abs(h - d) < 1e-12 and abs(h - p) < 1e-12

    def test_dispatch_small_t(self):
        value = heat_trace(1j, Normalization.INDUCED, 1e-6, 1e-10)
        assert value == pytest.approx(1 / (4 * math.pi * 1e-6), rel=1e-12)

    def test_translation_invariance(self):
        a = heat_trace(1j, Normalization.INDUCED, 0.5, 1e-12)
        b = heat_trace(5 + 1j, Normalization.INDUCED, 0.5, 1e-12)
        assert a == pytest.approx(b, abs=1e-12)

    @pytest.mark.parametrize("tau", GRID)
    def test_poisson_identity_on_grid(self, tau):
        for norm in Normalization:
            for k in range(-3, 2):
                t = 10.0 ** k
                try:
                    d = heat_trace_direct(tau, norm, t, 1e-12)
                    p = heat_trace_poisson(tau, norm, t, 1e-12)
                except ConvergenceFailure:
                    continue
                assert abs(d - p) <= 1e-10 * (1 + d)

    @given(taus)
    def test_monotone_in_t(self, tau):
        ts = np.geomspace(1e-3, 10.0, 30)
        vals = np.array([heat_trace(tau, Normalization.INDUCED, t, 1e-12) for t in ts])
        diffs = np.diff(vals)
        assert np.all(diffs <= 0)
        # strict wherever the nonzero modes are resolvable in double precision
        assert np.all(diffs[vals[1:] - 1.0 > 1e-8] < 0)

    @given(taus, st.floats(0.01, 10.0))
    def test_unit_volume_modular_invariance(self, tau, t):
        z = tau.z
        base = heat_trace(z, Normalization.UNIT_VOLUME, t, 1e-12)
        assert heat_trace(z + 1, Normalization.UNIT_VOLUME, t, 1e-12) == pytest.approx(
            base, abs=1e-10 * (1 + base))
        assert heat_trace(-1 / z, Normalization.UNIT_VOLUME, t, 1e-12) == pytest.approx(
            base, abs=1e-10 * (1 + base))

    @pytest.mark.parametrize("tau", [1j, 0.3 + 1.7j, 0.5 + 0.6j])
    def test_leading_term(self, tau):
        t = 1e-6
        area = tau.imag
        value = heat_trace(tau, Normalization.INDUCED, t, 1e-10)
        assert t * value == pytest.approx(area / (4 * math.pi), rel=1e-6)
        # removing the zero mode shifts the product by exactly t
        assert t * (value - 1) == pytest.approx(area / (4 * math.pi) - t, rel=1e-9)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            heat_trace(1j, Normalization.INDUCED, -1.0, 1e-12)
        with pytest.raises(ValueError):
            heat_trace(1j, Normalization.INDUCED, 1.0, 0.0)


class TestTraceFunction:
    @given(taus, st.floats(1e-4, 20.0))
    def test_error_bound_within_tol(self, tau, t):
        trace = torus_trace(tau, Normalization.INDUCED)
        value, err = trace.evaluate(t, 1e-10)
        assert err <= 1e-10 and value >= 1.0

    def test_gap_and_area(self):
        trace = torus_trace(2j, Normalization.INDUCED)
        assert trace.gap == pytest.approx(PI2, rel=1e-14)
        assert trace.area == 2.0

    def test_rescaled_trace(self):
        trace = trace_from_eigenvalues([0.0, 1.0, 3.0])
        scaled = trace.rescaled(2.0)
        assert scaled(0.7) == pytest.approx(1 + math.exp(-1.4) + math.exp(-4.2), rel=1e-15)
        assert scaled.gap == 2.0

    def test_eigenvalue_trace_validation(self):
        with pytest.raises(ValueError):
            trace_from_eigenvalues([])
        with pytest.raises(ValueError):
            trace_from_eigenvalues([-1.0, 2.0])


def test_crossover_time_and_geometry():
    geom = lattice_geometry(0.5 + 0.9j, Normalization.INDUCED)
    assert geom.area == pytest.approx(0.9)
    assert crossover_time(0.5 + 0.9j) == pytest.approx(0.9 / (4 * math.pi))
    assert lattice_geometry(0.5 + 0.9j, Normalization.UNIT_VOLUME).area == pytest.approx(1.0)


def test_normalization_parse():
    assert Normalization.parse("unit") is Normalization.UNIT_VOLUME
    assert Normalization.parse("Induced") is Normalization.INDUCED
    with pytest.raises(ValueError):
        Normalization.parse("flat")
