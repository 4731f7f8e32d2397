"""Spectral zeta functions and zeta-regularized determinants.

Two independent routes are provided:

* the Mellin split of a heat trace at ``t = 1`` into short-time
  coefficients plus the remainders ``psi1`` (on ``(0, 1]``) and ``psi2``
  (on ``[1, inf)``), which works for any :class:`~etalab.torus.TraceFunction`;
* the Epstein zeta function of the flat torus, continued through the
  incomplete-gamma form of the same split with Poisson resummation on
  ``(0, 1]``, whose derivative at ``s = 0`` is taken term by term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import exp1

from ._config import max_terms
from .exceptions import ConvergenceFailure, PolePoint, PrecisionLoss, QuadratureFailure
from .torus import (
    Normalization,
    TraceFunction,
    _as_tau,
    _gaussian_cutoff,
    _lattice_norms,
    lattice_geometry,
    torus_trace,
)

__all__ = [
    "ExpansionSource",
    "AsymptoticExpansion",
    "ZetaMethod",
    "ZetaResult",
    "A0ScanReport",
    "POLE_TERM_SIGN",
    "extract_heat_coefficients",
    "torus_expansion",
    "default_fit_grid",
    "mellin_b_coefficients",
    "epstein_zeta",
    "regularized_determinant_epstein",
    "regularized_determinant_mellin",
    "a0_constancy_scan",
]

EULER_GAMMA = float(np.euler_gamma)
_EPS = float(np.finfo(float).eps)

#: Sign of ``sum_k a_{-k}/k`` in ``b1 = gamma a0 + sign * sum_k a_{-k}/k + psi1 + psi2``.
#: ``1/Gamma(s) = s + gamma s^2 + ...`` turns each pole term ``a_{-k}/(s-k)``
#: into ``-a_{-k}/k`` in ``zeta'(0)``; the Epstein route confirms it at tau = i
#: (see tests/test_zeta.py::test_pole_term_sign_pinned_by_epstein).
POLE_TERM_SIGN = -1.0


class ExpansionSource(enum.Enum):
    ANALYTIC = "analytic"
    FITTED = "fitted"


@dataclass(frozen=True)
class AsymptoticExpansion:
    """``Theta(t) - zero_modes ~ sum_{k=0}^{order} a_{-k} t^{-k}`` as ``t -> 0``.

    ``coefficients[k]`` is the coefficient of ``t^{-k}``.
    """

    coefficients: dict
    order: int
    fit_residual: float = 0.0
    source: ExpansionSource = ExpansionSource.ANALYTIC

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        missing = [k for k in range(self.order + 1) if k not in self.coefficients]
        if missing:
            raise ValueError(f"missing coefficients for k={missing}")
        if self.fit_residual < 0:
            raise ValueError("fit_residual must be >= 0")
        if self.source is ExpansionSource.ANALYTIC and self.fit_residual != 0:
            raise ValueError("analytic expansions carry no fit residual")

    def a(self, k: int) -> float:
        return float(self.coefficients.get(k, 0.0))

    def singular_part(self, t: float) -> float:
        return sum(self.a(k) * t ** (-k) for k in range(self.order + 1))


class ZetaMethod(enum.Enum):
    MELLIN_SPLIT = "MellinSplit"
    EPSTEIN_ANALYTIC = "EpsteinAnalytic"


@dataclass(frozen=True)
class ZetaResult:
    """Values at ``s = 0`` of a spectral zeta function and the determinant.

    ``psi1``, ``psi2`` and ``constant_block`` (``gamma a0 - sum a_{-k}/k``)
    are only produced by the Mellin route.
    """

    zeta_at_0: float
    zeta_prime_at_0: float
    b0: float
    b1: float
    determinant: float
    method: ZetaMethod
    psi1: float | None = None
    psi2: float | None = None
    constant_block: float | None = None

    def as_dict(self) -> dict:
        return {
            "zeta_at_0": self.zeta_at_0,
            "zeta_prime_at_0": self.zeta_prime_at_0,
            "b0": self.b0,
            "b1": self.b1,
            "determinant": self.determinant,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "constant_block": self.constant_block,
            "method": self.method.value,
        }


# ---------------------------------------------------------------------------
# short-time coefficients


def _eval_trace(trace: TraceFunction, t: float, tol: float, zero_modes: int = 0) -> float:
    """``trace(t) - zero_modes``, relaxing ``tol`` when rounding dominates."""
    for _ in range(12):
        try:
            return trace.evaluate_positive(t, tol, zero_modes)[0]
        except PrecisionLoss:
            tol *= 10.0
    raise PrecisionLoss(f"trace cannot be evaluated at t={t:.3g}")


def extract_heat_coefficients(trace: TraceFunction, order: int, zero_modes: int,
                              t_grid, tol: float = 1e-8) -> AsymptoticExpansion:
    """Least-squares fit of ``Theta(t) - zero_modes`` by ``sum_{k<=order} a_{-k} t^{-k}``.

    Rows are scaled by ``t^order`` so the fit is a polynomial fit in ``t``.
    ``fit_residual`` is the RMS of the unscaled residuals; above ``tol`` the
    expansion is rejected with :class:`ConvergenceFailure`.
    """
    if order < 0 or int(order) != order:
        raise ValueError("order must be a nonnegative integer")
    if zero_modes < 0:
        raise ValueError("zero_modes must be >= 0")
    t = np.asarray(sorted(float(x) for x in t_grid))
    if t.size < order + 2 or np.any(t <= 0):
        raise ValueError("t_grid needs more positive points than fitted coefficients")
    if t[-1] > 0.1 or t[-1] / t[0] < 100.0 * (1 - 1e-12):
        raise ValueError("t_grid must lie below 0.1 and span at least two decades")
    values = np.array([_eval_trace(trace, ti, 1e-13, zero_modes) for ti in t])
    powers = np.arange(order + 1)
    design = t[:, None] ** (-powers[None, :].astype(float))
    scale = t ** order
    coef, *_ = np.linalg.lstsq(design * scale[:, None], values * scale, rcond=None)
    resid = values - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if rms > tol:
        raise ConvergenceFailure(
            f"heat-trace fit residual {rms:.3e} exceeds {tol:.1e}; wrong order or bad grid")
    return AsymptoticExpansion({int(k): float(c) for k, c in zip(powers, coef)},
                               int(order), rms, ExpansionSource.FITTED)


def default_fit_grid(tau, norm=Normalization.INDUCED, points: int = 24) -> np.ndarray:
    """Two-decade log grid below the time where the shortest period starts to show.

    The first non-constant Poisson term is ``exp(-l^2 / 4t)`` for the shortest
    period ``l``; the grid stops where that term is ``e^{-40}``.
    """
    geom = lattice_geometry(tau, norm)
    l2 = geom.shortest2 * geom.period_scale2
    t_hi = min(0.01, l2 / 160.0)
    return np.geomspace(t_hi / 100.0, t_hi, points)


def torus_expansion(tau, norm=Normalization.INDUCED, zero_modes: int = 1) -> AsymptoticExpansion:
    """Exact small-time expansion of a flat torus: ``Area/(4 pi t) - zero_modes``."""
    geom = lattice_geometry(tau, norm)
    return AsymptoticExpansion({1: geom.area / (4.0 * math.pi), 0: -float(zero_modes)}, 1)


# ---------------------------------------------------------------------------
# Mellin split


def _psi1(trace, expansion, zero_modes, tol):
    def h(t):
        sing = expansion.singular_part(t)
        return _eval_trace(trace, t, 1e-14, zero_modes) - sing

    def noise(t):
        mag = sum(abs(expansion.a(k)) * t ** (-k) for k in range(expansion.order + 1))
        return 64.0 * _EPS * (mag + zero_modes + 1.0)

    # walk down t = 2^{-j} until h is negligible (two consecutive points)
    delta, hd = 1.0, h(1.0)
    small_run = 0
    for j in range(1, 200):
        t = 2.0 ** (-j)
        ht = h(t)
        if abs(ht) <= max(0.01 * tol, 4.0 * noise(t)):
            small_run += 1
        else:
            small_run = 0
        delta, hd = t, ht
        if small_run >= 2:
            break
    # beyond delta, h(t) ~ a_1 t, so int_0^delta h(t) dt/t ~ h(delta)
    value, err = integrate.quad(lambda u: h(math.exp(u)), math.log(delta), 0.0,
                                epsabs=0.1 * tol, epsrel=1e-13, limit=500)
    if err > tol:
        raise QuadratureFailure(f"psi1 quadrature error {err:.2e} > {tol:.1e}")
    return value + hd


def _psi2(trace, zero_modes, tol):
    def f(t):
        return _eval_trace(trace, t, 1e-15 + 1e-3 * tol, zero_modes)

    if trace.gap is None:
        f1, f2 = f(50.0), f(100.0)
        if f1 <= 0 or f2 <= 0:
            gap = 1.0
        else:
            gap = max(math.log(f1 / f2) / 50.0, 1e-6) * 0.5
    else:
        gap = trace.gap
    # Theta'(t) <= Theta'(T) exp(-gap (t - T)) for t >= T
    T = 1.0
    for _ in range(200):
        fT = f(T)
        if abs(fT) / (gap * T) < 0.01 * tol:
            break
        T *= 1.5
    else:
        raise QuadratureFailure("psi2: could not certify the large-time tail")
    tail = abs(f(T)) / (gap * T)
    if T == 1.0:
        return tail
    value, err = integrate.quad(lambda u: f(math.exp(u)), 0.0, math.log(T),
                                epsabs=0.1 * tol, epsrel=1e-13, limit=500)
    if err > tol:
        raise QuadratureFailure(f"psi2 quadrature error {err:.2e} > {tol:.1e}")
    return value + tail


def mellin_b_coefficients(trace: TraceFunction, expansion: AsymptoticExpansion,
                          zero_modes: int, tol: float = 1e-10) -> ZetaResult:
    """``zeta(s) = b0 + b1 s + O(s^2)`` from the Mellin split of the heat trace.

    ``psi1 = int_0^1 (Theta' - sum_k a_{-k} t^{-k}) dt/t`` and
    ``psi2 = int_1^inf Theta' dt/t`` with ``Theta' = Theta - zero_modes``;
    ``b0 = a0`` and ``b1 = gamma a0 - sum_{k>=1} a_{-k}/k + psi1 + psi2``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    psi1 = _psi1(trace, expansion, zero_modes, tol)
    psi2 = _psi2(trace, zero_modes, tol)
    a0 = expansion.a(0)
    pole = sum(expansion.a(k) / k for k in range(1, expansion.order + 1))
    block = EULER_GAMMA * a0 + POLE_TERM_SIGN * pole
    b1 = block + psi1 + psi2
    return ZetaResult(zeta_at_0=a0, zeta_prime_at_0=b1, b0=a0, b1=b1,
                      determinant=math.exp(-b1), method=ZetaMethod.MELLIN_SPLIT,
                      psi1=psi1, psi2=psi2, constant_block=block)


def regularized_determinant_mellin(tau, norm=Normalization.INDUCED, tol: float = 1e-10,
                                   expansion: AsymptoticExpansion | None = None) -> ZetaResult:
    """Mellin route for a flat torus; uses a fitted expansion unless one is given."""
    tau = _as_tau(tau)
    trace = torus_trace(tau, norm)
    if expansion is None:
        expansion = extract_heat_coefficients(trace, 1, 1, default_fit_grid(tau, norm))
    return mellin_b_coefficients(trace, expansion, 1, tol)


# ---------------------------------------------------------------------------
# Epstein route


def _split_norms(tau, norm, tol, q_direct=0.0, q_dual=0.0):
    """Lattice norms for both halves of the split, each truncated for ``tol``.

    Terms are bounded by ``exp(-x)`` once ``x >= 2q + 2`` (``q`` is the
    polynomial growth of the incomplete gamma integrand), so the Gaussian
    lattice tail bound applies.
    """
    geom = lattice_geometry(tau, norm)
    A = geom.area
    kappa = geom.eig_scale
    sigma = geom.period_scale2 / 4.0
    cap = max_terms()
    r2_direct = max(_gaussian_cutoff(kappa, 0.25 * tol, geom), (2 * q_direct + 2) / kappa)
    r2_dual = max(_gaussian_cutoff(sigma, 0.25 * tol * 4 * math.pi / A, geom),
                  (2 * q_dual + 2) / sigma)
    direct = _lattice_norms(geom, r2_direct, cap)[1:] * kappa
    dual = _lattice_norms(geom, r2_dual, cap)[1:] * sigma
    return geom, direct, dual


def epstein_zeta(tau, norm=Normalization.INDUCED, s: complex = 2.0,
                 tol: float = 1e-12) -> complex:
    """Spectral zeta ``sum' lambda^{-s}`` of the torus, continued to all ``s != 1``.

    ``Gamma(s) zeta(s) = -1/s + A/(4 pi (s-1)) + sum' E_{1-s}(lambda)
    + A/(4 pi) sum' E_s(|v|^2/4)`` with the generalized exponential integral
    ``E_p(x) = int_1^inf u^{-p} e^{-xu} du``.
    """
    s = complex(s)
    if s == 1:
        raise PolePoint("the torus zeta function has a simple pole at s = 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    rg = mpmath.rgamma(s)
    inner_tol = tol / max(1.0, abs(complex(rg)))
    geom, direct, dual = _split_norms(tau, norm, inner_tol,
                                      q_direct=max(0.0, s.real - 1.0),
                                      q_dual=max(0.0, -s.real))
    A = geom.area
    with mpmath.workdps(25):
        sm = mpmath.mpf(s.real) if s.imag == 0 else mpmath.mpc(s)
        sd = mpmath.fsum(mpmath.expint(1 - sm, mpmath.mpf(float(x))) for x in direct[::-1])
        sp = mpmath.fsum(mpmath.expint(sm, mpmath.mpf(float(x))) for x in dual[::-1])
        bracket = A / (4 * mpmath.pi * (sm - 1)) + sd + A / (4 * mpmath.pi) * sp
        value = -mpmath.rgamma(sm + 1) + mpmath.rgamma(sm) * bracket
    return complex(value)


def regularized_determinant_epstein(tau, norm=Normalization.INDUCED,
                                    tol: float = 1e-13) -> ZetaResult:
    """``exp(-zeta'(0))`` with ``zeta'(0) = -gamma - A/(4 pi) + sum' E_1(lambda)
    + A/(4 pi) sum' e^{-c}/c``, ``c = |v|^2/4``: the split representation
    differentiated term by term, no numerical differentiation."""
    geom, direct, dual = _split_norms(tau, norm, tol)
    A = geom.area
    s_direct = math.fsum(exp1(direct)[::-1])
    s_dual = math.fsum((np.exp(-dual) / dual)[::-1])
    zp = -EULER_GAMMA - A / (4.0 * math.pi) + s_direct + A / (4.0 * math.pi) * s_dual
    return ZetaResult(zeta_at_0=-1.0, zeta_prime_at_0=zp, b0=-1.0, b1=zp,
                      determinant=math.exp(-zp), method=ZetaMethod.EPSTEIN_ANALYTIC)


# ---------------------------------------------------------------------------
# constancy scan


@dataclass(frozen=True)
class A0ScanReport:
    taus: tuple
    a0: tuple
    a_minus1: tuple
    residuals: tuple
    mean_a0: float
    max_deviation: float
    mean_a_minus1: float
    max_deviation_a_minus1: float
    threshold: float = 1e-4
    passed: bool = field(default=False)

    def as_rows(self) -> list:
        return [
            {"tau_re": t.re, "tau_im": t.im, "a0": a, "a_m1": b, "residual": r}
            for t, a, b, r in zip(self.taus, self.a0, self.a_minus1, self.residuals)
        ]


def a0_constancy_scan(tau_list, norm=Normalization.INDUCED, threshold: float = 1e-4,
                      zero_modes: int = 1) -> A0ScanReport:
    """Extract ``a0`` and ``a_{-1}`` on every torus and measure their spread."""
    taus = tuple(_as_tau(t) for t in tau_list)
    if not taus:
        raise ValueError("need at least one tau")
    a0s, am1s, res = [], [], []
    for tau in taus:
        exp_ = extract_heat_coefficients(torus_trace(tau, norm), 1, zero_modes,
                                         default_fit_grid(tau, norm))
        a0s.append(exp_.a(0))
        am1s.append(exp_.a(1))
        res.append(exp_.fit_residual)
    mean0 = math.fsum(a0s) / len(a0s)
    mean1 = math.fsum(am1s) / len(am1s)
    dev0 = max(abs(a - mean0) for a in a0s)
    dev1 = max(abs(a - mean1) for a in am1s)
    return A0ScanReport(taus, tuple(a0s), tuple(am1s), tuple(res), mean0, dev0,
                        mean1, dev1, threshold, dev0 < threshold)
