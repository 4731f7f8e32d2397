"""Classical modular quantities on the upper half plane.

Every q-series is summed at an SL2(Z)-reduced point, where
``|q| <= exp(-pi sqrt 3)``, and carried back with the transformation law of
the quantity in question.  Truncation orders come from geometric tail
bounds, never from fixed term counts.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._config import max_terms
from .exceptions import ConvergenceFailure, InvalidLambda, PrecisionLoss
from .torus import TauPoint, _as_tau, _lagrange_reduce

__all__ = [
    "QSeries",
    "ReductionResult",
    "reduce_to_fundamental_domain",
    "eta",
    "eisenstein_g2",
    "eisenstein_g3",
    "lattice_eisenstein",
    "discriminant_modular",
    "j_invariant",
    "theta_constants",
    "lambda_function",
    "algebraic_discriminant_lambda",
    "covering_j_from_lambda",
    "dedekind_sum",
    "eta_product_qseries",
    "eisenstein_qseries",
    "discriminant_qseries",
]

_MIN_TOL = 1e-15
_G2_FACTOR = 4.0 * math.pi ** 4 / 3.0     # 60 * 2 zeta(4)
_G3_FACTOR = 8.0 * math.pi ** 6 / 27.0    # 140 * 2 zeta(6)


@dataclass(frozen=True)
class QSeries:
    """A truncated q-series with its certified tail.

    ``half_nome`` flags that ``nome`` is ``exp(pi i tau)`` rather than
    ``exp(2 pi i tau)``.
    """

    nome: complex
    coefficients: tuple
    truncation_order: int
    tail_bound: float
    half_nome: bool = False

    def __post_init__(self):
        if not abs(self.nome) < 1:
            raise ValueError("|nome| must be < 1")

    def value(self) -> complex:
        total = 0j
        for c in reversed(self.coefficients):
            total = total * self.nome + complex(c)
        return total


@dataclass(frozen=True)
class ReductionResult:
    """``tau_reduced = (a tau + b) / (c tau + d)`` with ``matrix = ((a, b), (c, d))``.

    ``word`` lists the elementary moves applied in order: ``("T", k)`` for
    ``tau -> tau + k`` and ``("S", 0)`` for ``tau -> -1/tau``.
    """

    tau_reduced: TauPoint
    matrix: tuple
    word: tuple = ()


def _check_tol(tol):
    if not tol > 0:
        raise ValueError("tol must be positive")
    if tol < _MIN_TOL:
        raise PrecisionLoss(f"tol={tol:.1e} is below what double precision can certify")


def reduce_to_fundamental_domain(tau) -> ReductionResult:
    """Map ``tau`` into ``|Re tau| <= 1/2, |tau| >= 1`` by translations and inversions.

    Examples:
        >>> reduce_to_fundamental_domain(7 + 1j).matrix
        ((1, -7), (0, 1))
    """
    tau = _as_tau(tau)
    z = tau.z
    a, b, c, d = 1, 0, 0, 1
    word = []
    for _ in range(10_000):
        k = -math.floor(z.real + 0.5)
        if k:
            z = z + k
            a, b = a + k * c, b + k * d
            word.append(("T", k))
        if abs(z) < 1.0 - 1e-15:
            z = -1.0 / z
            a, b, c, d = -c, -d, a, b
            word.append(("S", 0))
            continue
        break
    else:  # pragma: no cover
        raise RuntimeError("fundamental domain reduction did not terminate")
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    return ReductionResult(TauPoint(z.real, z.imag), ((a, b), (c, d)), tuple(word))


# ---------------------------------------------------------------------------
# eta


def dedekind_sum(h: int, k: int) -> Fraction:
    """``s(h, k) = sum_{r=1}^{k-1} (r/k) ((h r / k))`` for ``k > 0``."""
    if k <= 0:
        raise ValueError("k must be positive")
    total = Fraction(0)
    for r in range(1, k):
        x = Fraction(h * r, k)
        frac = x - math.floor(x)
        if frac != 0:
            total += Fraction(r, k) * (frac - Fraction(1, 2))
    return total


def _series_order(aq: float, tol: float, growth) -> tuple:
    """Smallest N with ``sum_{n>N} growth(n) |q|^n`` certified below ``tol``."""
    cap = max_terms()
    n = 1
    while True:
        ratio = growth(n + 2) / growth(n + 1) * aq
        if ratio < 1:
            tail = growth(n + 1) * aq ** (n + 1) / (1.0 - ratio)
            if tail < tol:
                return n, tail
        n += 1
        if n > cap:
            raise ConvergenceFailure("q-series truncation order exceeds the term cap")


def _sigma(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def eta_product_qseries(q: complex, tol: float) -> QSeries:
    """``prod (1 - q^n) = sum_k (-1)^k q^{k(3k-1)/2}`` (pentagonal numbers)."""
    order, tail = _series_order(abs(q), tol, lambda n: 1.0)
    coeffs = [0] * (order + 1)
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            e = kk * (3 * kk - 1) // 2
            if e <= order:
                coeffs[e] = -1 if kk % 2 else 1
                hit = True
        if not hit:
            break
        k += 1
    return QSeries(q, tuple(coeffs), order, tail)


def eisenstein_qseries(weight: int, q: complex, tol: float) -> QSeries:
    """Normalized ``E4 = 1 + 240 sum sigma_3(n) q^n`` or ``E6 = 1 - 504 sum sigma_5(n) q^n``."""
    if weight == 4:
        c, p = 240, 3
    elif weight == 6:
        c, p = -504, 5
    else:
        raise ValueError("only weights 4 and 6 are supported")
    # sigma_p(n) <= zeta(p) n^p <= 1.21 n^p for p >= 3
    order, tail = _series_order(abs(q), tol, lambda n: abs(c) * 1.21 * n ** p)
    coeffs = [1] + [c * _sigma(n, p) for n in range(1, order + 1)]
    return QSeries(q, tuple(coeffs), order, tail)


def _eta_multiplier(matrix) -> complex:
    """Multiplier ``eps(gamma)`` of eta for ``gamma`` with ``c > 0``."""
    (a, b), (c, d) = matrix
    s = dedekind_sum(d, c)
    return cmath.exp(1j * math.pi * float(Fraction(a + d, 12 * c) - s))


def eta(tau, tol: float = 1e-13) -> complex:
    """Dedekind eta ``q^{1/24} prod (1 - q^n)``.

    The product is summed at the reduced point ``tau' = gamma tau`` and
    pulled back with the standard multiplier (Dedekind sums), so both the
    modulus and the phase are returned.
    """
    _check_tol(tol)
    tau = _as_tau(tau)
    red = reduce_to_fundamental_domain(tau)
    zr = red.tau_reduced.z
    q = cmath.exp(2j * math.pi * zr)
    eta_red = cmath.exp(2j * math.pi * zr / 24.0) * eta_product_qseries(q, tol * 0.1).value()
    (a, b), (c, d) = red.matrix
    if c == 0:
        # tau' = tau + b
        return eta_red * cmath.exp(-1j * math.pi * b / 12.0)
    # eta(gamma tau) = eps(gamma) sqrt(-i (c tau + d)) eta(tau)
    return eta_red / (_eta_multiplier(red.matrix) * cmath.sqrt(-1j * (c * tau.z + d)))


# ---------------------------------------------------------------------------
# Eisenstein series


def _e4_e6(zr: complex, tol: float) -> tuple:
    q = cmath.exp(2j * math.pi * zr)
    return (eisenstein_qseries(4, q, tol * 0.1).value(),
            eisenstein_qseries(6, q, tol * 0.1).value())


def lattice_eisenstein(tau, weight: int, tol: float) -> tuple:
    """``sum' (n + m tau)^{-weight}`` by disk truncation.

    Returns ``(value, tail_bound)``.  The bound only uses absolute values
    (``~ 2 pi / (A (k-2) R^{k-2})``), so a small ``tol`` is expensive and the
    term cap may trigger.
    """
    if weight < 3:
        raise ValueError("lattice sums need weight >= 3 for absolute convergence")
    tau = _as_tau(tau)
    u, v = _lagrange_reduce(1.0 + 0j, tau.z)
    A = tau.im
    d = abs(u) + abs(v)
    k = weight
    # each cell w + P lies in |z| <= |w| + d, so |w|^{-k} <= (1 + d/R)^k * mean_{cell} |z|^{-k}
    def bound(R):
        return (1.0 + d / R) ** k * 2.0 * math.pi / (A * (k - 2) * (R - d) ** (k - 2))

    R = 4.0 * d + 1.0
    while bound(R) > tol:
        R *= 1.25
    if math.pi * (R + d) ** 2 / A > max_terms():
        raise ConvergenceFailure(
            f"lattice Eisenstein sum needs radius {R:.3g}; exceeds the term cap")
    au = abs(u)
    height = A / au
    proj = (v * u.conjugate()).real / au
    total = 0j
    bmax = int(math.floor(R / height))
    for bb in range(-bmax, bmax + 1):
        perp = bb * height
        s2 = R * R - perp * perp
        if s2 < 0:
            continue
        s = math.sqrt(s2)
        lo = math.ceil((-bb * proj - s) / au)
        hi = math.floor((-bb * proj + s) / au)
        if hi < lo:
            continue
        aa = np.arange(lo, hi + 1, dtype=float)
        w = aa * u + bb * v
        if bb == 0:
            w = w[aa != 0]
        total += np.sum(w ** (-k))
    return complex(total), bound(R)


def _eisenstein(tau, tol, which, cross_check):
    _check_tol(tol)
    tau = _as_tau(tau)
    red = reduce_to_fundamental_domain(tau)
    zr = red.tau_reduced.z
    (a, b), (c, d) = red.matrix
    j = c * tau.z + d
    # value = factor * E / j^k: tighten the series so the absolute error stays below tol
    e4, e6 = _e4_e6(zr, tol * min(1.0, abs(j) ** which) / 1e3)
    if which == 4:
        value = _G2_FACTOR * e4 / j ** 4
        factor = 60.0
    else:
        value = _G3_FACTOR * e6 / j ** 6
        factor = 140.0
    if cross_check:
        scale = max(abs(value), 1.0)
        lat, bound = lattice_eisenstein(tau, which, tol * scale / factor * 0.5)
        lat *= factor
        if abs(lat - value) > tol * scale:
            raise ConvergenceFailure(
                f"lattice and q-series values disagree: |diff| = {abs(lat - value):.3e}")
    return value


def eisenstein_g2(tau, tol: float = 1e-13, cross_check: bool = False) -> complex:
    """``g2 = 60 sum' (n + m tau)^{-4}`` from the normalized E4 q-expansion.

    With ``cross_check`` the lattice sum is also evaluated and required to
    agree within ``tol`` relative to ``max(|g2|, 1)``.
    """
    return _eisenstein(tau, tol, 4, cross_check)


def eisenstein_g3(tau, tol: float = 1e-13, cross_check: bool = False) -> complex:
    """``g3 = 140 sum' (n + m tau)^{-6}``; see :func:`eisenstein_g2`."""
    return _eisenstein(tau, tol, 6, cross_check)


def _mul_trunc(a, b, order):
    out = [0] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def discriminant_qseries(q: complex, tol: float) -> QSeries:
    """``E4^3 - E6^2`` formed in exact integer arithmetic (``= 1728 sum tau(n) q^n``).

    Subtracting the q-expansions coefficientwise avoids the cancellation that
    evaluating ``g2^3`` and ``27 g3^2`` separately suffers as ``|q| -> 0``.
    """
    # |tau(n)| <= d(n) n^{11/2} <= 2 n^6
    order, tail = _series_order(abs(q), tol, lambda n: 3456.0 * n ** 6)
    e4 = [1] + [240 * _sigma(n, 3) for n in range(1, order + 1)]
    e6 = [1] + [-504 * _sigma(n, 5) for n in range(1, order + 1)]
    e4_3 = _mul_trunc(_mul_trunc(e4, e4, order), e4, order)
    e6_2 = _mul_trunc(e6, e6, order)
    return QSeries(q, tuple(x - y for x, y in zip(e4_3, e6_2)), order, tail)


_DELTA_FACTOR = 64.0 * math.pi ** 12 / 27.0  # (4 pi^4 / 3)^3 == 27 (8 pi^6 / 27)^2


def discriminant_modular(tau, tol: float = 1e-13) -> complex:
    """``Delta = g2^3 - 27 g3^2``.

    Both cubes share the factor ``64 pi^12 / 27``, so ``Delta`` is that factor
    times ``E4^3 - E6^2``; the difference is taken on exact integer
    coefficients at the reduced point and carried back with weight 12.
    """
    _check_tol(tol)
    tau = _as_tau(tau)
    red = reduce_to_fundamental_domain(tau)
    zr = red.tau_reduced.z
    q = cmath.exp(2j * math.pi * zr)
    # leading coefficient is 1728 q, so ask for relative accuracy
    series = discriminant_qseries(q, tol * 0.1 * 1728.0 * abs(q))
    (_, _), (c, d) = red.matrix
    return _DELTA_FACTOR * series.value() / (c * tau.z + d) ** 12


def j_invariant(tau, tol: float = 1e-13) -> complex:
    """Klein's ``j = 1728 g2^3 / Delta``, evaluated at the reduced point (``j`` is invariant)."""
    _check_tol(tol)
    zr = reduce_to_fundamental_domain(tau).tau_reduced.z
    q = cmath.exp(2j * math.pi * zr)
    e4 = eisenstein_qseries(4, q, tol * 0.1).value()
    delta = discriminant_qseries(q, tol * 0.1 * 1728.0 * abs(q)).value()
    return 1728.0 * e4 ** 3 / delta


# ---------------------------------------------------------------------------
# theta constants and the lambda function


def _theta_series(zr: complex, tol: float) -> tuple:
    """``(theta2, theta3, theta4)`` at nome ``exp(pi i zr)`` by direct summation."""
    qh = cmath.exp(1j * math.pi * zr)
    aq = abs(qh)
    # theta3/4: 1 + 2 sum_{n>=1} (+-1)^n q^{n^2};  theta2: 2 q^{1/4} sum_{n>=0} q^{n(n+1)}
    s3 = 1.0 + 0j
    s4 = 1.0 + 0j
    n = 0
    cap = max_terms()
    while True:
        n += 1
        term = qh ** (n * n)
        s3 += 2.0 * term
        s4 += 2.0 * (-1) ** n * term
        tail = 2.0 * aq ** ((n + 1) ** 2) / (1.0 - aq)
        if tail < tol * 0.1:
            break
        if n > cap:
            raise ConvergenceFailure("theta series did not converge")
    s2 = 0j
    n = -1
    while True:
        n += 1
        s2 += qh ** (n * (n + 1))
        tail = aq ** ((n + 1) * (n + 2)) / (1.0 - aq)
        if tail < tol * 0.05:
            break
        if n > cap:
            raise ConvergenceFailure("theta series did not converge")
    theta2 = 2.0 * cmath.exp(1j * math.pi * zr / 4.0) * s2
    return theta2, s3, s4


def theta_constants(tau, tol: float = 1e-14) -> tuple:
    """Jacobi theta constants ``(theta2, theta3, theta4)`` with nome ``exp(pi i tau)``.

    Series are summed at the reduced point and pulled back move by move:
    ``tau -> tau + 1`` swaps theta3/theta4 and rotates theta2 by ``e^{i pi/4}``;
    ``tau -> -1/tau`` swaps theta2/theta4 with the factor ``sqrt(-i tau)``.
    """
    _check_tol(tol)
    tau = _as_tau(tau)
    red = reduce_to_fundamental_domain(tau)
    points = [tau.z]
    for move, k in red.word:
        z = points[-1]
        points.append(z + k if move == "T" else -1.0 / z)
    t2, t3, t4 = _theta_series(points[-1], tol)
    for (move, k), z in zip(reversed(red.word), reversed(points[:-1])):
        if move == "T":
            # values at z + k known; recover values at z
            t2 = t2 * cmath.exp(-1j * math.pi * k / 4.0)
            if k % 2:
                t3, t4 = t4, t3
        else:
            # values at -1/z known
            r = cmath.sqrt(-1j * z)
            t2, t3, t4 = t4 / r, t3 / r, t2 / r
    return t2, t3, t4


def lambda_function(tau, tol: float = 1e-14) -> complex:
    """Modular lambda ``theta2^4 / theta3^4``, the coordinate on ``Gamma(2) \\ h``.

    Above ``Im tau = 30`` only the leading cusp term ``16 exp(i pi tau)`` is
    returned (the next correction is relatively ``< 1e-39``).
    """
    _check_tol(tol)
    tau = _as_tau(tau)
    if tau.im > 30:
        return 16.0 * cmath.exp(1j * math.pi * tau.z)
    t2, t3, _ = theta_constants(tau, tol)
    return (t2 / t3) ** 4


def algebraic_discriminant_lambda(lam: complex) -> complex:
    """``((1 - lambda) lambda)^2`` for ``y^2 = x (x-1)(x-lambda)``."""
    lam = complex(lam)
    return ((1.0 - lam) * lam) ** 2


def covering_j_from_lambda(lam: complex) -> complex:
    """``j = 256 (1 - lambda + lambda^2)^3 / (lambda^2 (1-lambda)^2)``.

    Examples:
        >>> round(covering_j_from_lambda(0.5).real, 9)
        1728.0
    """
    lam = complex(lam)
    if lam == 0 or lam == 1:
        raise InvalidLambda(f"lambda={lam} is a cusp of the lambda line")
    return 256.0 * (1.0 - lam + lam * lam) ** 3 / (lam * lam * (1.0 - lam) ** 2)
