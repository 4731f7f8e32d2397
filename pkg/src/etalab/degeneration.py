"""Periods of the Legendre family and their behaviour at the cusps.

The curve ``y^2 = x (x-1)(x-lambda)`` has the periods
``pi1 = pi F(1/2, 1/2; 1; lambda)`` and ``pi2 = i pi F(1/2, 1/2; 1; 1 - lambda)``
(principal branches).  Both solve the Picard-Fuchs equation

    lambda (1 - lambda) F'' + (1 - 2 lambda) F' - F / 4 = 0,

which is what :func:`monodromy_around` integrates along loops.  Matrices act
on the column ``(pi2, pi1)``, so they act on ``tau = pi2 / pi1`` by Mobius
transformations.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from ._config import max_terms
from .exceptions import (
    BranchPoint,
    ContinuationFailure,
    ConvergenceFailure,
    FitAmbiguous,
    InvalidLambda,
    QuadratureFailure,
)
from .torus import TauPoint

__all__ = [
    "PeriodPair",
    "MonodromyMatrix",
    "GrowthKind",
    "GrowthLaw",
    "Family",
    "hypergeometric_2f1_half",
    "hypergeometric_2f1_half_derivative",
    "legendre_periods",
    "vanishing_cycle_period",
    "monodromy_along_circle",
    "monodromy_around",
    "equianharmonic_period",
    "equianharmonic_monodromy",
    "boundary_growth_fit",
]

_LOG16 = 4.0 * math.log(2.0)
_SERIES_RATE = 0.75


# ---------------------------------------------------------------------------
# F(1/2, 1/2; 1; z)


def _series_at_0(z: complex, tol: float) -> tuple:
    """Taylor series ``sum c_n z^n``, ``c_n = ((1/2)_n / n!)^2``, and its derivative."""
    az = abs(z)
    f, df = 0j, 0j
    c = 1.0
    zn = 1.0 + 0j      # z^n
    zn1 = 0j           # z^{n-1}
    n = 0
    cap = max_terms()
    while True:
        f += c * zn
        if n:
            df += n * c * zn1
        zn1 = zn
        zn = zn * z
        c *= ((n + 0.5) / (n + 1)) ** 2
        n += 1
        # c_n <= 1: tails bounded geometrically
        tail = az ** n / (1.0 - az)
        dtail = (n + 1) * az ** max(n - 1, 0) / (1.0 - az) ** 2
        if tail < tol and dtail < tol:
            return f, df
        if n > cap:
            raise ConvergenceFailure("hypergeometric series did not converge")


def _series_at_1(z: complex, tol: float) -> tuple:
    """Logarithmic expansion about ``z = 1`` (``u = 1 - z``):

    ``F = (1/pi) sum c_n u^n (d_n - log u)`` with ``d_0 = 4 log 2`` and
    ``d_{n+1} = d_n + 2/(n+1) - 4/(2n+1)``.
    """
    u = 1.0 - z
    au = abs(u)
    lu = cmath.log(u)
    alu = abs(lu)
    f, dfdu = 0j, 0j
    c, d = 1.0, _LOG16
    un = 1.0 + 0j
    un1 = 1.0 / u
    n = 0
    cap = max_terms()
    while True:
        f += c * un * (d - lu)
        dfdu += c * (n * un1 * (d - lu) - un1)
        un1 = un
        un = un * u
        d += 2.0 / (n + 1) - 4.0 / (2 * n + 1)
        c *= ((n + 0.5) / (n + 1)) ** 2
        n += 1
        k = _LOG16 + alu
        tail = au ** n * k / (1.0 - au)
        dtail = (n + 1) * au ** (n - 1) * (k + 1.0) / (1.0 - au) ** 2
        if tail < tol * math.pi and dtail < tol * math.pi:
            return f / math.pi, -dfdu / math.pi
        if n > cap:
            raise ConvergenceFailure("logarithmic hypergeometric series did not converge")


def _pf_rhs(z: complex, y: complex, dy: complex) -> complex:
    """``F''`` from the Picard-Fuchs equation."""
    return (0.25 * y - (1.0 - 2.0 * z) * dy) / (z * (1.0 - z))


def _rk4_path(points, derivs, y0: complex, dy0: complex) -> tuple:
    """Integrate ``(F, F')`` along a discretized path ``points[k]`` with ``dz/ds = derivs[k]``.

    ``points`` and ``derivs`` are sampled at ``2N + 1`` nodes (midpoints
    included) for ``N`` RK4 steps of size ``1/N`` in the path parameter.
    """
    n_steps = (len(points) - 1) // 2
    h = 1.0 / n_steps
    y, dy = y0, dy0
    for k in range(n_steps):
        z0, zm, z1 = points[2 * k], points[2 * k + 1], points[2 * k + 2]
        w0, wm, w1 = derivs[2 * k], derivs[2 * k + 1], derivs[2 * k + 2]

        def f(z, w, a, b):
            return b * w, _pf_rhs(z, a, b) * w

        k1 = f(z0, w0, y, dy)
        k2 = f(zm, wm, y + 0.5 * h * k1[0], dy + 0.5 * h * k1[1])
        k3 = f(zm, wm, y + 0.5 * h * k2[0], dy + 0.5 * h * k2[1])
        k4 = f(z1, w1, y + h * k3[0], dy + h * k3[1])
        y = y + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dy = dy + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return y, dy


def _continue_from_half(z: complex, tol: float) -> tuple:
    """``(F, F')`` at ``z`` by integrating the ODE along the segment from 1/2.

    The cut plane is star-shaped about 1/2, so the segment stays on the
    principal branch.
    """
    y0, dy0 = _series_at_0(0.5 + 0j, 1e-17)
    n = 64
    prev = None
    while n <= 2 ** 16:
        s = np.linspace(0.0, 1.0, 2 * n + 1)
        pts = 0.5 + s * (z - 0.5)
        der = np.full_like(pts, z - 0.5)
        cur = _rk4_path(pts, der, y0, dy0)
        # RK4 round-off floors the attainable accuracy near 1e-14 relative
        eps = max(tol, 1e-13)
        if (prev is not None and abs(cur[0] - prev[0]) < eps * abs(cur[0])
                and abs(cur[1] - prev[1]) < 10 * eps * max(abs(cur[1]), 1.0)):
            return cur
        prev = cur
        n *= 2
    raise ConvergenceFailure(f"continuation of F to z={z} did not settle")


def _check_principal(z: complex):
    if z.imag == 0 and z.real >= 1.0:
        raise BranchPoint(f"z={z.real} lies on the branch cut [1, inf)")


def _hyp_and_derivative(z: complex, tol: float) -> tuple:
    z = complex(z)
    _check_principal(z)
    one_minus = 1.0 - z
    w = z / (z - 1.0)
    rates = {
        "taylor": abs(z),
        "log": abs(one_minus),
        "pfaff_taylor": abs(w),
        "pfaff_log": 1.0 / abs(one_minus),
    }
    best = min(rates, key=lambda k: (rates[k], k))
    if rates[best] > _SERIES_RATE:
        return _continue_from_half(z, tol)
    if best == "taylor":
        return _series_at_0(z, tol)
    if best == "log":
        return _series_at_1(z, tol)
    # Pfaff: F(z) = (1-z)^{-1/2} F(w),  w = z/(z-1), dw/dz = -1/(z-1)^2
    fw, dfw = (_series_at_0(w, tol) if best == "pfaff_taylor" else _series_at_1(w, tol))
    root = cmath.sqrt(one_minus)
    f = fw / root
    df = 0.5 * fw / (root * one_minus) - dfw / (root * (z - 1.0) ** 2)
    return f, df


def hypergeometric_2f1_half(lam: complex, tol: float = 1e-14) -> complex:
    """``F(1/2, 1/2; 1; lambda)`` on the principal branch.

    Uses the Taylor series, the logarithmic expansion about 1, or either of
    them after the Pfaff transformation, whichever converges fastest; the
    few points where none converges geometrically faster than ``3/4^n``
    (around ``exp(+-i pi/3)``) are reached by integrating the
    hypergeometric equation from ``1/2``.

    Examples:
        >>> round(hypergeometric_2f1_half(0.5).real, 10)
        1.180340599
    """
    lam = complex(lam)
    if lam == 1:
        raise BranchPoint("F(1/2, 1/2; 1; z) is singular at z = 1")
    return _hyp_and_derivative(lam, tol)[0]


def hypergeometric_2f1_half_derivative(lam: complex, tol: float = 1e-14) -> complex:
    lam = complex(lam)
    if lam == 1:
        raise BranchPoint("F(1/2, 1/2; 1; z) is singular at z = 1")
    return _hyp_and_derivative(lam, tol)[1]


# ---------------------------------------------------------------------------
# Legendre periods


@dataclass(frozen=True)
class PeriodPair:
    pi1: complex
    pi2: complex
    tau: TauPoint
    l2_norm: float

    def as_dict(self) -> dict:
        return {"pi1": self.pi1, "pi2": self.pi2, "tau": self.tau.z, "l2_norm": self.l2_norm}


def _check_lambda(lam: complex):
    if lam == 0 or lam == 1:
        raise InvalidLambda(f"lambda={lam} is a cusp of the Legendre family")
    if lam.imag == 0 and (lam.real <= 0 or lam.real >= 1):
        raise BranchPoint(f"lambda={lam.real} lies on a cut of the principal period branches")


def _period_data(lam: complex, tol: float = 1e-15) -> tuple:
    """``(pi2, pi1, pi2', pi1')`` at ``lam``."""
    f1, df1 = _hyp_and_derivative(lam, tol)
    f2, df2 = _hyp_and_derivative(1.0 - lam, tol)
    return 1j * math.pi * f2, math.pi * f1, -1j * math.pi * df2, math.pi * df1


def legendre_periods(lam: complex) -> PeriodPair:
    """Periods of ``dx/y`` on ``y^2 = x(x-1)(x-lambda)``, ``tau = pi2/pi1`` and the L2 norm.

    ``l2_norm = |Im(conj(pi1) pi2)|`` is ``(-i/2) int omega ^ conj(omega)``
    written through the period pair.
    """
    lam = complex(lam)
    _check_lambda(lam)
    pi2, pi1, _, _ = _period_data(lam)
    tau = pi2 / pi1
    return PeriodPair(pi1, pi2, TauPoint(tau.real, tau.imag),
                      abs((pi1.conjugate() * pi2).imag))


def vanishing_cycle_period(lam: complex) -> complex:
    """Period of the normalized form (periods ``1`` and ``tau``) on the cycle vanishing at ``lambda = 1``.

    That cycle carries ``pi2`` (analytic at ``lambda = 1``) while ``pi1``
    grows like ``log(16/(1-lambda))``, so after normalizing the form by
    ``pi1`` the period is ``tau`` and tends to 0.
    """
    p = legendre_periods(lam)
    return p.pi2 / p.pi1


# ---------------------------------------------------------------------------
# monodromy


@dataclass(frozen=True)
class MonodromyMatrix:
    """Integral matrix acting on ``(pi2, pi1)``; ``residual`` is the rounding distance."""

    entries: tuple
    residual: float = 0.0
    steps: int = 0

    @property
    def determinant(self) -> int:
        (a, b), (c, d) = self.entries
        return a * d - b * c

    @property
    def in_gamma2(self) -> bool:
        (a, b), (c, d) = self.entries
        return self.determinant == 1 and a % 2 == 1 and d % 2 == 1 and b % 2 == 0 and c % 2 == 0

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)


def _piece_nodes(piece, n_steps: int):
    """Sample one path piece at ``2 n_steps + 1`` nodes of its unit parameter."""
    fz, fd, _ = piece
    s = np.linspace(0.0, 1.0, 2 * n_steps + 1)
    return (np.array([fz(x) for x in s], dtype=complex),
            np.array([fd(x) for x in s], dtype=complex))


def _segment(a: complex, b: complex):
    return (lambda s: a + s * (b - a), lambda s: b - a, abs(b - a))


def _arc(center: complex, radius: float, theta0: float, sweep: float):
    return (
        lambda s: center + radius * cmath.exp(1j * (theta0 + sweep * s)),
        lambda s: 1j * sweep * radius * cmath.exp(1j * (theta0 + sweep * s)),
        abs(sweep) * radius,
    )


def _monodromy_for(pieces, basepoint: complex, steps: int) -> MonodromyMatrix:
    pi2, pi1, dpi2, dpi1 = _period_data(basepoint)
    phi0 = np.array([[pi2, pi1], [dpi2, dpi1]])
    n = max(int(steps), 64)
    total = sum(p[2] for p in pieces)
    prev = None
    best = None
    while n <= 2 ** 18:
        y2, y1 = (pi2, dpi2), (pi1, dpi1)
        # pieces are integrated separately so no step straddles a kink
        for piece in pieces:
            k = max(16, math.ceil(n * piece[2] / total))
            pts, der = _piece_nodes(piece, k)
            y2 = _rk4_path(pts, der, *y2)
            y1 = _rk4_path(pts, der, *y1)
        phi1 = np.array([[y2[0], y1[0]], [y2[1], y1[1]]])
        m = np.linalg.solve(phi0, phi1).T
        rounded = np.rint(m.real)
        residual = float(np.max(np.abs(m - rounded)))
        best = (rounded, residual, n)
        if prev is not None and residual < 1e-6 and np.max(np.abs(m - prev)) < 1e-6:
            break
        prev = m
        n *= 2
    rounded, residual, n = best
    if residual >= 1e-3:
        raise ContinuationFailure(f"monodromy entries do not round: residual {residual:.2e}")
    entries = tuple(tuple(int(x) for x in row) for row in rounded)
    return MonodromyMatrix(entries, residual, n)


def monodromy_along_circle(center: complex, basepoint: complex = 0.5, steps: int = 64,
                           clockwise: bool = False) -> MonodromyMatrix:
    """Monodromy of ``(pi2, pi1)`` along the circle about ``center`` through ``basepoint``."""
    center, basepoint = complex(center), complex(basepoint)
    _check_lambda(basepoint)
    radius = abs(basepoint - center)
    if radius == 0:
        raise ValueError("basepoint must differ from the centre")
    for sing in (0.0, 1.0):
        if abs(abs(sing - center) - radius) < 1e-9:
            raise ContinuationFailure("loop passes through a singular point")
    theta0 = cmath.phase(basepoint - center)
    sweep = -2.0 * math.pi if clockwise else 2.0 * math.pi
    return _monodromy_for([_arc(center, radius, theta0, sweep)], basepoint, steps)


def monodromy_around(cusp, basepoint: complex = 0.5, steps: int = 64) -> MonodromyMatrix:
    """Monodromy of ``(pi2, pi1)`` around a cusp of the lambda line.

    Loops are positively oriented about the cusp: counterclockwise circles of
    radius ``min(|b - c|, 1/2)`` about 0 and 1 reached by a radial segment, and
    for ``infinity`` a clockwise circle of radius ``max(1, |b - 1/2|)`` about
    ``1/2``, reached radially from the basepoint ``b``.
    """
    basepoint = complex(basepoint)
    _check_lambda(basepoint)
    if steps < 64:
        raise ValueError("steps must be >= 64")
    key = str(cusp).strip().lower()
    if key in ("0", "1"):
        c = complex(float(key))
        dist = abs(basepoint - c)
        radius = min(dist, 0.5)
        direction = (basepoint - c) / dist
        entry = c + radius * direction
        theta0 = cmath.phase(direction)
        pieces = []
        if dist - radius > 1e-12:
            pieces.append(_segment(basepoint, entry))
        pieces.append(_arc(c, radius, theta0, 2.0 * math.pi))
        if dist - radius > 1e-12:
            pieces.append(_segment(entry, basepoint))
    elif key in ("inf", "infinity", "oo", "∞"):
        c = 0.5 + 0j
        dist = abs(basepoint - c)
        radius = max(1.0, dist)
        direction = (basepoint - c) / dist if dist > 1e-12 else -1j
        entry = c + radius * direction
        theta0 = cmath.phase(direction)
        pieces = []
        if abs(entry - basepoint) > 1e-12:
            pieces.append(_segment(basepoint, entry))
        pieces.append(_arc(c, radius, theta0, -2.0 * math.pi))
        if abs(entry - basepoint) > 1e-12:
            pieces.append(_segment(entry, basepoint))
    else:
        raise ValueError(f"cusp must be one of 0, 1, inf; got {cusp!r}")
    return _monodromy_for(pieces, basepoint, steps)


# ---------------------------------------------------------------------------
# equianharmonic family y^2 = x^3 - s


@lru_cache(maxsize=None)
def _equianharmonic_constant() -> float:
    """``int_1^inf du / sqrt(u^3 - 1)``.

    ``u = 1 + w^2`` removes the endpoint singularity; the ``w`` range is split
    at 1 and the outer half mapped back to ``(0, 1]`` by ``w -> 1/w``.
    """
    def f(w):
        return 2.0 / math.sqrt(w ** 4 + 3.0 * w ** 2 + 3.0)

    inner, e1 = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    outer, e2 = integrate.quad(lambda x: f(1.0 / x) / x ** 2 if x > 0 else 2.0,
                               0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    if e1 + e2 > 1e-12:
        raise QuadratureFailure(f"equianharmonic period quadrature error {e1 + e2:.2e}")
    return inner + outer


def equianharmonic_period(s: complex) -> complex:
    """A period of ``dx/y`` on ``y^2 = x^3 - s``: twice the integral from the root ``s^{1/3}`` to infinity.

    Substituting ``x = s^{1/3} u`` maps the contour to the fixed ray
    ``u in [1, inf)``, giving ``2 s^{-1/6} int_1^inf du / sqrt(u^3 - 1)``
    (principal ``s^{-1/6}``).
    """
    s = complex(s)
    if s == 0:
        raise InvalidLambda("s = 0 is the singular fibre")
    return 2.0 * s ** (-1.0 / 6.0) * _equianharmonic_constant()


@dataclass(frozen=True)
class EquianharmonicMonodromy:
    factor: complex
    order: int | None
    turns: int


def equianharmonic_monodromy(s: complex = 1.0, turns: int = 1,
                             steps: int = 720) -> EquianharmonicMonodromy:
    """Continue the period along ``s e^{i theta}``, ``theta in [0, 2 pi turns]``.

    At each step the principal value is multiplied by the sixth root of
    unity closest to the previous value, which tracks the branch of
    ``s^{-1/6}`` continuously.  ``order`` is the least ``k`` with
    ``factor^k = 1``.
    """
    s = complex(s)
    start = equianharmonic_period(s)
    roots = [cmath.exp(2j * math.pi * k / 6.0) for k in range(6)]
    current = start
    for k in range(1, steps * turns + 1):
        theta = 2.0 * math.pi * turns * k / (steps * turns)
        p = equianharmonic_period(s * cmath.exp(1j * theta))
        current = min((p * r for r in roots), key=lambda c: abs(c - current))
    factor = current / start
    order = next((k for k in range(1, 13) if abs(factor ** k - 1.0) < 1e-9), None)
    return EquianharmonicMonodromy(factor, order, turns)


# ---------------------------------------------------------------------------
# growth laws


class GrowthKind(enum.Enum):
    LOGARITHMIC = "Logarithmic"
    POWER = "Power"


class Family(enum.Enum):
    LEGENDRE_AT_0 = "Legendre_at_0"
    EQUIANHARMONIC = "Equianharmonic"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        for member in cls:
            if str(value).lower() in (member.value.lower(), member.name.lower()):
                return member
        raise ValueError(f"unknown family {value!r}")


@dataclass(frozen=True)
class GrowthLaw:
    """Fitted boundary growth; ``fit_r2_alternative`` is the losing model's R^2."""

    kind: GrowthKind
    exponent: float
    constant: float
    fit_r2: float
    fit_r2_alternative: float = float("nan")

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "exponent": self.exponent, "constant": self.constant,
                "fit_r2": self.fit_r2, "fit_r2_alternative": self.fit_r2_alternative}


def _linear_fit(x, y) -> tuple:
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), min(max(r2, 0.0), 1.0)


def boundary_growth_fit(family, radii) -> GrowthLaw:
    """Classify the growth of the L2 norm as the fibre degenerates.

    Two models are fitted to the squared norms ``N(r)``:
    logarithmic, ``N ~ C log(1/r)^k + b``, and power, ``log N ~ p log r + c``.
    """
    family = Family.parse(family)
    r = np.asarray(sorted(float(x) for x in radii))
    if r.size < 3 or np.any(r <= 0) or np.any(r >= 1e-2):
        raise ValueError("radii must be positive and below 1e-2")
    if r[-1] / r[0] < 1e4 * (1 - 1e-12):
        raise ValueError("radii must span at least four decades")
    if family is Family.LEGENDRE_AT_0:
        norms = np.array([legendre_periods(x).l2_norm for x in r])
    else:
        norms = np.array([abs(equianharmonic_period(x)) ** 2 for x in r])
    L = np.log(1.0 / r)
    log_fits = [(_linear_fit(L ** k, norms), k) for k in (1, 2, 3)]
    (slope_log, _, r2_log), k_log = max(log_fits, key=lambda item: item[0][2])
    p_pow, c_pow, r2_pow = _linear_fit(np.log(r), np.log(norms))
    if abs(r2_log - r2_pow) < 1e-4:
        raise FitAmbiguous(f"log model R^2={r2_log:.6f} vs power model R^2={r2_pow:.6f}")
    if r2_log > r2_pow:
        return GrowthLaw(GrowthKind.LOGARITHMIC, float(k_log), slope_log, r2_log, r2_pow)
    return GrowthLaw(GrowthKind.POWER, p_pow, math.exp(c_pow), r2_pow, r2_log)
