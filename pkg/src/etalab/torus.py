"""Laplace spectrum and heat trace of the flat torus C/(Z + tau Z).

The spectrum is ``4 pi^2 c |w|^2 / (Im tau)^2`` for ``w`` running over the
lattice ``Z + tau Z`` itself, with ``c = 1`` for the induced metric and
``c = Im tau`` for the unit-area metric.  Heat traces are Gaussian lattice
sums, evaluated either directly on the spectrum or on the period lattice
after Poisson resummation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._config import max_terms
from .exceptions import ConvergenceFailure, PrecisionLoss

__all__ = [
    "TauPoint",
    "Normalization",
    "SpectrumSlice",
    "TraceFunction",
    "LatticeGeometry",
    "lattice_geometry",
    "eigenvalues",
    "heat_trace_direct",
    "heat_trace_poisson",
    "heat_trace",
    "torus_trace",
    "trace_from_eigenvalues",
    "DIRECT_WINDOW",
]

_EPS = np.finfo(float).eps

#: Half-width (as a ratio) of the window around the crossover time in which
#: each method is allowed to run.  The two windows overlap over two decades.
DIRECT_WINDOW = 10.0


@dataclass(frozen=True)
class TauPoint:
    """A point of the upper half plane."""

    re: float
    im: float

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError(f"tau must be finite, got ({self.re}, {self.im})")
        if im <= 0.0:
            raise ValueError(f"tau must lie in the upper half plane, got Im tau = {im}")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, z: complex) -> "TauPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.z


def _as_tau(tau) -> TauPoint:
    if isinstance(tau, TauPoint):
        return tau
    return TauPoint.from_complex(tau)


class Normalization(enum.Enum):
    """Metric convention on the torus.

    ``INDUCED`` is ``|dz|^2`` (area ``Im tau``); ``UNIT_VOLUME`` rescales it to
    area one, which multiplies every eigenvalue by ``Im tau``.
    """

    INDUCED = "induced"
    UNIT_VOLUME = "unit"

    @classmethod
    def parse(cls, value) -> "Normalization":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"induced": cls.INDUCED, "unit": cls.UNIT_VOLUME,
                   "unit_volume": cls.UNIT_VOLUME, "unitvolume": cls.UNIT_VOLUME}
        if key not in aliases:
            raise ValueError(f"unknown normalization {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class SpectrumSlice:
    eigenvalues: tuple

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]


@dataclass(frozen=True)
class TraceFunction:
    """A heat trace ``t -> (value, error_bound)`` with provenance.

    ``gap`` is the smallest positive eigenvalue when known; the Mellin
    pipeline uses it to certify the large-time tail.
    """

    evaluator: Callable[[float, float], tuple]
    descriptor: str
    gap: float | None = None
    area: float | None = None
    positive: Callable[[float, float], tuple] | None = None
    zero_modes: int | None = None

    def evaluate(self, t: float, tol: float = 1e-13) -> tuple:
        return self.evaluator(float(t), float(tol))

    def evaluate_positive(self, t: float, tol: float = 1e-13, zero_modes: int = 0) -> tuple:
        """``Theta(t) - zero_modes``, summed without the zero modes when the source allows.

        Subtracting after the fact loses everything below ``eps`` once the
        positive modes have decayed; ``positive`` avoids that cancellation.
        """
        if self.positive is not None and zero_modes == self.zero_modes:
            return self.positive(float(t), float(tol))
        value, err = self.evaluator(float(t), float(tol))
        return value - zero_modes, err

    def __call__(self, t: float, tol: float = 1e-13) -> float:
        return self.evaluator(float(t), float(tol))[0]

    def rescaled(self, c: float) -> "TraceFunction":
        """Trace of the operator with every eigenvalue multiplied by ``c``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        inner, pos = self.evaluator, self.positive
        gap = None if self.gap is None else self.gap * c
        return TraceFunction(lambda t, tol: inner(c * t, tol),
                             f"{self.descriptor}*{c!r}", gap=gap,
                             area=None if self.area is None else self.area / c,
                             positive=None if pos is None else (lambda t, tol: pos(c * t, tol)),
                             zero_modes=self.zero_modes)


# ---------------------------------------------------------------------------
# lattice geometry


@dataclass(frozen=True)
class LatticeGeometry:
    """Reduced basis and derived constants of ``Z + tau Z`` for one normalization.

    ``eig_scale`` maps ``|w|^2`` to the eigenvalue; ``period_scale2`` maps
    ``|w|^2`` to the squared length of the corresponding period of the
    normalized torus, whose area is ``area``.
    """

    u: complex
    v: complex
    covolume: float
    eig_scale: float
    period_scale2: float
    area: float
    shortest2: float = field(default=0.0)


def _lagrange_reduce(u: complex, v: complex) -> tuple:
    if abs(u) > abs(v):
        u, v = v, u
    for _ in range(10_000):
        k = round((v * u.conjugate()).real / abs(u) ** 2)
        v = v - k * u
        if abs(v) >= abs(u):
            break
        u, v = v, u
    else:  # pragma: no cover
        raise RuntimeError("lattice reduction did not terminate")
    if (v * u.conjugate()).imag < 0:
        v = -v
    return u, v


def lattice_geometry(tau, norm=Normalization.INDUCED) -> LatticeGeometry:
    tau = _as_tau(tau)
    norm = Normalization.parse(norm)
    y = tau.im
    u, v = _lagrange_reduce(1.0 + 0j, tau.z)
    c = 1.0 if norm is Normalization.INDUCED else y
    return LatticeGeometry(
        u=u, v=v, covolume=y,
        eig_scale=4.0 * math.pi ** 2 * c / y ** 2,
        period_scale2=1.0 / c,
        area=y / c,
        shortest2=abs(u) ** 2,
    )


def _lattice_norms(geom: LatticeGeometry, r2max: float, cap: int) -> np.ndarray:
    """Sorted ``|w|^2`` for all lattice vectors with ``|w|^2 <= r2max``."""
    u, v, A = geom.u, geom.v, geom.covolume
    au = abs(u)
    R = math.sqrt(max(r2max, 0.0))
    d = abs(u) + abs(v)
    if math.pi * (R + d) ** 2 / A > cap:
        raise ConvergenceFailure(
            f"lattice cutoff radius {R:.4g} needs more than {cap} points")
    height = A / au
    proj = (v * u.conjugate()).real / au
    bmax = int(math.floor(R / height))
    chunks = []
    for b in range(-bmax, bmax + 1):
        perp = b * height
        s2 = r2max - perp * perp
        if s2 < 0:
            continue
        s = math.sqrt(s2)
        lo = math.ceil((-b * proj - s) / au)
        hi = math.floor((-b * proj + s) / au)
        if hi < lo:
            continue
        a = np.arange(lo, hi + 1, dtype=float)
        w = a * u + b * v
        chunks.append((w.real ** 2 + w.imag ** 2))
    norms = np.concatenate(chunks) if chunks else np.zeros(0)
    norms = norms[norms <= r2max * (1 + 4 * _EPS)]
    return np.sort(norms, kind="stable")


def _gaussian_tail_bound(alpha: float, R2: float, geom: LatticeGeometry) -> float:
    d = abs(geom.u) + abs(geom.v)
    return (2.0 * math.pi / geom.covolume) * math.exp(-alpha * R2) * (R2 + 1.0 / alpha + d * d)


def _gaussian_cutoff(alpha: float, tol: float, geom: LatticeGeometry) -> float:
    """Smallest ``R^2`` (up to a fixed-point iteration) with tail bound ``< tol``."""
    d = abs(geom.u) + abs(geom.v)
    x = max(math.log(1.0 / tol), 1.0)
    for _ in range(50):
        x_new = math.log(2.0 * math.pi / geom.covolume * (x / alpha + 1.0 / alpha + d * d) / tol)
        x_new = max(x_new, 0.0)
        if abs(x_new - x) < 1e-12:
            break
        x = x_new
    R2 = (x + 1e-9) / alpha
    while _gaussian_tail_bound(alpha, R2, geom) >= tol:
        R2 *= 1.05
    return R2


def _gaussian_sum(alpha: float, tol: float, geom: LatticeGeometry,
                  skip_origin: bool = False) -> tuple:
    """``sum_w exp(-alpha |w|^2)`` over ``Z + tau Z`` with a certified tail bound."""
    R2 = _gaussian_cutoff(alpha, tol, geom)
    norms = _lattice_norms(geom, R2, max_terms())
    if skip_origin:
        norms = norms[1:]
    terms = np.exp(-alpha * norms)
    value = math.fsum(terms[::-1])
    return value, _gaussian_tail_bound(alpha, R2, geom)


def _check_tol(tol):
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError("tol must be positive")


def crossover_time(tau, norm=Normalization.INDUCED) -> float:
    """Time ``Area / (4 pi)`` at which both lattice sums have equal width."""
    return lattice_geometry(tau, norm).area / (4.0 * math.pi)


def _direct(geom: LatticeGeometry, t: float, tol: float, skip_zero: bool = False) -> tuple:
    t_cross = geom.area / (4.0 * math.pi)
    if t < t_cross / DIRECT_WINDOW:
        raise ConvergenceFailure(
            f"t={t:.3g} is below the direct-sum window (t >= {t_cross / DIRECT_WINDOW:.3g}); "
            "required cutoff exceeds the configured maximum")
    value, tail = _gaussian_sum(t * geom.eig_scale, 0.5 * tol, geom, skip_zero)
    return value, tail + 2 * _EPS * value


def _poisson(geom: LatticeGeometry, t: float, tol: float) -> tuple:
    t_cross = geom.area / (4.0 * math.pi)
    if t > t_cross * DIRECT_WINDOW:
        raise ConvergenceFailure(
            f"t={t:.3g} is above the dual-sum window (t <= {t_cross * DIRECT_WINDOW:.3g}); "
            "use the direct method")
    pref = geom.area / (4.0 * math.pi * t)
    value, tail = _gaussian_sum(geom.period_scale2 / (4.0 * t), 0.5 * tol / pref, geom)
    value *= pref
    return value, tail * pref + 4 * _EPS * value


def _validate_t(t, tol):
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("t must be positive and finite")
    _check_tol(tol)


def eigenvalues(tau, norm=Normalization.INDUCED, count: int = 1) -> SpectrumSlice:
    """The ``count`` smallest Laplace eigenvalues, multiplicities expanded.

    The scan covers every lattice vector inside an ellipse that already holds
    ``count`` points, so nothing smaller than the returned maximum is missed.

    Examples:
        >>> [round(x / math.pi**2, 12) for x in eigenvalues(2j, count=2).eigenvalues]
        [0.0, 1.0]
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    count = int(count)
    geom = lattice_geometry(tau, norm)
    r2 = geom.shortest2
    while True:
        norms = _lattice_norms(geom, r2, max_terms())
        if norms.size >= count:
            break
        r2 *= 2.0
    vals = norms[:count] * geom.eig_scale
    return SpectrumSlice(tuple(float(x) for x in vals))


def heat_trace_direct(tau, norm=Normalization.INDUCED, t: float = 1.0,
                      tol: float = 1e-12) -> float:
    """``sum exp(-t lambda)`` over the spectrum, zero mode included."""
    _validate_t(t, tol)
    return _direct(lattice_geometry(tau, norm), t, tol)[0]


def heat_trace_poisson(tau, norm=Normalization.INDUCED, t: float = 1.0,
                       tol: float = 1e-12) -> float:
    """Same trace via ``Area/(4 pi t) * sum_v exp(-|v|^2 / 4t)`` over periods."""
    _validate_t(t, tol)
    return _poisson(lattice_geometry(tau, norm), t, tol)[0]


def _dispatch(geom: LatticeGeometry, t: float, tol: float) -> tuple:
    t_cross = geom.area / (4.0 * math.pi)
    first, second = (_poisson, _direct) if t < t_cross else (_direct, _poisson)
    try:
        return first(geom, t, tol)
    except ConvergenceFailure:
        return second(geom, t, tol)


def heat_trace(tau, norm=Normalization.INDUCED, t: float = 1.0, tol: float = 1e-12) -> float:
    """Heat trace choosing the dual sum below ``Area/(4 pi)`` and the direct sum above."""
    _validate_t(t, tol)
    return _dispatch(lattice_geometry(tau, norm), t, tol)[0]


def torus_trace(tau, norm=Normalization.INDUCED) -> TraceFunction:
    """:class:`TraceFunction` view of :func:`heat_trace` for a fixed torus."""
    tau = _as_tau(tau)
    norm = Normalization.parse(norm)
    geom = lattice_geometry(tau, norm)

    def evaluator(t, tol):
        _validate_t(t, tol)
        value, err = _dispatch(geom, t, tol)
        if err > tol:
            raise PrecisionLoss(f"heat trace at t={t:.3g} carries rounding error {err:.2e} > tol")
        return value, err

    def positive(t, tol):
        _validate_t(t, tol)
        if t >= geom.area / (4.0 * math.pi):
            # full relative accuracy: in the direct window this costs O(700) points
            value, err = _direct(geom, t, 1e-300, skip_zero=True)
        else:
            value, err = _poisson(geom, t, tol)
            value -= 1.0
        if err > tol:
            raise PrecisionLoss(f"heat trace at t={t:.3g} carries rounding error {err:.2e} > tol")
        return value, err

    return TraceFunction(evaluator, f"torus(tau={tau.z!r}, {norm.value})",
                         gap=geom.eig_scale * geom.shortest2, area=geom.area,
                         positive=positive, zero_modes=1)


def trace_from_eigenvalues(values, descriptor: str = "eigenvalue list") -> TraceFunction:
    """Trace of a finite nonnegative spectrum (zero modes included)."""
    lam = np.sort(np.asarray(values, dtype=float))
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if np.any(~np.isfinite(lam)) or lam[0] < 0:
        raise ValueError("eigenvalues must be finite and nonnegative")
    positive = lam[lam > 0]

    def evaluator(t, tol):
        _validate_t(t, tol)
        value = math.fsum(np.exp(-t * lam)[::-1])
        return value, 2 * _EPS * value

    def positive_part(t, tol):
        _validate_t(t, tol)
        value = math.fsum(np.exp(-t * positive)[::-1])
        return value, 2 * _EPS * value

    gap = float(positive[0]) if positive.size else None
    return TraceFunction(evaluator, descriptor, gap=gap, positive=positive_part,
                         zero_modes=int(lam.size - positive.size))
