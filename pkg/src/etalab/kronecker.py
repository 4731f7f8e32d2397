"""Flat-torus determinants against modular forms.

Compares the computed ``det' Delta`` with the two closed forms in
circulation (``Im tau |eta|^2`` and ``(Im tau)^2 |eta|^4``) and regresses
the exponents.  The weight-12 norm of the discriminant and the curvature of
``log det`` are checked against the same determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import PrecisionLoss, SingularFit
from .modular import discriminant_modular, eta
from .torus import Normalization, TauPoint, _as_tau
from .zeta import regularized_determinant_epstein

__all__ = [
    "KroneckerRecord",
    "ExponentFit",
    "DiscriminantNorm",
    "default_tau_grid",
    "kronecker_compare",
    "fit_kronecker_exponents",
    "kronecker_report",
    "l2_norm_holomorphic_form",
    "calibrate_discriminant_norm",
    "analytic_discriminant_l2",
    "wp_curvature_check",
]

STATED_EXPONENTS = (1, 2)
CLASSICAL_EXPONENTS = (2, 4)


def default_tau_grid(n_re: int = 4, n_im: int = 5, re_range=(-0.4, 0.4),
                     im_range=(0.8, 3.0), log_im: bool = True) -> list:
    """Rectangular grid in ``(Re tau, Im tau)``, row-major with Im fastest."""
    res = np.linspace(re_range[0], re_range[1], n_re) if n_re > 1 else np.array([re_range[0]])
    if n_im > 1:
        ims = np.geomspace(*im_range, n_im) if log_im else np.linspace(*im_range, n_im)
    else:
        ims = np.array([im_range[0]])
    return [TauPoint(float(x), float(y)) for x in res for y in ims]


@dataclass(frozen=True)
class KroneckerRecord:
    tau: TauPoint
    determinant: float
    candidate_stated: float
    candidate_classical: float
    ratio_stated: float
    ratio_classical: float

    def __post_init__(self):
        for name in ("determinant", "candidate_stated", "candidate_classical",
                     "ratio_stated", "ratio_classical"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    def as_row(self) -> dict:
        return {
            "tau_re": self.tau.re,
            "tau_im": self.tau.im,
            "determinant": self.determinant,
            "candidate_stated": self.candidate_stated,
            "candidate_classical": self.candidate_classical,
            "ratio_stated": self.ratio_stated,
            "ratio_classical": self.ratio_classical,
        }


def kronecker_compare(tau, tol: float = 1e-13,
                      norm=Normalization.INDUCED) -> KroneckerRecord:
    tau = _as_tau(tau)
    det = regularized_determinant_epstein(tau, norm, tol).determinant
    abs_eta = abs(eta(tau))
    y = tau.im
    stated = y * abs_eta ** 2
    classical = y ** 2 * abs_eta ** 4
    return KroneckerRecord(tau, det, stated, classical, det / stated, det / classical)


@dataclass(frozen=True)
class ExponentFit:
    """``log det = log C + alpha log Im tau + beta log |eta|`` by least squares."""

    C: float
    alpha: float
    beta: float
    rms_residual: float
    n_samples: int = 0

    @property
    def rounded(self) -> tuple:
        return round(self.alpha), round(self.beta)

    @property
    def integer_exponents(self) -> bool:
        a, b = self.rounded
        return abs(self.alpha - a) < 1e-6 and abs(self.beta - b) < 1e-6

    def law(self) -> str:
        a, b = self.rounded
        return f"det = {self.C:.10g} * (Im tau)^{a} * |eta(tau)|^{b}"


def fit_kronecker_exponents(tau_samples, norm=Normalization.INDUCED,
                            tol: float = 1e-13) -> ExponentFit:
    taus = [_as_tau(t) for t in tau_samples]
    if len(taus) < 10:
        raise ValueError("need at least 10 samples")
    log_det = np.array([math.log(regularized_determinant_epstein(t, norm, tol).determinant)
                        for t in taus])
    design = np.column_stack([
        np.ones(len(taus)),
        np.log([t.im for t in taus]),
        np.log([abs(eta(t)) for t in taus]),
    ])
    # column-normalized singular values detect collinear designs
    cols = design / np.linalg.norm(design, axis=0)
    sv = np.linalg.svd(cols, compute_uv=False)
    if sv[-1] < 1e-8 * sv[0]:
        raise SingularFit("design matrix is rank deficient (need spread in Im tau and |eta|)")
    coef, *_ = np.linalg.lstsq(design, log_det, rcond=None)
    resid = log_det - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return ExponentFit(float(math.exp(coef[0])), float(coef[1]), float(coef[2]), rms, len(taus))


def kronecker_report(fit: ExponentFit) -> dict:
    """Fitted law next to the two candidate closed forms."""
    a, b = fit.rounded
    return {
        "fitted_law": fit.law(),
        "C": fit.C,
        "alpha": fit.alpha,
        "beta": fit.beta,
        "rms_residual": fit.rms_residual,
        "integer_exponents": fit.integer_exponents,
        "matches_stated_form": (a, b) == STATED_EXPONENTS,
        "matches_classical_form": (a, b) == CLASSICAL_EXPONENTS,
        "stated_form": "det = Im tau * |eta(tau)|^2",
        "discrepancy": None if (a, b) == STATED_EXPONENTS else (
            f"fitted exponents (alpha, beta) = ({a}, {b}) differ from "
            f"the stated Im tau |eta|^2 form {STATED_EXPONENTS}"),
    }


def l2_norm_holomorphic_form(tau) -> float:
    """``(-i/2) int dz ^ d(zbar)`` over ``C/(Z + tau Z)``, i.e. the area ``Im tau``."""
    return _as_tau(tau).im


@dataclass(frozen=True)
class DiscriminantNorm:
    """``value = (Im tau)^weight * |Delta(tau)|^power``.

    ``constant`` is ``value / det`` for the unit-volume determinant at the
    calibration samples.
    """

    value: float
    weight: float
    power: float
    constant: float


@lru_cache(maxsize=None)
def _default_calibration() -> tuple:
    return calibrate_discriminant_norm(tuple(default_tau_grid()))


def calibrate_discriminant_norm(samples) -> tuple:
    """Choose ``(weight, power)`` so ``(Im tau)^w |Delta|^p`` tracks the determinant.

    The unit-volume determinant is the SL2(Z)-invariant one, so its fitted
    exponents fix ``p = beta / 24`` (``|Delta| ~ |eta|^24``) and ``w = alpha``;
    invariance of the result needs ``w = 6 p``, which is checked.
    """
    fit = fit_kronecker_exponents(samples, Normalization.UNIT_VOLUME)
    alpha, beta = fit.rounded
    power = beta / 24.0
    weight = float(alpha)
    if abs(weight - 6.0 * power) > 1e-12:
        raise SingularFit(f"fitted exponents {fit.rounded} give a non-invariant weight")
    ref = TauPoint(0.0, 1.0)
    det = regularized_determinant_epstein(ref, Normalization.UNIT_VOLUME).determinant
    constant = ref.im ** weight * abs(discriminant_modular(ref)) ** power / det
    return weight, power, constant


def analytic_discriminant_l2(tau, calibration: tuple | None = None) -> DiscriminantNorm:
    """Weight-12 norm of the discriminant, ``(Im tau)^w |Delta(tau)|^p``."""
    tau = _as_tau(tau)
    weight, power, constant = calibration or _default_calibration()
    value = tau.im ** weight * abs(discriminant_modular(tau)) ** power
    return DiscriminantNorm(value, weight, power, constant)


def wp_curvature_check(tau, h: float = 1e-3, norm=Normalization.INDUCED) -> float:
    """``d^2/(dtau dtau-bar) log det`` by the five-point Laplacian stencil (one quarter of it)."""
    if not 1e-4 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-4, 1e-2]")
    tau = _as_tau(tau)

    def f(dx, dy):
        t = TauPoint(tau.re + dx, tau.im + dy)
        return -regularized_determinant_epstein(t, norm, 1e-15).zeta_prime_at_0

    f0 = f(0.0, 0.0)
    ring = [f(h, 0.0), f(-h, 0.0), f(0.0, h), f(0.0, -h)]
    if max(abs(v - f0) for v in ring) < 10.0 * np.finfo(float).eps * max(abs(f0), 1.0):
        raise PrecisionLoss("stencil values are indistinguishable at this step size")
    return (sum(ring) - 4.0 * f0) / (4.0 * h * h)
