"""Command-line access to every etalab computation.

Usage::

    etalab <subcommand> [options] [--output json|csv] [--tol TOL] [--normalization induced|unit]

Exit codes: 0 success, 2 usage error, 3 malformed number, 4 computation
error (a JSON diagnostic ``{"error": ..., "message": ...}`` goes to stderr and
nothing is written to stdout).

Grids are written ``re0:re1:n,im0:im1:m``; add ``--log-im`` for geometric
spacing in ``Im tau``.  ``--grid default`` is the 4 x 5 grid with
``Re tau`` in ``[-0.4, 0.4]`` and geometric ``Im tau`` in ``[0.8, 3]``.
Complex literals accept ``a+bi``, ``bi``, ``i``, ``-i`` and plain reals.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import cy, degeneration, kronecker, modular, torus, zeta
from .exceptions import EtaLabError
from .torus import Normalization, TauPoint

__all__ = ["CommandSpec", "UsageError", "NumberFormatError", "parse", "run", "render",
           "main", "DISPATCH", "SUBCOMMANDS"]


class UsageError(Exception):
    exit_code = 2


class NumberFormatError(Exception):
    exit_code = 3


# ---------------------------------------------------------------------------
# literal parsing

_COMPLEX_RE = re.compile(r"(^|[+-])i")


def parse_complex(text: str) -> complex:
    """Parse ``"0.5+2i"``, ``"i"``, ``"-2.5e-3i"`` or ``"3"``."""
    s = text.strip().replace(" ", "").lower()
    if not s or "j" in s:
        raise NumberFormatError(f"malformed complex literal {text!r}")
    s = _COMPLEX_RE.sub(lambda m: m.group(1) + "1i", s).replace("i", "j")
    try:
        z = complex(s)
    except ValueError:
        raise NumberFormatError(f"malformed complex literal {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NumberFormatError(f"non-finite complex literal {text!r}")
    return z


def parse_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise NumberFormatError(f"malformed number {text!r}") from None
    if not math.isfinite(x):
        raise NumberFormatError(f"non-finite number {text!r}")
    return x


def parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise NumberFormatError(f"malformed integer {text!r}") from None


def parse_tau(text: str) -> TauPoint:
    z = parse_complex(text)
    if not z.imag > 0:
        raise NumberFormatError(f"tau must have positive imaginary part, got {text!r}")
    return TauPoint(z.real, z.imag)


@dataclass(frozen=True)
class GridSpec:
    """``re0:re1:n,im0:im1:m``; ``None`` fields mean the default grid."""

    re_range: tuple = (-0.4, 0.4)
    n_re: int = 4
    im_range: tuple = (0.8, 3.0)
    n_im: int = 5

    def points(self, log_im: bool) -> list:
        return kronecker.default_tau_grid(self.n_re, self.n_im, self.re_range,
                                          self.im_range, log_im)


def parse_grid(text: str) -> GridSpec:
    if text.strip().lower() == "default":
        return GridSpec()
    try:
        re_part, im_part = text.split(",")
        r0, r1, n = re_part.split(":")
        i0, i1, m = im_part.split(":")
    except ValueError:
        raise NumberFormatError(f"grid must look like re0:re1:n,im0:im1:m, got {text!r}") from None
    grid = GridSpec((parse_float(r0), parse_float(r1)), parse_int(n),
                    (parse_float(i0), parse_float(i1)), parse_int(m))
    if grid.n_re < 1 or grid.n_im < 1:
        raise NumberFormatError("grid counts must be >= 1")
    if min(grid.im_range) <= 0:
        raise NumberFormatError("grid Im tau bounds must be positive")
    return grid


def parse_radii(text: str) -> list:
    """``r0:r1:n`` (geometric) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise NumberFormatError(f"radii range must be r0:r1:n, got {text!r}")
        r0, r1, n = parse_float(parts[0]), parse_float(parts[1]), parse_int(parts[2])
        if r0 <= 0 or r1 <= 0 or n < 2:
            raise NumberFormatError("radii range needs positive bounds and n >= 2")
        return [float(x) for x in np.geomspace(r0, r1, n)]
    return [parse_float(x) for x in text.split(",")]


def parse_mapping(text: str) -> dict:
    """``"3=0.0795,1=-0.00044"`` to ``{3: 0.0795, 1: -0.00044}``."""
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise NumberFormatError(f"expected k=value, got {item!r}")
        k, v = item.split("=", 1)
        out[parse_int(k)] = parse_float(v)
    return out


def parse_curvature(text: str) -> tuple:
    values = tuple(parse_float(x) for x in text.split(","))
    if len(values) != 5:
        raise NumberFormatError("curvature needs ric_norm2,r_norm2,scalar_sq_int,"
                                "laplacian_scalar_int,c2_wedge")
    return values


# ---------------------------------------------------------------------------
# command spec and parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or "")
        raise SystemExit(status)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=parse_float, default=1e-10)
    common.add_argument("--normalization", choices=("induced", "unit"), default="induced")

    parser = _Parser(prog="etalab", description="Spectral and modular computations on "
                     "flat tori and elliptic families.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("eta", "Dedekind eta with its fundamental-domain reduction")
    p.add_argument("--tau", type=parse_tau, required=True)

    p = add("eisenstein", "Lattice invariants g2 and g3")
    p.add_argument("--tau", type=parse_tau, required=True)
    p.add_argument("--cross-check", action="store_true",
                   help="also sum the lattice directly and compare")

    p = add("discriminant", "Modular discriminant and its weight-12 norm")
    p.add_argument("--tau", type=parse_tau)
    p.add_argument("--lambda", dest="lam", type=parse_complex,
                   help="algebraic discriminant on the lambda line")
    p.add_argument("--l2", action="store_true", help="include (Im tau)^w |Delta|^p")
    p.add_argument("--grid", type=parse_grid, help="calibration grid for --l2")
    p.add_argument("--log-im", action="store_true")

    p = add("j", "Klein j-invariant, directly and through lambda")
    p.add_argument("--tau", type=parse_tau)
    p.add_argument("--lambda", dest="lam", type=parse_complex)

    p = add("lambda", "Modular lambda and the theta constants")
    p.add_argument("--tau", type=parse_tau, required=True)

    p = add("spectrum", "Lowest Laplace eigenvalues of a flat torus")
    p.add_argument("--tau", type=parse_tau, required=True)
    p.add_argument("--count", type=parse_int, default=10)

    p = add("heat-trace", "Heat trace at time t")
    p.add_argument("--tau", type=parse_tau, required=True)
    p.add_argument("--t", type=parse_float, required=True)
    p.add_argument("--method", choices=("auto", "direct", "poisson", "both"), default="auto")

    p = add("zeta", "Epstein zeta value or fitted heat coefficients")
    p.add_argument("--tau", type=parse_tau, required=True)
    p.add_argument("--s", type=parse_complex, default=2.0)
    p.add_argument("--coefficients", action="store_true",
                   help="fit the small-time expansion instead")

    p = add("det", "Regularized determinant")
    p.add_argument("--tau", type=parse_tau, required=True)
    p.add_argument("--method", choices=("mellin", "epstein", "both"), default="epstein")

    p = add("kronecker", "Determinant against the two closed forms")
    p.add_argument("--tau", type=parse_tau)
    p.add_argument("--grid", type=parse_grid)
    p.add_argument("--log-im", action="store_true")
    p.add_argument("--curvature", action="store_true",
                   help="include the mixed second derivative of log det")

    p = add("fit-exponents", "Regress log det on log Im tau and log |eta|")
    p.add_argument("--grid", type=parse_grid, default=GridSpec())
    p.add_argument("--log-im", action="store_true")

    p = add("periods", "Legendre periods, or the equianharmonic period with --s")
    p.add_argument("--lambda", dest="lam", type=parse_complex)
    p.add_argument("--s", type=parse_complex)

    p = add("monodromy", "Monodromy of the period vector")
    p.add_argument("--cusp", choices=("0", "1", "inf"))
    p.add_argument("--center", type=parse_complex, help="circle centre instead of a cusp")
    p.add_argument("--basepoint", type=parse_complex, default=0.5)
    p.add_argument("--steps", type=parse_int, default=64)
    p.add_argument("--family", choices=("legendre", "equianharmonic"), default="legendre")
    p.add_argument("--turns", type=parse_int, default=1)

    p = add("growth", "Boundary growth law of the L2 norm")
    p.add_argument("--family", choices=("Legendre_at_0", "Equianharmonic"), required=True)
    p.add_argument("--radii", type=parse_radii, default=None,
                   help="r0:r1:n geometric or comma list (default 1e-8:1e-4:9)")

    p = add("cy-coeffs", "Threefold heat coefficients from Chern data")
    p.add_argument("--input", help="Chern data JSON file")
    p.add_argument("--b", type=parse_mapping, help="b_k constants, e.g. 3=0.0796,1=-0.00044")
    p.add_argument("--curvature", type=parse_curvature,
                   help="ric_norm2,r_norm2,scalar_sq_int,laplacian_scalar_int,c2_wedge")

    p = add("b1", "b1 and det from a trace (torus or eigenvalue file)")
    p.add_argument("--tau", type=parse_tau)
    p.add_argument("--eigenvalues", help="text file, one eigenvalue per line")
    p.add_argument("--expansion", type=parse_mapping,
                   help="k=a_{-k} coefficients of the trace minus its zero modes")

    p = add("scan-a0", "Constancy of a0 and a_{-1} over a grid")
    p.add_argument("--grid", type=parse_grid, default=GridSpec(re_range=(0.0, 0.4), n_re=2))
    p.add_argument("--log-im", action="store_true")
    p.add_argument("--threshold", type=parse_float, default=1e-4)
    return parser


_PARSER = _build_parser()
SUBCOMMANDS = tuple(sorted(_PARSER._subparsers._group_actions[0].choices))
_ALLOWED = {name: {a.dest for a in p._actions if a.dest not in ("help", "output", "tol",
                                                                   "normalization")}
            for name, p in _PARSER._subparsers._group_actions[0].choices.items()}


@dataclass(frozen=True)
class CommandSpec:
    subcommand: str
    params: dict = field(default_factory=dict)
    output: str = "json"
    tol: float = 1e-10
    normalization: Normalization = Normalization.INDUCED

    def __post_init__(self):
        if self.subcommand not in _ALLOWED:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        unknown = set(self.params) - _ALLOWED[self.subcommand]
        if unknown:
            raise UsageError(f"unknown parameters for {self.subcommand}: {sorted(unknown)}")
        if self.output not in ("json", "csv"):
            raise UsageError(f"unknown output format {self.output!r}")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))

    def get(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else value


def parse(argv) -> CommandSpec:
    """Parse arguments into a :class:`CommandSpec`.

    Raises:
        UsageError: Unknown subcommand or flag (exit code 2).
        NumberFormatError: Malformed numeric literal (exit code 3).
    """
    ns = _PARSER.parse_args(list(argv))
    params = {k: v for k, v in vars(ns).items()
              if k not in ("subcommand", "output", "tol", "normalization")}
    return CommandSpec(ns.subcommand, params, ns.output, ns.tol, ns.normalization)


# ---------------------------------------------------------------------------
# handlers; each returns a dict (single record) or a list of flat dicts (table)


def _tau_dict(tau: TauPoint) -> dict:
    return {"re": tau.re, "im": tau.im}


def _require(spec: CommandSpec, *keys):
    if all(spec.get(k) is None for k in keys):
        raise UsageError(f"{spec.subcommand} needs one of: " + ", ".join("--" + k for k in keys))


def _grid(spec: CommandSpec) -> list:
    return spec.get("grid", GridSpec()).points(bool(spec.get("log_im", False)))


def _eta(spec):
    tau = spec.params["tau"]
    red = modular.reduce_to_fundamental_domain(tau)
    (a, b), (c, d) = red.matrix
    zr = red.tau_reduced.z
    series = modular.eta_product_qseries(np.exp(2j * np.pi * zr), spec.tol)
    return {
        "tau": _tau_dict(tau),
        "eta": modular.eta(tau, spec.tol),
        "tau_reduced": _tau_dict(red.tau_reduced),
        "matrix": [[a, b], [c, d]],
        "word": "".join(f"T{k}" if g == "T" else "S" for g, k in red.word) or "1",
        "dedekind_sum": float(modular.dedekind_sum(d, c)) if c else 0.0,
        "truncation_order": series.truncation_order,
    }


def _eisenstein(spec):
    tau = spec.params["tau"]
    cross = bool(spec.get("cross_check", False))
    zr = modular.reduce_to_fundamental_domain(tau).tau_reduced.z
    q = np.exp(2j * np.pi * zr)
    out = {
        "tau": _tau_dict(tau),
        "g2": modular.eisenstein_g2(tau, spec.tol),
        "g3": modular.eisenstein_g3(tau, spec.tol),
        "truncation_order_E4": modular.eisenstein_qseries(4, q, spec.tol).truncation_order,
        "truncation_order_E6": modular.eisenstein_qseries(6, q, spec.tol).truncation_order,
    }
    if cross:
        # direct lattice sums converge algebraically; check at a coarser tolerance
        tol = max(spec.tol, 1e-4)
        modular.eisenstein_g2(tau, tol, cross_check=True)
        modular.eisenstein_g3(tau, tol, cross_check=True)
        g2_lat, g2_bound = modular.lattice_eisenstein(tau, 4, tol)
        g3_lat, g3_bound = modular.lattice_eisenstein(tau, 6, tol)
        out.update({"g2_lattice": 60.0 * g2_lat, "g3_lattice": 140.0 * g3_lat,
                    "lattice_tail_bound_4": g2_bound, "lattice_tail_bound_6": g3_bound})
    return out


def _discriminant(spec):
    _require(spec, "tau", "lam")
    out = {}
    tau = spec.get("tau")
    if tau is not None:
        delta = modular.discriminant_modular(tau, spec.tol)
        eta_form = (2.0 * math.pi) ** 12 * modular.eta(tau) ** 24
        zr = modular.reduce_to_fundamental_domain(tau).tau_reduced.z
        out.update({
            "tau": _tau_dict(tau),
            "discriminant": delta,
            "eta_form": eta_form,
            "rel_diff": abs(delta - eta_form) / abs(delta),
            "truncation_order": modular.discriminant_qseries(
                np.exp(2j * np.pi * zr), spec.tol).truncation_order,
        })
        if spec.get("l2", False):
            calibration = None
            if spec.get("grid") is not None:
                calibration = kronecker.calibrate_discriminant_norm(_grid(spec))
            dn = kronecker.analytic_discriminant_l2(tau, calibration)
            out.update({"l2_value": dn.value, "l2_weight": dn.weight, "l2_power": dn.power,
                        "l2_constant": dn.constant,
                        "holomorphic_form_l2": kronecker.l2_norm_holomorphic_form(tau)})
    lam = spec.get("lam")
    if lam is not None:
        out.update({"lambda": lam,
                    "algebraic_discriminant": modular.algebraic_discriminant_lambda(lam)})
    return out


def _j(spec):
    _require(spec, "tau", "lam")
    out = {}
    tau = spec.get("tau")
    if tau is not None:
        lam = modular.lambda_function(tau)
        out.update({"tau": _tau_dict(tau), "j": modular.j_invariant(tau, spec.tol),
                    "lambda": lam, "j_from_lambda": modular.covering_j_from_lambda(lam)})
    if spec.get("lam") is not None:
        out["j_covering"] = modular.covering_j_from_lambda(spec.params["lam"])
    return out


def _lambda(spec):
    tau = spec.params["tau"]
    t2, t3, t4 = modular.theta_constants(tau)
    return {"tau": _tau_dict(tau), "lambda": modular.lambda_function(tau),
            "theta2": t2, "theta3": t3, "theta4": t4,
            "jacobi_residual": abs(t3 ** 4 - t2 ** 4 - t4 ** 4)}


def _spectrum(spec):
    tau = spec.params["tau"]
    count = spec.get("count", 10)
    geom = torus.lattice_geometry(tau, spec.normalization)
    vals = torus.eigenvalues(tau, spec.normalization, count).eigenvalues
    return [{"index": i, "eigenvalue": v, "area": geom.area} for i, v in enumerate(vals)]


def _heat_trace(spec):
    tau, t = spec.params["tau"], spec.params["t"]
    method = spec.get("method", "auto")
    norm = spec.normalization
    out = {"tau": _tau_dict(tau), "t": t, "normalization": norm.value}
    if method == "auto":
        out["value"] = torus.heat_trace(tau, norm, t, spec.tol)
    if method in ("direct", "both"):
        out["direct"] = torus.heat_trace_direct(tau, norm, t, spec.tol)
    if method in ("poisson", "both"):
        out["poisson"] = torus.heat_trace_poisson(tau, norm, t, spec.tol)
    if method == "both":
        out["abs_diff"] = abs(out["direct"] - out["poisson"])
    return out


def _zeta(spec):
    tau = spec.params["tau"]
    norm = spec.normalization
    if spec.get("coefficients", False):
        trace = torus.torus_trace(tau, norm)
        fitted = zeta.extract_heat_coefficients(trace, 1, 1, zeta.default_fit_grid(tau, norm))
        exact = zeta.torus_expansion(tau, norm)
        return {"tau": _tau_dict(tau), "normalization": norm.value,
                "a0": fitted.a(0), "a_m1": fitted.a(1), "fit_residual": fitted.fit_residual,
                "a0_exact": exact.a(0), "a_m1_exact": exact.a(1)}
    s = spec.get("s", 2.0)
    return {"tau": _tau_dict(tau), "s": s, "normalization": norm.value,
            "zeta": zeta.epstein_zeta(tau, norm, s, spec.tol)}


def _det(spec):
    tau = spec.params["tau"]
    method = spec.get("method", "epstein")
    norm = spec.normalization
    out = {"tau": _tau_dict(tau), "normalization": norm.value}
    if method in ("mellin", "both"):
        out["mellin"] = zeta.regularized_determinant_mellin(tau, norm, spec.tol).as_dict()
    if method in ("epstein", "both"):
        out["epstein"] = zeta.regularized_determinant_epstein(
            tau, norm, min(spec.tol, 1e-13)).as_dict()
    if method == "both":
        dm, de = out["mellin"]["determinant"], out["epstein"]["determinant"]
        out["rel_diff"] = abs(dm - de) / abs(de)
    return out


def _kronecker(spec):
    norm = spec.normalization
    tol = min(spec.tol, 1e-13)
    curvature = bool(spec.get("curvature", False))
    taus = [spec.params["tau"]] if spec.get("tau") is not None else _grid(spec)
    rows = []
    for tau in taus:
        row = kronecker.kronecker_compare(tau, tol, norm).as_row()
        if curvature:
            row["wp_curvature"] = kronecker.wp_curvature_check(tau, 1e-3, norm)
        rows.append(row)
    return rows[0] if spec.get("tau") is not None else rows


def _fit_exponents(spec):
    fit = kronecker.fit_kronecker_exponents(_grid(spec), spec.normalization,
                                            min(spec.tol, 1e-13))
    report = kronecker.kronecker_report(fit)
    report["normalization"] = spec.normalization.value
    report["n_samples"] = fit.n_samples
    return report


def _periods(spec):
    _require(spec, "lam", "s")
    out = {}
    lam = spec.get("lam")
    if lam is not None:
        p = degeneration.legendre_periods(lam)
        out.update(p.as_dict())
        out["F"] = degeneration.hypergeometric_2f1_half(lam, max(spec.tol, 1e-15))
        out["F_derivative"] = degeneration.hypergeometric_2f1_half_derivative(
            lam, max(spec.tol, 1e-15))
        out["vanishing_cycle_period"] = degeneration.vanishing_cycle_period(lam)
    s = spec.get("s")
    if s is not None:
        out["s"] = s
        out["equianharmonic_period"] = degeneration.equianharmonic_period(s)
    return out


def _monodromy(spec):
    if spec.get("family", "legendre") == "equianharmonic":
        m = degeneration.equianharmonic_monodromy(spec.get("basepoint", 0.5) * 2.0,
                                                  spec.get("turns", 1))
        return {"family": "equianharmonic", "turns": m.turns, "factor": m.factor,
                "order": m.order}
    _require(spec, "cusp", "center")
    base = spec.get("basepoint", 0.5)
    steps = spec.get("steps", 64)
    if spec.get("cusp") is not None:
        m = degeneration.monodromy_around(spec.params["cusp"], base, steps)
        where = {"cusp": spec.params["cusp"]}
    else:
        m = degeneration.monodromy_along_circle(spec.params["center"], base, steps)
        where = {"center": spec.params["center"]}
    return {"family": "legendre", **where, "basepoint": base,
            "entries": [list(r) for r in m.entries], "determinant": m.determinant,
            "in_gamma2": m.in_gamma2, "residual": m.residual, "steps": m.steps}


def _growth(spec):
    radii = spec.get("radii") or [float(x) for x in np.geomspace(1e-8, 1e-4, 9)]
    law = degeneration.boundary_growth_fit(spec.params["family"], radii)
    return {"family": spec.params["family"], **law.as_dict(), "n_radii": len(radii)}


def _cy_coeffs(spec):
    _require(spec, "input", "curvature")
    out = {}
    if spec.get("input") is not None:
        chern = cy.load_chern_data(spec.params["input"])
        if chern.n == 3:
            out.update(cy.cy3_heat_coefficients(chern))
        b = spec.get("b")
        if b is not None:
            for k, v in cy.conjectured_coefficients(chern, b).items():
                out[f"conjectured_a_m{k}"] = v
    if spec.get("curvature") is not None:
        inputs = cy.CurvatureInputs(*spec.params["curvature"])
        out["gilkey_a_m1"] = cy.gilkey_a_minus1(inputs)
        out["calabi_residual"] = cy.calabi_identity_residual(inputs)
    return out


def _b1(spec):
    _require(spec, "tau", "eigenvalues")
    expansion_map = spec.get("expansion")
    if spec.get("eigenvalues") is not None:
        values = cy.load_eigenvalues(spec.params["eigenvalues"])
        trace = torus.trace_from_eigenvalues(values, spec.params["eigenvalues"])
        zero_modes = sum(1 for v in values if v == 0)
        if expansion_map is None:
            # a finite spectrum is regular at t = 0
            expansion_map = {0: float(len(values) - zero_modes)}
        dimension = None
    else:
        tau = spec.params["tau"]
        trace = torus.torus_trace(tau, spec.normalization)
        zero_modes = 1
        if expansion_map is None:
            expansion_map = zeta.torus_expansion(tau, spec.normalization).coefficients
        dimension = 1
    order = max(expansion_map)
    coeffs = {k: float(expansion_map.get(k, 0.0)) for k in range(order + 1)}
    expansion = zeta.AsymptoticExpansion(coeffs, order)
    res = cy.b1_from_trace(trace, expansion, zero_modes, dimension, spec.tol)
    return {"descriptor": trace.descriptor, "zero_modes": zero_modes, **res.as_dict()}


def _scan_a0(spec):
    report = zeta.a0_constancy_scan(_grid(spec), spec.normalization,
                                    spec.get("threshold", 1e-4))
    if spec.output == "csv":
        return report.as_rows()
    return {"rows": report.as_rows(), "mean_a0": report.mean_a0,
            "max_deviation": report.max_deviation, "mean_a_m1": report.mean_a_minus1,
            "max_deviation_a_m1": report.max_deviation_a_minus1,
            "threshold": report.threshold, "passed": report.passed}


_HANDLERS = {
    "eta": _eta,
    "eisenstein": _eisenstein,
    "discriminant": _discriminant,
    "j": _j,
    "lambda": _lambda,
    "spectrum": _spectrum,
    "heat-trace": _heat_trace,
    "zeta": _zeta,
    "det": _det,
    "kronecker": _kronecker,
    "fit-exponents": _fit_exponents,
    "periods": _periods,
    "monodromy": _monodromy,
    "growth": _growth,
    "cy-coeffs": _cy_coeffs,
    "b1": _b1,
    "scan-a0": _scan_a0,
}

# Library operations reached by each subcommand (directly or via the named wrapper).
DISPATCH = {
    "eta": (modular.reduce_to_fundamental_domain, modular.eta, modular.dedekind_sum,
            modular.eta_product_qseries),
    "eisenstein": (modular.eisenstein_g2, modular.eisenstein_g3, modular.eisenstein_qseries,
                   modular.lattice_eisenstein),
    "discriminant": (modular.discriminant_modular, modular.discriminant_qseries,
                     modular.algebraic_discriminant_lambda, kronecker.analytic_discriminant_l2,
                     kronecker.calibrate_discriminant_norm,
                     kronecker.l2_norm_holomorphic_form),
    "j": (modular.j_invariant, modular.covering_j_from_lambda, modular.lambda_function),
    "lambda": (modular.lambda_function, modular.theta_constants),
    "spectrum": (torus.eigenvalues, torus.lattice_geometry),
    "heat-trace": (torus.heat_trace, torus.heat_trace_direct, torus.heat_trace_poisson),
    "zeta": (zeta.epstein_zeta, zeta.extract_heat_coefficients, zeta.default_fit_grid,
             zeta.torus_expansion, torus.torus_trace),
    "det": (zeta.regularized_determinant_mellin, zeta.regularized_determinant_epstein,
            zeta.mellin_b_coefficients),
    "kronecker": (kronecker.kronecker_compare, kronecker.default_tau_grid,
                  kronecker.wp_curvature_check),
    "fit-exponents": (kronecker.fit_kronecker_exponents, kronecker.kronecker_report),
    "periods": (degeneration.legendre_periods, degeneration.hypergeometric_2f1_half,
                degeneration.hypergeometric_2f1_half_derivative,
                degeneration.vanishing_cycle_period, degeneration.equianharmonic_period),
    "monodromy": (degeneration.monodromy_around, degeneration.monodromy_along_circle,
                  degeneration.equianharmonic_monodromy),
    "growth": (degeneration.boundary_growth_fit,),
    "cy-coeffs": (cy.load_chern_data, cy.chern_from_dict, cy.cy3_heat_coefficients,
                  cy.conjectured_coefficients, cy.gilkey_a_minus1,
                  cy.calabi_identity_residual),
    "b1": (cy.b1_from_trace, cy.load_eigenvalues, torus.trace_from_eigenvalues),
    "scan-a0": (zeta.a0_constancy_scan,),
}


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    return "0" if text == "-0" else text


def _to_plain(obj):
    """Normalize values to dict/list/str/int/float/complex/bool/None."""
    if isinstance(obj, (bool, type(None), str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, TauPoint):
        return {"re": obj.re, "im": obj.im}
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return complex(obj)
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_to_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent: int = 0) -> str:
    """JSON with 17 significant digits; complex values become ``{"re", "im"}``."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if not obj:
        return "[]"
    return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"


def _flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, complex):
            out[key + ".re"], out[key + ".im"] = v.real, v.imag
        elif isinstance(v, list):
            out[key] = to_json(v).replace("\n", "").replace("  ", "")
        else:
            out[key] = v
    return out


def to_csv(rows) -> str:
    if isinstance(rows, dict):
        rows = [rows]
    flat = [_flatten(r) for r in rows]
    header = list(flat[0]) if flat else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in flat:
        writer.writerow([_cell(r.get(h)) for h in header])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v).replace("null", "")
    return str(v)


def render(spec: CommandSpec) -> str:
    """Compute and format the full output document; raises on any error."""
    result = _to_plain(_HANDLERS[spec.subcommand](spec))
    if spec.output == "csv":
        return to_csv(result)
    return to_json(result) + "\n"


def run(spec: CommandSpec, stdout=None, stderr=None) -> int:
    """Execute ``spec``; the document is written only after it is complete."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        document = render(spec)
    except UsageError as exc:
        stderr.write(str(exc) + "\n")
        return UsageError.exit_code
    except (EtaLabError, ValueError, ZeroDivisionError, OverflowError, OSError) as exc:
        stderr.write(to_json({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 4
    stdout.write(document)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse(argv)
    except (UsageError, NumberFormatError) as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return exc.exit_code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
