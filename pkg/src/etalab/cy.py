"""Closed-form heat coefficients for Calabi-Yau metrics from curvature and Chern numbers.

Indexing is uniform throughout: ``a_{-k}`` is the coefficient of ``t^{-k}``
in the small-time expansion of the heat trace.  Curvature enters as the
integrated scalars below, never as tensors.

File formats:

* Chern data is JSON ``{"n": int, "L_top": number, "c2_L": number,
  "higher": {"k": number}}`` where ``higher[k]`` is ``int c_{n-k} ^ L^k``.
* Eigenvalue fixtures are plain text, one value per line; blank lines and
  lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import DimensionMismatch, MissingChernEntry
from .torus import TraceFunction
from .zeta import AsymptoticExpansion, ZetaResult, mellin_b_coefficients

__all__ = [
    "ChernData",
    "CurvatureInputs",
    "gilkey_a_minus1",
    "calabi_identity_residual",
    "cy3_heat_coefficients",
    "conjectured_coefficients",
    "b1_from_trace",
    "chern_from_dict",
    "load_chern_data",
    "dump_chern_data",
    "load_eigenvalues",
    "dump_eigenvalues",
]


@dataclass(frozen=True)
class ChernData:
    """Intersection numbers of a polarized manifold of complex dimension ``n``.

    Attributes:
        n: Complex dimension.
        L_top: ``int L^n``.
        c2_L: ``int c_2 ^ L^{n-2}``.
        higher: Optional ``k -> int c_{n-k} ^ L^k``.
        allow_zero: Accept ``L_top == 0`` (degenerate test inputs only).
    """

    n: int
    L_top: float
    c2_L: float
    higher: dict = field(default_factory=dict)
    allow_zero: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not (math.isfinite(self.L_top) and math.isfinite(self.c2_L)):
            raise ValueError("Chern numbers must be finite")
        if self.L_top < 0 or (self.L_top == 0 and not self.allow_zero):
            raise ValueError("L_top must be positive for a polarization")
        object.__setattr__(self, "higher", {int(k): float(v) for k, v in self.higher.items()})

    def intersection(self, k: int) -> float:
        """``int c_{n-k} ^ L^k``."""
        if k in self.higher:
            return self.higher[k]
        if k == self.n:
            return float(self.L_top)
        if k == self.n - 2:
            return float(self.c2_L)
        raise MissingChernEntry(f"no entry for int c_{self.n - k} ^ L^{k}")

    def as_dict(self) -> dict:
        out = {"n": self.n, "L_top": self.L_top, "c2_L": self.c2_L}
        if self.higher:
            out["higher"] = {str(k): v for k, v in sorted(self.higher.items())}
        return out


@dataclass(frozen=True)
class CurvatureInputs:
    """Integrated curvature scalars of a Kahler metric.

    Attributes:
        ric_norm2: ``||Ric||^2``.
        r_norm2: ``||R||^2``.
        scalar_sq_int: ``int k^2 vol``.
        laplacian_scalar_int: ``int Delta k vol``.
        c2_wedge: ``int c_2 ^ omega^{n-2}``.
    """

    ric_norm2: float = 0.0
    r_norm2: float = 0.0
    scalar_sq_int: float = 0.0
    laplacian_scalar_int: float = 0.0
    c2_wedge: float = 0.0

    def __post_init__(self):
        for name in ("ric_norm2", "r_norm2", "scalar_sq_int"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def ricci_flat(self) -> bool:
        return self.ric_norm2 == 0 and self.scalar_sq_int == 0 and self.laplacian_scalar_int == 0


def gilkey_a_minus1(inputs: CurvatureInputs) -> float:
    """``(-12 int Delta k + 5 ||Ric||^2 - 2 ||R||^2) / (1440 pi)``.

    Examples:
        >>> gilkey_a_minus1(CurvatureInputs(5, 2, 1, 3)) * 1440 * math.pi
        -15.0
    """
    num = -12.0 * inputs.laplacian_scalar_int + 5.0 * inputs.ric_norm2 - 2.0 * inputs.r_norm2
    return num / (1440.0 * math.pi)


def calabi_identity_residual(inputs: CurvatureInputs) -> float:
    """``2||Ric||^2 - ||R||^2 - int k^2`` minus ``-int c_2 ^ omega^{n-2}``."""
    lhs = 2.0 * inputs.ric_norm2 - inputs.r_norm2 - inputs.scalar_sq_int
    return lhs + inputs.c2_wedge


def cy3_heat_coefficients(chern: ChernData) -> dict:
    """Heat coefficients of a Ricci-flat metric on a threefold in the class ``L``.

    Returns:
        ``{"a_m3": L_top/(4 pi), "a_m2": 0.0, "a_m1": -c2_L/(720 pi)}``.
    """
    if chern.n != 3:
        raise DimensionMismatch(f"threefold formulas need n = 3, got n = {chern.n}")
    return {
        "a_m3": chern.L_top / (4.0 * math.pi),
        "a_m2": 0.0,
        "a_m1": -chern.c2_L / (720.0 * math.pi),
    }


def conjectured_coefficients(chern: ChernData, b_constants: dict) -> dict:
    """``a_{-k} = b_k int c_{n-k} ^ L^k`` for every ``k`` in ``b_constants``."""
    out = {}
    for k in sorted(int(k) for k in b_constants):
        if not 1 <= k <= chern.n:
            raise ValueError(f"k must lie in 1..{chern.n}, got {k}")
        b = float(b_constants[k] if k in b_constants else b_constants[str(k)])
        out[k] = b * chern.intersection(k)
    return out


def b1_from_trace(trace: TraceFunction, expansion: AsymptoticExpansion, zero_modes: int,
                  dimension: int | None = None, tol: float = 1e-10) -> ZetaResult:
    """Mellin-split ``b1`` and ``det = exp(-b1)`` for an externally supplied trace.

    Args:
        trace: Heat trace including the zero modes.
        expansion: Small-time coefficients of ``trace - zero_modes``.
        zero_modes: Multiplicity of the eigenvalue 0.
        dimension: Complex dimension of the underlying manifold; when given the
            expansion must have exactly this order.
        tol: Absolute tolerance on ``b1``.
    """
    if dimension is not None and expansion.order != dimension:
        raise DimensionMismatch(
            f"expansion order {expansion.order} does not match dimension {dimension}")
    return mellin_b_coefficients(trace, expansion, zero_modes, tol)


# ---------------------------------------------------------------------------
# I/O


def chern_from_dict(doc: dict) -> ChernData:
    unknown = set(doc) - {"n", "L_top", "c2_L", "higher"}
    if unknown:
        raise ValueError(f"unknown Chern data keys: {sorted(unknown)}")
    try:
        higher = {int(k): float(v) for k, v in (doc.get("higher") or {}).items()}
        return ChernData(int(doc["n"]), float(doc["L_top"]), float(doc["c2_L"]), higher)
    except KeyError as exc:
        raise ValueError(f"Chern data is missing {exc.args[0]!r}") from None


def load_chern_data(path) -> ChernData:
    return chern_from_dict(json.loads(Path(path).read_text()))


def dump_chern_data(chern: ChernData, path) -> None:
    Path(path).write_text(json.dumps(chern.as_dict(), indent=2, sort_keys=True) + "\n")


def load_eigenvalues(path) -> list:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    return values


def dump_eigenvalues(values, path) -> None:
    # repr round-trips doubles exactly
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in values))
