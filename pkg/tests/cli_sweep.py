"""Fixed CLI sweep; run as a script to print every document in order."""

import io
import sys

from etalab.cli import parse, run

SWEEP = [
    ["eta", "--tau", "0.5+2.0i"],
    ["eisenstein", "--tau", "0.1+1.1i"],
    ["discriminant", "--tau", "i", "--l2"],
    ["discriminant", "--lambda", "0.3+0.2i"],
    ["j", "--tau", "0.2+1.3i"],
    ["lambda", "--tau", "i"],
    ["spectrum", "--tau", "0.3+0.9i", "--count", "12"],
    ["heat-trace", "--tau", "1+i", "--t", "0.1", "--method", "both"],
    ["zeta", "--tau", "2i", "--s", "2", "--coefficients"],
    ["det", "--tau", "i", "--method", "both"],
    ["det", "--tau", "0.5+1.5i", "--normalization", "unit", "--method", "both"],
    ["kronecker", "--grid", "default", "--output", "csv"],
    ["fit-exponents", "--grid", "default", "--log-im"],
    ["periods", "--lambda", "0.5"],
    ["periods", "--s", "1"],
    ["monodromy", "--cusp", "0"],
    ["monodromy", "--family", "equianharmonic", "--turns", "1"],
    ["growth", "--family", "Equianharmonic"],
    ["cy-coeffs", "--curvature", "0,7,0,0,7"],
    ["b1", "--tau", "i"],
    ["scan-a0", "--grid", "0:0.4:2,1:2:2", "--output", "csv"],
]


def capture(argv):
    """Exit code, stdout and stderr of one invocation."""
    out, err = io.StringIO(), io.StringIO()
    code = run(parse(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def sweep_document() -> str:
    parts = []
    for argv in SWEEP:
        code, out, err = capture(argv)
        parts.append(f"$ etalab {' '.join(argv)}\n[exit {code}]\n{out}{err}")
    return "".join(parts)


if __name__ == "__main__":
    sys.stdout.write(sweep_document())
