"""Regenerate the committed toy LP fixture.

A 4-variable, 3-equality-constraint LP with a known optimal pair, built so
that optimality is exact in floating point: draw A and an interior primal
point x* (all components strictly positive), set b = A x*, draw a dual vector
and back out c = A^T y_gen, which makes every feasible point optimal and
(x*, -y_gen) a saddle point of the lowered problem. Run from the repository
root:

    python scripts/make_toy_lp.py
"""

import os

import numpy as np

from gapmin.ingestion import ConicProgram, serialize_native
from gapmin.prox import ConeDescriptor

SEED = 7
N = 4
M = 3

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir,
                   "src", "gapmin", "fixtures", "toy_lp.txt")


def build_program() -> ConicProgram:
    rng = np.random.default_rng(SEED)
    a = rng.uniform(-1.0, 1.0, size=(M, N))
    x_star = rng.uniform(0.0, 1.0, size=N)
    b = a @ x_star
    y_gen = rng.uniform(-1.0, 1.0, size=M)
    c = a.T @ y_gen
    rows, cols = np.nonzero(np.ones_like(a))
    return ConicProgram(
        n=N, m=M, sense="min", c=c, b=b, a_rows=rows, a_cols=cols,
        a_vals=a[rows, cols], row_cones=(ConeDescriptor("zero", M),),
        var_cones=(ConeDescriptor("nonneg", N),))


def main() -> None:
    text = serialize_native(build_program())
    with open(OUT, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
