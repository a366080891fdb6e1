"""Error of the second-order expansion of M = x1 + x2 + x1*x2 versus step size.

For each correlation the expansion about x0 is compared with the true value
M(x0 + h*u) along a fixed direction u. At rho = 0 the error is zero (M is
quadratic); otherwise the expansion is built from the dependent-input gradient
and Hessian, whose linear term differs from the Euclidean gradient, so the
error shrinks only linearly in h.
"""
import argparse

import numpy as np

from depcalc import ExpressionField, GaussianLinearModel, Partition
from depcalc.geometry import taylor_components


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rhos", type=float, nargs="+", default=[0.0, 0.3, 0.6, 0.9])
    parser.add_argument("--base", type=float, nargs=2, default=[1.0, 2.0])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    field = ExpressionField("x1 + x2 + x1*x2", ["x1", "x2"])
    part = Partition(2, (), ((0, 1),))
    x0 = np.array(args.base)
    u = np.random.default_rng(args.seed).standard_normal(2)
    u /= np.linalg.norm(u)
    steps = [1e-3, 1e-2, 1e-1, 1.0]
    print(f"direction u = {u}")
    print(f"{'rho':>6} " + " ".join(f"{'h=' + format(h, 'g'):>12}" for h in steps))
    for rho in args.rhos:
        models = [GaussianLinearModel.bivariate(rho)]
        errs = []
        for h in steps:
            t = taylor_components(field, part, models, x0, x0 + h * u)
            errs.append(abs(t.value - field.eval(x0 + h * u)))
        print(f"{rho:>6} " + " ".join(f"{e:>12.3e}" for e in errs))


if __name__ == "__main__":
    main()
