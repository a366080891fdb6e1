"""Print the Example-1 quantities for a grid of correlations and points.

Usage: python scripts/example1_table.py [--rhos -0.9 0 0.9] [--point 1 2]
"""
import argparse

import numpy as np

from depcalc import GaussianLinearModel, Partition, dependent_partials, dependent_second_order
from depcalc import ExpressionField, metric_tensor, riemannian_gradient
from depcalc.jacobians import actual_jacobian


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rhos", type=float, nargs="+", default=[-0.9, -0.5, 0.0, 0.5, 0.9])
    parser.add_argument("--point", type=float, nargs=2, default=[1.0, 2.0])
    args = parser.parse_args()

    field = ExpressionField("x1 + x2 + x1*x2", ["x1", "x2"])
    part = Partition(2, (), ((0, 1),))
    x = np.array(args.point)
    np.set_printoptions(precision=6, suppress=True)
    print(f"M = x1 + x2 + x1*x2 at x = {x}, formal gradient {field.gradient(x)}")
    for rho in args.rhos:
        models = [GaussianLinearModel.bivariate(rho)]
        print(f"\nrho = {rho}")
        for j in (0, 1):
            try:
                ja = actual_jacobian(part, models, x, [j])
                print(f"  actual partials (explanatory {j}): {ja.T @ field.gradient(x)}")
            except ZeroDivisionError:
                print(f"  actual partials (explanatory {j}): undefined (zero sensitivity)")
        print(f"  dependent partials: {dependent_partials(field, part, models, x).partials}")
        print(f"  second order:\n{dependent_second_order(field, part, models, x)}")
        m = metric_tensor(part, models, x)
        print(f"  metric rank {m.rank}\n{m.g}")
        print(f"  Riemannian gradient: {riemannian_gradient(field, part, models, x)}")


if __name__ == "__main__":
    main()
