"""Golden suites comparing the library against hard-coded closed forms.

The ``example1`` suite uses M(x1, x2) = x1 + x2 + x1*x2 with a standard
bivariate normal pair of correlation rho. The oracle below writes every
quantity out by hand; it shares no code with the computation path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .calculus import dependent_partials, dependent_second_order
from .core import Partition
from .dependency import GaussianLinearModel
from .expression import ExpressionField
from .geometry import metric_tensor, riemannian_gradient
from .jacobians import dependent_jacobian

EXAMPLE1_RHOS = (-0.9, -0.5, 0.0, 0.5, 0.9)
EXAMPLE1_POINTS = ((0.0, 0.0), (1.0, 2.0), (-1.0, 0.5))
GOLDEN_TOL = 1e-10

SUITES = ("example1",)


def example1_oracle(rho: float, x1: float, x2: float) -> dict:
    c = 1.0 / (rho ** 2 - 1.0) ** 2
    return {
        "dependent_jacobian": np.array([[1.0, rho], [rho, 1.0]]),
        "dependent_partials": np.array([1 + x2 + rho * (1 + x1), rho * (1 + x2) + 1 + x1]),
        "second_order": np.array([[2 * rho, 1 + rho ** 2], [1 + rho ** 2, 2 * rho]]),
        "metric": np.array([[1 + rho ** 2, 2 * rho], [2 * rho, 1 + rho ** 2]]),
        "metric_inverse": c * np.array([[1 + rho ** 2, -2 * rho], [-2 * rho, 1 + rho ** 2]]),
        "grad": c * np.array([(1 - rho) ** 2 + x2 * (1 + rho ** 2) - 2 * rho * x1,
                              (1 - rho) ** 2 + x1 * (1 + rho ** 2) - 2 * rho * x2]),
    }


def example1_computed(rho: float, x1: float, x2: float) -> dict:
    field = ExpressionField("x1 + x2 + x1*x2", ["x1", "x2"])
    partition = Partition(2, (), ((0, 1),))
    models = [GaussianLinearModel.bivariate(rho)]
    x = (x1, x2)
    metric = metric_tensor(partition, models, x)
    return {
        "dependent_jacobian": dependent_jacobian(partition, models, x),
        "dependent_partials": dependent_partials(field, partition, models, x).partials,
        "second_order": dependent_second_order(field, partition, models, x),
        "metric": metric.g,
        "metric_inverse": metric.g_inv,
        "grad": riemannian_gradient(field, partition, models, x),
    }


@dataclass(frozen=True)
class GoldenRow:
    rho: float
    point: tuple
    quantity: str
    error: float

    @property
    def passed(self) -> bool:
        return self.error <= GOLDEN_TOL


def run_example1(tamper: Optional[Callable[[str, np.ndarray], np.ndarray]] = None) -> list:
    """One row per (rho, point, quantity). ``tamper`` rewrites computed values (harness self-test)."""
    rows = []
    for rho in EXAMPLE1_RHOS:
        for point in EXAMPLE1_POINTS:
            expected = example1_oracle(rho, *point)
            got = example1_computed(rho, *point)
            for name, want in expected.items():
                value = got[name] if tamper is None else tamper(name, np.array(got[name]))
                rows.append(GoldenRow(rho, point, name, float(np.max(np.abs(value - want)))))
    return rows


def run_suite(name: str, tamper=None) -> list:
    if name == "example1":
        return run_example1(tamper)
    raise KeyError(f"unknown suite {name!r}")
