"""Actual and dependent partial derivatives of a scalar function of dependent inputs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Partition, ScalarField, as_point
from .dependency import DependencyModel
from .errors import SymmetryCheckError
from .jacobians import (ACTUAL, DEPENDENT, actual_jacobian, dependent_group_jacobian,
                        dependent_jacobian, second_derivative_matrix)

BLOCK_SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class DerivativeReport:
    point: np.ndarray
    formal_gradient: np.ndarray
    partials: np.ndarray
    kind: str
    second_order: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.second_order is not None and self.kind != DEPENDENT:
            raise ValueError("second-order derivatives are only defined for the dependent kind")


def actual_partials(field: ScalarField, partition: Partition, models: Sequence[DependencyModel],
                    x, explanatory_choice: Sequence[int]) -> DerivativeReport:
    """``J_a(x).T @ grad M(x)`` for the given explanatory index of each dependent group."""
    x = as_point(x, partition.dim)
    jac = actual_jacobian(partition, models, x, explanatory_choice)
    grad = np.asarray(field.gradient(x), dtype=float)
    return DerivativeReport(x, grad, jac.T @ grad, ACTUAL)


def dependent_partials(field: ScalarField, partition: Partition, models: Sequence[DependencyModel],
                       x) -> DerivativeReport:
    """``J_d(x).T @ grad M(x)``."""
    x = as_point(x, partition.dim)
    jac = dependent_jacobian(partition, models, x)
    grad = np.asarray(field.gradient(x), dtype=float)
    return DerivativeReport(x, grad, jac.T @ grad, DEPENDENT)


def _check_transpose(upper: np.ndarray, lower: np.ndarray, k: int, l: int):
    scale = 1.0 + max(np.max(np.abs(upper), initial=0.0), np.max(np.abs(lower), initial=0.0))
    gap = np.max(np.abs(upper.T - lower), initial=0.0)
    if gap > BLOCK_SYMMETRY_TOL * scale:
        raise SymmetryCheckError(
            f"block ({l},{k}) is not the transpose of block ({k},{l}); "
            f"max gap {gap:.3e}")


def dependent_second_order(field: ScalarField, partition: Partition,
                           models: Sequence[DependencyModel], x) -> np.ndarray:
    """Dependent second-order partial derivatives, assembled block by block.

    Groups are indexed with 0 for the independent group (Jacobian = identity)
    and 1..K-1 for the dependent ones. Block ``(k, l)`` is
    ``J_k.T @ H[k, l] @ J_l``; diagonal blocks of dependent groups add
    ``diag(S_k.T @ grad_k) @ J_k`` where column ``i`` of ``S_k`` is the second
    derivative of the group in its ``i``-th coordinate. Lower off-diagonal
    blocks are computed directly and checked against the transpose of the
    upper ones.
    """
    x = as_point(x, partition.dim)
    hess = np.asarray(field.hessian(x), dtype=float)
    grad = np.asarray(field.gradient(x), dtype=float)
    if len(models) != len(partition.groups):
        raise ValueError(f"need {len(partition.groups)} models, got {len(models)}")

    index = [list(partition.independent)] + [list(g) for g in partition.groups]
    jacs = [np.eye(len(index[0]))]
    curvature = [None]
    for k, (idx, model) in enumerate(zip(partition.groups, models), start=1):
        gp = x[list(idx)]
        jk = dependent_group_jacobian(model, gp, group=k).matrix
        s = second_derivative_matrix(model, gp, group=k)
        jacs.append(jk)
        curvature.append(np.diag(s.T @ grad[list(idx)]) @ jk)

    out = np.zeros((partition.dim, partition.dim))
    blocks = {}
    for k, rows in enumerate(index):
        for l, cols in enumerate(index):
            if not rows or not cols:
                continue
            block = jacs[k].T @ hess[np.ix_(rows, cols)] @ jacs[l]
            if k == l and curvature[k] is not None:
                block = block + curvature[k]
            blocks[k, l] = block
            out[np.ix_(rows, cols)] = block
    for (k, l), block in blocks.items():
        if k < l:
            _check_transpose(block, blocks[l, k], k, l)
    return out


def dependent_derivatives(field: ScalarField, partition: Partition,
                          models: Sequence[DependencyModel], x) -> DerivativeReport:
    first = dependent_partials(field, partition, models, x)
    second = dependent_second_order(field, partition, models, x)
    return DerivativeReport(first.point, first.formal_gradient, first.partials, DEPENDENT, second)
