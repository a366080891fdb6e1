"""Explanatory columns and group/full Jacobians of dependent inputs.

Convention: ``matrix[i, j]`` is the derivative of group coordinate ``i`` with
respect to group coordinate ``j``; columns index the differentiation variable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import GRAD_STEP, HESS_STEP, Partition
from .dependency import DependencyModel, others
from .errors import AssemblyError, DegenerateConditionalError, ZeroSensitivityError

ZERO_SENSITIVITY = 1e-12

ACTUAL = "actual"
DEPENDENT = "dependent"


@dataclass(frozen=True)
class ExplanatoryColumn:
    j: int
    values: np.ndarray


@dataclass(frozen=True)
class GroupJacobian:
    kind: str
    matrix: np.ndarray
    explanatory_j: Optional[int] = None


def _innovations(model: DependencyModel, group_point, j: int, group: Optional[int]):
    group_point = np.asarray(group_point, dtype=float)
    if group_point.shape != (model.dim,):
        raise ValueError(f"group point has shape {group_point.shape}, model expects ({model.dim},)")
    try:
        return model.inverse(j, group_point[others(model.dim, j)], group_point[j])
    except DegenerateConditionalError as exc:
        where = f"group {group}, " if group is not None else ""
        raise DegenerateConditionalError(f"{where}explanatory index {j}: {exc}") from exc


def _interleave(dim: int, j: int, fill: float, rest_values) -> np.ndarray:
    out = np.empty(dim)
    out[j] = fill
    out[others(dim, j)] = rest_values
    return out


def explanatory_column(model: DependencyModel, group_point, j: int,
                       group: Optional[int] = None) -> ExplanatoryColumn:
    """Derivative of the whole group in its ``j``-th coordinate, expressed at ``group_point``.

    The innovations are recovered through the inverse map; entry ``j`` is 1.
    """
    group_point = np.asarray(group_point, dtype=float)
    z = _innovations(model, group_point, j, group)
    values = _interleave(model.dim, j, 1.0, model.d1_forward(j, group_point[j], z))
    if not np.all(np.isfinite(values)):
        raise DegenerateConditionalError(f"non-finite explanatory column for index {j}")
    return ExplanatoryColumn(j, values)


def second_derivative_column(model: DependencyModel, group_point, j: int,
                             group: Optional[int] = None) -> np.ndarray:
    """Second derivative of the group in its ``j``-th coordinate; entry ``j`` is 0."""
    group_point = np.asarray(group_point, dtype=float)
    z = _innovations(model, group_point, j, group)
    return _interleave(model.dim, j, 0.0, model.d2_forward(j, group_point[j], z))


def actual_group_jacobian(model: DependencyModel, group_point, explanatory_j: int,
                          group: Optional[int] = None) -> GroupJacobian:
    """Jacobian built from the single model with explanatory index ``explanatory_j``.

    Column ``i`` is the explanatory column divided by its ``i``-th entry
    (reciprocal rule), so every entry of that column must be nonzero.
    """
    col = explanatory_column(model, group_point, explanatory_j, group).values
    small = np.flatnonzero(np.abs(col) <= ZERO_SENSITIVITY)
    if small.size:
        raise ZeroSensitivityError(
            f"explanatory column for index {explanatory_j} has zero entry at position "
            f"{int(small[0])}; the actual Jacobian is undefined")
    matrix = col[:, None] / col[None, :]
    np.fill_diagonal(matrix, 1.0)
    return GroupJacobian(ACTUAL, matrix, explanatory_j)


def dependent_group_jacobian(model: DependencyModel, group_point,
                             group: Optional[int] = None) -> GroupJacobian:
    """Column ``i`` comes from the model whose explanatory index is ``i``."""
    cols = [explanatory_column(model, group_point, i, group).values for i in range(model.dim)]
    return GroupJacobian(DEPENDENT, np.column_stack(cols))


def second_derivative_matrix(model: DependencyModel, group_point,
                             group: Optional[int] = None) -> np.ndarray:
    """Matrix whose column ``i`` is :func:`second_derivative_column` for index ``i``."""
    cols = [second_derivative_column(model, group_point, i, group) for i in range(model.dim)]
    return np.column_stack(cols)


def assemble_full_jacobian(partition: Partition, group_jacobians: Sequence[GroupJacobian]) -> np.ndarray:
    """Place each group block at its coordinates; the independent group gets the identity.

    For a partition whose groups are contiguous and ordered this is the usual
    block-diagonal matrix.
    """
    if len(group_jacobians) != len(partition.groups):
        raise AssemblyError(
            f"partition has {len(partition.groups)} dependent groups, "
            f"got {len(group_jacobians)} Jacobian blocks")
    kinds = {gj.kind for gj in group_jacobians}
    if len(kinds) > 1:
        raise AssemblyError("cannot mix actual and dependent Jacobian blocks")
    full = np.zeros((partition.dim, partition.dim))
    for i in partition.independent:
        full[i, i] = 1.0
    for k, (idx, gj) in enumerate(zip(partition.groups, group_jacobians)):
        if gj.matrix.shape != (len(idx), len(idx)):
            raise AssemblyError(
                f"block {k} has shape {gj.matrix.shape}, group needs "
                f"{len(idx)}x{len(idx)}")
        full[np.ix_(idx, idx)] = gj.matrix
    return full


def _check_models(partition: Partition, models: Sequence[DependencyModel]):
    if len(models) != len(partition.groups):
        raise AssemblyError(
            f"partition has {len(partition.groups)} dependent groups, got {len(models)} models")
    for k, (idx, model) in enumerate(zip(partition.groups, models)):
        if model.dim != len(idx):
            raise AssemblyError(f"model {k} has size {model.dim}, group has {len(idx)} indices")


def dependent_jacobian(partition: Partition, models: Sequence[DependencyModel], x) -> np.ndarray:
    """Full ``d x d`` dependent Jacobian at ``x``."""
    _check_models(partition, models)
    x = np.asarray(x, dtype=float)
    blocks = [dependent_group_jacobian(m, x[list(idx)], group=k)
              for k, (idx, m) in enumerate(zip(partition.groups, models))]
    return assemble_full_jacobian(partition, blocks)


def actual_jacobian(partition: Partition, models: Sequence[DependencyModel], x,
                    explanatory_choice: Sequence[int]) -> np.ndarray:
    """Full ``d x d`` actual Jacobian at ``x``, one explanatory index per dependent group."""
    _check_models(partition, models)
    if len(explanatory_choice) != len(models):
        raise AssemblyError(
            f"need one explanatory index per dependent group ({len(models)}), "
            f"got {len(explanatory_choice)}")
    x = np.asarray(x, dtype=float)
    blocks = [actual_group_jacobian(m, x[list(idx)], j, group=k)
              for k, (idx, m, j) in enumerate(zip(partition.groups, models, explanatory_choice))]
    return assemble_full_jacobian(partition, blocks)


# Finite-difference oracles: differentiate the forward map in x_j with the
# innovations recovered once and then held fixed.

def fd_explanatory_column(model: DependencyModel, group_point, j: int) -> np.ndarray:
    group_point = np.asarray(group_point, dtype=float)
    z = _innovations(model, group_point, j, None)
    x_j = group_point[j]
    h = GRAD_STEP * (1.0 + abs(x_j))
    xp, xm = x_j + h, x_j - h
    slope = (model.forward(j, xp, z) - model.forward(j, xm, z)) / (xp - xm)
    return _interleave(model.dim, j, 1.0, slope)


def fd_second_derivative_column(model: DependencyModel, group_point, j: int) -> np.ndarray:
    group_point = np.asarray(group_point, dtype=float)
    z = _innovations(model, group_point, j, None)
    x_j = group_point[j]
    h = HESS_STEP * (1.0 + abs(x_j))
    curv = (model.forward(j, x_j + h, z) - 2.0 * model.forward(j, x_j, z)
            + model.forward(j, x_j - h, z)) / (h * h)
    return _interleave(model.dim, j, 0.0, curv)
