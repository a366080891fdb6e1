"""Metric induced by the dependent Jacobian, Christoffel symbols, gradient, Hessian and Taylor-type expansion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GRAD_STEP, Partition, ScalarField, as_point
from .dependency import DependencyModel
from .errors import DepcalcError, StencilError
from .jacobians import dependent_jacobian

RANK_TOL = 1e-10


@dataclass(frozen=True)
class MetricTensor:
    g: np.ndarray
    g_inv: np.ndarray
    rank: int
    eigen_floor: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def full_rank(self) -> bool:
        return self.rank == self.g.shape[0]

    def eigen_residual(self) -> float:
        """Largest ``||g v - lam v||`` over the eigenpairs, relative to ``||g||``."""
        if self.eigenvectors.size == 0:
            return 0.0
        resid = self.g @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        norm = np.linalg.norm(self.g, 2)
        return float(np.max(np.linalg.norm(resid, axis=0)) / (norm if norm > 0 else 1.0))


def pseudo_inverse(g: np.ndarray, rank_tol: float = RANK_TOL):
    """Moore-Penrose inverse of a symmetric PSD matrix via ``eigh``.

    Eigenvalues above ``rank_tol * lambda_max`` are inverted, the rest zeroed.
    Returns ``(g_inv, rank, floor, eigenvalues, eigenvectors)``. A diagonal
    ``g`` is inverted entrywise so that the identity maps to itself exactly.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if d and not np.any(g - np.diag(np.diag(g))):
        lam = np.diag(g).copy()
        floor = rank_tol * max(float(np.max(lam)), 0.0)
        keep = lam > floor
        inv = np.zeros(d)
        inv[keep] = 1.0 / lam[keep]
        return np.diag(inv), int(np.count_nonzero(keep)), floor, lam, np.eye(d)
    lam, vec = np.linalg.eigh(g)
    floor = rank_tol * max(float(lam[-1]), 0.0) if d else 0.0
    keep = lam > floor
    v = vec[:, keep]
    g_inv = (v / lam[keep]) @ v.T
    g_inv = 0.5 * (g_inv + g_inv.T)
    return g_inv, int(np.count_nonzero(keep)), floor, lam, vec


def metric_from_jacobian(jac, rank_tol: float = RANK_TOL) -> MetricTensor:
    jac = np.asarray(jac, dtype=float)
    g = jac.T @ jac
    g = 0.5 * (g + g.T)
    g_inv, rank, floor, lam, vec = pseudo_inverse(g, rank_tol)
    return MetricTensor(g, g_inv, rank, floor, lam, vec)


def metric_tensor(partition: Partition, models: Sequence[DependencyModel], x,
                  rank_tol: float = RANK_TOL) -> MetricTensor:
    """``G = J_d.T @ J_d`` at ``x`` with its (pseudo)inverse and rank."""
    x = as_point(x, partition.dim)
    return metric_from_jacobian(dependent_jacobian(partition, models, x), rank_tol)


@dataclass(frozen=True)
class ChristoffelField:
    gamma: np.ndarray  # gamma[k, i, j] = Gamma^k_{ij}
    fd_step: np.ndarray
    metric_derivative: np.ndarray  # dg[a, b, c] = d G_ab / d x_c


def metric_derivative(partition: Partition, models: Sequence[DependencyModel], x,
                      rank_tol: float = RANK_TOL):
    """Central differences of the metric, ``dg[a, b, c] = dG_ab/dx_c``, and the steps used."""
    x = np.array(as_point(x, partition.dim))
    d = partition.dim
    dg = np.empty((d, d, d))
    steps = GRAD_STEP * (1.0 + np.abs(x))
    for c in range(d):
        pair = []
        for sign in (1.0, -1.0):
            y = x.copy()
            y[c] += sign * steps[c]
            try:
                pair.append((y[c], metric_tensor(partition, models, y, rank_tol).g))
            except DepcalcError as exc:
                raise StencilError(
                    f"metric evaluation failed at coordinate {c}, offset "
                    f"{sign * steps[c]:+.3e}: {exc}") from exc
        (yp, gp), (ym, gm) = pair
        dg[:, :, c] = (gp - gm) / (yp - ym)
    return dg, steps


def christoffel_from_derivative(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """``Gamma^k_ij = 1/2 sum_l g_inv[k,l] (dG_il/dx_j + dG_jl/dx_i - dG_ij/dx_l)``."""
    first_kind = 0.5 * (np.einsum("ilj->ijl", dg) + np.einsum("jli->ijl", dg) - dg)
    first_kind = 0.5 * (first_kind + np.swapaxes(first_kind, 0, 1))
    return np.einsum("kl,ijl->kij", g_inv, first_kind)


def christoffel(partition: Partition, models: Sequence[DependencyModel], x,
                metric: MetricTensor = None, rank_tol: float = RANK_TOL) -> ChristoffelField:
    """Christoffel symbols at ``x``; the metric's (pseudo)inverse is used over all ``d`` indices."""
    if metric is None:
        metric = metric_tensor(partition, models, x, rank_tol)
    dg, steps = metric_derivative(partition, models, x, rank_tol)
    return ChristoffelField(christoffel_from_derivative(metric.g_inv, dg), steps, dg)


def riemannian_gradient(field: ScalarField, partition: Partition,
                        models: Sequence[DependencyModel], x,
                        rank_tol: float = RANK_TOL) -> np.ndarray:
    """``G(x)^+ @ grad M(x)``."""
    x = as_point(x, partition.dim)
    metric = metric_tensor(partition, models, x, rank_tol)
    return metric.g_inv @ np.asarray(field.gradient(x), dtype=float)


def hessian_from_christoffel(hess: np.ndarray, grad: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    return hess - np.einsum("kij,k->ij", gamma, grad)


def riemannian_hessian(field: ScalarField, partition: Partition,
                       models: Sequence[DependencyModel], x,
                       rank_tol: float = RANK_TOL) -> np.ndarray:
    """``H_ij - sum_k Gamma^k_ij dM/dx_k`` with formal derivatives of ``M``."""
    x = as_point(x, partition.dim)
    gamma = christoffel(partition, models, x, rank_tol=rank_tol).gamma
    return hessian_from_christoffel(np.asarray(field.hessian(x), dtype=float),
                                    np.asarray(field.gradient(x), dtype=float), gamma)


@dataclass(frozen=True)
class TaylorExpansion:
    """Second-order expansion of ``M`` about ``base``, evaluated at ``point``.

    ``value`` pairs the displacement with the Riemannian gradient under the
    plain dot product. ``value_metric_pairing`` uses the metric inner product
    ``(x - x0).T @ G @ grad`` for the linear term instead.
    """

    base: np.ndarray
    point: np.ndarray
    base_value: float
    gradient: np.ndarray
    hessian: np.ndarray
    linear: float
    quadratic: float
    value: float
    linear_metric_pairing: float
    value_metric_pairing: float
    rank: int


def taylor_components(field: ScalarField, partition: Partition,
                      models: Sequence[DependencyModel], x0, x,
                      rank_tol: float = RANK_TOL) -> TaylorExpansion:
    x0 = as_point(x0, partition.dim)
    x = as_point(x, partition.dim)
    metric = metric_tensor(partition, models, x0, rank_tol)
    grad_m = metric.g_inv @ np.asarray(field.gradient(x0), dtype=float)
    hess_m = riemannian_hessian(field, partition, models, x0, rank_tol)
    step = x - x0
    base_value = float(field.eval(x0))
    linear = float(step @ grad_m)
    quadratic = 0.5 * float(step @ hess_m @ step)
    linear_g = float(step @ metric.g @ grad_m)
    return TaylorExpansion(x0, x, base_value, grad_m, hess_m, linear, quadratic,
                           base_value + linear + quadratic, linear_g,
                           base_value + linear_g + quadratic, metric.rank)


def taylor_expand(field: ScalarField, partition: Partition,
                  models: Sequence[DependencyModel], x0, x,
                  rank_tol: float = RANK_TOL) -> float:
    """``M(x0) + (x-x0).T grad(M)(x0) + 1/2 (x-x0).T Hess(M)(x0) (x-x0)``."""
    return taylor_components(field, partition, models, x0, x, rank_tol).value
