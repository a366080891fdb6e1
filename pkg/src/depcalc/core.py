"""Points, input partitions, scalar fields and finite-difference utilities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvaluationDomainError, PartitionError

EPS = np.finfo(float).eps
GRAD_STEP = np.cbrt(EPS)
HESS_STEP = EPS ** 0.25


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Return ``x`` as a finite 1-d float array, checking its length against ``dim``."""
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"point must be a 1-d sequence, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"point has {arr.shape[0]} coordinates, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Partition:
    """Organization of ``dim`` inputs into one independent group and K-1 dependent groups.

    Indices are 0-based coordinate positions. ``independent`` may be empty; each
    dependent group holds at least two indices. Groups are mutually independent
    and together cover ``range(dim)`` exactly once.
    """

    dim: int
    independent: tuple = ()
    groups: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise PartitionError("partition dimension must be positive")
        independent = tuple(int(i) for i in self.independent)
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        object.__setattr__(self, "independent", independent)
        object.__setattr__(self, "groups", groups)

        seen = set()
        for g in (independent,) + groups:
            for i in g:
                if i < 0 or i >= self.dim:
                    raise PartitionError("partition index out of range")
                if i in seen:
                    raise PartitionError(f"partition index {i} appears more than once")
                seen.add(i)
            if list(g) != sorted(g):
                raise PartitionError(f"group {list(g)} is not in increasing order")
        for g in groups:
            if len(g) < 2:
                raise PartitionError(f"dependent group {list(g)} must hold at least two indices")
        if len(seen) != self.dim:
            missing = sorted(set(range(self.dim)) - seen)
            raise PartitionError(f"partition does not cover indices {missing}")

    @classmethod
    def from_lists(cls, dim: int, groups: Sequence[Sequence[int]]) -> "Partition":
        """Build from ``[pi_1, pi_2, ..., pi_K]`` where ``pi_1`` is the independent group."""
        if len(groups) == 0:
            raise PartitionError("partition needs at least the independent group")
        return cls(dim, tuple(groups[0]), tuple(tuple(g) for g in groups[1:]))

    @classmethod
    def all_independent(cls, dim: int) -> "Partition":
        return cls(dim, tuple(range(dim)), ())

    @property
    def d1(self) -> int:
        return len(self.independent)

    @property
    def sizes(self) -> tuple:
        return tuple(len(g) for g in self.groups)

    def to_lists(self) -> list:
        return [list(self.independent)] + [list(g) for g in self.groups]


class ScalarField:
    """A scalar function of a point with optional analytic derivatives.

    Subclasses override :meth:`gradient` / :meth:`hessian` when they can do
    better than finite differences.
    """

    dim: Optional[int] = None

    def __call__(self, x) -> float:
        return self.eval(x)

    def eval(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        return fd_gradient(self, x)

    def hessian(self, x) -> np.ndarray:
        return fd_hessian(self, x)


class CallableField(ScalarField):
    """Wrap plain callables as a :class:`ScalarField`."""

    def __init__(self, func: Callable, gradient: Optional[Callable] = None,
                 hessian: Optional[Callable] = None, dim: Optional[int] = None):
        self._func = func
        self._gradient = gradient
        self._hessian = hessian
        self.dim = dim

    def eval(self, x) -> float:
        return float(self._func(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        if self._gradient is None:
            return fd_gradient(self, x)
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)

    def hessian(self, x) -> np.ndarray:
        if self._hessian is None:
            return fd_hessian(self, x)
        h = np.asarray(self._hessian(np.asarray(x, dtype=float)), dtype=float)
        return 0.5 * (h + h.T)


def _checked_eval(field, x: np.ndarray, coord: int) -> float:
    try:
        value = float(field.eval(x))
    except EvaluationDomainError as exc:
        raise EvaluationDomainError(
            f"stencil evaluation failed while differencing coordinate {coord}: {exc}") from exc
    if not np.isfinite(value):
        raise EvaluationDomainError(
            f"non-finite function value while differencing coordinate {coord}")
    return value


def fd_gradient(field, x) -> np.ndarray:
    """Central-difference gradient with step ``cbrt(eps) * (1 + |x_i|)`` per coordinate."""
    x = np.array(x, dtype=float)
    grad = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        h = GRAD_STEP * (1.0 + abs(x[i]))
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        grad[i] = (_checked_eval(field, xp, i) - _checked_eval(field, xm, i)) / (xp[i] - xm[i])
    return grad


def fd_hessian(field, x, symmetrize: bool = True) -> np.ndarray:
    """Central second differences with step ``eps**0.25 * (1 + |x_i|)``.

    The mixed entries use the four-point cross stencil. With ``symmetrize`` the
    result is returned as ``(A + A.T) / 2``.
    """
    x = np.array(x, dtype=float)
    d = x.shape[0]
    steps = HESS_STEP * (1.0 + np.abs(x))
    f0 = _checked_eval(field, x, 0) if d else 0.0

    def shifted(i, si, j=None, sj=0.0):
        y = x.copy()
        y[i] += si * steps[i]
        if j is not None:
            y[j] += sj * steps[j]
        return _checked_eval(field, y, i if j is None else j)

    hess = np.empty((d, d))
    for i in range(d):
        hess[i, i] = (shifted(i, 1.0) - 2.0 * f0 + shifted(i, -1.0)) / steps[i] ** 2
        for j in range(d):
            if j == i:
                continue
            hess[i, j] = (shifted(i, 1.0, j, 1.0) - shifted(i, 1.0, j, -1.0)
                          - shifted(i, -1.0, j, 1.0) + shifted(i, -1.0, j, -1.0)) \
                / (4.0 * steps[i] * steps[j])
    if symmetrize:
        hess = 0.5 * (hess + hess.T)
    return hess
