"""Dependency models for groups of non-independent inputs.

A model for a group of size ``d_k`` provides, for every explanatory position
``j`` (0-based, group-local), a map ``x_{~j} = r_j(x_j, z)`` from the
explanatory value and ``d_k - 1`` independent innovations to the remaining
coordinates of the group, its inverse ``z = r_j^{-1}(x_{~j} | x_j)``, and the
first and second derivatives of ``r_j`` in ``x_j`` with ``z`` held fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import GRAD_STEP, HESS_STEP
from .errors import DegenerateConditionalError, ModelConstructionError
from .expression import eval_dual2, eval_value, parse

RANK_TOL = 1e-12


def others(dim: int, j: int) -> list:
    """Group positions other than ``j``, in increasing order."""
    return [i for i in range(dim) if i != j]


class DependencyModel:
    """Contract every dependency model fulfils.

    Subclasses set ``dim`` (the group size) and implement the four maps.
    ``sample_innovations`` and ``sample_explanatory`` default to standard
    normal draws.
    """

    dim: int

    def forward(self, j: int, x_j: float, z) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, j: int, x_other, x_j: float) -> np.ndarray:
        raise NotImplementedError

    def d1_forward(self, j: int, x_j: float, z) -> np.ndarray:
        raise NotImplementedError

    def d2_forward(self, j: int, x_j: float, z) -> np.ndarray:
        raise NotImplementedError

    def sample_innovations(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((count, self.dim - 1))

    def sample_explanatory(self, j: int, count: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(count)

    def _check_j(self, j: int):
        if not 0 <= j < self.dim:
            raise IndexError(f"explanatory index {j} outside group of size {self.dim}")


def _semidefinite_cholesky(a: np.ndarray, tol: float) -> np.ndarray:
    """Lower factor ``L`` with ``L @ L.T == a`` for symmetric PSD ``a``; zero pivots give zero columns."""
    n = a.shape[0]
    low = np.zeros_like(a)
    for k in range(n):
        pivot = a[k, k] - low[k, :k] @ low[k, :k]
        if pivot <= tol:
            continue
        low[k, k] = np.sqrt(pivot)
        for i in range(k + 1, n):
            low[i, k] = (a[i, k] - low[i, :k] @ low[k, :k]) / low[k, k]
    return low


class GaussianLinearModel(DependencyModel):
    """Conditional-Gaussian dependency model for ``X ~ N(mean, cov)``.

    For explanatory position ``j``::

        x_{~j} = mean_{~j} + slope_j * (x_j - mean_j) + chol_j @ z,   z ~ N(0, I)

    with ``slope_j = cov[~j, j] / cov[j, j]`` and ``chol_j`` a lower factor of
    the Schur complement ``cov[~j, ~j] - cov[~j, j] cov[j, ~j] / cov[j, j]``.
    """

    def __init__(self, mean: Sequence[float], cov):
        mean = np.array(mean, dtype=float)
        cov = np.array(cov, dtype=float)
        if mean.ndim != 1 or mean.shape[0] < 2:
            raise ModelConstructionError("mean must be a vector of length >= 2")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ModelConstructionError(f"covariance must be {d}x{d}, got {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ModelConstructionError("mean and covariance must be finite")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * np.max(np.abs(cov))):
            raise ModelConstructionError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if np.any(np.diag(cov) <= 0.0):
            raise ModelConstructionError("covariance diagonal must be strictly positive")

        self.dim = d
        self.mean = mean
        self.cov = cov
        scale = float(np.max(np.linalg.eigvalsh(cov)))
        self._floor = RANK_TOL * scale
        self.slopes = []
        self.chols = []
        self.degenerate = []
        for j in range(d):
            rest = others(d, j)
            slope = cov[rest, j] / cov[j, j]
            schur = cov[np.ix_(rest, rest)] - np.outer(cov[rest, j], cov[j, rest]) / cov[j, j]
            schur = 0.5 * (schur + schur.T)
            lam = np.linalg.eigvalsh(schur)
            if lam[0] < -self._floor:
                raise ModelConstructionError(
                    f"conditional covariance for explanatory index {j} is not "
                    f"positive semidefinite (smallest eigenvalue {lam[0]:.3e})")
            self.slopes.append(slope)
            self.chols.append(_semidefinite_cholesky(schur, self._floor))
            self.degenerate.append(bool(lam[0] <= self._floor))
        for arr in (self.mean, self.cov, *self.slopes, *self.chols):
            arr.flags.writeable = False

    @classmethod
    def bivariate(cls, rho: float, mean=(0.0, 0.0), std=(1.0, 1.0)) -> "GaussianLinearModel":
        s1, s2 = std
        return cls(mean, [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]])

    def forward(self, j, x_j, z):
        self._check_j(j)
        rest = others(self.dim, j)
        z = np.asarray(z, dtype=float)
        return self.mean[rest] + self.slopes[j] * (x_j - self.mean[j]) + self.chols[j] @ z

    def inverse(self, j, x_other, x_j):
        self._check_j(j)
        if self.degenerate[j]:
            raise DegenerateConditionalError(
                f"conditional covariance given index {j} is singular; "
                "use forward-only evaluations in this regime")
        rest = others(self.dim, j)
        resid = np.asarray(x_other, dtype=float) - self.mean[rest] - self.slopes[j] * (x_j - self.mean[j])
        low = self.chols[j]
        z = np.empty_like(resid)
        for i in range(resid.shape[0]):
            z[i] = (resid[i] - low[i, :i] @ z[:i]) / low[i, i]
        return z

    def d1_forward(self, j, x_j, z):
        self._check_j(j)
        return np.array(self.slopes[j])

    def d2_forward(self, j, x_j, z):
        self._check_j(j)
        return np.zeros(self.dim - 1)

    def sample_explanatory(self, j, count, rng):
        return self.mean[j] + np.sqrt(self.cov[j, j]) * rng.standard_normal(count)


def gaussian_forward(model: GaussianLinearModel, j: int, x_j: float, z) -> np.ndarray:
    return model.forward(j, x_j, z)


def gaussian_inverse(model: GaussianLinearModel, j: int, x_other, x_j: float) -> np.ndarray:
    return model.inverse(j, x_other, x_j)


@dataclass(frozen=True)
class CallableModel(DependencyModel):
    """User-supplied model given as the full quadruple of callables.

    Each callable takes ``(j, x_j, z)`` (or ``(j, x_other, x_j)`` for the
    inverse) and returns a length ``dim - 1`` vector. Nothing is derived here;
    use :func:`validate_model` to check the pieces agree.
    """

    dim: int
    forward_fn: Callable
    inverse_fn: Callable
    d1_fn: Callable
    d2_fn: Callable
    innovations_fn: Optional[Callable] = field(default=None)

    def forward(self, j, x_j, z):
        self._check_j(j)
        return np.asarray(self.forward_fn(j, x_j, np.asarray(z, dtype=float)), dtype=float)

    def inverse(self, j, x_other, x_j):
        self._check_j(j)
        return np.asarray(self.inverse_fn(j, np.asarray(x_other, dtype=float), x_j), dtype=float)

    def d1_forward(self, j, x_j, z):
        self._check_j(j)
        return np.asarray(self.d1_fn(j, x_j, np.asarray(z, dtype=float)), dtype=float)

    def d2_forward(self, j, x_j, z):
        self._check_j(j)
        return np.asarray(self.d2_fn(j, x_j, np.asarray(z, dtype=float)), dtype=float)

    def sample_innovations(self, count, rng):
        if self.innovations_fn is None:
            return super().sample_innovations(count, rng)
        return np.asarray(self.innovations_fn(count, rng), dtype=float).reshape(count, self.dim - 1)


class ExpressionModel(DependencyModel):
    """Dependency model written as expressions, one entry per explanatory position.

    For explanatory position ``j`` the forward expressions see ``t`` (the
    explanatory value) and ``z1 .. z{m}``; the inverse expressions see ``t`` and
    ``y1 .. y{m}``, the other group coordinates in increasing order
    (``m = dim - 1``). Derivatives in ``t`` come from the forward expressions by
    forward-mode differentiation unless ``d1``/``d2`` expressions are given.
    """

    def __init__(self, dim: int, explanatory: Sequence[dict]):
        if dim < 2:
            raise ModelConstructionError("expression model needs a group of size >= 2")
        if len(explanatory) != dim:
            raise ModelConstructionError(
                f"expression model of size {dim} needs {dim} explanatory entries, "
                f"got {len(explanatory)}")
        self.dim = dim
        m = dim - 1
        fwd_vars = ["t"] + [f"z{i + 1}" for i in range(m)]
        inv_vars = ["t"] + [f"y{i + 1}" for i in range(m)]
        self._forward, self._inverse, self._d1, self._d2 = [], [], [], []
        for j, entry in enumerate(explanatory):
            for key in ("forward", "inverse"):
                if len(entry.get(key, ())) != m:
                    raise ModelConstructionError(
                        f"explanatory entry {j}: '{key}' needs {m} expressions")
            self._forward.append([parse(s, fwd_vars) for s in entry["forward"]])
            self._inverse.append([parse(s, inv_vars) for s in entry["inverse"]])
            for key, store in (("d1", self._d1), ("d2", self._d2)):
                if key in entry:
                    if len(entry[key]) != m:
                        raise ModelConstructionError(
                            f"explanatory entry {j}: '{key}' needs {m} expressions")
                    store.append([parse(s, fwd_vars) for s in entry[key]])
                else:
                    store.append(None)

    @staticmethod
    def _args(first, rest):
        return np.concatenate(([float(first)], np.asarray(rest, dtype=float)))

    def forward(self, j, x_j, z):
        self._check_j(j)
        args = self._args(x_j, z)
        return np.array([eval_value(e, args) for e in self._forward[j]])

    def inverse(self, j, x_other, x_j):
        self._check_j(j)
        args = self._args(x_j, x_other)
        return np.array([eval_value(e, args) for e in self._inverse[j]])

    def _derivative(self, j, x_j, z, order):
        self._check_j(j)
        args = self._args(x_j, z)
        explicit = (self._d1 if order == 1 else self._d2)[j]
        if explicit is not None:
            return np.array([eval_value(e, args) for e in explicit])
        duals = [eval_dual2(e, args) for e in self._forward[j]]
        if order == 1:
            return np.array([u.grad[0] for u in duals])
        return np.array([u.hess[0, 0] for u in duals])

    def d1_forward(self, j, x_j, z):
        return self._derivative(j, x_j, z, 1)

    def d2_forward(self, j, x_j, z):
        return self._derivative(j, x_j, z, 2)


def sample_group(model: DependencyModel, j: int, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` rows of the whole group through the model with explanatory index ``j``.

    ``x_j`` comes from its marginal and ``z`` from the innovation law; the
    stream is ``numpy.random.default_rng(seed)`` (PCG64), so results are
    reproducible for a fixed seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    xj = model.sample_explanatory(j, count, rng)
    z = model.sample_innovations(count, rng)
    out = np.empty((count, model.dim))
    out[:, j] = xj
    rest = others(model.dim, j)
    if isinstance(model, GaussianLinearModel):
        out[:, rest] = (model.mean[rest] + np.outer(xj - model.mean[j], model.slopes[j])
                        + z @ model.chols[j].T)
    else:
        for r in range(count):
            out[r, rest] = model.forward(j, xj[r], z[r])
    return out


def _fd_forward_d1(model, j, x_j, z):
    h = GRAD_STEP * (1.0 + abs(x_j))
    xp, xm = x_j + h, x_j - h
    return (model.forward(j, xp, z) - model.forward(j, xm, z)) / (xp - xm)


def _fd_forward_d2(model, j, x_j, z):
    h = HESS_STEP * (1.0 + abs(x_j))
    return (model.forward(j, x_j + h, z) - 2.0 * model.forward(j, x_j, z)
            + model.forward(j, x_j - h, z)) / (h * h)


def _relative(a, b) -> np.ndarray:
    return np.abs(np.asarray(a) - np.asarray(b)) / (1.0 + np.abs(np.asarray(b)))


@dataclass
class IndexCheck:
    """Worst residuals for one explanatory index."""

    j: int
    round_trip: float = 0.0
    round_trip_probe: Optional[tuple] = None
    d1: float = 0.0
    d1_probe: Optional[tuple] = None
    d2: float = 0.0
    d2_probe: Optional[tuple] = None
    degenerate: bool = False
    errors: list = field(default_factory=list)


@dataclass
class ValidationReport:
    probes: int
    checks: list
    round_trip_tol: float = 1e-10
    d1_tol: float = 1e-6
    d2_tol: float = 1e-4

    @property
    def max_round_trip(self) -> float:
        return max((c.round_trip for c in self.checks), default=0.0)

    @property
    def max_d1(self) -> float:
        return max((c.d1 for c in self.checks), default=0.0)

    @property
    def max_d2(self) -> float:
        return max((c.d2 for c in self.checks), default=0.0)

    def failures(self) -> list:
        """``(j, check name, residual, probe)`` for every check over tolerance."""
        out = []
        for c in self.checks:
            if c.round_trip > self.round_trip_tol:
                out.append((c.j, "round_trip", c.round_trip, c.round_trip_probe))
            if c.d1 > self.d1_tol:
                out.append((c.j, "d1_forward", c.d1, c.d1_probe))
            if c.d2 > self.d2_tol:
                out.append((c.j, "d2_forward", c.d2, c.d2_probe))
            for msg in c.errors:
                out.append((c.j, "error", float("inf"), msg))
        return out

    @property
    def passed(self) -> bool:
        return not self.failures()


def validate_model(model: DependencyModel, probe_points: int = 100, seed: int = 0,
                   round_trip_tol: float = 1e-10, d1_tol: float = 1e-6,
                   d2_tol: float = 1e-4) -> ValidationReport:
    """Check round trip, first and second derivatives at random probes.

    Failures are recorded in the report rather than raised. Explanatory
    indices whose inverse is degenerate are flagged and only the forward
    derivative checks run for them.
    """
    if probe_points < 1:
        raise ValueError("probe_points must be >= 1")
    rng = np.random.default_rng(seed)
    checks = []
    for j in range(model.dim):
        check = IndexCheck(j)
        xs = model.sample_explanatory(j, probe_points, rng)
        zs = model.sample_innovations(probe_points, rng)
        for x_j, z in zip(xs, zs):
            probe = (float(x_j), tuple(float(v) for v in z))
            try:
                x_other = model.forward(j, x_j, z)
                r1 = float(np.max(_relative(model.d1_forward(j, x_j, z), _fd_forward_d1(model, j, x_j, z)), initial=0.0))
                r2 = float(np.max(_relative(model.d2_forward(j, x_j, z), _fd_forward_d2(model, j, x_j, z)), initial=0.0))
            except Exception as exc:  # reported, never raised
                check.errors.append(f"forward evaluation failed at {probe}: {exc}")
                continue
            if r1 > check.d1:
                check.d1, check.d1_probe = r1, probe
            if r2 > check.d2:
                check.d2, check.d2_probe = r2, probe
            if check.degenerate:
                continue
            try:
                z_back = model.inverse(j, x_other, x_j)
            except DegenerateConditionalError:
                check.degenerate = True
                continue
            except Exception as exc:
                check.errors.append(f"inverse evaluation failed at {probe}: {exc}")
                continue
            rt = float(np.max(np.abs(z_back - z), initial=0.0))
            if not np.isfinite(rt):
                rt = float("inf")
            if rt > check.round_trip:
                check.round_trip, check.round_trip_probe = rt, probe
        checks.append(check)
    return ValidationReport(probe_points, checks, round_trip_tol, d1_tol, d2_tol)
