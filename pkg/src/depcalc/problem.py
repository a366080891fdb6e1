"""JSON problem files: loading, consistency checks and evaluation into a report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .calculus import actual_partials, dependent_partials, dependent_second_order
from .core import Partition
from .dependency import ExpressionModel, GaussianLinearModel
from .errors import DepcalcError, ParseError
from .expression import ExpressionField
from .geometry import RANK_TOL, christoffel, metric_tensor, riemannian_hessian, taylor_components
from .jacobians import actual_jacobian, dependent_jacobian

QUANTITIES = ("formal", "actual", "dependent", "second_order", "metric",
              "christoffel", "grad", "hess", "taylor")


class ProblemValidationError(DepcalcError, ValueError):
    """The problem file is inconsistent; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class EvaluationFailure(DepcalcError):
    def __init__(self, point_index: int, module: str, quantity: str, cause: Exception):
        self.point_index = point_index
        self.module = module
        self.quantity = quantity
        self.cause = cause
        super().__init__(f"point {point_index}, module {module}, quantity {quantity}: "
                         f"{type(cause).__name__}: {cause}")


@dataclass
class Problem:
    function: str
    variables: list
    partition: Partition
    model_specs: list
    points: list
    compute: list
    rank_tol: float = RANK_TOL
    explanatory_choice: Optional[list] = None
    taylor_base: Optional[np.ndarray] = None
    digest: str = ""
    scalar_field: Optional[ExpressionField] = None
    models: list = field(default_factory=list)


def _require(data: dict, key: str):
    if key not in data:
        raise ProblemValidationError(key, "missing required field")
    return data[key]


def _float_vector(value, name: str, size: Optional[int] = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ProblemValidationError(name, "must be a list of numbers") from None
    if arr.ndim != 1 or (size is not None and arr.shape[0] != size):
        raise ProblemValidationError(name, f"must be a list of {size} numbers")
    if not np.all(np.isfinite(arr)):
        raise ProblemValidationError(name, "entries must be finite")
    return arr


def build_model(spec: dict, size: int, name: str):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProblemValidationError(name, "model spec needs a 'type'")
    kind = spec["type"]
    try:
        if kind == "gaussian":
            mean = _float_vector(_require(spec, "mean"), f"{name}.mean", size)
            cov = np.array(_require(spec, "cov"), dtype=float)
            if cov.shape != (size, size):
                raise ProblemValidationError(f"{name}.cov", f"must be {size}x{size}")
            return GaussianLinearModel(mean, cov)
        if kind == "expression":
            dim = spec.get("dim", size)
            if dim != size:
                raise ProblemValidationError(f"{name}.dim", f"must equal group size {size}")
            return ExpressionModel(size, _require(spec, "explanatory"))
    except ProblemValidationError:
        raise
    except (DepcalcError, ValueError, TypeError, KeyError) as exc:
        raise ProblemValidationError(name, str(exc)) from None
    raise ProblemValidationError(f"{name}.type", f"unknown model type {kind!r}")


def load_problem(data: dict, digest: str = "", rank_tol: Optional[float] = None) -> Problem:
    """Validate a decoded problem file completely before anything is evaluated."""
    if not isinstance(data, dict):
        raise ProblemValidationError("<root>", "problem must be a JSON object")
    function = _require(data, "function")
    variables = _require(data, "variables")
    if not isinstance(function, str) or not function.strip():
        raise ProblemValidationError("function", "must be a non-empty expression")
    if (not isinstance(variables, list) or not variables
            or not all(isinstance(v, str) for v in variables)):
        raise ProblemValidationError("variables", "must be a non-empty list of names")
    if len(set(variables)) != len(variables):
        raise ProblemValidationError("variables", "names must be unique")
    d = len(variables)

    groups = _require(data, "partition")
    if (not isinstance(groups, list) or not groups
            or not all(isinstance(g, list) and all(isinstance(i, int) for i in g) for g in groups)):
        raise ProblemValidationError(
            "partition", "must be a list of index lists, the first being the independent group")
    for g in groups:
        for i in g:
            if i < 0 or i >= d:
                raise ProblemValidationError("partition", "partition index out of range")
    try:
        partition = Partition.from_lists(d, groups)
    except DepcalcError as exc:
        raise ProblemValidationError("partition", str(exc)) from None

    model_specs = data.get("models", [])
    if not isinstance(model_specs, list) or len(model_specs) != len(partition.groups):
        raise ProblemValidationError(
            "models", f"need one model per dependent group ({len(partition.groups)})")

    compute = _require(data, "compute")
    if not isinstance(compute, list) or not compute:
        raise ProblemValidationError("compute", "must be a non-empty list")
    for q in compute:
        if q not in QUANTITIES:
            raise ProblemValidationError("compute", f"unknown quantity {q!r}")
    compute = [q for q in QUANTITIES if q in compute]

    raw_points = _require(data, "points")
    if not isinstance(raw_points, list) or not raw_points:
        raise ProblemValidationError("points", "must be a non-empty list of points")
    points = [_float_vector(p, f"points[{n}]", d) for n, p in enumerate(raw_points)]

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ProblemValidationError("options", "must be an object")
    tol = options.get("rank_tol", RANK_TOL) if rank_tol is None else rank_tol
    if not isinstance(tol, (int, float)) or not tol >= 0:
        raise ProblemValidationError("options.rank_tol", "must be a non-negative number")

    choice = options.get("explanatory_choice")
    if choice is not None:
        if not isinstance(choice, list) or len(choice) != len(partition.groups):
            raise ProblemValidationError("options.explanatory_choice",
                                         "need one index per dependent group")
        for j, g in zip(choice, partition.groups):
            if not isinstance(j, int) or not 0 <= j < len(g):
                raise ProblemValidationError("options.explanatory_choice",
                                             f"index {j!r} outside its group")
    if "actual" in compute and choice is None:
        raise ProblemValidationError("options.explanatory_choice",
                                     "required when 'actual' is computed")

    base = options.get("taylor_base")
    if base is not None:
        base = _float_vector(base, "options.taylor_base", d)
    if "taylor" in compute and base is None:
        raise ProblemValidationError("options.taylor_base", "required when 'taylor' is computed")

    try:
        field_ = ExpressionField(function, variables)
    except ParseError as exc:
        raise ProblemValidationError("function", str(exc)) from None
    except ValueError as exc:
        raise ProblemValidationError("variables", str(exc)) from None

    models = [build_model(spec, len(g), f"models[{k}]")
              for k, (spec, g) in enumerate(zip(model_specs, partition.groups))]

    return Problem(function, list(variables), partition, model_specs, points, compute,
                   float(tol), choice, base, digest, field_, models)


def read_problem(path, rank_tol: Optional[float] = None) -> Problem:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProblemValidationError("<file>", f"invalid JSON: {exc}") from None
    return load_problem(data, "sha256:" + hashlib.sha256(raw).hexdigest(), rank_tol)


def vector(v) -> dict:
    v = np.asarray(v, dtype=float)
    return {"size": int(v.shape[0]), "data": [float(a) for a in v]}


def matrix(m) -> dict:
    m = np.asarray(m, dtype=float)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": [[float(a) for a in row] for row in m]}


def tensor3(t) -> dict:
    t = np.asarray(t, dtype=float)
    return {"shape": [int(s) for s in t.shape],
            "data": [[[float(a) for a in row] for row in mat] for mat in t]}


_MODULE_OF = {
    "formal": "expression", "actual": "calculus", "dependent": "calculus",
    "second_order": "calculus", "metric": "geometry", "christoffel": "geometry",
    "grad": "geometry", "hess": "geometry", "taylor": "geometry",
}


def _evaluate_point(problem: Problem, n: int, x: np.ndarray) -> dict:
    f, part, models, tol = problem.scalar_field, problem.partition, problem.models, problem.rank_tol
    out = {"index": n, "x": vector(x)}
    metric = None

    def get_metric():
        nonlocal metric
        if metric is None:
            metric = metric_tensor(part, models, x, tol)
        return metric

    for q in problem.compute:
        try:
            if q == "formal":
                out["formal_gradient"] = vector(f.gradient(x))
                out["formal_hessian"] = matrix(f.hessian(x))
            elif q == "actual":
                rep = actual_partials(f, part, models, x, problem.explanatory_choice)
                out["actual_jacobian"] = matrix(actual_jacobian(part, models, x, problem.explanatory_choice))
                out["actual_partials"] = vector(rep.partials)
            elif q == "dependent":
                out["dependent_jacobian"] = matrix(dependent_jacobian(part, models, x))
                out["dependent_partials"] = vector(dependent_partials(f, part, models, x).partials)
            elif q == "second_order":
                out["second_order"] = matrix(dependent_second_order(f, part, models, x))
            elif q == "metric":
                m = get_metric()
                out["metric"] = {"g": matrix(m.g), "g_inv": matrix(m.g_inv), "rank": m.rank,
                                 "eigen_floor": float(m.eigen_floor)}
            elif q == "christoffel":
                ch = christoffel(part, models, x, get_metric(), tol)
                out["christoffel"] = tensor3(ch.gamma)
            elif q == "grad":
                out["grad"] = vector(get_metric().g_inv @ f.gradient(x))
            elif q == "hess":
                out["hess"] = matrix(riemannian_hessian(f, part, models, x, tol))
            elif q == "taylor":
                t = taylor_components(f, part, models, problem.taylor_base, x, tol)
                out["taylor"] = {"base": vector(t.base), "value": t.value,
                                 "value_metric_pairing": t.value_metric_pairing,
                                 "base_value": t.base_value, "linear": t.linear,
                                 "linear_metric_pairing": t.linear_metric_pairing,
                                 "quadratic": t.quadratic, "rank_at_base": t.rank}
        except (DepcalcError, ArithmeticError, ValueError) as exc:
            raise EvaluationFailure(n, _MODULE_OF[q], q, exc) from exc
    if "metric" in problem.compute or "grad" in problem.compute:
        out["metric_rank"] = get_metric().rank
    return out


def evaluate(problem: Problem) -> dict:
    """Compute every requested quantity at every point; raises on the first failure."""
    results = [_evaluate_point(problem, n, x) for n, x in enumerate(problem.points)]
    return {
        "metadata": {
            "library": "depcalc",
            "version": __version__,
            "problem_digest": problem.digest,
            "variables": problem.variables,
            "partition": problem.partition.to_lists(),
            "compute": problem.compute,
            "tolerances": {"rank_tol": problem.rank_tol},
        },
        "points": results,
    }


def dumps_report(report: dict) -> str:
    # json emits floats as the shortest repr that round-trips
    return json.dumps(report, indent=2, allow_nan=False) + "\n"
