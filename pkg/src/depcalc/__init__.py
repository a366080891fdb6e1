"""Derivatives, gradients, Hessians and Taylor-type expansions of functions with dependent inputs."""

__version__ = "0.1.0"

from .core import CallableField, Partition, ScalarField, as_point, fd_gradient, fd_hessian
from .expression import Dual2, ExpressionField, eval_dual2, parse
from .dependency import (CallableModel, DependencyModel, ExpressionModel, GaussianLinearModel,
                         sample_group, validate_model)
from .jacobians import (actual_group_jacobian, assemble_full_jacobian, dependent_group_jacobian,
                        explanatory_column, second_derivative_column)
from .calculus import actual_partials, dependent_partials, dependent_second_order
from .geometry import (christoffel, metric_tensor, riemannian_gradient, riemannian_hessian,
                       taylor_expand)
