"""Shared fixtures and independent oracles for the test suite."""
import numpy as np

from depcalc import CallableModel, ExpressionField, GaussianLinearModel, Partition

EXAMPLE1 = "x1 + x2 + x1*x2"
PAIR = Partition(2, (), ((0, 1),))


def example1_field():
    return ExpressionField(EXAMPLE1, ["x1", "x2"])


def gaussian(rho):
    return GaussianLinearModel.bivariate(rho)


def equicorrelated(rho, d=3, mean=None):
    cov = np.full((d, d), rho)
    np.fill_diagonal(cov, 1.0)
    return GaussianLinearModel(np.zeros(d) if mean is None else mean, cov)


def quadratic_model():
    """x2 = x1^2 + z for explanatory x1; x1 = z for explanatory x2."""
    def forward(j, t, z):
        return np.array([t * t + z[0]]) if j == 0 else np.array([z[0]])

    def inverse(j, y, t):
        return np.array([y[0] - t * t]) if j == 0 else np.array([y[0]])

    def d1(j, t, z):
        return np.array([2.0 * t]) if j == 0 else np.array([0.0])

    def d2(j, t, z):
        return np.array([2.0]) if j == 0 else np.array([0.0])

    return CallableModel(2, forward, inverse, d1, d2)


def broken_model():
    """Inverse off by 0.1: the round trip must fail."""
    base = quadratic_model()
    return CallableModel(2, base.forward_fn,
                         lambda j, y, t: base.inverse_fn(j, y, t) + 0.1,
                         base.d1_fn, base.d2_fn)


def quadratic_metric(x1):
    return np.array([[1 + 4 * x1 ** 2, 2 * x1], [2 * x1, 1.0]])


def quadratic_metric_derivative(x1):
    """Hand derivative: dg[a, b, c] = dG_ab / dx_c."""
    dg = np.zeros((2, 2, 2))
    dg[:, :, 0] = [[8 * x1, 2.0], [2.0, 0.0]]
    return dg


def christoffel_by_hand(g_inv, dg):
    d = g_inv.shape[0]
    gamma = np.zeros((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                gamma[k, i, j] = 0.5 * sum(
                    g_inv[k, l] * (dg[i, l, j] + dg[j, l, i] - dg[i, j, l]) for l in range(d))
    return gamma


def central(f, t, h):
    return (f(t + h) - f(t - h)) / (2 * h)


def second_central(f, t, h):
    return (f(t + h) - 2 * f(t) + f(t - h)) / (h * h)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b)), initial=0.0))


# Expressions over (x, y, z) with hand-written gradients are not needed: the
# oracle is finite differences. Points are drawn inside each domain.
CORPUS = [
    "x + y + z",
    "x*y*z",
    "2*x*y^2*z^3",
    "x^2 - y^2 + 3*z",
    "(x + y)^3",
    "x / (1 + y^2)",
    "sin(x) * cos(y)",
    "exp(x*y) - z",
    "log(1 + x^2 + y^2)",
    "sqrt(2 + x^2 + z^2)",
    "abs(3 + x) * y",
    "x^-2 + y",
    "-x^2 + y*z",
    "exp(-(x^2 + y^2) / 2)",
    "sin(x*y + z) ^ 2",
    "(x - y) / (2 + cos(z))",
    "x^4 - 2*x^2*y^2 + y^4",
    "cos(exp(x / 3)) * z",
    "log(exp(x) + exp(y))",
    "x*y + y*z + z*x - 1.5",
]
