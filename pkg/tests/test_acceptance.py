"""Exit criteria. Each test covers one criterion at its pinned tolerance."""
import numpy as np
import pytest

from depcalc import (ExpressionField, Partition, actual_group_jacobian, dependent_group_jacobian,
                     dependent_partials, dependent_second_order, eval_dual2, explanatory_column,
                     fd_gradient, fd_hessian, metric_tensor, parse, riemannian_gradient,
                     riemannian_hessian, sample_group, second_derivative_column, taylor_expand)
from depcalc.errors import ParseError, ZeroSensitivityError
from depcalc.geometry import christoffel, metric_from_jacobian, taylor_components
from depcalc.golden import EXAMPLE1_POINTS, EXAMPLE1_RHOS, example1_computed
from depcalc.jacobians import fd_explanatory_column, fd_second_derivative_column

from helpers import (CORPUS, PAIR, equicorrelated, example1_field, gaussian, quadratic_model,
                     rel_err, second_central)

M = example1_field()


def closed_forms(rho, x1, x2):
    """Example-1 displays, typed out independently of the library."""
    c = 1.0 / (rho ** 2 - 1.0) ** 2
    return {
        "dependent_jacobian": [[1, rho], [rho, 1]],
        "dependent_partials": [1 + x2 + rho * (1 + x1), rho * (1 + x2) + 1 + x1],
        "second_order": [[2 * rho, 1 + rho ** 2], [1 + rho ** 2, 2 * rho]],
        "metric": [[1 + rho ** 2, 2 * rho], [2 * rho, 1 + rho ** 2]],
        "metric_inverse": [[c * (1 + rho ** 2), -2 * rho * c], [-2 * rho * c, c * (1 + rho ** 2)]],
        "grad": [c * ((1 - rho) ** 2 + x2 * (1 + rho ** 2) - 2 * rho * x1),
                 c * ((1 - rho) ** 2 + x1 * (1 + rho ** 2) - 2 * rho * x2)],
    }


def test_1_example1_golden(criterion):
    criterion("1 Example-1 golden table (1e-10 abs)")
    worst = 0.0
    for rho in EXAMPLE1_RHOS:
        for point in EXAMPLE1_POINTS:
            want = closed_forms(rho, *point)
            got = example1_computed(rho, *point)
            for name in want:
                worst = max(worst, float(np.max(np.abs(np.asarray(got[name]) - np.asarray(want[name])))))
    assert worst <= 1e-10


def test_2_actual_jacobian(criterion):
    criterion("2 actual Jacobians, rho=0 failure, rho->1 convergence")
    rho = 0.5
    m = gaussian(rho)
    for point in EXAMPLE1_POINTS:
        a1 = actual_group_jacobian(m, point, 0).matrix
        a2 = actual_group_jacobian(m, point, 1).matrix
        assert np.max(np.abs(a1 - [[1, 1 / rho], [rho, 1]])) <= 1e-12
        assert np.max(np.abs(a2 - [[1, rho], [1 / rho, 1]])) <= 1e-12
    for j in (0, 1):
        with pytest.raises(ZeroSensitivityError):
            actual_group_jacobian(gaussian(0.0), [1.0, 2.0], j)
    near = gaussian(1 - 1e-6)
    for point in ([0.0, 0.0], [0.5, 0.5], [-1.0, -1.0]):
        jd = dependent_group_jacobian(near, point).matrix
        for j in (0, 1):
            assert np.max(np.abs(actual_group_jacobian(near, point, j).matrix - jd)) <= 1e-4


INDEPENDENCE_FIELDS = [
    ExpressionField("x1 + x2 + x1*x2", ["x1", "x2"]),
    ExpressionField("sin(x1)*exp(x2/3) + x1^3*x2", ["x1", "x2"]),
]


def test_3_independence_reduction(criterion):
    criterion("3 independence reduction (1e-12)")
    rng = np.random.default_rng(3)
    cases = [(PAIR, [gaussian(0.0)]), (Partition.all_independent(2), [])]
    for field in INDEPENDENCE_FIELDS:
        for part, models in cases:
            for x in rng.uniform(-2, 2, size=(10, 2)):
                g, h = field.gradient(x), field.hessian(x)
                assert np.max(np.abs(dependent_partials(field, part, models, x).partials - g)) <= 1e-12
                assert np.max(np.abs(dependent_second_order(field, part, models, x) - h)) <= 1e-12
                assert np.max(np.abs(riemannian_gradient(field, part, models, x) - g)) <= 1e-12
                assert np.max(np.abs(riemannian_hessian(field, part, models, x) - h)) <= 1e-12


def _probe_points(model, n, seed):
    rng = np.random.default_rng(seed)
    xs = model.sample_explanatory(0, n, rng)
    zs = model.sample_innovations(n, rng)
    return [np.concatenate(([x], model.forward(0, x, z))) for x, z in zip(xs, zs)]


def _composed_second(field, model, x, i):
    z = model.inverse(i, np.delete(x, i), x[i])
    rest = [k for k in range(model.dim) if k != i]

    def curve(t):
        y = np.array(x, dtype=float)
        y[i] = t
        y[rest] = model.forward(i, t, z)
        return field.eval(y)
    return second_central(curve, x[i], 1e-4 * (1 + abs(x[i])))


FD_CASES = [
    ("bivariate", gaussian(0.6), ExpressionField("x1 + x2 + x1*x2 + sin(x1)*x2^2", ["x1", "x2"])),
    ("trivariate", equicorrelated(0.3), ExpressionField("x1*x2*x3 + exp(x1/4) - x3^2", ["x1", "x2", "x3"])),
    ("quadratic", quadratic_model(), ExpressionField("x1*x2 + x2^2/2 + cos(x1)", ["x1", "x2"])),
]


@pytest.mark.parametrize("name, model, field", FD_CASES, ids=[c[0] for c in FD_CASES])
def test_4_fd_oracles(criterion, name, model, field):
    criterion(f"4 FD oracles on {name} fixture (1e-6 / 1e-4, 100 probes)")
    part = Partition(model.dim, (), (tuple(range(model.dim)),))
    for x in _probe_points(model, 100, 17):
        for j in range(model.dim):
            assert rel_err(explanatory_column(model, x, j).values, fd_explanatory_column(model, x, j)) <= 1e-6
            assert rel_err(second_derivative_column(model, x, j), fd_second_derivative_column(model, x, j)) <= 1e-4
        second = dependent_second_order(field, part, [model], x)
        for i in range(model.dim):
            want = _composed_second(field, model, x, i)
            assert abs(second[i, i] - want) <= 1e-4 * (1 + abs(want))


def test_5_geometry_properties(criterion):
    criterion("5 Moore-Penrose, Christoffel symmetry/vanishing, rank-1 pseudoinverse")
    rng = np.random.default_rng(5)
    for d in range(1, 7):
        for r in range(1, d + 1):
            for _ in range(5):
                mt = metric_from_jacobian(rng.standard_normal((r, d)))
                g, gp = mt.g, mt.g_inv
                assert mt.rank == r
                assert np.linalg.norm(g @ gp @ g - g) <= 1e-8 * np.linalg.norm(g)
                assert np.linalg.norm(gp @ g @ gp - gp) <= 1e-8 * np.linalg.norm(gp)
                assert np.linalg.norm(g @ gp - (g @ gp).T) <= 1e-8 * np.linalg.norm(g @ gp)
    for x in rng.uniform(-2, 2, size=(20, 2)):
        gam = christoffel(PAIR, [quadratic_model()], x).gamma
        assert np.max(np.abs(gam - np.swapaxes(gam, 1, 2))) <= 1e-6
    affine = [(PAIR, [gaussian(0.5)]), (PAIR, [gaussian(-0.9)]),
              (Partition(3, (), ((0, 1, 2),)), [equicorrelated(0.3)])]
    for part, models in affine:
        for x in rng.uniform(-2, 2, size=(10, part.dim)):
            assert not christoffel(part, models, x).gamma.any()
    mt = metric_from_jacobian([[1.0, 1.0], [1.0, 1.0]])
    assert np.max(np.abs(mt.g_inv - 0.125)) <= 1e-12


@pytest.mark.parametrize("model", [gaussian(0.5), equicorrelated(0.3)], ids=["bivariate", "trivariate"])
def test_6_monte_carlo(criterion, model):
    criterion(f"6 Monte-Carlo covariance within 3 SE, d={model.dim}")
    n = 100_000
    s = model.cov
    se = np.sqrt((np.outer(np.diag(s), np.diag(s)) + s ** 2) / n)
    for j in range(model.dim):
        draws = sample_group(model, j, n, seed=42 + j)
        assert np.array_equal(draws, sample_group(model, j, n, seed=42 + j))
        assert np.all(np.abs(np.cov(draws.T) - s) <= 3 * se)


def test_7_expression_ad(criterion):
    criterion("7 dual-number derivatives vs FD on 20 expressions; parse offsets")
    assert len(CORPUS) == 20
    rng = np.random.default_rng(7)
    for source in CORPUS:
        field = ExpressionField(source, ["x", "y", "z"])
        for x in rng.uniform(0.3, 1.5, size=(100, 3)):
            out = eval_dual2(field.expression, x)
            assert rel_err(out.grad, fd_gradient(field, x)) <= 1e-6
            assert rel_err(out.hess, fd_hessian(field, x)) <= 1e-4
    for source, offset in [("x1 +", 4), ("x1 + foo", 5), ("(x1", 0), ("x1)", 2), ("2 * * x1", 4)]:
        with pytest.raises(ParseError) as info:
            parse(source, ["x1"])
        assert info.value.offset == offset


def test_8_taylor(criterion):
    criterion("8 Taylor: exact at rho=0, composition at rho!=0 (1e-12)")
    rng = np.random.default_rng(8)
    for a, b in rng.uniform(-3, 3, size=(50, 2)):
        assert abs(taylor_expand(M, PAIR, [gaussian(0.0)], [0.0, 0.0], [a, b]) - (a + b + a * b)) <= 1e-12
    for rho in (-0.9, -0.5, 0.5, 0.9):
        models = [gaussian(rho)]
        for x0 in EXAMPLE1_POINTS:
            x0 = np.array(x0)
            for x in x0 + rng.uniform(-0.1, 0.1, size=(5, 2)):
                grad = riemannian_gradient(M, PAIR, models, x0)
                hess = riemannian_hessian(M, PAIR, models, x0)
                dx = x - x0
                want = M.eval(x0) + dx @ grad + 0.5 * dx @ hess @ dx
                assert abs(taylor_expand(M, PAIR, models, x0, x) - want) <= 1e-12
    # frozen after first computation: 5 + 0.01 * 1.25 / 0.5625 + 1e-4
    assert taylor_expand(M, PAIR, [gaussian(0.5)], [1.0, 2.0], [1.01, 2.01]) == pytest.approx(5.022322222222222, abs=1e-12)
    t = taylor_components(M, PAIR, [gaussian(0.5)], [1.0, 2.0], [1.01, 2.01])
    assert t.rank == metric_tensor(PAIR, [gaussian(0.5)], [1.0, 2.0]).rank == 2
