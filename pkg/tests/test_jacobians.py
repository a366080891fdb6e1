import numpy as np
import pytest

from depcalc import (Partition, actual_group_jacobian, assemble_full_jacobian,
                     dependent_group_jacobian, explanatory_column, second_derivative_column)
from depcalc.errors import AssemblyError, DegenerateConditionalError, ZeroSensitivityError
from depcalc.jacobians import (DEPENDENT, GroupJacobian, dependent_jacobian,
                               fd_explanatory_column, fd_second_derivative_column)

from helpers import equicorrelated, gaussian, quadratic_model, rel_err


def test_explanatory_columns_example1():
    m = gaussian(0.5)
    for point in ([1.0, 2.0], [-0.3, 4.0]):
        assert np.array_equal(explanatory_column(m, point, 0).values, [1.0, 0.5])
        assert np.array_equal(explanatory_column(m, point, 1).values, [0.5, 1.0])
    for j in (0, 1):
        assert np.array_equal(explanatory_column(gaussian(0.0), [0.2, 0.9], j).values, np.eye(2)[j])


def test_second_derivative_columns():
    assert not second_derivative_column(gaussian(0.4), [1.0, 1.0], 0).any()
    q = quadratic_model()
    for point in ([1.0, 1.0], [-2.0, 0.5]):
        assert np.array_equal(second_derivative_column(q, point, 0), [0.0, 2.0])
        assert second_derivative_column(q, point, 1)[1] == 0.0


def test_actual_group_jacobian_example1():
    m = gaussian(0.5)
    a1 = actual_group_jacobian(m, [1.0, 2.0], 0)
    a2 = actual_group_jacobian(m, [1.0, 2.0], 1)
    np.testing.assert_allclose(a1.matrix, [[1, 2], [0.5, 1]], atol=1e-12)
    np.testing.assert_allclose(a2.matrix, [[1, 0.5], [2, 1]], atol=1e-12)
    assert a1.kind == "actual" and a1.explanatory_j == 0


def test_actual_jacobian_zero_sensitivity():
    with pytest.raises(ZeroSensitivityError, match="position 1"):
        actual_group_jacobian(gaussian(0.0), [1.0, 2.0], 0)


def test_dependent_group_jacobian():
    np.testing.assert_array_equal(dependent_group_jacobian(gaussian(0.5), [1.0, 2.0]).matrix,
                                  [[1, 0.5], [0.5, 1]])
    np.testing.assert_array_equal(dependent_group_jacobian(gaussian(0.0), [1.0, 2.0]).matrix, np.eye(2))


def test_dependent_trivariate_against_fd():
    m = equicorrelated(0.3)
    point = np.array([0.4, -1.0, 2.2])
    jd = dependent_group_jacobian(m, point).matrix
    for j in range(3):
        rest = [i for i in range(3) if i != j]
        np.testing.assert_allclose(jd[rest, j], m.slopes[j], rtol=1e-15)
        assert rel_err(jd[:, j], fd_explanatory_column(m, point, j)) <= 1e-6
    assert np.array_equal(np.diag(jd), np.ones(3))


def test_degenerate_propagates_with_context():
    with pytest.raises(DegenerateConditionalError, match="group 1, explanatory index 0"):
        dependent_group_jacobian(gaussian(1.0), [1.0, 1.0], group=1)


def test_near_perfect_correlation_convergence():
    m = gaussian(1 - 1e-6)
    point = [0.3, 0.3]
    jd = dependent_group_jacobian(m, point).matrix
    a1 = actual_group_jacobian(m, point, 0).matrix
    a2 = actual_group_jacobian(m, point, 1).matrix
    assert np.max(np.abs(a1 - jd)) <= 1e-4
    assert np.max(np.abs(a2 - jd)) <= 1e-4
    assert np.max(np.abs(a1 - a2)) <= 1e-4


def test_assemble():
    b = GroupJacobian(DEPENDENT, np.array([[1.0, 0.2], [0.7, 1.0]]))
    full = assemble_full_jacobian(Partition(3, (0,), ((1, 2),)), [b])
    np.testing.assert_array_equal(full, [[1, 0, 0], [0, 1, 0.2], [0, 0.7, 1]])
    np.testing.assert_array_equal(assemble_full_jacobian(Partition.all_independent(4), []), np.eye(4))


def test_assemble_two_gaussian_pairs():
    p = Partition(4, (), ((0, 1), (2, 3)))
    full = dependent_jacobian(p, [gaussian(0.5), gaussian(-0.3)], [0.1, 0.2, 0.3, 0.4])
    expected = np.zeros((4, 4))
    expected[:2, :2] = [[1, 0.5], [0.5, 1]]
    expected[2:, 2:] = [[1, -0.3], [-0.3, 1]]
    np.testing.assert_array_equal(full, expected)


def test_assemble_non_contiguous_groups():
    p = Partition(3, (1,), ((0, 2),))
    full = dependent_jacobian(p, [gaussian(0.5)], [0.0, 5.0, 1.0])
    np.testing.assert_array_equal(full, [[1, 0, 0.5], [0, 1, 0], [0.5, 0, 1]])


def test_assemble_errors():
    b = GroupJacobian(DEPENDENT, np.eye(3))
    with pytest.raises(AssemblyError, match="shape"):
        assemble_full_jacobian(Partition(3, (0,), ((1, 2),)), [b])
    with pytest.raises(AssemblyError, match="blocks"):
        assemble_full_jacobian(Partition(3, (0,), ((1, 2),)), [])
    mixed = [GroupJacobian(DEPENDENT, np.eye(2)), GroupJacobian("actual", np.eye(2), 0)]
    with pytest.raises(AssemblyError, match="mix"):
        assemble_full_jacobian(Partition(4, (), ((0, 1), (2, 3))), mixed)


def _random_group_points(model, n, seed):
    rng = np.random.default_rng(seed)
    xs = model.sample_explanatory(0, n, rng)
    zs = model.sample_innovations(n, rng)
    return [np.concatenate(([x], model.forward(0, x, z))) for x, z in zip(xs, zs)]


@pytest.mark.parametrize("model", [gaussian(0.5), gaussian(-0.7), equicorrelated(0.3), quadratic_model()])
def test_columns_match_fd_oracle(model):
    for point in _random_group_points(model, 100, 3):
        jd = dependent_group_jacobian(model, point).matrix
        assert np.array_equal(np.diag(jd), np.ones(model.dim))
        for j in range(model.dim):
            assert rel_err(jd[:, j], fd_explanatory_column(model, point, j)) <= 1e-6
            assert rel_err(second_derivative_column(model, point, j),
                           fd_second_derivative_column(model, point, j)) <= 1e-4
