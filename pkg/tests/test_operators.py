import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sinefv.coeffs import compute_q_coefficients
from sinefv.operators import (
    CnFvOperator,
    GridSpec,
    ToeplitzOperator,
    dense_mass_matrix,
    mass_matvec,
)


def dense_stiffness_toeplitz(order, n):
    """Triple-loop oracle for the lower-Hessenberg stiffness Toeplitz."""
    q = compute_q_coefficients(order, n)
    t = np.zeros((n, n))
    for i in range(n):
        for p in range(n):
            k = i - p + 1
            if 0 <= k <= n:
                t[i, p] = q[k]
    return t


def dense_matvec(matrix, x):
    n = len(x)
    y = np.zeros(n)
    for i in range(n):
        for j in range(n):
            y[i] += matrix[i, j] * x[j]
    return y


class TestGridSpec:
    def test_steps_and_size(self):
        grid = GridSpec(bounds=((0.0, 1.0), (0.0, 2.0)), counts=(3, 7))
        assert grid.steps == (0.25, 0.25)
        assert grid.size == 21
        np.testing.assert_allclose(grid.axis_points(0), [0.25, 0.5, 0.75])

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            GridSpec(bounds=((0.0, 1.0),), counts=(4,))
        with pytest.raises(ValueError):
            GridSpec.unit_box((2, 2, 2, 2))

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            GridSpec(bounds=((1.0, 0.0), (0.0, 1.0)), counts=(2, 2))
        with pytest.raises(ValueError):
            GridSpec(bounds=((0.0, 1.0), (0.0, 1.0)), counts=(0, 2))


class TestMass:
    def test_single_node(self):
        np.testing.assert_allclose(mass_matvec(1, np.array([8.0])), [6.0])

    def test_constant_vector(self):
        np.testing.assert_allclose(mass_matvec(3, np.ones(3)), [7 / 8, 1.0, 7 / 8])

    def test_against_dense(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(16)
        dense = dense_mass_matrix(16)
        np.testing.assert_allclose(mass_matvec(16, x), dense @ x, atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mass_matvec(4, np.zeros(5))

    @pytest.mark.parametrize("n", [2, 7, 33, 64])
    def test_eigenvalue_interval(self, n):
        eigs = np.linalg.eigvalsh(dense_mass_matrix(n))
        assert eigs.min() > 0.5
        assert eigs.max() < 1.0


class TestToeplitz:
    def test_identity_pattern(self):
        op = ToeplitzOperator(np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0]))
        x = np.array([2.0, -1.0, 0.5, 3.0])
        np.testing.assert_allclose(op.matvec(x), x, atol=1e-14)

    def test_unit_vector_extracts_column(self):
        op = ToeplitzOperator.stiffness(0.5, 4)
        q = compute_q_coefficients(0.5, 4)
        e1 = np.zeros(4)
        e1[0] = 1.0
        np.testing.assert_allclose(op.matvec(e1), q[1:], atol=1e-14)

    @pytest.mark.parametrize("order,n", [(0.3, 32), (0.5, 7), (0.9, 48)])
    def test_matches_dense_oracle(self, order, n):
        rng = np.random.default_rng(n)
        x = rng.standard_normal(n)
        dense = dense_stiffness_toeplitz(order, n)
        op = ToeplitzOperator.stiffness(order, n)
        scale = np.abs(dense @ x).max()
        np.testing.assert_allclose(op.matvec(x), dense_matvec(dense, x),
                                   rtol=0, atol=1e-13 * max(scale, 1.0))
        np.testing.assert_allclose(op.matvec(x, transpose=True),
                                   dense_matvec(dense.T, x),
                                   rtol=0, atol=1e-13 * max(scale, 1.0))
        np.testing.assert_allclose(op.dense(), dense, atol=0)

    def test_batched_axis_apply(self):
        rng = np.random.default_rng(5)
        u = rng.standard_normal((6, 4))
        op = ToeplitzOperator.stiffness(0.4, 4)
        expected = np.stack([op.matvec(row) for row in u])
        np.testing.assert_allclose(op.apply_along_axis(u, 1), expected, atol=1e-13)

    def test_validation(self):
        with pytest.raises(ValueError):
            ToeplitzOperator(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        op = ToeplitzOperator.stiffness(0.5, 4)
        with pytest.raises(ValueError):
            op.matvec(np.zeros(3))

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=40),
        seed=st.integers(min_value=0, max_value=2**31),
        transpose=st.booleans(),
    )
    def test_general_toeplitz_matches_dense(self, n, seed, transpose):
        rng = np.random.default_rng(seed)
        col = rng.standard_normal(n)
        row = rng.standard_normal(n)
        row[0] = col[0]
        op = ToeplitzOperator(col, row)
        dense = scipy.linalg.toeplitz(col, row)
        x = rng.standard_normal(n)
        expected = (dense.T if transpose else dense) @ x
        scale = max(np.abs(expected).max(), 1.0)
        np.testing.assert_allclose(
            op.matvec(x, transpose=transpose), expected, rtol=0, atol=1e-12 * scale
        )


def random_operator(seed, counts, sign=+1, symmetric=False, zero_k=False):
    rng = np.random.default_rng(seed)
    dim = len(counts)
    orders = tuple(rng.uniform(0.05, 0.95, dim))
    if zero_k:
        diffusivities = ((0.0, 0.0),) * dim
    elif symmetric:
        diffusivities = tuple((k, k) for k in rng.uniform(1.0, 10.0, dim))
    else:
        diffusivities = tuple(
            (rng.uniform(1.0, 10.0), rng.uniform(1.0, 10.0)) for _ in range(dim)
        )
    grid = GridSpec.unit_box(counts)
    return CnFvOperator(grid, orders, diffusivities, dt=0.125, sign=sign), rng


class TestCnFvOperator:
    def test_zero_diffusivity_is_pure_mass(self):
        op, rng = random_operator(1, (4, 5), zero_k=True)
        u = rng.standard_normal((4, 5))
        expected = mass_tensor(u)
        np.testing.assert_allclose(op.apply(u), expected, atol=1e-15)

    @pytest.mark.parametrize("counts", [(4, 4), (5, 3), (4, 4, 4), (3, 4, 5)])
    def test_apply_matches_dense(self, counts):
        op, rng = random_operator(sum(counts), counts)
        dense = op.materialize_dense()
        for _ in range(5):
            u = rng.standard_normal(counts)
            expected = (dense @ u.ravel(order="F")).reshape(counts, order="F")
            result = op.apply(u)
            scale = np.abs(expected).max()
            np.testing.assert_allclose(result, expected, rtol=0, atol=1e-12 * scale)

    def test_rhs_operator_complements_mass(self):
        # A u + (2 A_N - A) u = 2 A_N u
        op, rng = random_operator(9, (4, 4, 4))
        u = rng.standard_normal((4, 4, 4))
        total = op.apply(u) + op.with_sign(-1).apply(u)
        np.testing.assert_allclose(total, 2.0 * mass_tensor(u), atol=1e-12)

    def test_known_2x2_mass_kron(self):
        grid = GridSpec.unit_box((2, 2))
        op = CnFvOperator(grid, (0.5, 0.5), ((0.0, 0.0),) * 2, dt=0.1)
        dense = op.materialize_dense()
        a2 = dense_mass_matrix(2)
        np.testing.assert_allclose(dense, np.kron(a2, a2), atol=0)
        assert dense[0, 0] == pytest.approx(36 / 64)

    def test_symmetric_case_exactly_symmetric(self):
        op, _ = random_operator(11, (3, 3), symmetric=True)
        dense = op.materialize_dense()
        assert np.abs(dense - dense.T).max() == 0.0

    def test_symmetric_case_positive_definite(self):
        op, rng = random_operator(13, (4, 3, 2), symmetric=True)
        dense = op.materialize_dense()
        for _ in range(100):
            x = rng.standard_normal(dense.shape[0])
            assert x @ dense @ x > 0.0

    def test_dense_guard(self):
        op, _ = random_operator(17, (20, 20, 20))
        with pytest.raises(ValueError):
            op.materialize_dense()

    def test_shape_and_argument_validation(self):
        op, _ = random_operator(19, (4, 4))
        with pytest.raises(ValueError):
            op.apply(np.zeros((4, 5)))
        grid = GridSpec.unit_box((4, 4))
        with pytest.raises(ValueError):
            CnFvOperator(grid, (0.5,), ((1.0, 1.0),) * 2, dt=0.1)
        with pytest.raises(ValueError):
            CnFvOperator(grid, (0.5, 0.5), ((1.0, 1.0),) * 2, dt=0.1, sign=2)
        with pytest.raises(ValueError):
            CnFvOperator(grid, (0.5, 0.5), ((1.0, 1.0),) * 2, dt=-0.1)


def mass_tensor(u):
    out = u
    for axis in range(u.ndim):
        dense = dense_mass_matrix(u.shape[axis])
        out = np.moveaxis(np.tensordot(dense, out, axes=(1, axis)), 0, axis)
    return out
