import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shiftlab.generators import AlgebraSpec, build_generators
from shiftlab.numerics import (
    HSBasis,
    extend_span,
    hs_inner,
    hs_norm,
    kron,
    kron_all,
    normalized_trace,
    null_combinations,
    orthonormalize_span,
    subspace_intersect,
)
from shiftlab.tower import build_tower, tensor_power_basis, triangular_set

from oracles import intersection_dim, rank_of

E11 = np.array([[1, 0], [0, 0]], dtype=complex)
E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = E12.T.copy()
E22 = np.array([[0, 0], [0, 1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def cmat(d):
    return arrays(np.float64, (2, d, d), elements=finite).map(lambda a: a[0] + 1j * a[1])


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_pauli_blocks(self):
        out = kron(Z, X)
        assert np.array_equal(out[:2, 2:], np.zeros((2, 2)))
        assert np.array_equal(out[:2, :2], X)
        assert np.array_equal(out[2:, 2:], -X)

    def test_dimension(self):
        rng = np.random.default_rng(1)
        assert kron(rng.normal(size=(3, 3)), rng.normal(size=(2, 2))).shape == (6, 6)

    def test_associative_exactly(self):
        rng = np.random.default_rng(2)
        a, b, c = (rng.integers(-3, 4, (2, 2)) for _ in range(3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))
        assert np.array_equal(kron_all([a, b, c]), kron(a, kron(b, c)))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            kron(np.ones((2, 3)), np.eye(2))

    @given(cmat(2), cmat(3), cmat(2), cmat(3))
    @settings(max_examples=40, deadline=None)
    def test_mixed_product(self, a, b, c, d):
        assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12 * 100)


class TestTrace:
    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_unit(self, d):
        assert normalized_trace(np.eye(d)) == pytest.approx(1.0)

    def test_projection_s(self):
        g = build_generators(AlgebraSpec((1, 2)))
        assert normalized_trace(g.s) == pytest.approx(2 / 3, abs=1e-15)

    def test_off_diagonal(self):
        assert normalized_trace(E12) == 0

    @given(cmat(3), cmat(3))
    @settings(max_examples=40, deadline=None)
    def test_tracial(self, a, b):
        assert abs(normalized_trace(a @ b) - normalized_trace(b @ a)) < 1e-10

    @given(cmat(3))
    @settings(max_examples=40, deadline=None)
    def test_positive(self, a):
        val = hs_inner(a, a)
        assert val.real >= -1e-14 and abs(val.imag) < 1e-12
        assert hs_norm(a) >= 0
        if not np.any(a):
            assert hs_norm(a) == 0


class TestOrthonormalize:
    def test_dependent_pair(self):
        assert len(orthonormalize_span([np.eye(2), 2 * np.eye(2)])) == 1

    def test_matrix_units(self):
        b = orthonormalize_span([E11, E12, E21, E22])
        assert len(b) == 4
        assert b.gram_deviation() < 1e-12

    def test_two_level_products(self):
        # products x_1 x_2 over bases of A_1, A_2 for blocks (1,1)
        t = build_tower(AlgebraSpec((1, 1)), 2, triangular_set())
        prods = tensor_power_basis(t, 2).vectors
        assert len(orthonormalize_span(prods)) == 4

    def test_empty(self):
        assert len(orthonormalize_span([], ambient_dim=3)) == 0
        assert len(orthonormalize_span([])) == 0

    def test_mixed_dimensions(self):
        with pytest.raises(ValueError):
            orthonormalize_span([np.eye(2), np.eye(3)])

    def test_hs_normalization(self):
        b = orthonormalize_span([np.eye(3)])
        assert hs_inner(b.vectors[0], b.vectors[0]) == pytest.approx(1.0)

    @given(st.integers(1, 12), st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_size_matches_rank(self, count, seed):
        rng = np.random.default_rng(seed)
        rank = int(rng.integers(1, 5))
        base = rng.normal(size=(rank, 3, 3))
        mats = np.tensordot(rng.normal(size=(count, rank)), base, axes=(1, 0))
        b = orthonormalize_span(mats)
        assert len(b) == rank_of(list(mats)) <= 9
        again = orthonormalize_span(b.vectors)
        assert len(again) == len(b)
        assert all(b.contains(v) for v in again.vectors)

    def test_extend_span(self):
        b = orthonormalize_span([E11])
        big, new = extend_span(b, [E11, E22, E11 + E22])
        assert len(big) == 2 and len(new) == 1
        assert big.gram_deviation() < 1e-12


class TestIntersect:
    def test_scalars_in_full(self):
        x = orthonormalize_span([np.eye(2)])
        y = orthonormalize_span([E11, E12, E21, E22])
        out = subspace_intersect(x, y)
        assert len(out) == 1 and out.contains(np.eye(2))

    def test_diagonal_with_upper(self):
        diag = orthonormalize_span([E11, E22])
        other = orthonormalize_span([np.eye(2), E12])
        out = subspace_intersect(diag, other)
        # frozen from the rank oracle dim X + dim Y - dim(X + Y)
        assert intersection_dim([E11, E22], [np.eye(2), E12]) == 1
        assert len(out) == 1
        assert out.contains(np.eye(2))

    def test_idempotent(self):
        x = orthonormalize_span([E11, E12 + E21])
        out = subspace_intersect(x, x)
        assert len(out) == len(x)
        assert all(out.contains(v) for v in x.vectors)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            subspace_intersect(orthonormalize_span([np.eye(2)]), orthonormalize_span([np.eye(3)]))

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_against_rank_oracle(self, p, q, seed):
        rng = np.random.default_rng(seed)
        shared = rng.normal(size=(min(p, q) // 2, 3, 3))
        xs = list(shared) + list(rng.normal(size=(p, 3, 3)))
        ys = list(shared) + list(rng.normal(size=(q, 3, 3)))
        out = subspace_intersect(orthonormalize_span(xs), orthonormalize_span(ys))
        assert len(out) == intersection_dim(xs, ys)
        assert len(out) <= min(rank_of(xs), rank_of(ys))


def test_null_combinations():
    res = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    c = null_combinations(res, 1e-9)
    assert c.shape[0] == 1
    assert np.allclose(c @ res, 0)


def test_basis_projection_and_residual():
    b = HSBasis.from_rows(2, np.eye(4)[:2])
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(b.project(x), [[1, 2], [0, 0]])
    assert b.residual(x) == pytest.approx(hs_norm(np.array([[0, 0], [3, 4]])))
