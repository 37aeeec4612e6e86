import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.generators import AlgebraSpec
from shiftlab.numerics import ResourceLimitError, max_dev
from shiftlab.tower import (
    GeneratorCorrespondence,
    ShiftSet,
    build_tower,
    commutant_experiment,
    index_proxy,
    level_dimensions,
    level_word_span,
    parse_shift_set,
    reordering_check,
    shift_map,
    tensor_independence_check,
    triangular_set,
    validate_shift_set,
    verify_phase_pattern,
    verify_tower_relations,
)

from oracles import commutant_dim, span_closure_dim

TRI = triangular_set()
ONE_ONE = AlgebraSpec((1, 1))
ONE_TWO = AlgebraSpec((1, 2))


@st.composite
def shift_sets(draw):
    """Finite sets with strictly increasing elements and gaps."""
    first = draw(st.integers(1, 3))
    gaps = sorted(set(draw(st.lists(st.integers(1, 6), min_size=0, max_size=3))))
    xs = [first]
    for g in gaps:
        xs.append(xs[-1] + g)
    return ShiftSet(tuple(xs))


class TestShiftSet:
    def test_triangular_membership(self):
        assert [d for d in range(1, 30) if d in TRI] == [1, 3, 6, 10, 15, 21, 28]

    def test_triangular_beyond_prefix(self):
        assert 1275 in TRI and 1276 not in TRI

    def test_stream(self):
        assert TRI.stream(6) == [1, 0, 1, 0, 0, 1]
        assert TRI.stream(3, start=5) == [0, 1, 0]

    def test_parse(self):
        assert parse_shift_set("1,2,4").elements == (1, 2, 4)
        assert parse_shift_set("triangular").rule == "triangular"
        for bad in ["1,2,3", "3,2", "0,1,3"]:
            with pytest.raises(ValueError):
                parse_shift_set(bad)

    def test_validate(self):
        assert validate_shift_set([1, 3, 6, 10])
        assert not validate_shift_set([1, 3, 5])
        assert validate_shift_set(TRI)

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            ShiftSet((1,), rule="primes")

    def test_triangular_horizon_values(self):
        # first gap larger than 3 is 6 -> 10; the next element is 15
        assert TRI.window_horizon(3) == 18
        assert TRI.window_horizon(1) == 7

    @staticmethod
    def _windows(sset, width, lo, hi):
        return {tuple(sset.stream(width, start=t - width + 1)) for t in range(lo, hi + 1)}

    @given(st.integers(1, 8))
    @settings(max_examples=8, deadline=None)
    def test_horizon_covers_triangular(self, width):
        L = TRI.window_horizon(width)
        early = self._windows(TRI, width, width, L)
        assert self._windows(TRI, width, L + 1, L + 400) <= early

    @given(shift_sets(), st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_horizon_covers_finite(self, sset, width):
        L = sset.window_horizon(width)
        early = self._windows(sset, width, width, L)
        assert self._windows(sset, width, L + 1, L + 100) <= early


class TestTowerMatrices:
    def test_exponents(self):
        t = build_tower(ONE_ONE, 4, TRI)
        assert t.exponents(4) == [1, 0, 1]
        assert t.exponents(1) == []

    def test_r2_explicit(self):
        t = build_tower(ONE_ONE, 2, TRI)
        w = np.diag([1, -1])
        x = np.array([[0, 1], [1, 0]])
        assert np.allclose(t.r(2), np.kron(w, x))
        assert np.allclose(t.r(1), np.kron(x, np.eye(2)))

    def test_level_bounds(self):
        t = build_tower(ONE_ONE, 2, TRI)
        with pytest.raises(IndexError):
            t.r(3)
        with pytest.raises(ValueError):
            t.head(2)

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            build_tower(ONE_TWO, 6, TRI, cap=256)
        with pytest.raises(ValueError):
            build_tower(ONE_ONE, 0)


class TestRelations:
    @pytest.mark.parametrize("blocks,depth", [((1, 1), 4), ((1, 2), 3), ((2,), 2), ((2, 1), 2), ((1, 1, 1), 2)])
    def test_all(self, blocks, depth):
        rep = verify_tower_relations(build_tower(AlgebraSpec(blocks), depth, TRI))
        assert rep.passed, rep.summary()

    def test_uncorrected_averaging_is_informational(self):
        rep = verify_tower_relations(build_tower(ONE_TWO, 2, TRI))
        uncorrected = [c for c in rep.checks if c.informational]
        assert len(uncorrected) == 1
        assert not uncorrected[0].passed
        assert uncorrected[0].deviation == pytest.approx(1 / 2)

    def test_phase_pattern_data(self):
        rep = verify_phase_pattern(build_tower(ONE_ONE, 4, TRI))
        pairs = rep.checks[0].data["gamma_pairs"]
        assert pairs == {"2,1": 1, "3,1": 0, "3,2": 1, "4,1": 1, "4,2": 0, "4,3": 1}

    @given(shift_sets(), st.sampled_from([(1, 1), (1, 2), (1, 1, 1)]))
    @settings(max_examples=15, deadline=None)
    def test_any_shift_set(self, sset, blocks):
        spec = AlgebraSpec(blocks)
        depth = 4 if spec.n == 2 else 3
        t = build_tower(spec, depth, sset, cap=729)
        rep = verify_tower_relations(t)
        assert rep.passed, rep.summary()
        for l in range(1, depth + 1):
            for m in range(1, l):
                anti = max_dev(t.r(l) @ t.r(m), t.r(m) @ t.r(l)) > 1e-9
                assert anti == ((l - m) in sset and spec.j > 1)


class TestDimensions:
    @pytest.mark.parametrize("blocks,depth", [((1, 1), 1), ((1, 1), 2), ((1, 1), 3), ((1, 2), 2), ((2,), 2)])
    def test_full_matrix_algebra(self, blocks, depth):
        t = build_tower(AlgebraSpec(blocks), depth, TRI)
        dims = level_dimensions(t)
        assert dims["dim"] == dims["expected"]
        assert level_dimensions(t, explicit=False)["dim"] == dims["expected"]
        words = level_word_span(t)
        assert words["dim"] == words["expected"]

    def test_oracle_depth_two(self):
        t = build_tower(ONE_ONE, 2, TRI)
        assert span_closure_dim(t.level_generators([1, 2]), 4) == 16

    def test_single_level_subalgebra(self):
        t = build_tower(ONE_TWO, 2, TRI)
        assert span_closure_dim(t.level_generators([2]), 9) == 9
        assert t.algebra([2], lazy=False).dim == 9

    @pytest.mark.parametrize("blocks,depth", [((1, 1), 3), ((1, 2), 2)])
    def test_reordering(self, blocks, depth):
        assert reordering_check(build_tower(AlgebraSpec(blocks), depth, TRI)).passed

    @pytest.mark.parametrize("blocks,depth", [((1, 1), 3), ((1, 2), 2), ((2, 1), 2)])
    def test_tensor_independence(self, blocks, depth):
        t = build_tower(AlgebraSpec(blocks), depth, TRI)
        for k in range(1, depth + 1):
            c = tensor_independence_check(t, k)
            assert c and c.data["dim"] == AlgebraSpec(blocks).dim_A ** k

    def test_index_proxy(self):
        c = index_proxy(ONE_ONE, TRI, 4)
        assert c.passed
        assert c.data["dims"] == [4, 16, 64, 256]


class TestShiftMap:
    @pytest.mark.parametrize("blocks,depth", [((1, 1), 1), ((1, 1), 2), ((1, 2), 1)])
    def test_homomorphism(self, blocks, depth):
        spec = AlgebraSpec(blocks)
        rep = shift_map(build_tower(spec, depth, TRI), build_tower(spec, depth + 1, TRI)).verify(samples=150)
        assert rep.passed, rep.summary()

    def test_mismatch_raises(self):
        with pytest.raises(ValueError):
            shift_map(build_tower(ONE_ONE, 2, TRI), build_tower(ONE_ONE, 2, TRI))
        with pytest.raises(ValueError):
            shift_map(build_tower(ONE_ONE, 1, TRI), build_tower(ONE_TWO, 2, TRI))

    def test_wrong_shift_set_detected(self):
        src = build_tower(ONE_ONE, 2, TRI)
        good = shift_map(src, build_tower(ONE_ONE, 3, TRI))
        bad_target = build_tower(ONE_ONE, 3, ShiftSet((2, 5)))
        rep = GeneratorCorrespondence(src, bad_target, good.names).verify(samples=150)
        assert not rep.passed


class TestCommutantExperiment:
    def test_one_one(self):
        rep = commutant_experiment(ONE_ONE, 1, [1, 2, 3, 4], TRI)
        assert rep.literal_dims == [4, 4, 4, 4]
        assert rep.dims == [2, 2, 2, 2]
        assert all(r.stabilized_blocks == (1, 1) for r in rep.rows)
        assert rep.contains_tensor_A and rep.non_increasing and rep.converged

    def test_literal_against_oracle(self):
        t = build_tower(ONE_ONE, 3, TRI)
        assert commutant_dim(t.level_generators([2, 3])) == 4

    def test_stabilized_against_oracle(self):
        # depth 3: heads of r_l for l > 3 contribute w in the slots l - q ∈ S
        t = build_tower(ONE_ONE, 3, TRI)
        heads = [t.head(l) for l in range(4, 3 + TRI.window_horizon(3) + 1)]
        assert commutant_dim(t.level_generators([2, 3]) + heads) == 2

    def test_full_block(self):
        rep = commutant_experiment(AlgebraSpec((2,)), 2, [1, 2], TRI)
        assert rep.dims == [16, 16]
        assert rep.converged

    def test_one_two(self):
        rep = commutant_experiment(ONE_TWO, 1, [1, 2], TRI, cap=729)
        assert rep.dims == [5, 5]
        assert rep.rows[-1].stabilized_blocks == (1, 2)
        assert rep.converged

    def test_k_two(self):
        rep = commutant_experiment(ONE_ONE, 2, [1, 2], TRI)
        assert rep.dims == [4, 4]
        assert rep.target_blocks == (1, 1, 1, 1)
        assert rep.converged

    def test_to_dict(self):
        d = commutant_experiment(ONE_ONE, 1, [1], TRI).to_dict()
        assert d["rows"][0]["literal"]["dim"] == 4
        assert d["target"] == {"dim": 2, "blocks": [1, 1]}

    def test_validation(self):
        with pytest.raises(ValueError):
            commutant_experiment(ONE_ONE, 0, [1])
        with pytest.raises(ValueError):
            commutant_experiment(ONE_ONE, 1, [])
        with pytest.raises(ResourceLimitError):
            commutant_experiment(ONE_TWO, 2, [4], cap=256)
