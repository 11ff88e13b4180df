import random

import pytest

from rotsynth.gf2 import (
    BitVec,
    DimensionError,
    GF2Matrix,
    SingularMatrixError,
    col_add,
    invert,
    is_invertible,
    is_permutation,
    permutation_matrix,
    random_invertible,
    random_matrix,
    rank,
)

U0 = GF2Matrix.from_rows([[1, 0, 1, 1], [0, 1, 1, 0], [1, 1, 1, 0], [1, 1, 1, 1]])
U1 = GF2Matrix.from_rows([[0, 0, 0, 1], [0, 0, 1, 1], [1, 0, 0, 0], [1, 1, 1, 1]])


def rank_by_span(m: GF2Matrix) -> int:
    """Independent oracle: grow a row span one vector at a time."""
    span = {0}
    r = 0
    for row in m.rows:
        if row not in span:
            span |= {row ^ s for s in span}
            r += 1
    return r


class TestBitVec:
    def test_string_roundtrip(self):
        v = BitVec.from_string("1011")
        assert v.to_string() == "1011"
        assert v.support() == (0, 2, 3)
        assert v.weight() == 3

    def test_dot(self):
        assert BitVec.from_string("110").dot(BitVec.from_string("011")) == 1
        assert BitVec.from_string("110").dot(BitVec.from_string("110")) == 0

    def test_xor_length_mismatch(self):
        with pytest.raises(DimensionError):
            BitVec.from_string("10") ^ BitVec.from_string("101")

    def test_bad_characters(self):
        with pytest.raises(ValueError):
            BitVec.from_string("10x1")


class TestRank:
    def test_identity(self):
        assert rank(GF2Matrix.identity(4)) == 4

    def test_reference_blocks(self):
        assert rank(U0) == 4
        assert rank(U1) == 4

    def test_zero_matrix(self):
        assert rank(GF2Matrix.zeros(3, 3)) == 0

    def test_against_span_oracle(self):
        rng = random.Random(0)
        for _ in range(200):
            m = random_matrix(rng.randrange(1, 7), rng.randrange(1, 7), rng)
            assert rank(m) == rank_by_span(m)


class TestInvertibility:
    def test_reference_block(self):
        assert is_invertible(U1)

    def test_duplicated_column(self):
        m = GF2Matrix.from_cols([[1, 0, 1], [1, 0, 1], [0, 1, 1]])
        assert not is_invertible(m)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            is_invertible(GF2Matrix.zeros(2, 3))

    def test_matches_elimination_oracle(self):
        rng = random.Random(1)
        for _ in range(200):
            n = rng.randrange(1, 7)
            m = random_matrix(n, n, rng)
            assert is_invertible(m) == (rank_by_span(m) == n)


class TestInvert:
    def test_identity(self):
        assert invert(GF2Matrix.identity(5)) == GF2Matrix.identity(5)

    def test_permutation_inverse_is_transpose(self):
        p = permutation_matrix([2, 0, 1, 3])
        assert invert(p) == p.transpose()

    def test_multiply_back(self):
        inv = invert(U0)
        assert U0 @ inv == GF2Matrix.identity(4)
        assert inv @ U0 == GF2Matrix.identity(4)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            invert(GF2Matrix.zeros(2, 2))

    def test_double_inverse(self):
        for seed in range(20):
            m = random_invertible(5, seed)
            assert invert(invert(m)) == m


class TestColAdd:
    def test_identity_example(self):
        m = col_add(GF2Matrix.identity(2), 0, 1)
        assert m == GF2Matrix.from_cols([[1, 0], [1, 1]])

    def test_involution(self):
        m = random_invertible(5, 3)
        assert col_add(col_add(m, 1, 4), 1, 4) == m

    def test_same_index_rejected(self):
        with pytest.raises(IndexError):
            col_add(GF2Matrix.identity(3), 2, 2)

    def test_preserves_invertibility_and_rank(self):
        rng = random.Random(2)
        for seed in range(50):
            m = random_invertible(6, seed)
            i, j = rng.sample(range(6), 2)
            m2 = col_add(m, i, j)
            assert is_invertible(m2)
            assert rank(m2) == rank(m)


class TestIsPermutation:
    def test_identity(self):
        assert is_permutation(GF2Matrix.identity(5))

    def test_weight_two_column(self):
        m = GF2Matrix.from_cols([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
        assert not is_permutation(m)

    def test_permutation_implies_invertible(self):
        rng = random.Random(4)
        for _ in range(30):
            images = list(range(5))
            rng.shuffle(images)
            p = permutation_matrix(images)
            assert is_permutation(p)
            assert is_invertible(p)


class TestRandomInvertible:
    def test_one_by_one(self):
        assert random_invertible(1, 99) == GF2Matrix.from_rows([[1]])

    def test_deterministic(self):
        assert random_invertible(4, 7) == random_invertible(4, 7)

    def test_always_invertible(self):
        for seed in range(100):
            assert is_invertible(random_invertible(6, seed))

    def test_rejects_zero(self):
        with pytest.raises(DimensionError):
            random_invertible(0, 1)
