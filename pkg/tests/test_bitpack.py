"""Tests for packed rows and matrices."""

import numpy as np
import pytest

from purepat.bitpack import (PackedRow, PackedMatrix, pack, pack_matrix, unpack,
                             intersect, popcount, is_subset, n_words,
                             bit_count64)
from purepat.errors import ShapeError, OutOfRangeError

import oracle


def test_pack_examples():
    row = pack({0, 2}, 5)
    assert row.n_words == 1
    assert row.words[0] == 5
    assert pack(set(), 64).words.tolist() == [0]
    assert pack({1, 129}, 130).n_words == 3


@pytest.mark.parametrize('logical_len', [1, 63, 64, 65, 128, 130])
def test_pack_unpack(logical_len):
    rng = np.random.default_rng(logical_len)
    for _ in range(50):
        indices = sorted(set(rng.integers(0, logical_len, rng.integers(0, 20)).tolist()))
        assert unpack(pack(indices, logical_len)).tolist() == indices


def test_high_bit_is_negative_word():
    row = pack({63}, 64)
    assert row.words[0] == -2**63
    assert unpack(row).tolist() == [63]
    assert popcount(row) == 1


def test_out_of_range():
    with pytest.raises(OutOfRangeError):
        pack({5}, 5)
    with pytest.raises(OutOfRangeError):
        pack({-1}, 5)
    with pytest.raises(IndexError):  # also an IndexError
        pack_matrix([[0], [70]], 70)


def test_padding_must_be_zero():
    with pytest.raises(OutOfRangeError):
        PackedRow(np.array([1 << 5]), 5)
    with pytest.raises(ShapeError):
        PackedRow(np.array([0, 0]), 5)


def test_intersect():
    a, b = pack({0, 1, 2}, 4), pack({1, 2, 3}, 4)
    assert unpack(intersect(a, b)).tolist() == [1, 2]
    assert intersect(a, a) == a
    assert popcount(intersect(pack({0}, 4), pack({1}, 4))) == 0
    with pytest.raises(ShapeError):
        intersect(pack({0}, 4), pack({0}, 5))


def test_popcount():
    assert popcount(pack({0, 2, 63, 64}, 70)) == 4
    assert popcount(pack(set(), 70)) == 0
    assert popcount(pack(range(130), 130)) == 130


def test_is_subset():
    x = pack({0, 1, 2, 3}, 8)
    assert is_subset(pack({1, 2}, 8), x)
    assert not is_subset(pack({1, 4}, 8), x)
    assert is_subset(pack(set(), 8), x)


def test_against_int_bitsets():
    rng = np.random.default_rng(0)
    for logical_len in (3, 64, 97, 200):
        values = oracle.random_rows(rng, 30, logical_len, density=0.3)
        matrix = oracle.ints_to_matrix(values, logical_len)
        assert oracle.matrix_to_ints(matrix) == values
        assert matrix.popcounts().tolist() == [bin(v).count('1') for v in values]
        for a, b in zip(values[:-1], values[1:]):
            ra, rb = matrix[values.index(a)], matrix[values.index(b)]
            assert oracle.to_int(unpack(intersect(ra, rb))) == a & b
            assert is_subset(ra, rb) == oracle.is_subset(a, b)


def test_bit_count64():
    words = np.array([0, -1, 1, 2**62, -2**63, 0x0F0F], dtype=np.int64)
    assert bit_count64(words).tolist() == [0, 64, 1, 1, 1, 8]


def test_matrix():
    matrix = pack_matrix([[0, 1], [], [64]], 65, 'attack')
    assert matrix.n == len(matrix) == 3
    assert matrix.n_words == n_words(65) == 2
    assert matrix.nonempty().tolist() == [True, False, True]
    assert matrix[2] == pack({64}, 65)
    assert matrix[[0, 2]].n == 2
    assert matrix[[0, 2]].class_tag == 'attack'
    assert [idx.tolist() for idx in matrix.index_sets()] == [[0, 1], [], [64]]


def test_matrix_checks():
    with pytest.raises(ValueError):
        pack_matrix([[0]], 4, 'bogus')
    with pytest.raises(ShapeError):
        PackedMatrix(np.zeros((2, 3), dtype=np.int64), 64)


def test_rows_are_immutable_and_hashable():
    row = pack({3}, 10)
    with pytest.raises(ValueError):
        row.words[0] = 0
    assert len({row, pack({3}, 10), pack({4}, 10)}) == 2
