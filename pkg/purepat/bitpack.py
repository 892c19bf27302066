"""Packed Boolean rows: token bitsets stored as signed 64-bit words.

Bit j of a row lives in word j // 64, at position j % 64 (LSB first). Words
are stored as two's-complement int64; AND and equality are unchanged by this
reinterpretation, so every operation below can work on either view. Bits at
positions >= L in the last word are always zero, which makes word equality a
valid subset test without any masking.
"""

import numpy as np

from .errors import ShapeError, OutOfRangeError


ATTACK = 'attack'
NORMAL = 'normal'
UNLABELED = 'unlabeled'

CLASS_TAGS = (ATTACK, NORMAL, UNLABELED)

WORD_BITS = 64


# ========================== word-level primitives ===========================


# SWAR popcount masks
_S55 = np.uint64(0x5555555555555555)
_S33 = np.uint64(0x3333333333333333)
_S0F = np.uint64(0x0F0F0F0F0F0F0F0F)
_S01 = np.uint64(0x0101010101010101)


def n_words(logical_len):
    """Number of 64-bit words K = ceil(L / 64) needed for L bits."""
    return -(-logical_len // WORD_BITS)


def bit_count64(words):
    """Per-word number of set bits, for int64 or uint64 arrays (any shape)."""
    arr = np.atleast_1d(np.asarray(words)).view(np.uint64)
    arr = arr - ((arr >> np.uint64(1)) & _S55)
    arr = (arr & _S33) + ((arr >> np.uint64(2)) & _S33)
    arr += (arr >> np.uint64(4))
    arr &= _S0F
    arr *= _S01
    arr >>= np.uint64(56)
    return arr.astype(np.int64)


def _check_padding(words, logical_len):
    """Raise if bits beyond L are set in the last word of (rows of) words."""
    tail = logical_len % WORD_BITS
    if tail == 0 or words.shape[-1] == 0:
        return
    invalid = ~((np.uint64(1) << np.uint64(tail)) - np.uint64(1))
    last = words[..., -1].view(np.uint64)
    if np.any(last & invalid):
        raise OutOfRangeError(f'Bits beyond logical length {logical_len} '
                              'are set (non-canonical padding).')


def _frozen(array):
    array = np.ascontiguousarray(array, dtype=np.int64)
    if array.flags.writeable:
        array = array.copy()
        array.flags.writeable = False
    return array


# ================================ PackedRow =================================


class PackedRow:
    """One token bitset of logical length L, stored as K int64 words.

    Parameters
    ----------
    - `words` (array-like of int64 or uint64, length K = ceil(L/64))
    - `logical_len` (int): L, number of tokens in the vocabulary.

    Rows are immutable and hashable (hash / equality use the full word
    sequence, canonical thanks to the zero-padding invariant).
    """

    __slots__ = ('words', 'logical_len')

    def __init__(self, words, logical_len):
        words = np.asarray(words)
        if words.dtype == np.uint64:
            words = words.view(np.int64)
        if words.ndim != 1 or words.shape[0] != n_words(logical_len):
            raise ShapeError(f'Expected {n_words(logical_len)} words for '
                             f'L={logical_len}, got shape {words.shape}.')
        _check_padding(words, logical_len)
        self.words = _frozen(words)
        self.logical_len = logical_len

    @property
    def n_words(self):
        return self.words.shape[0]

    def indices(self):
        """Sorted array of the set bit positions."""
        return unpack(self)

    def __eq__(self, other):
        if not isinstance(other, PackedRow):
            return NotImplemented
        return (self.logical_len == other.logical_len
                and np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.logical_len, self.words.tobytes()))

    def __repr__(self):
        return f'PackedRow({sorted(self.indices().tolist())}, L={self.logical_len})'


# =============================== PackedMatrix ===============================


class PackedMatrix:
    """Contiguous block of n packed rows sharing one logical length and class.

    Parameters
    ----------
    - `words` (2D array n x K of int64 or uint64)
    - `logical_len` (int): L.
    - `class_tag` ('attack', 'normal' or 'unlabeled', default 'unlabeled')
    """

    __slots__ = ('words', 'logical_len', 'class_tag')

    def __init__(self, words, logical_len, class_tag=UNLABELED):
        words = np.asarray(words)
        if words.dtype == np.uint64:
            words = words.view(np.int64)
        if words.ndim != 2 or words.shape[1] != n_words(logical_len):
            raise ShapeError(f'Expected (n, {n_words(logical_len)}) words for '
                             f'L={logical_len}, got shape {words.shape}.')
        if class_tag not in CLASS_TAGS:
            raise ValueError(f'{class_tag} not a valid class tag {CLASS_TAGS}.')
        _check_padding(words, logical_len)
        self.words = _frozen(words)
        self.logical_len = logical_len
        self.class_tag = class_tag

    @classmethod
    def empty(cls, logical_len, class_tag=UNLABELED):
        return cls(np.zeros((0, n_words(logical_len)), dtype=np.int64),
                   logical_len, class_tag)

    @property
    def n(self):
        return self.words.shape[0]

    @property
    def n_words(self):
        return self.words.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, item):
        if isinstance(item, (int, np.integer)):
            return PackedRow(self.words[item], self.logical_len)
        return PackedMatrix(self.words[item], self.logical_len, self.class_tag)

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def with_class(self, class_tag):
        return PackedMatrix(self.words, self.logical_len, class_tag)

    def popcounts(self):
        """Number of set bits of every row (int64 array of length n)."""
        if self.n_words == 0:
            return np.zeros(self.n, dtype=np.int64)
        return bit_count64(self.words).reshape(self.words.shape).sum(axis=1)

    def nonempty(self):
        """Boolean mask of rows with at least one set bit."""
        return self.words.any(axis=1)

    def index_sets(self):
        """List of sorted index arrays, one per row."""
        return unpack_matrix(self)

    def __eq__(self, other):
        if not isinstance(other, PackedMatrix):
            return NotImplemented
        return (self.logical_len == other.logical_len
                and self.class_tag == other.class_tag
                and np.array_equal(self.words, other.words))

    def __repr__(self):
        return (f'PackedMatrix(n={self.n}, L={self.logical_len}, '
                f'K={self.n_words}, class={self.class_tag})')


# ============================ packing / unpacking ===========================


def _bit_positions(token_indices, logical_len):
    idx = np.unique(np.asarray(list(token_indices), dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= logical_len):
        bad = idx[0] if idx[0] < 0 else idx[-1]
        raise OutOfRangeError(f'Bit index {bad} out of range [0, {logical_len}).')
    return idx


def pack(token_indices, logical_len):
    """Pack a set of bit positions into a PackedRow of length L."""
    idx = _bit_positions(token_indices, logical_len)
    words = np.zeros(n_words(logical_len), dtype=np.uint64)
    np.bitwise_or.at(words, idx >> 6,
                     np.left_shift(np.uint64(1), (idx & 63).astype(np.uint64)))
    return PackedRow(words, logical_len)


def pack_matrix(index_sets, logical_len, class_tag=UNLABELED):
    """Pack a sequence of bit-position sets into a PackedMatrix (one row each)."""
    index_sets = [_bit_positions(s, logical_len) for s in index_sets]
    words = np.zeros((len(index_sets), n_words(logical_len)), dtype=np.uint64)
    if index_sets:
        rows = np.repeat(np.arange(len(index_sets)),
                         [s.size for s in index_sets])
        idx = np.concatenate(index_sets).astype(np.int64)
        np.bitwise_or.at(words, (rows, idx >> 6),
                         np.left_shift(np.uint64(1), (idx & 63).astype(np.uint64)))
    return PackedMatrix(words, logical_len, class_tag)


def _bits(words, logical_len):
    little = np.ascontiguousarray(words, dtype='<i8')
    bits = np.unpackbits(little.view(np.uint8), axis=-1, bitorder='little')
    return bits[..., :logical_len]


def unpack(row):
    """Sorted array of set bit positions of a PackedRow."""
    return np.flatnonzero(_bits(row.words, row.logical_len))


def unpack_matrix(matrix):
    """Sorted arrays of set bit positions, one per row of a PackedMatrix."""
    if matrix.n == 0:
        return []
    bits = _bits(matrix.words, matrix.logical_len)
    return [np.flatnonzero(row) for row in bits]


# ============================= row operations ===============================


def _check_same_length(a, b):
    if a.logical_len != b.logical_len:
        raise ShapeError(f'Logical lengths differ: {a.logical_len} vs {b.logical_len}.')


def intersect(a, b):
    """Word-wise AND of two rows (set intersection)."""
    _check_same_length(a, b)
    return PackedRow(a.words & b.words, a.logical_len)


def popcount(a):
    """Number of set bits of a row."""
    if a.n_words == 0:
        return 0
    return int(bit_count64(a.words).sum())


def is_subset(p, x):
    """True iff every bit of p is set in x, i.e. (p AND x) == p on all words."""
    _check_same_length(p, x)
    return bool(np.array_equal(p.words & x.words, p.words))
