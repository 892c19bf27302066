"""Batched compute kernels on packed matrices, and their backends.

Three kernels:
- pair_intersect_batch: one left row broadcast-ANDed over a window of peers
- coverage_any: does some opponent row contain each pattern?
- fused_score: sum of the scores of the patterns contained in each test row

plus support_counts, the per-pattern count of containing rows used for
supports.

All backends must return bit-for-bit identical results; the 'reference'
backend runs blocks sequentially, 'parallel-cpu' dispatches the same blocks
to a thread pool (numpy releases the GIL in the word loops).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bitpack import PackedMatrix
from .errors import ConfigError, ContractError, ShapeError, ScoreOverflowError


INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class KernelConfig:
    """Batch sizes of the kernels (results never depend on them).

    Parameters
    ----------
    - `pair_batch` (int, default 8192): peers per broadcast-AND batch.
    - `coverage_block` (int, default 4096): patterns per coverage batch.
    - `memory_budget_bytes` (int, default 512 MiB): soft cap on temporaries,
      used to size the chunks of opponent / test rows.
    """
    pair_batch: int = 8192
    coverage_block: int = 4096
    memory_budget_bytes: int = 512 * 2**20

    def __post_init__(self):
        if self.pair_batch < 1 or self.coverage_block < 1:
            raise ConfigError('pair_batch and coverage_block must be >= 1.')
        if self.memory_budget_bytes < 1:
            raise ConfigError('memory_budget_bytes must be >= 1.')

    def row_chunk(self, n_patterns):
        """Rows compared at once against a block of n_patterns patterns."""
        # int64 AND result + bool match + int64 cast of the match
        per_pair = 17
        return max(1, self.memory_budget_bytes // (max(n_patterns, 1) * per_pair))


# ============================= kernel functions =============================


def _check_same_length(a, b):
    if a.logical_len != b.logical_len:
        raise ShapeError(f'Logical lengths differ: {a.logical_len} vs {b.logical_len}.')


def check_score_sum(scores):
    """Raise ScoreOverflowError if sum(|s|) does not fit in signed 64 bits."""
    total = sum(abs(int(s)) for s in scores)
    if total > INT64_MAX:
        raise ScoreOverflowError(f'Score sum {total} exceeds 2**63 - 1.')
    return total


def pair_intersect_batch(rows, left_index, window):
    """rows[i] AND rows[j] for every j of window [j_start, j_end), i < j_start.

    Returns
    -------
    PackedMatrix of j_end - j_start rows (same class as `rows`).
    """
    j_start, j_end = window
    n = rows.n
    if not 0 <= left_index < n:
        raise ContractError(f'Left index {left_index} out of range [0, {n}).')
    if j_start <= left_index or j_end > n or j_start > j_end:
        raise ContractError(f'Window [{j_start}, {j_end}) must lie within '
                            f'({left_index}, {n}].')
    words = rows.words[left_index] & rows.words[j_start:j_end]
    return PackedMatrix(words, rows.logical_len, rows.class_tag)


def subset_matrix(pattern_words, row_words):
    """Z[p, t] = all over k of ((P[p, k] AND R[t, k]) == P[p, k])."""
    match = np.ones((pattern_words.shape[0], row_words.shape[0]), dtype=bool)
    for k in range(pattern_words.shape[1]):
        pk = pattern_words[:, k]
        if not pk.any():
            continue
        match &= (pk[:, None] & row_words[None, :, k]) == pk[:, None]
        if not match.any():
            break
    return match


def coverage_block(pattern_words, opponent_words, config):
    """Covered flags of a block of patterns against all opponent rows."""
    n_patterns = pattern_words.shape[0]
    covered = np.zeros(n_patterns, dtype=bool)
    chunk = config.row_chunk(n_patterns)
    for t0 in range(0, opponent_words.shape[0], chunk):
        open_ = np.flatnonzero(~covered)
        if open_.size == 0:
            break
        match = subset_matrix(pattern_words[open_], opponent_words[t0:t0 + chunk])
        covered[open_] = match.any(axis=1)
    return covered


def count_block(pattern_words, row_words, config):
    """Number of rows containing each pattern of a block."""
    counts = np.zeros(pattern_words.shape[0], dtype=np.int64)
    chunk = config.row_chunk(pattern_words.shape[0])
    for t0 in range(0, row_words.shape[0], chunk):
        counts += subset_matrix(pattern_words, row_words[t0:t0 + chunk]).sum(axis=1)
    return counts


def score_block(pattern_words, scores, test_words, config):
    """Partial evidence of every test row from a block of patterns."""
    out = np.zeros(test_words.shape[0], dtype=np.int64)
    chunk = config.row_chunk(pattern_words.shape[0])
    for t0 in range(0, test_words.shape[0], chunk):
        match = subset_matrix(pattern_words, test_words[t0:t0 + chunk])
        out[t0:t0 + chunk] = scores @ match.astype(np.int64)
    return out


# ================================= backends =================================


class Backend:
    """Base class of kernel backends. Subclasses only redefine map().

    Parameters
    ----------
    - `config` (KernelConfig, default KernelConfig())
    - `workers` (int, default 1): number of workers of parallel backends.
    """

    name = 'base'

    def __init__(self, config=None, workers=1):
        self.config = KernelConfig() if config is None else config
        if workers < 1:
            raise ConfigError(f'workers must be >= 1, got {workers}')
        self.workers = workers

    def __repr__(self):
        return f'{self.__class__.__name__}(workers={self.workers}, {self.config})'

    def map(self, function, items):
        """Apply function to items, results in item order."""
        return [function(item) for item in items]

    def _pattern_blocks(self, n_patterns):
        size = self.config.coverage_block
        return [(a, min(a + size, n_patterns)) for a in range(0, n_patterns, size)]

    # kernels ----------------------------------------------------------------

    def pair_intersect_batch(self, rows, left_index, window):
        return pair_intersect_batch(rows, left_index, window)

    def coverage_any(self, patterns, opponents):
        """Boolean mask: True where some opponent row contains the pattern."""
        _check_same_length(patterns, opponents)
        if patterns.n == 0:
            return np.zeros(0, dtype=bool)
        if opponents.n == 0:
            return np.zeros(patterns.n, dtype=bool)

        def block(bounds):
            a, b = bounds
            return coverage_block(patterns.words[a:b], opponents.words, self.config)

        return np.concatenate(self.map(block, self._pattern_blocks(patterns.n)))

    def support_counts(self, patterns, rows):
        """Number of rows containing each pattern (exact recount)."""
        _check_same_length(patterns, rows)
        if patterns.n == 0:
            return np.zeros(0, dtype=np.int64)

        def block(bounds):
            a, b = bounds
            return count_block(patterns.words[a:b], rows.words, self.config)

        return np.concatenate(self.map(block, self._pattern_blocks(patterns.n)))

    def fused_score(self, patterns, scores, tests):
        """out[t] = sum over p of scores[p] * [pattern p subset of test t]."""
        _check_same_length(patterns, tests)
        scores = np.asarray(scores, dtype=np.int64)
        if scores.shape != (patterns.n,):
            raise ShapeError(f'{scores.shape[0]} scores for {patterns.n} patterns.')
        check_score_sum(scores)
        out = np.zeros(tests.n, dtype=np.int64)
        if patterns.n == 0 or tests.n == 0:
            return out

        def block(bounds):
            a, b = bounds
            return score_block(patterns.words[a:b], scores[a:b], tests.words,
                               self.config)

        for partial in self.map(block, self._pattern_blocks(patterns.n)):
            out += partial
        return out


class ReferenceBackend(Backend):
    """Sequential reference implementation."""
    name = 'reference'


class ParallelCPUBackend(Backend):
    """Blocks dispatched to a pool of threads."""

    name = 'parallel-cpu'

    def map(self, function, items):
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [function(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(function, items))


BACKENDS = {
    ReferenceBackend.name: ReferenceBackend,
    ParallelCPUBackend.name: ParallelCPUBackend,
}


def available_backends():
    return sorted(BACKENDS)


def get_backend(name='parallel-cpu', config=None, workers=1):
    """Instantiate a backend by name; unknown names raise ConfigError."""
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise ConfigError(f'Unknown backend {name!r}. Available backends: '
                          f'{", ".join(available_backends())}')
    return cls(config=config, workers=workers)
