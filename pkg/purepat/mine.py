"""Candidate patterns of a class: pairwise intersections + instance signatures.

B^c = {x AND x' : x, x' rows of class c, x before x'} U {rows of class c},
empty intersections excluded. Each candidate b gets a support f_c(b) (number
of class rows containing b) and a score S_c(b) = f_c(b) * |b|^2.
"""

import threading
from dataclasses import dataclass

import numpy as np

from .bitpack import PackedMatrix, PackedRow, UNLABELED
from .errors import EmptyClassError, ShapeError
from .errors import ScoreOverflowError
from .kernels import ReferenceBackend, INT64_MAX, check_score_sum


# Minimum number of buffered intersections before a worker deduplicates
DEDUP_MIN_BUFFER = 2**16


@dataclass(frozen=True)
class Pattern:
    """One candidate / pure pattern.

    Parameters
    ----------
    - `bits` (PackedRow)
    - `size` (int): |b|, number of tokens.
    - `class_tag` (str)
    - `support` (int or None): f_c(b), None until counted.
    - `score` (int or None): f_c(b) * |b|^2, None until scored.
    """
    bits: PackedRow
    size: int
    class_tag: str
    support: int = None
    score: int = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError('Empty patterns are never stored.')
        if self.support is not None and self.support < 1:
            raise ValueError(f'Support must be >= 1, got {self.support}.')
        if self.score is not None and self.score != self.support * self.size**2:
            raise ValueError('score must equal support * size**2.')

    def tokens(self, vocabulary):
        return vocabulary.decode(self.bits.indices())


# ============================== candidate sets ==============================


def unique_rows(words):
    """Distinct rows of a word matrix, in canonical (sorted) order."""
    if words.shape[0] <= 1 or words.shape[1] == 0:
        return words[:min(words.shape[0], 1)]
    return np.unique(words, axis=0)


class CandidateSet:
    """Deduplicated patterns of one class, stored column-wise.

    Parameters
    ----------
    - `class_tag` (str)
    - `bits` (PackedMatrix): distinct non-empty patterns, canonical order.
    - `source_rows` (int): n_c, number of class rows the set comes from.
    - `supports`, `scores` (int64 arrays or None)
    """

    def __init__(self, class_tag, bits, source_rows, supports=None, scores=None):
        self.class_tag = class_tag
        self.bits = bits.with_class(class_tag) if bits.class_tag != class_tag else bits
        self.source_rows = source_rows
        self.sizes = bits.popcounts()
        self.supports = None if supports is None else np.asarray(supports, dtype=np.int64)
        self.scores = None if scores is None else np.asarray(scores, dtype=np.int64)
        self._lookup = None

    @property
    def n(self):
        return self.bits.n

    @property
    def logical_len(self):
        return self.bits.logical_len

    def __len__(self):
        return self.n

    def __repr__(self):
        return (f'CandidateSet({self.class_tag}, {self.n} patterns from '
                f'{self.source_rows} rows)')

    def pattern(self, i):
        support = None if self.supports is None else int(self.supports[i])
        score = None if self.scores is None else int(self.scores[i])
        return Pattern(self.bits[i], int(self.sizes[i]), self.class_tag,
                       support, score)

    @property
    def patterns(self):
        return [self.pattern(i) for i in range(self.n)]

    def __iter__(self):
        for i in range(self.n):
            yield self.pattern(i)

    def index(self, row):
        """Position of the pattern with the same bits as row (KeyError if none)."""
        if self._lookup is None:
            self._lookup = {w.tobytes(): i for i, w in enumerate(self.bits.words)}
        return self._lookup[np.ascontiguousarray(row.words).tobytes()]

    def __contains__(self, row):
        try:
            self.index(row)
        except KeyError:
            return False
        return True

    def with_supports(self, supports):
        return CandidateSet(self.class_tag, self.bits, self.source_rows,
                            supports=supports)

    def with_scores(self, scores):
        return CandidateSet(self.class_tag, self.bits, self.source_rows,
                            supports=self.supports, scores=scores)

    def subset(self, mask):
        """Candidates selected by a boolean mask (supports/scores kept)."""
        supports = None if self.supports is None else self.supports[mask]
        scores = None if self.scores is None else self.scores[mask]
        return CandidateSet(self.class_tag, self.bits[mask], self.source_rows,
                            supports=supports, scores=scores)


# ================================ operations ================================


def _left_blocks(n, n_blocks):
    """Strided left-index blocks (balanced numbers of pairs per block)."""
    n_blocks = max(1, min(n_blocks, n))
    return [range(b, n, n_blocks) for b in range(n_blocks)]


def enumerate_candidates(rows, config=None, backend=None, progress=None,
                         verbose=False):
    """Distinct non-empty pairwise intersections and signatures of a class.

    Parameters
    ----------
    - `rows` (PackedMatrix): training rows of one class.
    - `config` (KernelConfig, optional): used if no backend is given.
    - `backend` (kernels.Backend, default ReferenceBackend(config))
    - `progress` (callable, optional): called as
      progress(pairs_done, pairs_total, candidates_buffered).
    - `verbose` (bool, default False)

    Returns
    -------
    CandidateSet (supports not yet counted)
    """
    if rows.n == 0:
        raise EmptyClassError(f'No {rows.class_tag} rows to mine.')
    backend = ReferenceBackend(config) if backend is None else backend
    n = rows.n
    pair_batch = backend.config.pair_batch
    pairs_total = n * (n - 1) // 2

    if verbose:
        print(f'Mining {rows.class_tag} class: {n} rows, {pairs_total} pairs.')

    blocks = _left_blocks(n, 4 * backend.workers)
    lock = threading.Lock()
    pairs_done = [0]
    buffered_per_block = [0] * len(blocks)

    def worker(numbered_block):
        b, lefts = numbered_block
        found = []
        buffered = 0
        threshold = DEDUP_MIN_BUFFER
        for i in lefts:
            for j0 in range(i + 1, n, pair_batch):
                batch = backend.pair_intersect_batch(rows, i, (j0, min(j0 + pair_batch, n)))
                words = batch.words[batch.nonempty()]
                if words.shape[0]:
                    found.append(words)
                    buffered += words.shape[0]
            if buffered > threshold:
                found = [unique_rows(np.concatenate(found))]
                buffered = found[0].shape[0]
                threshold = max(DEDUP_MIN_BUFFER, 2 * buffered)
            if progress is not None:
                with lock:
                    pairs_done[0] += n - 1 - i
                    buffered_per_block[b] = buffered
                    progress(pairs_done[0], pairs_total, sum(buffered_per_block))
        if not found:
            return np.zeros((0, rows.n_words), dtype=np.int64)
        return unique_rows(np.concatenate(found))

    results = backend.map(worker, list(enumerate(blocks)))

    signatures = rows.words[rows.nonempty()]
    merged = unique_rows(np.concatenate(results + [signatures]))
    candidates = CandidateSet(rows.class_tag,
                              PackedMatrix(merged, rows.logical_len, rows.class_tag),
                              source_rows=n)
    if verbose:
        print(f'{candidates.n} distinct {rows.class_tag} candidates.')
    return candidates


def count_support(candidates, rows, backend=None):
    """Supports f_c(b): number of class rows containing each candidate."""
    if candidates.logical_len != rows.logical_len:
        raise ShapeError('Candidates and rows have different logical lengths.')
    if UNLABELED not in (candidates.class_tag, rows.class_tag) \
            and candidates.class_tag != rows.class_tag:
        raise ShapeError(f'Candidates of class {candidates.class_tag} counted '
                         f'against {rows.class_tag} rows.')
    backend = ReferenceBackend() if backend is None else backend
    return candidates.with_supports(backend.support_counts(candidates.bits, rows))


def score_patterns(candidates):
    """Scores S_c(b) = f_c(b) * |b|^2 (exact, overflow-checked)."""
    if candidates.supports is None:
        raise ValueError('Supports must be counted before scoring.')
    if candidates.n == 0:
        return candidates.with_scores(np.zeros(0, dtype=np.int64))
    largest = int(candidates.supports.max()) * int(candidates.sizes.max())**2
    if largest > INT64_MAX:
        raise ScoreOverflowError(f'Pattern score {largest} exceeds 2**63 - 1.')
    scores = candidates.supports * candidates.sizes**2
    check_score_sum(scores)
    return candidates.with_scores(scores)


def mine_class(rows, backend=None, progress=None, verbose=False):
    """Candidates of one class with supports and scores (the first pass)."""
    backend = ReferenceBackend() if backend is None else backend
    candidates = enumerate_candidates(rows, backend=backend, progress=progress,
                                      verbose=verbose)
    return score_patterns(count_support(candidates, rows, backend=backend))
