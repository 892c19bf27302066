"""Cross-class rejection: candidates contained in an opposite-class training
row are expelled, the others form the pure dictionary of their class."""

import numpy as np

from .errors import ShapeError
from .kernels import ReferenceBackend, subset_matrix, check_score_sum
from .mine import Pattern


class PureDictionary:
    """Coherent patterns of one class (none is inside an opposite-class row).

    Parameters
    ----------
    - `class_tag` (str)
    - `bits` (PackedMatrix): pattern bits, canonical order.
    - `supports`, `scores` (int64 arrays)

    Useful attributes
    -----------------
    - `total_score` (int): sum of the member scores.
    - `witnesses` (dict): only filled by reject_covered(debug=True);
      rejected candidate index -> index of an opposite row containing it.
    """

    def __init__(self, class_tag, bits, supports, scores):
        self.class_tag = class_tag
        self.bits = bits.with_class(class_tag) if bits.class_tag != class_tag else bits
        self.sizes = bits.popcounts()
        self.supports = np.asarray(supports, dtype=np.int64)
        self.scores = np.asarray(scores, dtype=np.int64)
        if not len(self.supports) == len(self.scores) == bits.n:
            raise ShapeError('bits, supports and scores must have the same length.')
        if np.any(self.scores != self.supports * self.sizes**2):
            raise ValueError('Scores must equal support * size**2.')
        self.total_score = check_score_sum(self.scores)
        self.witnesses = {}

    @property
    def n(self):
        return self.bits.n

    @property
    def logical_len(self):
        return self.bits.logical_len

    def __len__(self):
        return self.n

    def __repr__(self):
        return (f'PureDictionary({self.class_tag}, {self.n} patterns, '
                f'total score {self.total_score})')

    def pattern(self, i):
        return Pattern(self.bits[i], int(self.sizes[i]), self.class_tag,
                       int(self.supports[i]), int(self.scores[i]))

    @property
    def patterns(self):
        return [self.pattern(i) for i in range(self.n)]

    def __iter__(self):
        for i in range(self.n):
            yield self.pattern(i)

    def matching(self, row):
        """Indices of the patterns contained in a PackedRow."""
        if row.logical_len != self.logical_len:
            raise ShapeError('Row and dictionary have different logical lengths.')
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        match = subset_matrix(self.bits.words, row.words[None, :])
        return np.flatnonzero(match[:, 0])

    def violations(self, opposite_rows):
        """(pattern, row) index pairs where a pattern is inside an opposite row.

        Independent nested check, used to verify soundness.
        """
        pairs = []
        for p, pattern in enumerate(self.bits.words):
            inside = np.all((pattern & opposite_rows.words) == pattern, axis=1)
            pairs.extend((p, int(t)) for t in np.flatnonzero(inside))
        return pairs


def reject_covered(candidates, opposite_rows, backend=None, debug=False,
                   verbose=False):
    """Keep the candidates that no opposite-class row contains.

    Parameters
    ----------
    - `candidates` (mine.CandidateSet, scored)
    - `opposite_rows` (PackedMatrix): all training rows of the other class.
    - `backend` (kernels.Backend, default ReferenceBackend())
    - `debug` (bool, default False): record a covering opposite row for every
      rejected candidate and re-verify soundness.
    - `verbose` (bool, default False)

    Returns
    -------
    PureDictionary
    """
    if candidates.logical_len != opposite_rows.logical_len:
        raise ShapeError('Candidates and opposite rows have different logical lengths.')
    if candidates.scores is None:
        raise ValueError('Candidates must be scored before purification.')
    backend = ReferenceBackend() if backend is None else backend

    covered = backend.coverage_any(candidates.bits, opposite_rows)
    kept = candidates.subset(~covered)
    dictionary = PureDictionary(candidates.class_tag, kept.bits,
                                kept.supports, kept.scores)

    if verbose:
        print(f'{dictionary.n} pure {candidates.class_tag} patterns kept, '
              f'{int(covered.sum())} rejected.')

    if debug:
        rejected = np.flatnonzero(covered)
        for i in rejected:
            pattern = candidates.bits.words[i]
            inside = np.all((pattern & opposite_rows.words) == pattern, axis=1)
            dictionary.witnesses[int(i)] = int(np.argmax(inside))
        if dictionary.violations(opposite_rows):
            raise AssertionError('Pure dictionary contains covered patterns.')

    return dictionary
