"""Evidence of test rows, three-regulation classifier and explanations.

A(x) (resp. N(x)) is the sum of the scores of the pure attack (resp. normal)
patterns contained in x. Decision:
- R2: A == 0 and N == 0 -> attack (zero evidence)
- R1: A >= N -> attack
- R3: N < mu_N - r * sigma_N -> attack (outlier of the normal evidence)
- otherwise normal (R1)
The threshold comparison is done in float64 for scalar and batch paths alike.
"""

from dataclasses import dataclass, field

import numpy as np

from .bitpack import ATTACK, NORMAL
from .errors import ShapeError
from .kernels import ReferenceBackend


R1_ATTACK = 'R1-attack'
R1_NORMAL = 'R1-normal'
R2 = 'R2'
R3 = 'R3'

REGULATIONS = (R1_ATTACK, R1_NORMAL, R2, R3)


@dataclass(frozen=True)
class ClassifierParams:
    """Outlier multiplier r and the normal-evidence statistics mu_N, sigma_N."""
    r: float = 0.568
    mu_N: float = 0.0
    sigma_N: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f'r must be non-negative, got {self.r}')
        if self.sigma_N < 0:
            raise ValueError(f'sigma_N must be non-negative, got {self.sigma_N}')

    @property
    def threshold(self):
        return self.mu_N - self.r * self.sigma_N


# ================================= scoring ==================================


def evidence_scores(tests, dict_plus, dict_minus, backend=None):
    """Evidence vectors (A, N) of every test row (exact int64 arrays)."""
    for dictionary in (dict_plus, dict_minus):
        if dictionary.logical_len != tests.logical_len:
            raise ShapeError('Test rows and dictionaries have different logical lengths.')
    backend = ReferenceBackend() if backend is None else backend
    A = backend.fused_score(dict_plus.bits, dict_plus.scores, tests)
    N = backend.fused_score(dict_minus.bits, dict_minus.scores, tests)
    return A, N


def fit_normal_stats(N_values, r=0.568):
    """mu_N, sigma_N (population) over the strictly positive N values.

    With fewer than two positive values, mu_N = sigma_N = 0 (R3 inert).
    Values are sorted first so that the result does not depend on row order.
    """
    N_values = np.asarray(N_values)
    positive = np.sort(N_values[N_values > 0]).astype(float)
    if positive.size < 2:
        return ClassifierParams(r=r, mu_N=0.0, sigma_N=0.0)
    return ClassifierParams(r=r, mu_N=float(positive.mean()),
                            sigma_N=float(positive.std(ddof=0)))


# ================================ decisions =================================


def classify(A, N, params):
    """(label, fired regulation) of one evidence pair."""
    if A == 0 and N == 0:
        return ATTACK, R2
    if A >= N:
        return ATTACK, R1_ATTACK
    if float(N) < params.threshold:
        return ATTACK, R3
    return NORMAL, R1_NORMAL


def classify_batch(A, N, params):
    """Vectorized classify(): arrays of labels and fired regulations."""
    A = np.asarray(A, dtype=np.int64)
    N = np.asarray(N, dtype=np.int64)
    r2 = (A == 0) & (N == 0)
    r1 = ~r2 & (A >= N)
    r3 = ~r2 & ~r1 & (N.astype(float) < params.threshold)
    regulations = np.full(A.shape, R1_NORMAL, dtype=object)
    regulations[r1] = R1_ATTACK
    regulations[r3] = R3
    regulations[r2] = R2
    labels = np.where(r1 | r2 | r3, ATTACK, NORMAL).astype(object)
    return labels, regulations


# =============================== explanations ===============================


@dataclass(frozen=True)
class MatchedPattern:
    """A pure pattern found in a test row, in human-readable form."""
    tokens: tuple
    support: int
    score: int


@dataclass(frozen=True)
class EvidenceReport:
    """Forensic explanation of the decision on one test row."""
    abnormal_score: int
    normal_score: int
    label: str
    fired_regulation: str
    matched_attack_patterns: list = field(default_factory=list)
    matched_normal_patterns: list = field(default_factory=list)

    def __post_init__(self):
        if sum(m.score for m in self.matched_attack_patterns) != self.abnormal_score:
            raise ValueError('Attack evidence does not match the matched patterns.')
        if sum(m.score for m in self.matched_normal_patterns) != self.normal_score:
            raise ValueError('Normal evidence does not match the matched patterns.')

    def to_record(self):
        """Structured (JSON-serializable) version of the report."""
        def patterns(matched):
            return [{'tokens': list(m.tokens), 'support': m.support, 'score': m.score}
                    for m in matched]
        return {'A': self.abnormal_score,
                'N': self.normal_score,
                'label': self.label,
                'regulation': self.fired_regulation,
                'attack_evidence': patterns(self.matched_attack_patterns),
                'normal_evidence': patterns(self.matched_normal_patterns)}

    def to_lines(self):
        """Line-oriented text version of the report."""
        lines = [f'label={self.label} regulation={self.fired_regulation} '
                 f'A={self.abnormal_score} N={self.normal_score}']
        for sign, matched in (('+', self.matched_attack_patterns),
                              ('-', self.matched_normal_patterns)):
            for m in matched:
                lines.append(f'  {sign} [{" ".join(m.tokens)}] '
                             f'support={m.support} score={m.score}')
        return lines

    def __str__(self):
        return '\n'.join(self.to_lines())


def _matched(dictionary, row, vocabulary):
    matched = [MatchedPattern(tuple(vocabulary.decode(dictionary.bits[int(i)].indices())),
                              int(dictionary.supports[i]), int(dictionary.scores[i]))
               for i in dictionary.matching(row)]
    return sorted(matched, key=lambda m: (-m.score, m.tokens))


def explain(test_row, dict_plus, dict_minus, vocabulary, params):
    """EvidenceReport of one PackedRow: matched patterns, A, N and decision.

    Parameters
    ----------
    - `test_row` (PackedRow)
    - `dict_plus`, `dict_minus` (purify.PureDictionary): attack / normal.
    - `vocabulary` (pipeline.TokenVocabulary): to render tokens.
    - `params` (ClassifierParams): statistics used for Regulation 3.
    """
    attack = _matched(dict_plus, test_row, vocabulary)
    normal = _matched(dict_minus, test_row, vocabulary)
    A = sum(m.score for m in attack)
    N = sum(m.score for m in normal)
    label, regulation = classify(A, N, params)
    return EvidenceReport(A, N, label, regulation, attack, normal)
