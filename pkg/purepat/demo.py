"""Demo of the whole method on a tiny hand-traceable example.

Attack rows {a,b,c}, {a,b,d}, {a,c,d}; normal rows {a,b,e}, {c,d,e};
test rows {a,c,d,e}, {a,b,e} and {b}.
"""

import argparse

import matplotlib

from .bitpack import ATTACK, NORMAL, UNLABELED, pack_matrix
from .infer import evidence_scores, fit_normal_stats, classify_batch, explain
from .kernels import get_backend
from .mine import mine_class
from .pipeline import TokenVocabulary
from .purify import reject_covered


LETTERS = 'abcde'

ATTACK_ROWS = ['abc', 'abd', 'acd']
NORMAL_ROWS = ['abe', 'cde']
TEST_ROWS = ['acde', 'abe', 'b']


def demo_vocabulary():
    """One token per letter, column j holding letter j."""
    return TokenVocabulary([f'{j}:{letter}' for j, letter in enumerate(LETTERS)])


def demo_matrix(words, class_tag=UNLABELED):
    """Packed rows of letter strings ('abc' -> bits 0, 1, 2)."""
    return pack_matrix([[LETTERS.index(c) for c in word] for word in words],
                       len(LETTERS), class_tag)


def running_example(backend='reference', workers=1, debug=True):
    """Mine, purify and score the example.

    Returns
    -------
    dict with keys vocabulary, candidates (attack / normal CandidateSets),
    dict_plus, dict_minus, tests, A, N, params, labels, regulations.
    """
    backend = get_backend(backend, workers=workers)
    vocabulary = demo_vocabulary()
    attack = demo_matrix(ATTACK_ROWS, ATTACK)
    normal = demo_matrix(NORMAL_ROWS, NORMAL)
    tests = demo_matrix(TEST_ROWS)

    candidates = {ATTACK: mine_class(attack, backend),
                  NORMAL: mine_class(normal, backend)}
    dict_plus = reject_covered(candidates[ATTACK], normal, backend, debug=debug)
    dict_minus = reject_covered(candidates[NORMAL], attack, backend, debug=debug)

    A, N = evidence_scores(tests, dict_plus, dict_minus, backend)
    params = fit_normal_stats(N)
    labels, regulations = classify_batch(A, N, params)

    return {'vocabulary': vocabulary, 'candidates': candidates,
            'dict_plus': dict_plus, 'dict_minus': dict_minus, 'tests': tests,
            'A': A, 'N': N, 'params': params, 'labels': labels,
            'regulations': regulations}


def _letters(vocabulary, row):
    return ''.join(token.split(':')[1] for token in vocabulary.decode(row.indices()))


def demo(plot=False, backend=None):
    """Print every step of the running example (and plot its evidence)."""

    if backend is not None:
        matplotlib.use(backend)

    result = running_example()
    vocabulary = result['vocabulary']

    for label, dictionary in ((ATTACK, result['dict_plus']),
                              (NORMAL, result['dict_minus'])):
        candidates = result['candidates'][label]
        print(f'\n{label}: {candidates.n} candidates, {dictionary.n} pure patterns')
        for pattern in dictionary:
            print(f'  {_letters(vocabulary, pattern.bits):<4} '
                  f'support={pattern.support} score={pattern.score}')
        for i, row in dictionary.witnesses.items():
            print(f'  rejected: {_letters(vocabulary, candidates.bits[i])} '
                  f'(inside opposite row {row})')

    params = result['params']
    print(f'\nmu_N={params.mu_N}, sigma_N={params.sigma_N}, r={params.r}')

    for t, word in enumerate(TEST_ROWS):
        report = explain(result['tests'][t], result['dict_plus'],
                         result['dict_minus'], vocabulary, params)
        print(f'\ntest {{{",".join(word)}}}')
        print(report)

    if plot:
        import matplotlib.pyplot as plt
        from .plots import plot_evidence
        plot_evidence(result['A'], result['N'], result['labels'], params)
        plt.show()

    return result


if __name__ == '__main__':

    descr = "Run the purepat demo on a hand-traceable example."

    parser = argparse.ArgumentParser(
        description=descr,
        formatter_class=argparse.RawTextHelpFormatter,
    )

    msg = "(str): Matplotlib backend (e.g. 'TkAgg', 'Qt5Agg', 'Agg', etc.)"
    parser.add_argument('-B', '--backend', type=str, help=msg)

    msg = "plot the evidence of the test rows"
    parser.add_argument('-p', '--plot', action='store_true', help=msg)

    args = parser.parse_args()
    demo(plot=args.plot, backend=args.backend)
