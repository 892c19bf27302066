"""Figures of benchmark runs and of the evidence of predicted rows."""

import matplotlib.pyplot as plt
import numpy as np

from .bitpack import ATTACK, NORMAL


colors = {ATTACK: 'crimson', NORMAL: 'dodgerblue'}


def plot_benchmark(reports, fig=None):
    """Pattern counts and detection metrics versus training share.

    Parameters
    ----------
    - `reports` (list of evaluation.RunReport); failed ratios are skipped.
    - `fig` (matplotlib figure, default: new figure)

    Returns
    -------
    fig, (ax_counts, ax_metrics)
    """
    reports = [report for report in reports if report.error is None]

    if fig is None:
        fig = plt.figure()
    fig.set_size_inches(10, 4)
    ax_counts, ax_metrics = fig.subplots(1, 2)

    shares = [10 * report.ratio[0] for report in reports]

    for label, sign in ((ATTACK, '+'), (NORMAL, '-')):
        candidates = [report.candidate_counts[label] for report in reports]
        pure = [report.pure_counts[label] for report in reports]
        ax_counts.plot(shares, candidates, '--o', c=colors[label],
                       label=f'candidates {sign}')
        ax_counts.plot(shares, pure, '-s', c=colors[label], label=f'pure {sign}')

    ax_counts.set_yscale('log')
    ax_counts.set_xlabel('training share (%)')
    ax_counts.set_ylabel('patterns')
    ax_counts.legend()

    for name, style in (('accuracy', '-o'), ('recall', '-s'),
                        ('precision', '-^'), ('rank_auc', '--d')):
        values = [getattr(report.metrics, name) for report in reports]
        ax_metrics.plot(shares, values, style, label=name)

    ax_metrics.set_xlabel('training share (%)')
    ax_metrics.set_ylim(0, 1.02)
    ax_metrics.legend()

    fig.tight_layout()
    return fig, (ax_counts, ax_metrics)


def plot_evidence(A, N, labels, params=None, ax=None):
    """Scatter of normal vs attack evidence, colored by predicted label.

    The diagonal A = N separates Regulation 1 decisions; if classifier
    params are given, the Regulation 3 threshold on N is drawn too.
    Axes use log(1 + evidence).

    Returns
    -------
    ax
    """
    if ax is None:
        _, ax = plt.subplots()

    A = np.log1p(np.asarray(A, dtype=float))
    N = np.log1p(np.asarray(N, dtype=float))
    labels = np.asarray(labels, dtype=object)

    for label in (NORMAL, ATTACK):
        selected = labels == label
        ax.plot(N[selected], A[selected], '.', c=colors[label], alpha=0.5,
                label=f'{label} ({int(selected.sum())})')

    top = max(A.max(initial=0), N.max(initial=0), 1)
    ax.plot([0, top], [0, top], ':k', linewidth=1)

    if params is not None and params.threshold > 0:
        ax.axvline(x=np.log1p(params.threshold), color='dimgray', linestyle='--',
                   linewidth=1, label='outlier threshold')

    ax.set_xlabel('log(1 + N)')
    ax.set_ylabel('log(1 + A)')
    ax.legend()
    return ax
