"""Train/test split protocol, detection metrics and benchmark runs.

Report columns (fixed): ratio, candidates+, candidates-, pure+, pure-, tp,
fp, tn, fn, accuracy, recall, precision, f1, balanced_auc, rank_auc,
t_encode, t_mine, t_purify, t_infer. Structured records add n_train,
n_test, ms_per_flow and error. Attack is the positive class; rank_auc
(Mann-Whitney over the margin A - N) is the headline AUC.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .bitpack import ATTACK, NORMAL
from .config import Settings
from .errors import ConfigError, PurepatError, ShapeError
from .model import train
from .pipeline import encode_rows


COLUMNS = ['ratio', 'candidates+', 'candidates-', 'pure+', 'pure-',
           'tp', 'fp', 'tn', 'fn', 'accuracy', 'recall', 'precision', 'f1',
           'balanced_auc', 'rank_auc', 't_encode', 't_mine', 't_purify', 't_infer']

ALL_RATIOS = tuple(range(1, 10))


# ================================= metrics ==================================


def _ratio(numerator, denominator):
    return numerator / denominator if denominator else 0.0


@dataclass(frozen=True)
class Metrics:
    """Confusion counts and derived detection metrics (attack = positive)."""
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    recall: float
    precision: float
    f1: float
    balanced_auc: float
    rank_auc: float

    @classmethod
    def from_counts(cls, tp, fp, tn, fn, rank_auc=0.5):
        total = tp + fp + tn + fn
        recall = _ratio(tp, tp + fn)
        precision = _ratio(tp, tp + fp)
        specificity = _ratio(tn, tn + fp)
        return cls(tp=tp, fp=fp, tn=tn, fn=fn,
                   accuracy=_ratio(tp + tn, total),
                   recall=recall,
                   precision=precision,
                   f1=_ratio(2 * precision * recall, precision + recall),
                   balanced_auc=(recall + specificity) / 2,
                   rank_auc=rank_auc)


def _positive(labels):
    labels = np.asarray(labels)
    if labels.dtype == bool:
        return labels
    return labels == ATTACK


def rank_auc(truth, margins):
    """P(margin of a random positive > margin of a random negative), ties 1/2.

    Returns 0.5 when one of the classes is absent.
    """
    positive = _positive(truth)
    margins = np.asarray(margins)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    ranks = rankdata(margins)  # average ranks for ties
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def compute_metrics(predicted, truth, margins):
    """Metrics of predicted vs true labels ('attack'/'normal' or booleans)."""
    predicted = _positive(predicted)
    truth = _positive(truth)
    margins = np.asarray(margins)
    if not predicted.shape == truth.shape == margins.shape:
        raise ShapeError(f'Length mismatch: {predicted.shape}, {truth.shape}, '
                         f'{margins.shape}.')
    tp = int(np.sum(predicted & truth))
    fp = int(np.sum(predicted & ~truth))
    tn = int(np.sum(~predicted & ~truth))
    fn = int(np.sum(~predicted & truth))
    return Metrics.from_counts(tp, fp, tn, fn, rank_auc=rank_auc(truth, margins))


# ================================== splits ==================================


def parse_ratio(text):
    """'k', 'k:10-k' or 'k|10-k' -> k (1..9)."""
    text = str(text).strip().replace('|', ':')
    parts = text.split(':')
    try:
        values = [int(part) for part in parts]
    except ValueError:
        raise ConfigError(f'Invalid ratio {text!r} (expected k:10-k).')
    k = values[0]
    if len(values) > 2 or (len(values) == 2 and sum(values) != 10) or not 1 <= k <= 9:
        raise ConfigError(f'Invalid ratio {text!r} (expected k:10-k with k in 1..9).')
    return k


def parse_ratios(text):
    """Comma-separated ratios, or 'all' for 1:9 through 9:1."""
    if str(text).strip().lower() == 'all':
        return list(ALL_RATIOS)
    return [parse_ratio(part) for part in str(text).split(',') if part.strip()]


def split_by_ratio(dataset, ratio, shuffle=False, seed=0):
    """First floor(k/10 * n) instances for training, the rest for testing.

    Parameters
    ----------
    - `dataset` (DataFrame or sequence, file order)
    - `ratio` (int k in 1..9)
    - `shuffle` (bool, default False): seeded shuffle before splitting.
    - `seed` (int, default 0)
    """
    if not isinstance(ratio, (int, np.integer)) or not 1 <= ratio <= 9:
        raise ConfigError(f'Ratio must be an integer in 1..9, got {ratio!r}')
    n = len(dataset)
    n_train = ratio * n // 10
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    if isinstance(dataset, (pd.DataFrame, pd.Series)):
        reordered = dataset.iloc[order]
        return reordered.iloc[:n_train], reordered.iloc[n_train:]
    reordered = [dataset[i] for i in order]
    return reordered[:n_train], reordered[n_train:]


# ================================= reports ==================================


@dataclass
class RunReport:
    """Counts, metrics and per-phase wall times (s) of one ratio."""
    ratio: tuple
    candidate_counts: dict = field(default_factory=dict)
    pure_counts: dict = field(default_factory=dict)
    metrics: Metrics = None
    wall_times: dict = field(default_factory=dict)
    n_train: int = 0
    n_test: int = 0
    error: str = None

    @property
    def ms_per_flow(self):
        if not self.n_test or 't_infer' not in self.wall_times:
            return None
        return 1000 * self.wall_times['t_infer'] / self.n_test

    def to_record(self):
        record = {'ratio': f'{self.ratio[0]}|{self.ratio[1]}',
                  'candidates+': self.candidate_counts.get(ATTACK),
                  'candidates-': self.candidate_counts.get(NORMAL),
                  'pure+': self.pure_counts.get(ATTACK),
                  'pure-': self.pure_counts.get(NORMAL)}
        for name in COLUMNS[5:15]:
            record[name] = None if self.metrics is None else getattr(self.metrics, name)
        for phase in ('t_encode', 't_mine', 't_purify', 't_infer'):
            seconds = self.wall_times.get(phase)
            record[phase] = None if seconds is None else round(seconds, 3)
        ms = self.ms_per_flow
        record.update({'n_train': self.n_train, 'n_test': self.n_test,
                       'ms_per_flow': None if ms is None else round(ms, 6),
                       'error': self.error})
        return record


def format_report_table(reports):
    """Aligned human-readable table of reports (fixed columns)."""
    records = [report.to_record() for report in reports]
    frame = pd.DataFrame(records, columns=COLUMNS + ['error'])
    if frame['error'].isna().all():
        frame = frame.drop(columns='error')
    return frame.to_string(index=False, na_rep='-', float_format=lambda x: f'{x:.5f}')


def report_lines(reports):
    """Line-delimited JSON records of reports."""
    return [json.dumps(report.to_record(), sort_keys=False) for report in reports]


def write_reports(reports, prefix):
    """Write <prefix>.txt (table) and <prefix>.jsonl (records)."""
    with open(f'{prefix}.txt', 'w', encoding='utf-8') as file:
        file.write(format_report_table(reports) + '\n')
    with open(f'{prefix}.jsonl', 'w', encoding='utf-8') as file:
        for line in report_lines(reports):
            file.write(line + '\n')


# ================================ benchmark =================================


def run_ratio(table, ratio, settings, backend=None, verbose=False):
    """Full train -> purify -> infer cycle on one ratio (exceptions propagate)."""
    backend = settings.make_backend() if backend is None else backend
    report = RunReport(ratio=(ratio, 10 - ratio))
    train_table, test_table = split_by_ratio(table, ratio, settings.shuffle,
                                             settings.seed)
    report.n_train, report.n_test = len(train_table), len(test_table)

    model = train(train_table, settings, backend, verbose=verbose)
    report.candidate_counts = dict(model.summary.candidate_counts)
    report.pure_counts = dict(model.summary.pure_counts)
    times = model.summary.times

    t0 = time.perf_counter()
    rows, truth = encode_rows(test_table, model.schema, model.vocabulary)
    t_encode_test = time.perf_counter() - t0

    t0 = time.perf_counter()
    prediction = model.predict_rows(rows, backend, truth)
    t_infer = time.perf_counter() - t0

    report.wall_times = {'t_encode': times['encode'] + t_encode_test,
                         't_mine': times['mine'],
                         't_purify': times['purify'],
                         't_infer': t_infer}
    report.metrics = compute_metrics(prediction.labels, truth, prediction.margins)
    return report


def run_benchmark(dataset, ratios, settings=None, backend=None, verbose=False):
    """One RunReport per ratio, in ratio order.

    A failing ratio gets a report with its error message; the remaining
    ratios still run.
    """
    settings = Settings() if settings is None else settings
    ratios = [parse_ratio(ratio) for ratio in ratios]
    backend = settings.make_backend() if backend is None else backend
    reports = []
    for ratio in ratios:
        if verbose:
            print(f'\nRatio {ratio}|{10 - ratio} ' + '-' * 40)
        try:
            report = run_ratio(dataset, ratio, settings, backend, verbose)
        except Exception as error:
            message = str(error)
            if not isinstance(error, PurepatError):
                name = type(error).__name__
                message = f'{name}: {message}' if message else name
            print(f'Warning: ratio {ratio}|{10 - ratio} failed: {message}')
            report = RunReport(ratio=(ratio, 10 - ratio), error=message)
        reports.append(report)
    return reports


def compare_backends(dataset, ratio, backend_names, settings=None, verbose=False):
    """Train one split with several backends; compare times and dictionaries.

    Returns
    -------
    list of dicts (one per backend, in the given order) with keys backend,
    t_mine, t_purify, speedup (relative to the first backend) and identical
    (dictionaries bit-for-bit equal to the first backend's).
    """
    settings = Settings() if settings is None else settings
    train_table, _ = split_by_ratio(dataset, parse_ratio(ratio),
                                    settings.shuffle, settings.seed)
    results = []
    reference = None
    for name in backend_names:
        model = train(train_table, settings.updated(backend=name), verbose=verbose)
        dictionaries = (model.dict_plus, model.dict_minus)
        elapsed = model.summary.times['mine'] + model.summary.times['purify']
        if reference is None:
            reference = (dictionaries, elapsed)
        identical = all(np.array_equal(a.bits.words, b.bits.words)
                        and np.array_equal(a.scores, b.scores)
                        and np.array_equal(a.supports, b.supports)
                        for a, b in zip(dictionaries, reference[0]))
        results.append({'backend': name,
                        't_mine': round(model.summary.times['mine'], 3),
                        't_purify': round(model.summary.times['purify'], 3),
                        'speedup': round(reference[1] / elapsed, 2) if elapsed else None,
                        'identical': identical})
    return results
