"""Training (two passes: mining, then purification) and prediction."""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bitpack import ATTACK, NORMAL
from .config import Settings
from .errors import ConfigError
from .infer import evidence_scores, fit_normal_stats, classify_batch, explain
from .infer import ClassifierParams
from .mine import mine_class
from .pipeline import infer_schema, encode_dataset, encode_rows
from .purify import reject_covered


@dataclass
class Prediction:
    """Evidence and decisions for a batch of rows (file order)."""
    A: np.ndarray
    N: np.ndarray
    labels: np.ndarray
    regulations: np.ndarray
    params: ClassifierParams
    truth: np.ndarray = None

    def __len__(self):
        return len(self.A)

    @property
    def margins(self):
        return self.A - self.N

    def records(self):
        """One dict per row: A, N, label, fired regulation (and truth)."""
        records = []
        for t in range(len(self)):
            record = {'row': t, 'A': int(self.A[t]), 'N': int(self.N[t]),
                      'label': self.labels[t], 'regulation': self.regulations[t]}
            if self.truth is not None:
                record['truth'] = self.truth[t]
            records.append(record)
        return records


@dataclass
class TrainingSummary:
    """Counts and per-phase wall times (s) of a training run."""
    rows: dict = field(default_factory=dict)
    contradictions_removed: int = 0
    candidate_counts: dict = field(default_factory=dict)
    pure_counts: dict = field(default_factory=dict)
    times: dict = field(default_factory=dict)

    def lines(self):
        lines = []
        for label in (ATTACK, NORMAL):
            lines.append(f'{label:>6}: {self.rows.get(label, 0)} rows, '
                         f'{self.candidate_counts.get(label, 0)} candidates, '
                         f'{self.pure_counts.get(label, 0)} pure patterns')
        lines.append(f'contradictory instances removed: {self.contradictions_removed}')
        lines.append('times (s): ' + ', '.join(f'{phase} {seconds:.3f}'
                                               for phase, seconds in self.times.items()))
        return lines


class Model:
    """Trained detector: schema, vocabulary, pure dictionaries, classifier.

    Parameters
    ----------
    - `schema` (pipeline.DatasetSchema)
    - `vocabulary` (pipeline.TokenVocabulary)
    - `dict_plus`, `dict_minus` (purify.PureDictionary): attack / normal.
    - `r` (float, default 0.568): outlier multiplier of Regulation 3.
    - `stats_mode` ('batch' or 'train', default 'batch'): 'batch' fits
      mu_N / sigma_N on each predicted batch, 'train' uses the statistics
      frozen at training time (`train_params`).
    - `train_params` (ClassifierParams or None): frozen statistics.
    - `summary` (TrainingSummary, optional)
    - `provenance` (dict, optional): input digest, tool version, timestamps.
    """

    def __init__(self, schema, vocabulary, dict_plus, dict_minus, r=0.568,
                 stats_mode='batch', train_params=None, summary=None,
                 provenance=None):
        self.schema = schema
        self.vocabulary = vocabulary
        self.dict_plus = dict_plus
        self.dict_minus = dict_minus
        self.r = r
        self.stats_mode = stats_mode
        self.train_params = train_params
        self.summary = TrainingSummary() if summary is None else summary
        self.provenance = {} if provenance is None else dict(provenance)
        if stats_mode == 'train' and train_params is None:
            raise ConfigError("stats_mode 'train' requires train_params.")

    def __repr__(self):
        return (f'Model(L={self.vocabulary.L}, P+={self.dict_plus.n}, '
                f'P-={self.dict_minus.n}, r={self.r}, stats={self.stats_mode})')

    def reconfigured(self, r=None, stats_mode=None):
        """Copy of the model scoring with another r and/or statistics mode.

        Frozen training statistics keep their mu_N / sigma_N and take the new r.
        """
        r = self.r if r is None else r
        if r < 0:
            raise ConfigError(f'r must be non-negative, got {r}')
        stats_mode = self.stats_mode if stats_mode is None else stats_mode
        if stats_mode == 'train' and self.train_params is None:
            raise ConfigError("This model holds no training statistics; "
                              "retrain it with stats_mode 'train'.")
        train_params = self.train_params
        if train_params is not None:
            train_params = replace(train_params, r=r)
        return Model(self.schema, self.vocabulary, self.dict_plus, self.dict_minus,
                     r=r, stats_mode=stats_mode, train_params=train_params,
                     summary=self.summary, provenance=self.provenance)

    def params_for(self, N):
        """Classifier parameters used on a batch with normal evidence N."""
        if self.stats_mode == 'train':
            return self.train_params
        return fit_normal_stats(N, self.r)

    def predict_rows(self, rows, backend=None, truth=None):
        """Prediction for an encoded PackedMatrix."""
        A, N = evidence_scores(rows, self.dict_plus, self.dict_minus, backend)
        params = self.params_for(N)
        labels, regulations = classify_batch(A, N, params)
        return Prediction(A, N, labels, regulations, params, truth)

    def predict(self, table, backend=None):
        """Prediction for a raw table (label column optional)."""
        rows, truth = encode_rows(table, self.schema, self.vocabulary)
        return self.predict_rows(rows, backend, truth)

    def explain(self, rows, indices=None, params=None, backend=None):
        """EvidenceReports of selected rows of an encoded PackedMatrix.

        The classifier parameters are those of the whole batch (as in
        predict_rows()) unless given.
        """
        if params is None:
            _, N = evidence_scores(rows, self.dict_plus, self.dict_minus, backend)
            params = self.params_for(N)
        indices = range(rows.n) if indices is None else indices
        return [explain(rows[int(i)], self.dict_plus, self.dict_minus,
                        self.vocabulary, params) for i in indices]


def train(table, settings=None, backend=None, progress=None, verbose=False,
          debug=False):
    """Fit a Model on a raw training table.

    Parameters
    ----------
    - `table` (DataFrame of strings, see pipeline.read_table())
    - `settings` (config.Settings, default Settings())
    - `backend` (kernels.Backend, default settings.make_backend())
    - `progress` (callable, optional): mining progress hook.
    - `verbose` (bool, default False): print progress information.
    - `debug` (bool, default False): record rejection witnesses.

    Returns
    -------
    Model (its `summary` holds counts and per-phase wall times)
    """
    settings = Settings() if settings is None else settings
    backend = settings.make_backend() if backend is None else backend
    summary = TrainingSummary()

    t0 = time.perf_counter()
    schema = infer_schema(table, settings.label_column, settings.attack_values,
                          settings.normal_values, settings.decimals)
    encoded = encode_dataset(table, schema, verbose=verbose)
    attack, normal, vocabulary = encoded
    summary.times['encode'] = time.perf_counter() - t0
    summary.rows = {ATTACK: attack.n, NORMAL: normal.n}
    summary.contradictions_removed = encoded.report.n_removed

    t0 = time.perf_counter()
    candidates = {label: mine_class(rows, backend, progress, verbose)
                  for label, rows in ((ATTACK, attack), (NORMAL, normal))}
    summary.times['mine'] = time.perf_counter() - t0
    summary.candidate_counts = {label: c.n for label, c in candidates.items()}

    t0 = time.perf_counter()
    dict_plus = reject_covered(candidates[ATTACK], normal, backend, debug, verbose)
    dict_minus = reject_covered(candidates[NORMAL], attack, backend, debug, verbose)
    summary.times['purify'] = time.perf_counter() - t0
    summary.pure_counts = {ATTACK: dict_plus.n, NORMAL: dict_minus.n}

    train_params = None
    if settings.stats_mode == 'train':
        _, N_train = evidence_scores(normal, dict_plus, dict_minus, backend)
        train_params = fit_normal_stats(N_train, settings.r)

    return Model(schema, vocabulary, dict_plus, dict_minus, r=settings.r,
                 stats_mode=settings.stats_mode, train_params=train_params,
                 summary=summary)
