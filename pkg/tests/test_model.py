"""Tests for training, prediction and explanations on raw tables."""

import numpy as np
import pytest

from purepat.config import Settings
from purepat.errors import ConfigError
from purepat.evaluation import compute_metrics
from purepat.infer import ClassifierParams, R1_ATTACK, R1_NORMAL, R2
from purepat.model import Model, train
from purepat.pipeline import read_table, encode_rows


@pytest.fixture
def trained(example_csv):
    train_path, test_path = example_csv
    return train(read_table(train_path), Settings(workers=2)), read_table(test_path)


def test_training_summary(trained):
    model, _ = trained
    summary = model.summary
    assert summary.rows == {'attack': 3, 'normal': 2}
    assert summary.candidate_counts == {'attack': 6, 'normal': 3}
    assert summary.pure_counts == {'attack': 5, 'normal': 3}
    assert summary.contradictions_removed == 0
    assert set(summary.times) == {'encode', 'mine', 'purify'}
    assert summary.lines()[0] == 'attack: 3 rows, 6 candidates, 5 pure patterns'


def test_predict(trained):
    model, test = trained
    prediction = model.predict(test)
    assert prediction.A.tolist() == [16, 0, 0]
    assert prediction.N.tolist() == [2, 2, 0]
    assert prediction.labels.tolist() == ['attack', 'normal', 'attack']
    assert prediction.regulations.tolist() == [R1_ATTACK, R1_NORMAL, R2]
    assert prediction.truth.tolist() == ['attack', 'normal', 'attack']

    metrics = compute_metrics(prediction.labels, prediction.truth, prediction.margins)
    assert (metrics.accuracy, metrics.rank_auc) == (1.0, 1.0)

    records = prediction.records()
    assert records[1] == {'row': 1, 'A': 0, 'N': 2, 'label': 'normal',
                          'regulation': R1_NORMAL, 'truth': 'normal'}


def test_predict_without_labels(trained):
    model, test = trained
    prediction = model.predict(test.drop(columns='label'))
    assert prediction.truth is None
    assert 'truth' not in prediction.records()[0]


def test_explain(trained):
    model, test = trained
    rows, _ = encode_rows(test, model.schema, model.vocabulary)
    first, third = model.explain(rows, [0, 2])
    assert first.abnormal_score == 16
    assert [m.tokens for m in first.matched_attack_patterns] == [
        ('0:a', '2:c'), ('0:a', '3:d')]
    assert first.matched_normal_patterns[0].tokens == ('4:e',)
    assert third.fired_regulation == R2


def test_train_stats_mode(example_csv):
    train_path, test_path = example_csv
    model = train(read_table(train_path), Settings(stats_mode='train', r=1.0))
    # normal evidence of the two training normals: {a,b,e} and {c,d,e} -> 25 + 2 each
    assert model.train_params.mu_N == 27
    assert model.train_params.sigma_N == 0
    prediction = model.predict(read_table(test_path))
    assert prediction.params == model.train_params
    # N = 2 < 27 now fires the outlier regulation on the second row
    assert prediction.regulations.tolist()[1] == 'R3'


def test_model_checks(trained):
    model, _ = trained
    with pytest.raises(ConfigError):
        Model(model.schema, model.vocabulary, model.dict_plus, model.dict_minus,
              stats_mode='train')
    assert 'P+=5' in repr(model)


def test_reconfigured(example_csv, trained):
    train_path, test_path = example_csv
    frozen = train(read_table(train_path), Settings(stats_mode='train', r=1.0))

    wider = frozen.reconfigured(r=3.0)
    assert (wider.r, wider.stats_mode) == (3.0, 'train')
    assert wider.train_params == ClassifierParams(r=3.0, mu_N=27, sigma_N=0)
    assert frozen.train_params.r == 1.0

    # batch statistics of the test rows: N = [2, 2, 0] -> mu_N = 2, R3 inert
    batch = frozen.reconfigured(stats_mode='batch')
    assert batch.predict(read_table(test_path)).regulations.tolist()[1] == R1_NORMAL

    model, _ = trained
    with pytest.raises(ConfigError):
        model.reconfigured(stats_mode='train')
    with pytest.raises(ConfigError):
        model.reconfigured(r=-1.0)


def test_backends_agree(example_csv):
    train_path, test_path = example_csv
    table, test = read_table(train_path), read_table(test_path)
    reference = train(table, Settings(backend='reference'))
    parallel = train(table, Settings(backend='parallel-cpu', workers=4, pair_batch=1))
    for a, b in ((reference.dict_plus, parallel.dict_plus),
                 (reference.dict_minus, parallel.dict_minus)):
        assert np.array_equal(a.bits.words, b.bits.words)
        assert np.array_equal(a.scores, b.scores)
    assert np.array_equal(reference.predict(test).A, parallel.predict(test).A)
