"""Tests for evidence scoring, regulations and explanations."""

import numpy as np
import pytest

from purepat.bitpack import ATTACK, NORMAL
from purepat.infer import (evidence_scores, fit_normal_stats, classify, classify_batch,
                           explain, ClassifierParams, EvidenceReport, MatchedPattern,
                           R1_ATTACK, R1_NORMAL, R2, R3)
from purepat.kernels import KernelConfig, ReferenceBackend, ParallelCPUBackend
from purepat.mine import mine_class
from purepat.purify import reject_covered

import oracle


@pytest.fixture
def dictionaries(example):
    dict_plus = reject_covered(mine_class(example['attack']), example['normal'])
    dict_minus = reject_covered(mine_class(example['normal']), example['attack'])
    return dict_plus, dict_minus


def test_running_example_evidence(example, dictionaries):
    A, N = evidence_scores(example['tests'], *dictionaries)
    assert A.tolist() == [25, 0, 0]
    assert N.tolist() == [11, 11, 0]

    params = fit_normal_stats(N)
    assert (params.mu_N, params.sigma_N) == (11, 0)
    labels, regulations = classify_batch(A, N, params)
    assert labels.tolist() == [ATTACK, NORMAL, ATTACK]
    assert regulations.tolist() == [R1_ATTACK, R1_NORMAL, R2]


def test_fit_normal_stats():
    params = fit_normal_stats([10, 10, 10, 0], r=1)
    assert (params.mu_N, params.sigma_N, params.threshold) == (10, 0, 10)

    params = fit_normal_stats([40, 50, 60], r=2)
    assert params.mu_N == 50
    assert params.sigma_N == pytest.approx(8.16496580927726)
    assert params.threshold == pytest.approx(33.67006838)

    params = fit_normal_stats([0, 0, 0])
    assert (params.mu_N, params.sigma_N) == (0, 0)
    assert fit_normal_stats([7, 0]).threshold == 0


def test_fit_is_order_independent():
    rng = np.random.default_rng(0)
    values = rng.integers(0, 10**6, 1001)
    reference = fit_normal_stats(values)
    for _ in range(5):
        assert fit_normal_stats(rng.permutation(values)) == reference


def test_classify_examples():
    params = ClassifierParams(r=0.568)
    assert classify(25, 11, params) == (ATTACK, R1_ATTACK)
    assert classify(0, 0, params) == (ATTACK, R2)
    assert classify(2, 10, ClassifierParams(r=2, mu_N=50, sigma_N=5)) == (ATTACK, R3)
    assert classify(2, 45, ClassifierParams(r=2, mu_N=50, sigma_N=5)) == (NORMAL, R1_NORMAL)
    assert classify(7, 7, params) == (ATTACK, R1_ATTACK)


def test_decision_table():
    rng = np.random.default_rng(42)
    size = 10**6
    A = rng.integers(0, 60, size) * rng.integers(0, 2, size)
    N = rng.integers(0, 80, size) * rng.integers(0, 2, size)
    params = ClassifierParams(r=0.568, mu_N=40.0, sigma_N=12.5)

    labels, regulations = classify_batch(A, N, params)

    expected = np.full(size, R1_NORMAL, dtype=object)
    expected[N < params.threshold] = R3
    expected[A >= N] = R1_ATTACK
    expected[(A == 0) & (N == 0)] = R2
    assert np.array_equal(regulations, expected)
    assert np.array_equal(labels == NORMAL, expected == R1_NORMAL)

    for t in range(0, size, 97):
        assert classify(int(A[t]), int(N[t]), params) == (labels[t], regulations[t])
        assert (labels[t], regulations[t]) == oracle.decide(
            int(A[t]), int(N[t]), params.mu_N, params.sigma_N, params.r)


def test_classifier_params_checks():
    with pytest.raises(ValueError):
        ClassifierParams(r=-1)
    with pytest.raises(ValueError):
        ClassifierParams(sigma_N=-1)


def test_explain(example, dictionaries):
    vocabulary = example['vocabulary']
    params = fit_normal_stats([11, 11, 0])
    tests = example['tests']

    report = explain(tests[0], *dictionaries, vocabulary, params)
    assert (report.abnormal_score, report.normal_score) == (25, 11)
    assert (report.label, report.fired_regulation) == (ATTACK, R1_ATTACK)
    assert len(report.matched_attack_patterns) == 3
    assert sum(m.score for m in report.matched_attack_patterns) == 25
    assert report.matched_attack_patterns[0].tokens == ('0:a', '2:c', '3:d')
    assert [m.tokens for m in report.matched_normal_patterns] == [
        ('2:c', '3:d', '4:e'), ('4:e',)]

    empty = explain(tests[2], *dictionaries, vocabulary, params)
    assert empty.matched_attack_patterns == empty.matched_normal_patterns == []
    assert (empty.label, empty.fired_regulation) == (ATTACK, R2)


def test_explain_training_instance(example, dictionaries):
    row = example['attack'][2]  # {a,c,d}
    report = explain(row, *dictionaries, example['vocabulary'], ClassifierParams())
    assert ('0:a', '2:c', '3:d') in [m.tokens for m in report.matched_attack_patterns]


def test_report_outputs(example, dictionaries):
    report = explain(example['tests'][1], *dictionaries, example['vocabulary'],
                     fit_normal_stats([11, 11, 0]))
    record = report.to_record()
    assert record['A'] == 0 and record['N'] == 11
    assert record['label'] == NORMAL
    assert sum(p['score'] for p in record['normal_evidence']) == 11
    lines = report.to_lines()
    assert lines[0] == 'label=normal regulation=R1-normal A=0 N=11'
    assert len(lines) == 3
    assert str(report).startswith('label=normal')


def test_report_consistency_check():
    with pytest.raises(ValueError):
        EvidenceReport(10, 0, ATTACK, R1_ATTACK, [MatchedPattern(('0:a',), 2, 2)], [])


def scored(patterns):
    """{int pattern: (support, score)} of a CandidateSet or PureDictionary."""
    return {oracle.to_int(idx): (int(f), int(s)) for idx, f, s in
            zip(patterns.bits.index_sets(), patterns.supports, patterns.scores)}


def random_classes(rng, trial):
    """(attack rows, normal rows, test rows, L); every 100th trial has classes
    of about 200 record-like rows over 96 bits."""
    if trial % 100 == 99:
        attack = oracle.random_records(rng, int(rng.integers(180, 201)))
        normal = oracle.random_records(rng, int(rng.integers(150, 201)))
        tests = oracle.random_records(rng, 30)
        return attack, normal, tests, 96
    logical_len = int(rng.integers(2, 97))
    density = rng.uniform(0.3, 0.8)
    attack = oracle.random_rows(rng, int(rng.integers(1, 31)), logical_len, density)
    normal = oracle.random_rows(rng, int(rng.integers(1, 31)), logical_len, density)
    tests = oracle.random_rows(rng, 20, logical_len, density + 0.1)
    return attack, normal, tests, logical_len


def test_training_and_evidence_match_oracle():
    rng = np.random.default_rng(9)
    backends = [ReferenceBackend(),
                ParallelCPUBackend(KernelConfig(pair_batch=7, coverage_block=5), workers=3)]
    for trial in range(500):
        attack, normal, tests, logical_len = random_classes(rng, trial)
        backend = backends[trial % 2]
        A_rows = oracle.ints_to_matrix(attack, logical_len, 'attack')
        N_rows = oracle.ints_to_matrix(normal, logical_len, 'normal')

        candidates_plus = mine_class(A_rows, backend)
        candidates_minus = mine_class(N_rows, backend)
        for found, rows in ((candidates_plus, attack), (candidates_minus, normal)):
            assert scored(found) == {p: (oracle.support(p, rows), oracle.score(p, rows))
                                     for p in oracle.candidates(rows)}

        plus = reject_covered(candidates_plus, N_rows, backend)
        minus = reject_covered(candidates_minus, A_rows, backend)
        expected_plus = oracle.dictionary(attack, normal)
        expected_minus = oracle.dictionary(normal, attack)
        assert scored(plus) == expected_plus
        assert scored(minus) == expected_minus

        A, N = evidence_scores(oracle.ints_to_matrix(tests, logical_len), plus, minus,
                               backend)
        assert A.tolist() == [oracle.evidence(t, expected_plus) for t in tests]
        assert N.tolist() == [oracle.evidence(t, expected_minus) for t in tests]
