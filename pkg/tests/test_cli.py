"""Tests for the purepat command line."""

import json
from argparse import Namespace

import numpy as np
import pandas as pd
import pytest

from purepat import archive
from purepat.cli import main, settings_from_args, build_parser
from purepat.errors import EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA


@pytest.fixture
def trained(example_csv, tmp_path):
    train_path, test_path = example_csv
    model_path = tmp_path / 'model.json'
    code = main(['train', '--data', str(train_path), '--out', str(model_path),
                 '--backend', 'reference'])
    assert code == EXIT_OK
    return model_path, test_path


def test_train(example_csv, tmp_path, capsys):
    train_path, _ = example_csv
    model_path = tmp_path / 'trained.json'
    assert main(['train', '--data', str(train_path), '--out', str(model_path)]) == EXIT_OK
    model = archive.load(model_path)
    assert (model.dict_plus.n, model.dict_minus.n) == (5, 3)
    assert model.provenance['input_digest'] is not None
    out = capsys.readouterr().out
    assert 'attack: 3 rows, 6 candidates, 5 pure patterns' in out
    assert f'Model saved in {model_path}' in out


def test_predict(trained, tmp_path):
    model_path, test_path = trained
    out = tmp_path / 'pred.txt'
    code = main(['predict', '--model', str(model_path), '--data', str(test_path),
                 '--out', str(out)])
    assert code == EXIT_OK
    assert out.read_text().splitlines() == [
        'row=0 label=attack regulation=R1-attack A=16 N=2',
        'row=1 label=normal regulation=R1-normal A=0 N=2',
        'row=2 label=attack regulation=R2 A=0 N=0',
    ]


def test_predict_explain(trained, capsys):
    model_path, test_path = trained
    capsys.readouterr()
    main(['predict', '--model', str(model_path), '--data', str(test_path), '--explain'])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'row=0 label=attack regulation=R1-attack A=16 N=2'
    assert lines[1:4] == ['  + [0:a 2:c] support=2 score=8',
                          '  + [0:a 3:d] support=2 score=8',
                          '  - [4:e] support=2 score=2']


def test_predict_jsonl(trained, tmp_path):
    model_path, test_path = trained
    out = tmp_path / 'pred.jsonl'
    main(['predict', '--model', str(model_path), '--data', str(test_path),
          '--format', 'jsonl', '--explain', '--out', str(out)])
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r['label'] for r in records] == ['attack', 'normal', 'attack']
    assert [r['truth'] for r in records] == ['attack', 'normal', 'attack']
    assert sum(p['score'] for p in records[0]['attack_evidence']) == 16
    assert records[2]['attack_evidence'] == records[2]['normal_evidence'] == []


def test_explain_command(trained, capsys):
    model_path, test_path = trained
    capsys.readouterr()
    code = main(['explain', '--model', str(model_path), '--data', str(test_path),
                 '--rows', '2'])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith('row=2 label=attack regulation=R2')


# two rows holding the {a,b,e} training normal (N = 25 + 2) and one row
# holding only e (N = 2): mu_N = 56/3, sigma_N ~ 11.79
OUTLIER_CSV = """f0,f1,f2,f3,f4,label
a,b,x3,x3,e,normal
a,b,x3,x3,e,normal
z,z,z,z,e,normal
"""


def test_predict_classifier_overrides(trained, tmp_path, capsys):
    model_path, test_path = trained
    data = tmp_path / 'outlier.csv'
    data.write_text(OUTLIER_CSV, encoding='utf-8')
    capsys.readouterr()

    # threshold 18.67 - 0.568 * 11.79 = 11.97 > 2
    assert main(['predict', '--model', str(model_path), '--data', str(data)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'row=0 label=normal regulation=R1-normal A=0 N=27'
    assert lines[2] == 'row=2 label=attack regulation=R3 A=0 N=2'

    # threshold 18.67 - 2 * 11.79 < 2
    assert main(['predict', '--model', str(model_path), '--data', str(data),
                 '--r', '2']) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[2] == 'row=2 label=normal regulation=R1-normal A=0 N=2'

    assert main(['explain', '--model', str(model_path), '--data', str(data),
                 '--rows', '2', '--r', '2']) == EXIT_OK
    assert capsys.readouterr().out.startswith('row=2 label=normal regulation=R1-normal')

    # the archive holds batch statistics only
    assert main(['predict', '--model', str(model_path), '--data', str(data),
                 '--stats-mode', 'train']) == EXIT_CONFIG
    assert 'training statistics' in capsys.readouterr().err
    assert main(['predict', '--model', str(model_path), '--data', str(data),
                 '--r', '-1']) == EXIT_CONFIG

    code = main(['explain', '--model', str(model_path), '--data', str(test_path),
                 '--rows', '7'])
    assert code == EXIT_CONFIG


def test_predict_plot(trained, tmp_path):
    model_path, test_path = trained
    figure = tmp_path / 'evidence.png'
    main(['predict', '--model', str(model_path), '--data', str(test_path),
          '--plot', str(figure), '--out', str(tmp_path / 'pred.txt')])
    assert figure.stat().st_size > 0


def test_empty_input(trained, tmp_path):
    model_path, _ = trained
    empty, out = tmp_path / 'empty.csv', tmp_path / 'pred.txt'
    empty.write_bytes(b'')
    code = main(['predict', '--model', str(model_path), '--data', str(empty),
                 '--out', str(out)])
    assert code == EXIT_OK
    assert out.read_text() == ''


def test_error_exit_codes(example_csv, trained, tmp_path, capsys):
    train_path, test_path = example_csv
    model_path, _ = trained
    model_out = str(tmp_path / 'm.json')

    # unknown label column
    assert main(['train', '--data', str(train_path), '--out', model_out,
                 '--label-col', 'class']) == EXIT_CONFIG
    assert "Label column 'class' not found" in capsys.readouterr().err

    # missing file
    assert main(['train', '--data', str(tmp_path / 'nope.csv'),
                 '--out', model_out]) == EXIT_IO

    # unknown backend
    assert main(['train', '--data', str(train_path), '--out', model_out,
                 '--backend', 'gpu']) == EXIT_CONFIG

    # renamed column
    renamed = tmp_path / 'renamed.csv'
    pd.read_csv(test_path, dtype=str).rename(columns={'f4': 'g4'}).to_csv(
        renamed, index=False)
    assert main(['predict', '--model', str(model_path),
                 '--data', str(renamed)]) == EXIT_DATA
    assert 'g4' in capsys.readouterr().err

    # corrupted archive
    broken = tmp_path / 'broken.json'
    broken.write_text('{"format_version": 1}')
    assert main(['predict', '--model', str(broken),
                 '--data', str(test_path)]) == EXIT_DATA


def test_usage_errors(example_csv):
    train_path, _ = example_csv
    with pytest.raises(SystemExit) as info:
        main(['train', '--data', str(train_path)])  # --out missing
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(['predict', '--model', 'm.json', '--data', 'd.csv', '--format', 'xml'])
    assert info.value.code == 2


def bench_table(path, n=100):
    rng = np.random.default_rng(3)
    data = {f'c{j}': rng.choice(list('abcd'), n) for j in range(5)}
    data['id'] = [f'r{i}' for i in range(n)]
    data['label'] = ['dos' if i % 3 == 0 else 'normal' for i in range(n)]
    pd.DataFrame(data).to_csv(path, index=False)
    return path


def test_bench(tmp_path, capsys):
    data = bench_table(tmp_path / 'bench.csv')
    prefix, figure = tmp_path / 'reports', tmp_path / 'bench.png'
    code = main(['bench', '--data', str(data), '--ratios', 'all', '--workers', '2',
                 '--out', str(prefix), '--plot', str(figure)])
    assert code == EXIT_OK
    table = capsys.readouterr().out.splitlines()
    assert len(table) == 1 + 9
    assert table[1].split()[0] == '1|9'
    assert len((tmp_path / 'reports.jsonl').read_text().splitlines()) == 9
    assert figure.stat().st_size > 0


def test_bench_invalid_ratio(tmp_path):
    data = bench_table(tmp_path / 'bench.csv')
    assert main(['bench', '--data', str(data), '--ratios', '0:10']) == EXIT_CONFIG


def test_bench_compare(tmp_path, capsys):
    data = bench_table(tmp_path / 'bench.csv', n=40)
    code = main(['bench', '--data', str(data), '--ratio', '5:5',
                 '--compare', 'reference,parallel-cpu'])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert 'reference' in out and 'parallel-cpu' in out


# ================================= settings =================================


def test_settings_precedence():
    parser = build_parser()
    environ = {'PUREPAT_WORKERS': '3', 'PUREPAT_PAIR_BATCH': '64',
               'PUREPAT_BACKEND': 'reference'}

    args = parser.parse_args(['train', '--data', 'd.csv', '--out', 'm.json'])
    settings = settings_from_args(args, environ)
    assert (settings.workers, settings.pair_batch, settings.backend) == (3, 64, 'reference')

    args = parser.parse_args(['train', '--data', 'd.csv', '--out', 'm.json',
                              '--workers', '5', '--backend', 'parallel-cpu'])
    settings = settings_from_args(args, environ)
    assert (settings.workers, settings.pair_batch, settings.backend) == (5, 64, 'parallel-cpu')


def test_settings_label_values():
    settings = settings_from_args(Namespace(attack_values='dos, smurf'), {})
    assert settings.attack_values == frozenset({'dos', 'smurf'})
    assert settings.normal_values is None

    settings = settings_from_args(Namespace(normal_values='benign,normal'), {})
    assert settings.attack_values is None
    assert settings.normal_values == frozenset({'benign', 'normal'})
