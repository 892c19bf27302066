"""Command-line interface: train, predict, explain, bench and prepare.

Examples
--------
purepat train --data train.csv --out model.json
purepat predict --model model.json --data test.csv --explain
purepat explain --model model.json --data test.csv --rows 0,2
purepat bench --data slice.csv --ratios all --out reports/nsl
purepat prepare nsl-kdd --inputs KDDTrain+.txt KDDTest+.txt --out slice.csv

Settings are resolved as defaults < environment variables < flags; exit
codes are listed in purepat.errors.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

import pandas as pd

from . import archive
from .config import Settings
from .datasets import nsl_kdd_slice, unsw_nb15_subset
from .errors import (ConfigError, PurepatError, EXIT_OK, EXIT_IO,
                     EXIT_UNEXPECTED)
from .evaluation import (parse_ratios, run_benchmark, compare_backends,
                         format_report_table, write_reports)
from .kernels import available_backends
from .model import train
from .pipeline import read_table, encode_rows


# ================================ settings ==================================


def _values(text):
    """Comma-separated label values -> frozenset (None if not given)."""
    if text is None:
        return None
    return frozenset(value.strip() for value in text.split(',') if value.strip())


def settings_from_args(args, environ=None):
    """Settings from defaults, environment and the parsed flags."""
    attack_values = _values(getattr(args, 'attack_values', None))
    normal_values = _values(getattr(args, 'normal_values', None))

    kwargs = {name: getattr(args, name, None) for name in
              ('decimals', 'pair_batch', 'coverage_block', 'backend', 'workers',
               'r', 'stats_mode', 'seed')}
    kwargs['label_column'] = getattr(args, 'label_col', None)
    kwargs['memory_budget_bytes'] = getattr(args, 'memory_budget', None)
    kwargs['shuffle'] = True if getattr(args, 'shuffle', False) else None

    settings = Settings.from_environment(environ, **kwargs)

    # giving only attack values means that every other label is normal
    if attack_values is not None:
        settings = settings.updated(attack_values=attack_values)
        if normal_values is None:
            settings = replace(settings, normal_values=None)
    if normal_values is not None:
        settings = settings.updated(normal_values=normal_values)
    return settings


def progress_printer(step=0.1):
    """Progress hook of the mining pass printing every `step` fraction."""
    state = {'next': step}

    def progress(pairs_done, pairs_total, candidates_found):
        if pairs_done == 0:
            state['next'] = step
        if pairs_total and pairs_done / pairs_total >= state['next']:
            print(f'  {pairs_done}/{pairs_total} pairs, '
                  f'{candidates_found} intersections buffered')
            while state['next'] <= pairs_done / pairs_total:
                state['next'] += step

    return progress


# ================================== outputs =================================


class _Output:
    """Context manager writing to a file if a path is given, else stdout."""

    def __init__(self, path=None):
        self.path = path
        self.file = None

    def __enter__(self):
        if self.path is None:
            return sys.stdout
        self.file = open(self.path, 'w', encoding='utf-8', newline='\n')
        return self.file

    def __exit__(self, *exc):
        if self.file is not None:
            self.file.close()


def _read_rows(path):
    """Table of rows to predict; a zero-byte file gives None (no rows)."""
    if os.path.getsize(path) == 0:
        return None
    return read_table(path)


def _save_figure(fig, path, verbose=False):
    fig.savefig(path)
    if verbose:
        print(f'Figure saved in {path}')


# ================================= commands =================================


def cmd_train(args):
    settings = settings_from_args(args)
    backend = settings.make_backend()
    progress = progress_printer() if args.verbose else None

    table = read_table(args.data)
    model = train(table, settings, backend, progress=progress,
                  verbose=args.verbose, debug=args.debug)
    archive.stamp(model, archive.file_digest(args.data))
    archive.save(model, args.out)

    for line in model.summary.lines():
        print(line)
    print(f'Model saved in {args.out}')
    return EXIT_OK


def _load_model(args):
    """Model archive with the --r / --stats-mode overrides applied."""
    model = archive.load(args.model)
    if args.r is None and args.stats_mode is None:
        return model
    return model.reconfigured(r=args.r, stats_mode=args.stats_mode)


def _prediction_lines(model, table, args, backend):
    """Output lines (text or JSON) of predicted rows, in file order."""
    rows, truth = encode_rows(table, model.schema, model.vocabulary)
    prediction = model.predict_rows(rows, backend, truth)

    reports = None
    if args.explain:
        reports = model.explain(rows, params=prediction.params, backend=backend)

    lines = []
    for t, record in enumerate(prediction.records()):
        if args.format == 'jsonl':
            if reports is not None:
                evidence = reports[t].to_record()
                record['attack_evidence'] = evidence['attack_evidence']
                record['normal_evidence'] = evidence['normal_evidence']
            lines.append(json.dumps(record))
        else:
            lines.append(f"row={t} label={record['label']} "
                         f"regulation={record['regulation']} "
                         f"A={record['A']} N={record['N']}")
            if reports is not None:
                lines.extend(reports[t].to_lines()[1:])
    return prediction, lines


def cmd_predict(args):
    settings = settings_from_args(args)
    backend = settings.make_backend()
    model = _load_model(args)
    table = _read_rows(args.data)

    if table is None:
        with _Output(args.out):
            pass
        return EXIT_OK

    prediction, lines = _prediction_lines(model, table, args, backend)
    with _Output(args.out) as file:
        for line in lines:
            file.write(line + '\n')

    if args.verbose:
        params = prediction.params
        print(f'{len(prediction)} rows predicted (mu_N={params.mu_N:.3f}, '
              f'sigma_N={params.sigma_N:.3f}, threshold={params.threshold:.3f})',
              file=sys.stderr)

    if args.plot:
        from .plots import plot_evidence
        ax = plot_evidence(prediction.A, prediction.N, prediction.labels,
                           prediction.params)
        _save_figure(ax.figure, args.plot, args.verbose)
    return EXIT_OK


def _row_indices(text, n_rows):
    if text is None:
        return list(range(n_rows))
    try:
        indices = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f'Invalid row list {text!r} (expected e.g. 0,3,7).')
    outside = [i for i in indices if not 0 <= i < n_rows]
    if outside:
        raise ConfigError(f'Rows {outside} outside of the {n_rows} data rows.')
    return indices


def cmd_explain(args):
    settings = settings_from_args(args)
    backend = settings.make_backend()
    model = _load_model(args)
    table = _read_rows(args.data)
    n_rows = 0 if table is None else len(table)
    indices = _row_indices(args.rows, n_rows)
    if not indices:
        return EXIT_OK

    rows, _ = encode_rows(table, model.schema, model.vocabulary)
    reports = model.explain(rows, indices, backend=backend)

    with _Output(args.out) as file:
        for i, report in zip(indices, reports):
            if args.format == 'jsonl':
                file.write(json.dumps({'row': i, **report.to_record()}) + '\n')
            else:
                file.write(f'row={i} {report}\n')
    return EXIT_OK


def cmd_bench(args):
    settings = settings_from_args(args)
    ratios = parse_ratios(args.ratios)
    if not ratios:
        raise ConfigError('No ratio given.')
    table = read_table(args.data)

    if args.compare:
        names = [name.strip() for name in args.compare.split(',') if name.strip()]
        results = compare_backends(table, ratios[0], names, settings, args.verbose)
        print(pd.DataFrame(results).to_string(index=False))
        return EXIT_OK

    reports = run_benchmark(table, ratios, settings, verbose=args.verbose)
    print(format_report_table(reports))
    if args.out:
        write_reports(reports, args.out)
        if args.verbose:
            print(f'Reports written in {args.out}.txt and {args.out}.jsonl')

    if args.plot:
        from .plots import plot_benchmark
        fig, _ = plot_benchmark(reports)
        _save_figure(fig, args.plot, args.verbose)
    return EXIT_OK


def cmd_prepare(args):
    if args.corpus == 'nsl-kdd':
        if len(args.inputs) != 2:
            raise ConfigError('nsl-kdd needs two inputs: training and test files.')
        table = nsl_kdd_slice(*args.inputs)
    else:
        table = unsw_nb15_subset(args.inputs)
    table.to_csv(args.out, index=False)
    print(f'{len(table)} rows, {table.shape[1] - 1} features written in {args.out}')
    return EXIT_OK


# ================================== parser ==================================


def _settings_parser():
    """Flags shared by all commands that run the kernels."""
    parser = argparse.ArgumentParser(add_help=False)

    msg = '(int): threads of parallel backends (env PUREPAT_WORKERS)'
    parser.add_argument('--workers', type=int, help=msg)

    msg = f'(str): kernel backend, one of {available_backends()} (env PUREPAT_BACKEND)'
    parser.add_argument('--backend', type=str, help=msg)

    msg = '(int): peers per pair-intersection batch (env PUREPAT_PAIR_BATCH)'
    parser.add_argument('--pair-batch', type=int, help=msg)

    msg = '(int): patterns per coverage batch (env PUREPAT_COVERAGE_BLOCK)'
    parser.add_argument('--coverage-block', type=int, help=msg)

    msg = '(int): soft cap in bytes on kernel temporaries (env PUREPAT_MEMORY_BUDGET)'
    parser.add_argument('--memory-budget', type=int, help=msg)

    parser.add_argument('-v', '--verbose', action='store_true',
                        help='print progress information')
    return parser


def _training_parser():
    """Flags of the commands that fit a model."""
    parser = argparse.ArgumentParser(add_help=False)

    parser.add_argument('--data', type=str, required=True,
                        help='(str): labeled CSV file (header row)')

    parser.add_argument('--label-col', type=str,
                        help="(str): name of the class column (default 'label')")

    msg = '(str): comma-separated labels meaning attack (default: all but normal ones)'
    parser.add_argument('--attack-values', type=str, help=msg)

    msg = "(str): comma-separated labels meaning normal (default 'normal')"
    parser.add_argument('--normal-values', type=str, help=msg)

    parser.add_argument('--decimals', type=int,
                        help='(int): rounding precision of z-scores (default 2)')

    return parser


def _classifier_parser():
    """Flags of the classifier (train and bench store them, predict and
    explain override the values held by the archive)."""
    parser = argparse.ArgumentParser(add_help=False)

    parser.add_argument('--r', type=float,
                        help='(float): outlier multiplier of Regulation 3 (default 0.568)')

    msg = '(batch or train): fit mu_N / sigma_N on each predicted batch or at training'
    parser.add_argument('--stats-mode', choices=('batch', 'train'), help=msg)
    return parser


def _output_parser():
    """Flags of the commands reading a model and emitting per-row records."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--model', type=str, required=True,
                        help='(str): model archive written by train')
    parser.add_argument('--data', type=str, required=True,
                        help='(str): CSV file of rows (label column optional)')
    parser.add_argument('--out', type=str,
                        help='(str): output file (default: standard output)')
    parser.add_argument('--format', choices=('text', 'jsonl'), default='text',
                        help='output format (default text)')
    return parser


def build_parser():
    descr = ('Coherent-pattern intrusion detection: pure pattern mining, '
             'evidence scoring and explanations.')

    parser = argparse.ArgumentParser(prog='purepat', description=descr,
                                     formatter_class=argparse.RawTextHelpFormatter)
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {archive.tool_version()}')

    subparsers = parser.add_subparsers(dest='command', required=True)
    settings, training, output = _settings_parser(), _training_parser(), _output_parser()
    classifier = _classifier_parser()

    # train ------------------------------------------------------------------
    sub = subparsers.add_parser('train', parents=[settings, training, classifier],
                                help='mine pure patterns and write a model archive')
    sub.add_argument('--out', '--model', dest='out', type=str, required=True,
                     help='(str): path of the model archive to write')
    sub.add_argument('--debug', action='store_true',
                     help='record rejection witnesses and check purity')
    sub.set_defaults(func=cmd_train)

    # predict ----------------------------------------------------------------
    sub = subparsers.add_parser('predict', parents=[settings, output, classifier],
                                help='label rows with a trained model')
    sub.add_argument('--explain', action='store_true',
                     help='append the matched pure patterns of every row')
    sub.add_argument('--plot', type=str,
                     help='(str): save a figure of the evidence of all rows')
    sub.set_defaults(func=cmd_predict)

    # explain ----------------------------------------------------------------
    sub = subparsers.add_parser('explain', parents=[settings, output, classifier],
                                help='evidence behind the decision on selected rows')
    sub.add_argument('--rows', type=str,
                     help='(str): comma-separated 0-based row numbers (default all)')
    sub.set_defaults(func=cmd_explain)

    # bench ------------------------------------------------------------------
    sub = subparsers.add_parser('bench', parents=[settings, training, classifier],
                                help='train/test runs over training ratios')
    sub.add_argument('--ratios', '--ratio', dest='ratios', type=str, default='all',
                     help="(str): e.g. '1:9', '1:9,5:5' or 'all' (default)")
    sub.add_argument('--out', type=str,
                     help='(str): prefix of the .txt / .jsonl report files')
    sub.add_argument('--seed', type=int, help='(int): shuffling seed (default 0)')
    sub.add_argument('--shuffle', action='store_true',
                     help='shuffle rows (seeded) before splitting')
    sub.add_argument('--plot', type=str,
                     help='(str): save a figure of counts and metrics vs ratio')
    sub.add_argument('--compare', type=str,
                     help='(str): comma-separated backends to compare on the first ratio')
    sub.set_defaults(func=cmd_bench)

    # prepare ----------------------------------------------------------------
    sub = subparsers.add_parser('prepare', help='build a benchmark subset CSV')
    sub.add_argument('corpus', choices=('nsl-kdd', 'unsw-nb15'))
    sub.add_argument('--inputs', nargs='+', required=True,
                     help='nsl-kdd: training and test files; unsw-nb15: CSV shards')
    sub.add_argument('--out', type=str, required=True, help='(str): output CSV')
    sub.set_defaults(func=cmd_prepare)

    return parser


def main(argv=None):
    """Run the command line; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PurepatError as error:
        print(f'Error ({type(error).__name__}): {error}', file=sys.stderr)
        return error.exit_code
    except OSError as error:
        print(f'I/O error: {error}', file=sys.stderr)
        return EXIT_IO
    except MemoryError:
        print('Error: out of memory (reduce --pair-batch / --coverage-block '
              'or the memory budget).', file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == '__main__':
    sys.exit(main())
