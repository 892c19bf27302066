"""Dataset encoding: raw CSV table -> per-class PackedMatrix + TokenVocabulary.

Five stages:
- conversion: detection of numeric / categorical columns (infer_schema)
- preservation: categorical values kept verbatim, no normalization
- z-score discretization: numeric values z-scored, rounded to p decimals
- column re-encoding: "<columnIndex>:<value>" tokens mapped to bit indices
- anti-contradiction filtering: signatures present in both classes removed
"""

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP, localcontext
from collections import defaultdict

import numpy as np
import pandas as pd

from .bitpack import ATTACK, NORMAL, UNLABELED, pack_matrix, PackedMatrix
from .errors import (ConfigError, DataError, EncodingError, EmptyClassError,
                     SchemaMismatchError)


NUMERIC = 'numeric'
CATEGORICAL = 'categorical'


# ================================ reading ===================================


def read_table(source):
    """Read a CSV file (header row, comma-delimited, UTF-8, RFC 4180 quoting).

    All cells are kept as strings; empty cells stay empty strings.
    """
    try:
        return pd.read_csv(source, dtype=str, keep_default_na=False,
                           na_filter=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise DataError(f'No header / data found in {source}.')
    except pd.errors.ParserError as error:
        raise DataError(f'Malformed CSV in {source}: {error}')


def _parse_numeric(values):
    """Float array of the non-empty cells if they all parse as finite numbers."""
    nonempty = values[values != '']
    if nonempty.empty:
        return None
    parsed = pd.to_numeric(nonempty, errors='coerce')
    if parsed.isna().any():
        return None
    parsed = parsed.to_numpy(dtype=float)
    if not np.isfinite(parsed).all():
        return None
    return parsed


# ================================= schema ===================================


@dataclass(frozen=True)
class ColumnSpec:
    """One feature column: position in the CSV, name, kind and z-score stats."""
    index: int
    name: str
    kind: str
    mean: float = None
    std: float = None

    def __post_init__(self):
        if self.kind == NUMERIC:
            if self.mean is None or self.std is None or self.std < 0:
                raise ValueError(f'Numeric column {self.name} needs mean and std >= 0.')
        elif self.kind == CATEGORICAL:
            if self.mean is not None or self.std is not None:
                raise ValueError(f'Categorical column {self.name} has no mean/std.')
        else:
            raise ValueError(f'Unknown column kind {self.kind}.')


@dataclass(frozen=True)
class DatasetSchema:
    """Columns of a dataset, label mapping and rounding precision.

    Parameters
    ----------
    - `header` (tuple of str): all CSV column names in file order.
    - `columns` (tuple of ColumnSpec): feature columns (label excluded).
    - `label_column` (str)
    - `attack_label_values`, `normal_label_values` (frozenset or None): raw
      label strings of each class; None means "everything else".
    - `decimals` (int): p, rounding precision of z-scores.
    - `std_convention` (str): 'population' (divide by n).
    """
    header: tuple
    columns: tuple
    label_column: str
    attack_label_values: frozenset = None
    normal_label_values: frozenset = None
    decimals: int = 2
    std_convention: str = 'population'

    def __post_init__(self):
        if self.decimals < 0:
            raise ConfigError(f'decimals must be >= 0, got {self.decimals}')
        if self.attack_label_values is None and self.normal_label_values is None:
            raise ConfigError('At least one of attack / normal label values must be given.')

    @property
    def feature_names(self):
        return [column.name for column in self.columns]

    def label_classes(self, raw_labels):
        """Array of 'attack' / 'normal' for raw label strings."""
        raw = np.asarray(list(raw_labels), dtype=object)
        if self.attack_label_values is not None:
            is_attack = np.isin(raw, list(self.attack_label_values))
        else:
            is_attack = ~np.isin(raw, list(self.normal_label_values))
        if self.normal_label_values is not None:
            is_normal = np.isin(raw, list(self.normal_label_values))
        else:
            is_normal = ~is_attack
        ambiguous = is_attack & is_normal
        uncovered = ~is_attack & ~is_normal
        if ambiguous.any() or uncovered.any():
            bad = sorted(set(raw[ambiguous | uncovered].tolist()))
            raise ConfigError(f'Label values not covered (or covered twice) by '
                              f'the attack/normal mapping: {bad[:10]}')
        return np.where(is_attack, ATTACK, NORMAL).astype(object)

    def check_header(self, header, require_label=True):
        """Raise SchemaMismatchError if header differs from the trained one.

        If `require_label` is False, the label column may be absent.
        """
        header = list(header)
        expected = list(self.header)
        if not require_label and self.label_column not in header:
            expected = [name for name in expected if name != self.label_column]
        if header == expected:
            return
        missing = [name for name in expected if name not in header]
        extra = [name for name in header if name not in expected]
        summary = (f'expected {len(expected)} columns, got {len(header)}; '
                   f'missing: {missing}; unexpected: {extra}')
        if not missing and not extra:
            summary += '; same names in a different order'
        raise SchemaMismatchError(f'Schema mismatch: {summary}',
                                  missing=missing, extra=extra)


def infer_schema(table, label_column='label', attack_values=None,
                 normal_values=frozenset({'normal'}), decimals=2):
    """Detect column kinds and z-score statistics from a training table.

    Parameters
    ----------
    - `table` (pandas DataFrame of strings, see read_table()): training rows.
    - `label_column` (str, default 'label')
    - `attack_values`, `normal_values` (iterables of str or None)
    - `decimals` (int, default 2)

    Returns
    -------
    DatasetSchema
    """
    if label_column not in table.columns:
        raise ConfigError(f'Label column {label_column!r} not found; '
                          f'available columns: {list(table.columns)}')
    if len(table) == 0:
        raise DataError('Empty table: no training rows.')

    attack_values = None if attack_values is None else frozenset(attack_values)
    normal_values = None if normal_values is None else frozenset(normal_values)

    columns = []
    for j, name in enumerate(table.columns):
        if name == label_column:
            continue
        values = _parse_numeric(table[name])
        if values is None:
            columns.append(ColumnSpec(j, name, CATEGORICAL))
        else:
            columns.append(ColumnSpec(j, name, NUMERIC,
                                      mean=float(values.mean()),
                                      std=float(values.std(ddof=0))))

    schema = DatasetSchema(header=tuple(table.columns),
                           columns=tuple(columns),
                           label_column=label_column,
                           attack_label_values=attack_values,
                           normal_label_values=normal_values,
                           decimals=decimals)
    schema.label_classes(table[label_column])  # validates the mapping
    return schema


# =============================== tokenizing =================================


def _exact(number):
    """Decimal of a raw cell string, or of the shortest repr of a float."""
    if isinstance(number, str):
        return Decimal(number.strip())
    return Decimal(repr(float(number)))


def format_zscore(value, mean, std, decimals):
    """z-score rounded half away from zero to `decimals`, as fixed-point text.

    `value` is preferably the raw cell string: z is computed in decimal
    arithmetic from its digits and the shortest reprs of mean and std, so that
    values landing on a rounding half are rounded away from zero.
    Constant columns (std == 0) always give zero; '-0.00' is written '0.00'.
    """
    with localcontext() as context:
        context.prec = 1000
        quantum = Decimal(1).scaleb(-decimals)
        if std == 0:
            z = Decimal(0)
        else:
            z = (_exact(value) - _exact(mean)) / _exact(std)
        rounded = z.quantize(quantum, rounding=ROUND_HALF_UP)
    if rounded == 0:
        rounded = rounded.copy_abs()
    return format(rounded, 'f')


def _cell_token(column, cell, decimals, row=None):
    if cell == '':
        return f'{column.index}:'
    if column.kind == CATEGORICAL:
        return f'{column.index}:{cell}'
    try:
        if not np.isfinite(float(cell)):
            raise ValueError(cell)
        text = format_zscore(cell, column.mean, column.std, decimals)
    except (ValueError, InvalidOperation):
        raise EncodingError(f'Cannot encode value {cell!r} of numeric column '
                            f'{column.name!r} (index {column.index}) at row {row}.',
                            row=row, column=column.name)
    return f'{column.index}:{text}'


def tokenize_row(row, schema, row_number=None):
    """Set of "<columnIndex>:<value>" tokens of one raw record.

    Parameters
    ----------
    - `row`: sequence of raw cell strings in header order, or mapping
      column name -> cell. The label cell is ignored.
    - `schema` (DatasetSchema)
    - `row_number` (int, optional): used in error messages.
    """
    if hasattr(row, 'keys'):
        cells = {column.index: row[column.name] for column in schema.columns}
    else:
        row = list(row)
        if len(row) != len(schema.header):
            raise SchemaMismatchError(f'Row {row_number} has {len(row)} cells, '
                                      f'schema has {len(schema.header)} columns.')
        cells = {column.index: row[column.index] for column in schema.columns}
    return frozenset(_cell_token(column, str(cells[column.index]),
                                 schema.decimals, row_number)
                     for column in schema.columns)


def tokenize_table(table, schema):
    """Token sets of every row of a table (list of frozensets, file order).

    Tokens are computed once per distinct value of each column.
    """
    n = len(table)
    per_column = []
    for column in schema.columns:
        values = table[column.name].to_numpy(dtype=object)
        tokens = {}
        for value in pd.unique(values):
            try:
                tokens[value] = _cell_token(column, value, schema.decimals)
            except EncodingError:
                # encode again to report the first row holding the value
                _cell_token(column, value, schema.decimals,
                            int(np.flatnonzero(values == value)[0]))
                raise
        per_column.append([tokens[value] for value in values])
    if not per_column:
        return [frozenset() for _ in range(n)]
    return [frozenset(row) for row in zip(*per_column)]


# =============================== vocabulary =================================


class TokenVocabulary:
    """Bijection between "<columnIndex>:<value>" tokens and bit positions.

    Parameters
    ----------
    - `tokens` (iterable of str): tokens in bit order (bit i <-> tokens[i]).
    """

    def __init__(self, tokens):
        self.bit_to_token = tuple(tokens)
        self.token_to_bit = {token: i for i, token in enumerate(self.bit_to_token)}
        if len(self.token_to_bit) != len(self.bit_to_token):
            raise ValueError('Duplicate tokens in vocabulary.')
        for token in self.bit_to_token:
            column, sep, _ = token.partition(':')
            if not sep or not column.isdigit():
                raise ValueError(f'Invalid token {token!r} (expected "<column>:<value>").')

    @property
    def L(self):
        return len(self.bit_to_token)

    logical_len = L

    def __len__(self):
        return len(self.bit_to_token)

    def __eq__(self, other):
        if not isinstance(other, TokenVocabulary):
            return NotImplemented
        return self.bit_to_token == other.bit_to_token

    def __repr__(self):
        return f'TokenVocabulary(L={self.L})'

    def encode(self, tokens):
        """Sorted bit indices of known tokens (unknown tokens are dropped)."""
        return sorted(self.token_to_bit[t] for t in tokens if t in self.token_to_bit)

    def decode(self, indices):
        """Token strings of bit indices."""
        return [self.bit_to_token[int(i)] for i in indices]


def build_vocabulary(train_token_sets):
    """Vocabulary of all distinct training tokens, in lexicographic order."""
    train_token_sets = list(train_token_sets)
    if not train_token_sets:
        raise DataError('Cannot build a vocabulary from an empty collection.')
    distinct = set()
    for tokens in train_token_sets:
        distinct.update(tokens)
    return TokenVocabulary(sorted(distinct))


# ========================= anti-contradiction filter ========================


@dataclass
class ContradictionReport:
    """Instances removed because their signature occurs in both classes."""
    removed_indices: list = field(default_factory=list)
    signatures: list = field(default_factory=list)

    @property
    def n_removed(self):
        return len(self.removed_indices)


def anti_contradiction_filter(encoded_train):
    """Remove instances whose exact token set appears under both labels.

    Parameters
    ----------
    - `encoded_train` (list of (token set, class) with class in
      {'attack', 'normal'})

    Returns
    -------
    (kept list of (token set, class), ContradictionReport)
    """
    classes_of = defaultdict(set)
    for tokens, label in encoded_train:
        if label not in (ATTACK, NORMAL):
            raise DataError(f'Instance labeled {label!r}, expected attack or normal.')
        classes_of[frozenset(tokens)].add(label)

    contradicted = {sig for sig, labels in classes_of.items() if len(labels) == 2}

    kept = []
    report = ContradictionReport()
    for i, (tokens, label) in enumerate(encoded_train):
        if frozenset(tokens) in contradicted:
            report.removed_indices.append(i)
        else:
            kept.append((tokens, label))
    report.signatures = sorted(tuple(sorted(sig)) for sig in contradicted)
    return kept, report


def check_both_classes(kept, report):
    """Raise EmptyClassError if filtering left one of the classes empty."""
    for label in (ATTACK, NORMAL):
        if not any(c == label for _, c in kept):
            raise EmptyClassError(f'No {label} instance left after '
                                  f'anti-contradiction filtering '
                                  f'({report.n_removed} removed).')


# ================================ encoding ==================================


class EncodedDataset:
    """Class-contiguous packed matrices of a table, plus its vocabulary.

    Unpacks as (attack, normal, vocabulary); `report` holds the
    anti-contradiction filtering report (None for test-time encoding).
    """

    def __init__(self, attack, normal, vocabulary, report=None):
        self.attack = attack
        self.normal = normal
        self.vocabulary = vocabulary
        self.report = report

    def __iter__(self):
        return iter((self.attack, self.normal, self.vocabulary))


def encode_dataset(table, schema, vocabulary=None, verbose=False):
    """Encode a labeled table into attack / normal packed matrices.

    Parameters
    ----------
    - `table` (DataFrame of strings)
    - `schema` (DatasetSchema, fitted on training rows)
    - `vocabulary` (TokenVocabulary or None): None for training data (a new
      vocabulary is built and contradictions are filtered); the training
      vocabulary for test data (unknown tokens are dropped, no filtering).
    - `verbose` (bool, default False)

    Returns
    -------
    EncodedDataset, unpacking as (attack, normal, vocabulary)
    """
    schema.check_header(table.columns)
    token_sets = tokenize_table(table, schema)
    classes = schema.label_classes(table[schema.label_column])
    encoded = list(zip(token_sets, classes))

    report = None
    if vocabulary is None:
        encoded, report = anti_contradiction_filter(encoded)
        check_both_classes(encoded, report)
        vocabulary = build_vocabulary(tokens for tokens, _ in encoded)
        if verbose:
            print(f'Encoded {len(table)} training rows: {report.n_removed} '
                  f'contradictory instances removed, L={vocabulary.L} tokens.')

    matrices = {}
    for label in (ATTACK, NORMAL):
        index_sets = [vocabulary.encode(tokens) for tokens, c in encoded if c == label]
        matrices[label] = pack_matrix(index_sets, vocabulary.L, label)

    return EncodedDataset(matrices[ATTACK], matrices[NORMAL], vocabulary, report)


def encode_rows(table, schema, vocabulary):
    """Encode rows in file order, labels optional (test / prediction data).

    Returns
    -------
    (PackedMatrix 'unlabeled', classes array or None if no label column)
    """
    schema.check_header(table.columns, require_label=False)
    token_sets = tokenize_table(table, schema)
    rows = pack_matrix([vocabulary.encode(tokens) for tokens in token_sets],
                       vocabulary.L, UNLABELED)
    classes = None
    if schema.label_column in table.columns:
        classes = schema.label_classes(table[schema.label_column])
    return rows, classes
