"""Model archives: self-describing JSON, stable key order, sorted patterns.

Layout (format_version 1)
-------------------------
- `schema`: header, feature columns (index, name, kind, mean, std), label
  column and label mappings, decimals, std convention.
- `vocabulary`: tokens in bit order.
- `dictionaries`: for 'attack' and 'normal', the patterns as
  [sorted token indices, support, score] in canonical order, the packed
  words as base-64 little-endian int64 (checked against the index lists on
  loading), and the total score.
- `classifier`: r, stats mode, frozen mu_N / sigma_N (train mode only).
- `training`: row, candidate and pure-pattern counts.
- `provenance`: input digest, tool version, creation time.

save -> load -> save gives byte-identical files.
"""

import base64
import hashlib
import json
from datetime import datetime, timezone

import numpy as np

from .bitpack import ATTACK, NORMAL, PackedMatrix, pack_matrix, n_words
from .errors import ArchiveError
from .infer import ClassifierParams
from .model import Model, TrainingSummary
from .pipeline import ColumnSpec, DatasetSchema, TokenVocabulary
from .purify import PureDictionary


FORMAT_VERSION = 1


def file_digest(path):
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as file:
        for chunk in iter(lambda: file.read(2**20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def tool_version():
    from . import __version__
    return __version__


def stamp(model, input_digest=None):
    """Fill the provenance of a freshly trained model."""
    model.provenance.update({
        'input_digest': input_digest,
        'tool_version': tool_version(),
        'created': datetime.now(timezone.utc).isoformat(timespec='seconds'),
    })
    return model


# ============================== serialization ===============================


def _sorted_values(values):
    return None if values is None else sorted(values)


def _schema_record(schema):
    return {
        'header': list(schema.header),
        'columns': [{'index': c.index, 'name': c.name, 'kind': c.kind,
                     'mean': c.mean, 'std': c.std} for c in schema.columns],
        'label_column': schema.label_column,
        'attack_label_values': _sorted_values(schema.attack_label_values),
        'normal_label_values': _sorted_values(schema.normal_label_values),
        'decimals': schema.decimals,
        'std_convention': schema.std_convention,
    }


def _dictionary_record(dictionary):
    little = np.ascontiguousarray(dictionary.bits.words, dtype='<i8')
    patterns = [[idx.tolist(), int(support), int(score)]
                for idx, support, score in zip(dictionary.bits.index_sets(),
                                               dictionary.supports,
                                               dictionary.scores)]
    return {'patterns': patterns,
            'packed': base64.b64encode(little.tobytes()).decode('ascii'),
            'total_score': dictionary.total_score}


def to_record(model):
    """JSON-serializable dict of a model."""
    params = model.train_params
    return {
        'format_version': FORMAT_VERSION,
        'schema': _schema_record(model.schema),
        'vocabulary': list(model.vocabulary.bit_to_token),
        'dictionaries': {ATTACK: _dictionary_record(model.dict_plus),
                         NORMAL: _dictionary_record(model.dict_minus)},
        'classifier': {'r': model.r,
                       'stats_mode': model.stats_mode,
                       'mu_N': None if params is None else params.mu_N,
                       'sigma_N': None if params is None else params.sigma_N},
        'training': {'rows': model.summary.rows,
                     'contradictions_removed': model.summary.contradictions_removed,
                     'candidate_counts': model.summary.candidate_counts,
                     'pure_counts': model.summary.pure_counts},
        'provenance': model.provenance,
    }


def dumps(model):
    return json.dumps(to_record(model), sort_keys=True, indent=1) + '\n'


def save(model, path):
    """Write the model archive to path."""
    with open(path, 'w', encoding='utf-8', newline='\n') as file:
        file.write(dumps(model))


# ============================= deserialization ==============================


def _frozen_values(values):
    return None if values is None else frozenset(values)


def _schema(record):
    columns = tuple(ColumnSpec(c['index'], c['name'], c['kind'], c['mean'], c['std'])
                    for c in record['columns'])
    return DatasetSchema(header=tuple(record['header']),
                         columns=columns,
                         label_column=record['label_column'],
                         attack_label_values=_frozen_values(record['attack_label_values']),
                         normal_label_values=_frozen_values(record['normal_label_values']),
                         decimals=record['decimals'],
                         std_convention=record['std_convention'])


def _dictionary(record, class_tag, logical_len):
    patterns = record['patterns']
    bits = pack_matrix([p[0] for p in patterns], logical_len, class_tag)
    packed = np.frombuffer(base64.b64decode(record['packed']), dtype='<i8')
    K = n_words(logical_len)
    if packed.size != len(patterns) * K or \
            not np.array_equal(packed.reshape(len(patterns), K), bits.words):
        raise ArchiveError(f'Packed words of the {class_tag} dictionary do not '
                           'match its token index lists.')
    dictionary = PureDictionary(class_tag, bits,
                                [p[1] for p in patterns], [p[2] for p in patterns])
    if dictionary.total_score != record['total_score']:
        raise ArchiveError(f'Total score of the {class_tag} dictionary is inconsistent.')
    return dictionary


def from_record(record):
    """Model from a dict produced by to_record()."""
    try:
        version = record['format_version']
        if version != FORMAT_VERSION:
            raise ArchiveError(f'Unsupported archive format version {version}.')
        schema = _schema(record['schema'])
        vocabulary = TokenVocabulary(record['vocabulary'])
        dict_plus = _dictionary(record['dictionaries'][ATTACK], ATTACK, vocabulary.L)
        dict_minus = _dictionary(record['dictionaries'][NORMAL], NORMAL, vocabulary.L)
        classifier = record['classifier']
        train_params = None
        if classifier['mu_N'] is not None:
            train_params = ClassifierParams(classifier['r'], classifier['mu_N'],
                                            classifier['sigma_N'])
        training = record['training']
        summary = TrainingSummary(rows=training['rows'],
                                  contradictions_removed=training['contradictions_removed'],
                                  candidate_counts=training['candidate_counts'],
                                  pure_counts=training['pure_counts'])
        return Model(schema, vocabulary, dict_plus, dict_minus,
                     r=classifier['r'], stats_mode=classifier['stats_mode'],
                     train_params=train_params, summary=summary,
                     provenance=record['provenance'])
    except ArchiveError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as error:
        # OutOfRangeError (bad token index) is an IndexError
        raise ArchiveError(f'Malformed model archive: {error!r}')


def loads(text):
    try:
        record = json.loads(text)
    except json.JSONDecodeError as error:
        raise ArchiveError(f'Model archive is not valid JSON: {error}')
    return from_record(record)


def load(path):
    """Read a model archive from path."""
    with open(path, encoding='utf-8') as file:
        return loads(file.read())
