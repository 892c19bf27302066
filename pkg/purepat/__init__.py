"""Coherent-pattern intrusion detection with human-readable evidence.

Encoding
- read_table, infer_schema, encode_dataset, encode_rows turn CSV records
into "<column>:<value>" tokens, packed as int64 bitsets (PackedRow,
PackedMatrix).

Training
- train() mines candidate patterns of each class (pairwise intersections and
signatures, scored support * size**2), then keeps the pure ones that no
row of the other class contains.

Prediction
- Model.predict() sums the scores of the pure patterns found in each row
(attack evidence A, normal evidence N) and decides with three regulations;
Model.explain() lists the matched patterns behind each decision.

Other
- save / load model archives, run_benchmark over train/test ratios,
plot_benchmark / plot_evidence figures, `purepat` command line.
"""

from .errors import PurepatError, ConfigError, DataError

from .config import Settings

from .bitpack import PackedRow, PackedMatrix, pack, pack_matrix
from .bitpack import ATTACK, NORMAL

from .pipeline import read_table, infer_schema, encode_dataset, encode_rows
from .pipeline import TokenVocabulary

from .kernels import get_backend, available_backends

from .mine import mine_class
from .purify import reject_covered, PureDictionary
from .infer import ClassifierParams, classify, explain

from .model import Model, train
from .archive import save, load

from .evaluation import run_benchmark, compute_metrics, split_by_ratio

from .plots import plot_benchmark, plot_evidence

from importlib_metadata import version, PackageNotFoundError

try:
    __version__ = version('purepat')
except PackageNotFoundError:
    __version__ = '0.0.0+unknown'
