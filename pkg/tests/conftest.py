"""Shared fixtures: running example as packed rows and as CSV files."""

import matplotlib
matplotlib.use('Agg')

import pytest

from purepat.bitpack import ATTACK, NORMAL
from purepat.demo import demo_matrix, demo_vocabulary


# Running example as CSV: column j holds letter j when present, otherwise a
# value unique to the row, so that absent letters never intersect.
TRAIN_CSV = """f0,f1,f2,f3,f4,label
a,b,c,x0,x0,attack
a,b,x1,d,x1,attack
a,x2,c,d,x2,attack
a,b,x3,x3,e,normal
x4,x4,c,d,e,normal
"""

TEST_CSV = """f0,f1,f2,f3,f4,label
a,y0,c,d,e,attack
a,b,y1,y1,e,normal
y2,b,y2,y2,y2,attack
"""


@pytest.fixture
def example():
    """Packed running example: attack / normal training rows, test rows."""
    return {'vocabulary': demo_vocabulary(),
            'attack': demo_matrix(['abc', 'abd', 'acd'], ATTACK),
            'normal': demo_matrix(['abe', 'cde'], NORMAL),
            'tests': demo_matrix(['acde', 'abe', 'b'])}


@pytest.fixture
def example_csv(tmp_path):
    """Paths of the running example training and test CSV files."""
    train_path = tmp_path / 'train.csv'
    test_path = tmp_path / 'test.csv'
    train_path.write_text(TRAIN_CSV, encoding='utf-8')
    test_path.write_text(TEST_CSV, encoding='utf-8')
    return train_path, test_path
