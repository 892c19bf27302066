"""Test the hand-traceable demo."""

from purepat.demo import running_example, demo


def test_running_example():
    result = running_example()
    assert result['candidates']['attack'].n == 6
    assert result['candidates']['normal'].n == 3
    assert (result['dict_plus'].n, result['dict_minus'].n) == (5, 3)
    assert len(result['dict_plus'].witnesses) == 1
    assert result['A'].tolist() == [25, 0, 0]
    assert result['N'].tolist() == [11, 11, 0]
    assert result['labels'].tolist() == ['attack', 'normal', 'attack']
    assert result['regulations'].tolist() == ['R1-attack', 'R1-normal', 'R2']


def test_parallel_backend():
    result = running_example(backend='parallel-cpu', workers=3)
    assert result['A'].tolist() == [25, 0, 0]


def test_demo(capsys):
    demo()
    out = capsys.readouterr().out
    assert 'attack: 6 candidates, 5 pure patterns' in out
    assert 'rejected: ab (inside opposite row 0)' in out
    assert 'label=attack regulation=R1-attack A=25 N=11' in out
