import math

import numpy as np
import pytest

from sigflow.errors import InvalidOperator


@pytest.mark.parametrize('entry, expected', [
    (1, 1 + 0j),
    (-0.5, -0.5 + 0j),
    ('1/3', 1 / 3 + 0j),
    ([0, 1], 1j),
    (['1/2', '-1/2'], 0.5 - 0.5j),
])
def test_parse_scalar(entry, expected):

    from sigflow.utils import parse_scalar
    actual = parse_scalar(entry)
    assert actual == pytest.approx(expected), f'Expected: {expected}, Actual: {actual}'


@pytest.mark.parametrize('entry', [True, 'abc', '1/0', [1, 2, 3], None])
def test_parse_scalar_rejects(entry):

    from sigflow.utils import parse_scalar
    with pytest.raises(InvalidOperator):
        parse_scalar(entry)


def test_parse_matrix():

    from sigflow.utils import parse_matrix
    actual = parse_matrix([[0, [0, -1]], [[0, 1], 0]])
    assert np.allclose(actual, [[0, -1j], [1j, 0]])
    with pytest.raises(InvalidOperator):
        parse_matrix([[1, 0]])
    with pytest.raises(InvalidOperator):
        parse_matrix([[float('inf')]])


@pytest.mark.parametrize('value, expected', [
    (0, 0.0),
    (2.5, 2.5),
    ('3/4', 0.75),
    ('pi', math.pi),
    ('pi/3', math.pi / 3),
    ('-3pi/4', -3 * math.pi / 4),
    ('2*pi', 2 * math.pi),
    ('0.5pi', math.pi / 2),
])
def test_parse_time(value, expected):

    from sigflow.utils import parse_time
    actual = parse_time(value)
    assert actual == pytest.approx(expected), f'Expected: {expected}, Actual: {actual}'


@pytest.mark.parametrize('value', ['tau', 'pi/', 'pi pi'])
def test_parse_time_rejects(value):

    from sigflow.utils import parse_time
    with pytest.raises(InvalidOperator):
        parse_time(value)


@pytest.mark.parametrize('x, expected', [
    (0.0, '0'),
    (-0.0, '0'),
    (1e-20, '1e-20'),
    (0.5, '0.5'),
    (1 / 3, '0.333333333333'),
    (2.0, '2'),
])
def test_format_float(x, expected):

    from sigflow.utils import format_float
    assert format_float(x) == expected


def test_update_dict():

    from sigflow.utils import update_dict
    orig = {'tolerance': {'check': 1e-9, 'overlap': 1e-9}, 'search': {'budget': 10}}
    update_dict(orig, {'tolerance': {'check': 1e-6}, 'extra': 1})
    assert orig == {'tolerance': {'check': 1e-6, 'overlap': 1e-9}, 'search': {'budget': 10}, 'extra': 1}
    update_dict(orig, {'other': 2}, add_keys=False)
    assert 'other' not in orig


def test_load_config_errors(tmp_path):

    from sigflow.utils import load_config
    with pytest.raises(ImportError):
        load_config(tmp_path / 'missing.toml')
    (tmp_path / 'broken.toml').write_text('[search\n')
    with pytest.raises(ImportError):
        load_config(tmp_path / 'broken.toml')


def test_using_tolerances():

    from sigflow.settings import tolerances, using_tolerances
    before = tolerances()
    with using_tolerances(check=1e-3) as active:
        assert tolerances() is active
        assert active.check == 1e-3
        assert active.overlap == before.overlap
    assert tolerances() == before
