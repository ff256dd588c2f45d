from __future__ import annotations

import collections.abc
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Any, List, Sequence

import numpy as np
import tomli

from .errors import InvalidOperator

if TYPE_CHECKING:
    from _typeshed import StrPath

    from .typing import Entry, MatrixLiteral


def ensure_dir(s: Path):
    if not s.exists():
        s.mkdir(parents=True)


def load_config(config_file: StrPath):
    try:
        with open(config_file, 'r') as f:
            return tomli.loads(f.read())
    except FileNotFoundError:
        raise ImportError(f'\'{config_file}\' not found!')
    except tomli.TOMLDecodeError:
        raise ImportError(f'\'{config_file}\' is not a valid TOML file!')


def update_dict(orig, update, add_keys=True):
    """Deep update of a dictionary

    For each entry (k, v) in update such that both orig[k] and v are
    dictionaries, orig[k] is recurisvely updated to v.

    For all other entries (k, v), orig[k] is set to v.
    """
    for (key, value) in update.items():
        if key in orig and \
                isinstance(value, collections.abc.Mapping) and \
                isinstance(orig[key], collections.abc.Mapping):
            update_dict(orig[key], value)
        elif add_keys or key in orig:
            orig[key] = value


def parse_scalar(entry: Entry) -> complex:
    """Parse one literal entry: ``[re, im]``, a bare real, or a rational string."""
    if isinstance(entry, bool):
        raise InvalidOperator(f'Invalid matrix entry: {entry!r}')
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise InvalidOperator(f'Complex entry must be a [re, im] pair, got {entry!r}')
        return complex(_parse_real(entry[0]), _parse_real(entry[1]))
    return complex(_parse_real(entry), 0.0)


def _parse_real(value: Any) -> float:
    if isinstance(value, bool):
        raise InvalidOperator(f'Invalid real number: {value!r}')
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise InvalidOperator(f'Invalid real number: {value!r}')


def parse_matrix(literal: MatrixLiteral) -> np.ndarray:
    """Parse a row-major matrix literal into a square, finite complex array."""
    if not isinstance(literal, (list, tuple)) or not literal:
        raise InvalidOperator('Matrix literal must be a non-empty list of rows.')
    d = len(literal)
    rows = []
    for row in literal:
        if not isinstance(row, (list, tuple)) or len(row) != d:
            raise InvalidOperator(f'Matrix literal must be square ({d}x{d}).')
        rows.append([parse_scalar(e) for e in row])
    matrix = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(matrix)):
        raise InvalidOperator('Matrix literal has non-finite entries.')
    return matrix


def parse_vector(literal: Sequence[Entry]) -> np.ndarray:
    if not isinstance(literal, (list, tuple)) or not literal:
        raise InvalidOperator('Vector literal must be a non-empty list.')
    vector = np.array([parse_scalar(e) for e in literal], dtype=complex)
    if not np.all(np.isfinite(vector)):
        raise InvalidOperator('Vector literal has non-finite entries.')
    return vector


def format_literal_number(x: float, digits: int = 17) -> float:
    # round-trips through JSON/YAML as a plain decimal number
    return float(format(float(x), f'.{digits}g'))


def matrix_literal(matrix: np.ndarray, digits: int = 17) -> List[List[List[float]]]:
    return [[[format_literal_number(z.real, digits), format_literal_number(z.imag, digits)] for z in row]
            for row in np.asarray(matrix, dtype=complex)]


def format_float(x: float, digits: int = 12) -> str:
    text = format(float(x), f'.{digits}g')
    if float(text) == 0.0:
        return '0'
    return text


_PI_MULTIPLE = re.compile(r'^\s*([+-]?)\s*([0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$')


def parse_time(value: Any) -> float:
    """Parse a time stamp: a number, a rational string, or a multiple of pi such as ``"-3pi/4"``."""
    if isinstance(value, str):
        match = _PI_MULTIPLE.match(value)
        if match:
            sign, factor, divisor = match.groups()
            x = math.pi * float(factor or 1) / float(divisor or 1)
            return -x if sign == '-' else x
    return _parse_real(value)
