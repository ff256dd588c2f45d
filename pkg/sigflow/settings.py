from __future__ import annotations

import contextlib
import dataclasses
import logging
import os
from contextvars import ContextVar
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, cast

from .typing import Config
from .utils import load_config, update_dict

logger = logging.getLogger(__name__)

DEFAULT_ASSET_PATH = Path(__file__).resolve().parent / 'asset'
DEFAULT_CONFIG_FILE = Path(os.getenv('SIGFLOW_CONFIG_PATH', DEFAULT_ASSET_PATH)) / 'config.toml'
DEFAULT_SCENARIO_PATH = DEFAULT_ASSET_PATH / 'scenarios'


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by the library.

    ``hermitian`` is per unit dimension; the others are absolute Frobenius-norm or scalar
    thresholds.
    """

    hermitian: float = 1e-10
    validation: float = 1e-9
    comparison: float = 1e-8
    overlap: float = 1e-9
    key_rounding: float = 1e-6
    clamp: float = 1e-12
    check: float = 1e-9
    window: float = 1e-9

    @classmethod
    def from_config(cls, config: Config) -> Tolerances:
        section = config.get('tolerance', {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(section) - known
        if unknown:
            logger.warning(f'Ignoring unknown tolerance keys: {", ".join(sorted(unknown))}')
        return cls(**{k: float(v) for k, v in section.items() if k in known})


def default_config() -> Config:
    return cast(Config, load_config(DEFAULT_CONFIG_FILE))


def merged_config(override: Optional[Config] = None) -> Config:
    config = default_config()
    if override is not None:
        update_dict(config, override)
    return config


_tolerances: ContextVar[Tolerances] = ContextVar('sigflow_tolerances',
                                                 default=Tolerances.from_config(default_config()))


def tolerances() -> Tolerances:
    return _tolerances.get()


@contextlib.contextmanager
def using_tolerances(base: Optional[Tolerances] = None, **overrides: float) -> Iterator[Tolerances]:
    """Temporarily replace the active tolerances.

    >>> with using_tolerances(check=1e-6):
    ...     ...
    """
    active = dataclasses.replace(base or tolerances(), **overrides)
    token = _tolerances.set(active)
    try:
        yield active
    finally:
        _tolerances.reset(token)
