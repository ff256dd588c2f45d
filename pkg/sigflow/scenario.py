from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import yaml

from .contexts import Context, ContextFamily, close_family, context_from_operators
from .errors import (MissingHamiltonian, MissingState, ScenarioError, SigflowError, UnknownObservable,
                     UnknownProposition)
from .matrix import DensityState, HermitianOperator, Projection, spectral_projection
from .utils import parse_matrix, parse_time, parse_vector

if TYPE_CHECKING:
    from _typeshed import StrPath

logger = logging.getLogger(__name__)

SCHEMA = 'sigflow/1'


@dataclass(frozen=True)
class Proposition:
    """``observable in [low, high]``."""

    name: str
    observable: str
    low: float
    high: float


@dataclass
class Scenario:
    dimension: int
    observables: Dict[str, HermitianOperator]
    context_seeds: List[List[str]]
    hamiltonian_name: Optional[str] = None
    state: Optional[DensityState] = None
    propositions: Dict[str, Proposition] = field(default_factory=dict)
    times: List[float] = field(default_factory=list)
    # seed index -> probabilities replacing the state's at that seed context
    section: Dict[int, List[float]] = field(default_factory=dict)
    digest: str = ''
    path: Optional[Path] = None

    @property
    def hamiltonian(self) -> HermitianOperator:
        if self.hamiltonian_name is None:
            logger.error('Scenario has no hamiltonian.')
            raise MissingHamiltonian('Scenario has no hamiltonian.', 'hamiltonian')
        return self.observables[self.hamiltonian_name]

    def require_state(self) -> DensityState:
        if self.state is None:
            logger.error('Scenario has no state.')
            raise MissingState('Scenario has no state.', 'state')
        return self.state

    def proposition(self, name: str) -> Proposition:
        if name not in self.propositions:
            raise UnknownProposition(f'Unknown proposition {name!r}.', 'propositions')
        return self.propositions[name]

    def projection(self, name: str) -> Projection:
        prop = self.proposition(name)
        return spectral_projection(self.observables[prop.observable], prop.low, prop.high)

    def seed_contexts(self) -> List[Context]:
        contexts = []
        for n, names in enumerate(self.context_seeds):
            try:
                contexts.append(context_from_operators([self.observables[name] for name in names]))
            except SigflowError as e:
                raise ScenarioError(str(e), f'context_seeds.{n}') from e
        return contexts

    def family(self) -> ContextFamily:
        return close_family(self.seed_contexts())


def _require(document: Mapping[str, Any], key: str, path: str = '') -> Any:
    if key not in document:
        raise ScenarioError('missing required field', f'{path}{key}')
    return document[key]


def _observable(entry: Any, dimension: int, path: str) -> HermitianOperator:
    if not isinstance(entry, dict):
        raise ScenarioError('observable must be an object', path)
    try:
        if 'matrix' in entry:
            matrix = parse_matrix(entry['matrix'])
        elif 'eigenvectors' in entry:
            vectors = [parse_vector(v) for v in entry['eigenvectors']]
            if any(len(v) != dimension for v in vectors):
                raise ScenarioError(f'eigenvectors must have {dimension} entries', f'{path}.eigenvectors')
            vectors = [v / np.linalg.norm(v) for v in vectors]
            gram = np.array([[np.vdot(a, b) for b in vectors] for a in vectors])
            if np.linalg.norm(gram - np.eye(len(vectors))) > 1e-9:
                raise ScenarioError('eigenvectors must be pairwise orthogonal', f'{path}.eigenvectors')
            # unlisted directions get eigenvalue 0
            values = entry.get('eigenvalues', list(range(1, len(vectors) + 1)))
            if len(values) != len(vectors):
                raise ScenarioError('need one eigenvalue per eigenvector', f'{path}.eigenvalues')
            matrix = sum(float(x) * np.outer(v, v.conj()) for x, v in zip(values, vectors))
        else:
            raise ScenarioError('observable needs "matrix" or "eigenvectors"', path)
        if matrix.shape != (dimension, dimension):
            raise ScenarioError(f'expected a {dimension}x{dimension} matrix, got {matrix.shape}', path)
        return HermitianOperator(matrix)
    except ScenarioError:
        raise
    except (SigflowError, TypeError, ValueError) as e:
        raise ScenarioError(str(e), path) from e


def _state(entry: Any, dimension: int) -> DensityState:
    if not isinstance(entry, dict):
        raise ScenarioError('state must be an object', 'state')
    try:
        if 'matrix' in entry:
            state = DensityState(parse_matrix(entry['matrix']))
        elif 'vector' in entry:
            state = DensityState.from_vector(parse_vector(entry['vector']))
        else:
            raise ScenarioError('state needs "matrix" or "vector"', 'state')
    except ScenarioError:
        raise
    except (SigflowError, TypeError, ValueError) as e:
        raise ScenarioError(str(e), 'state') from e
    if state.dim != dimension:
        raise ScenarioError(f'state has dimension {state.dim}, expected {dimension}', 'state')
    return state


def _names(entries: Sequence[Any], path: str) -> List[str]:
    if not isinstance(entries, list) or not entries:
        raise ScenarioError('expected a non-empty list of observable names', path)
    return [str(name) for name in entries]


def parse_scenario(document: Any, digest: str = '', path: Optional[Path] = None) -> Scenario:
    """Validate a decoded scenario document.

    Raises:
        ScenarioError: With the dotted path of the offending field.
    """
    if not isinstance(document, dict):
        raise ScenarioError('scenario must be an object')

    schema = document.get('schema', SCHEMA)
    if schema != SCHEMA:
        raise ScenarioError(f'unsupported schema {schema!r}, expected {SCHEMA!r}', 'schema')

    dimension = _require(document, 'dimension')
    if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
        raise ScenarioError('dimension must be a positive integer', 'dimension')

    observables: Dict[str, HermitianOperator] = {}
    entries = _require(document, 'observables')
    if not isinstance(entries, list):
        raise ScenarioError('expected a list', 'observables')
    for n, entry in enumerate(entries):
        name = _require(entry, 'name', f'observables.{n}.') if isinstance(entry, dict) else None
        if name in observables:
            raise ScenarioError(f'duplicate observable {name!r}', f'observables.{n}.name')
        observables[str(name)] = _observable(entry, dimension, f'observables.{n}')

    def resolve(name: str, where: str) -> str:
        if name not in observables:
            raise UnknownObservable(f'unknown observable {name!r}', where)
        return name

    seeds = _require(document, 'context_seeds')
    if not isinstance(seeds, list) or not seeds:
        raise ScenarioError('at least one context seed is required', 'context_seeds')
    context_seeds = [[resolve(name, f'context_seeds.{n}') for name in _names(group, f'context_seeds.{n}')]
                     for n, group in enumerate(seeds)]

    hamiltonian = document.get('hamiltonian')
    if hamiltonian is not None:
        hamiltonian = resolve(str(hamiltonian), 'hamiltonian')

    state = _state(document['state'], dimension) if document.get('state') is not None else None

    propositions: Dict[str, Proposition] = {}
    for n, entry in enumerate(document.get('propositions') or []):
        where = f'propositions.{n}'
        if not isinstance(entry, dict):
            raise ScenarioError('proposition must be an object', where)
        name = str(_require(entry, 'name', f'{where}.'))
        observable = resolve(str(_require(entry, 'observable', f'{where}.')), f'{where}.observable')
        window = _require(entry, 'window', f'{where}.')
        try:
            low, high = (parse_time(x) for x in window)
        except (SigflowError, TypeError, ValueError) as e:
            raise ScenarioError('window must be a pair [a, b] of reals', f'{where}.window') from e
        if low > high:
            raise ScenarioError(f'empty window [{low}, {high}]', f'{where}.window')
        propositions[name] = Proposition(name, observable, low, high)

    try:
        times = [parse_time(t) for t in document.get('times') or []]
    except (SigflowError, TypeError, ValueError) as e:
        raise ScenarioError('times must be real numbers or multiples of pi', 'times') from e

    section: Dict[int, List[float]] = {}
    for key, values in (document.get('section') or {}).items():
        where = f'section.{key}'
        try:
            index = int(key)
            probabilities = [float(x) for x in values]
        except (TypeError, ValueError) as e:
            raise ScenarioError('expected seed index -> list of probabilities', where) from e
        if not 0 <= index < len(context_seeds):
            raise ScenarioError(f'no context seed {index}', where)
        section[index] = probabilities

    return Scenario(dimension, observables, context_seeds, hamiltonian, state, propositions, times, section,
                    digest, path)


def load_scenario(path: StrPath) -> Scenario:
    """Load a scenario from a JSON (or YAML) file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        logger.error(f'Scenario {path} not found.')
        raise
    try:
        document = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = f'line {mark.line + 1}' if mark is not None else None
        raise ScenarioError(f'not a valid JSON/YAML document: {e}', where) from e
    scenario = parse_scenario(document, hashlib.sha256(raw).hexdigest(), path)
    logger.debug(f'Loaded scenario {path.name}: dimension {scenario.dimension}, '
                 f'{len(scenario.observables)} observables, {len(scenario.context_seeds)} seeds.')
    return scenario


__all__ = [
    'Proposition',
    'SCHEMA',
    'Scenario',
    'load_scenario',
    'parse_scenario',
]
