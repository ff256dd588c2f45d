"""States as global sections of the probability presheaf, and the measures they induce on subobjects."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .contexts import ContextFamily, ContextId
from .errors import DimensionMismatch, FamilyMismatch, InvalidSection, MissingContext, NotInContext, \
    WellDefinednessViolation
from .matrix import DensityState, Projection, grid_key
from .settings import default_config, tolerances
from .subobjects import ClopenSubobject, alpha, alpha_inv, complete_component, outer_daseinisation, random_subobject, \
    sub_join, sub_meet, top

logger = logging.getLogger(__name__)


class CPGlobalSection:
    """One probability vector over the blocks of each context, compatible under coarse-graining.

    ``check=False`` skips validation so that deliberately inconsistent data can be inspected
    with :func:`measure_axioms_check` and :func:`projection_fapm`.
    """

    __slots__ = ('family', 'values')

    family: ContextFamily
    values: Dict[ContextId, np.ndarray]

    def __init__(self, family: ContextFamily, values: Mapping[ContextId, Sequence[float]],
                 check: bool = True) -> None:
        arrays = {}
        for key in family.ids:
            if key not in values:
                raise InvalidSection(f'No probabilities given for context {key}.')
            vector = np.array(values[key], dtype=float)
            if vector.shape != (len(family[key]),):
                raise InvalidSection(f'Expected {len(family[key])} probabilities at {key}, got {vector.shape}.')
            vector.setflags(write=False)
            arrays[key] = vector
        object.__setattr__(self, 'family', family)
        object.__setattr__(self, 'values', arrays)
        if check:
            threshold = tolerances().validation
            for key, vector in arrays.items():
                if np.any(vector < -threshold) or np.any(vector > 1 + threshold):
                    raise InvalidSection(f'Probabilities at {key} leave [0, 1].')
                if abs(vector.sum() - 1) > threshold:
                    raise InvalidSection(f'Probabilities at {key} sum to {vector.sum()}.')
            worst = self.compatibility_violation()
            if worst > threshold:
                raise InvalidSection(f'Section is not compatible under restriction (violation {worst:.3e}).')

    def __setattr__(self, name, value):
        raise AttributeError('CPGlobalSection is immutable.')

    def __getitem__(self, key: ContextId) -> np.ndarray:
        return self.values[key]

    def __repr__(self) -> str:
        return f'CPGlobalSection({self.to_literal()!r})'

    def pushforward(self, small: ContextId, large: ContextId) -> np.ndarray:
        """Coarse-grain the probabilities at ``large`` onto the blocks of ``small``."""
        mapping = self.family.restriction(small, large)
        pushed = np.zeros(len(self.family[small]))
        np.add.at(pushed, list(mapping), self.values[large])
        return pushed

    def compatibility_violation(self) -> float:
        worst = 0.0
        for small, large in self.family.order:
            if small != large:
                worst = max(worst, float(np.max(np.abs(self.pushforward(small, large) - self.values[small]))))
        return worst

    def to_literal(self) -> Dict[int, List[float]]:
        return {self.family.index(k): [float(x) for x in v] for k, v in self.values.items()}


def section_from_state(rho: DensityState, family: ContextFamily) -> CPGlobalSection:
    if rho.dim != family.dim:
        raise DimensionMismatch(f'State of dimension {rho.dim} does not match family of dimension {family.dim}.')
    clamp = tolerances().clamp
    values = {}
    for v in family:
        raw = np.array([rho.expectation(q) for q in v.blocks])
        if np.any(raw < -clamp) or np.any(raw > 1 + clamp):
            logger.warning(f'Probabilities at {v.id} leave [0, 1] by more than {clamp:.0e}: {raw}')
        values[v.id] = np.clip(raw, 0.0, 1.0)
    return CPGlobalSection(family, values)


def mix_sections(sections: Sequence[CPGlobalSection], weights: Sequence[float]) -> CPGlobalSection:
    """Convex combination of sections over one family."""
    if len(sections) != len(weights) or not sections:
        raise ValueError('Need one weight per section.')
    family = sections[0].family
    if any(m.family != family for m in sections):
        raise FamilyMismatch('Sections live on different context families.')
    values = {k: sum(w * m.values[k] for m, w in zip(sections, weights)) for k in family.ids}
    return CPGlobalSection(family, values)


@dataclass(frozen=True)
class AntitoneFunction:
    family: ContextFamily
    values: Mapping[ContextId, float]

    def __getitem__(self, key: ContextId) -> float:
        return self.values[key]

    def minimum(self) -> float:
        return min(self.values.values())

    def argmin(self, tol: Optional[float] = None) -> List[ContextId]:
        """Contexts where the minimum is attained, up to ``tol``."""
        if tol is None:
            tol = tolerances().check
        low = self.minimum()
        return [k for k in self.family.ids if self.values[k] <= low + tol]

    def antitone_violation(self) -> float:
        worst = 0.0
        for small, large in self.family.order:
            worst = max(worst, self.values[large] - self.values[small])
        return worst

    def is_antitone(self) -> bool:
        return self.antitone_violation() <= tolerances().validation

    def to_literal(self) -> Dict[int, float]:
        return {self.family.index(k): float(self.values[k]) for k in self.family.ids}


def pairing(m: CPGlobalSection, s: ClopenSubobject) -> AntitoneFunction:
    """Probability that the proposition ``s`` holds, context by context."""
    if m.family != s.family:
        raise FamilyMismatch('Section and subobject live on different context families.')
    values = {k: float(sum(m.values[k][i] for i in s.components[k])) for k in m.family.ids}
    return AntitoneFunction(m.family, values)


@dataclass(frozen=True)
class PresheafMeasure:
    family: ContextFamily
    evaluate: Callable[[ClopenSubobject], AntitoneFunction]

    def __call__(self, s: ClopenSubobject) -> AntitoneFunction:
        if s.family != self.family:
            raise FamilyMismatch('Subobject lives on a different context family.')
        return self.evaluate(s)


def measure_from_section(m: CPGlobalSection) -> PresheafMeasure:
    return PresheafMeasure(m.family, lambda s: pairing(m, s))


def section_from_measure(mu: PresheafMeasure, family: Optional[ContextFamily] = None) -> CPGlobalSection:
    """Read back the probability of each block as the measure of its smallest completing subobject."""
    if family is not None and family != mu.family:
        raise FamilyMismatch('Measure lives on a different context family.')
    family = mu.family
    values = {}
    for v in family:
        values[v.id] = [mu(complete_component(family, v.id, {i}))[v.id] for i in range(len(v))]
    return CPGlobalSection(family, values)


@dataclass
class AxiomsReport:
    normalization: float
    modularity: float
    compatibility: float
    pairs: int
    worst_pair: Optional[Tuple[ClopenSubobject, ClopenSubobject]] = field(default=None, repr=False)

    @property
    def max_violation(self) -> float:
        return max(self.normalization, self.modularity, self.compatibility)

    @property
    def passed(self) -> bool:
        return self.max_violation <= tolerances().check


def measure_axioms_check(m: CPGlobalSection,
                         sample: Optional[Iterable[Tuple[ClopenSubobject, ClopenSubobject]]] = None,
                         rng: Optional[np.random.Generator] = None,
                         pairs: Optional[int] = None) -> AxiomsReport:
    """Check normalization and stagewise modularity of the measure induced by ``m``.

    Without an explicit ``sample``, ``pairs`` random subobject pairs are drawn from ``rng``. Both default
    to the packaged configuration.
    """
    family = m.family
    normalization = max(abs(value - 1.0) for value in pairing(m, top(family)).values.values())

    if sample is None:
        config = default_config()['random']
        if rng is None:
            rng = np.random.default_rng(config['seed'])
        count = config['subobject_pairs'] if pairs is None else pairs
        sample = [(random_subobject(family, rng), random_subobject(family, rng)) for _ in range(count)]
    chosen = list(sample)

    modularity = 0.0
    worst_pair = None
    for s, t in chosen:
        lhs = pairing(m, s).values
        join, meet = pairing(m, sub_join(s, t)).values, pairing(m, sub_meet(s, t)).values
        other = pairing(m, t).values
        error = max(abs(lhs[k] + other[k] - join[k] - meet[k]) for k in family.ids)
        if error > modularity:
            modularity, worst_pair = error, (s, t)

    report = AxiomsReport(float(normalization), float(modularity), m.compatibility_violation(), len(chosen),
                          worst_pair)
    if not report.passed:
        logger.warning(f'Measure axioms violated by {report.max_violation:.3e}.')
    return report


class ProjectionFAPM:
    """Probabilities of every projection that is a sum of blocks in some context of a family."""

    def __init__(self, entries: Mapping[bytes, Tuple[Projection, float]]) -> None:
        self._entries = dict(entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __call__(self, p: Projection) -> float:
        entry = self._entries.get(grid_key(p).tobytes())
        if entry is not None:
            return entry[1]
        threshold = tolerances().comparison
        for q, value in self._entries.values():
            if q.close_to(p, threshold):
                return value
        raise MissingContext('Projection does not occur in the family.')

    def items(self) -> List[Tuple[Projection, float]]:
        return list(self._entries.values())


def projection_fapm(m: CPGlobalSection) -> ProjectionFAPM:
    """Assemble the measure on projections, checking that contexts sharing a projection agree.

    Raises:
        WellDefinednessViolation: If two contexts assign different values to one projection.
    """
    threshold = tolerances().validation
    entries: Dict[bytes, Tuple[Projection, float]] = {}
    for v in m.family:
        for r in range(len(v) + 1):
            for subset in itertools.combinations(range(len(v)), r):
                p = alpha(v, subset)
                value = float(sum(m.values[v.id][i] for i in subset))
                key = grid_key(p).tobytes()
                if key in entries and abs(entries[key][1] - value) > threshold:
                    logger.error(f'Projection of rank {p.rank} has values {entries[key][1]} and {value}.')
                    raise WellDefinednessViolation(
                        f'Projection of rank {p.rank} gets {entries[key][1]} and {value} from different contexts.')
                entries.setdefault(key, (p, value))
    return ProjectionFAPM(entries)


def _home_contexts(p: Projection, family: ContextFamily) -> List[ContextId]:
    homes = []
    for v in family:
        try:
            alpha_inv(v, p)
        except NotInContext:
            continue
        homes.append(v.id)
    return homes


def born_probability(rho: DensityState, p: Projection, family: ContextFamily) -> float:
    """Minimum over contexts of the probability of the outer daseinisation of ``p``.

    Raises:
        MissingContext: If no context of the family contains ``p``.
    """
    if not _home_contexts(p, family):
        raise MissingContext('No context of the family contains the projection.')
    return pairing(section_from_state(rho, family), outer_daseinisation(p, family)).minimum()


def born_minimisers(rho: DensityState, p: Projection, family: ContextFamily) -> List[ContextId]:
    if not _home_contexts(p, family):
        raise MissingContext('No context of the family contains the projection.')
    return pairing(section_from_state(rho, family), outer_daseinisation(p, family)).argmin()


def trace_probability(rho: DensityState, p: Projection) -> float:
    if rho.dim != p.dim:
        raise DimensionMismatch(f'State of dimension {rho.dim} does not match projection of dimension {p.dim}.')
    return float(np.clip(rho.expectation(p), 0.0, 1.0))


__all__ = [
    'AntitoneFunction',
    'AxiomsReport',
    'CPGlobalSection',
    'PresheafMeasure',
    'ProjectionFAPM',
    'born_minimisers',
    'born_probability',
    'measure_axioms_check',
    'measure_from_section',
    'mix_sections',
    'pairing',
    'projection_fapm',
    'section_from_measure',
    'section_from_state',
    'trace_probability',
]
