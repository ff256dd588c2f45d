"""Clopen subobjects of the spectral presheaf over a finite context family.

Spectra are finite and discrete, so a component is simply a set of block indices and every
subset is clopen. The only constraint on a family of components is stability under
restriction: a block selected at ``V`` must map to a selected block at every ``V' <= V``.
"""
from __future__ import annotations

import itertools
import logging
from typing import AbstractSet, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Union

import numpy as np

from .contexts import Context, ContextFamily, ContextId
from .errors import DimensionMismatch, FamilyMismatch, NotASubobject, NotInContext
from .matrix import Projection, frobenius
from .settings import tolerances

logger = logging.getLogger(__name__)

Components = Mapping[ContextId, AbstractSet[int]]


def alpha(v: Context, selected: Iterable[int]) -> Projection:
    """The projection of ``v`` corresponding to a set of its blocks."""
    total = np.zeros((v.dim, v.dim), dtype=complex)
    for i in set(selected):
        if not 0 <= i < len(v):
            raise IndexError(f'Block index {i} out of range for {v}.')
        total = total + v.blocks[i].matrix
    return Projection(total)


def alpha_inv(v: Context, p: Projection) -> FrozenSet[int]:
    """The set of blocks of ``v`` whose sum is ``p``.

    Raises:
        NotInContext: If ``p`` is not a sum of blocks of ``v``.
    """
    if p.dim != v.dim:
        raise DimensionMismatch(f'Projection of dimension {p.dim} does not match context of dimension {v.dim}.')
    threshold = tolerances().validation
    selected = set()
    for i, q in enumerate(v.blocks):
        inside = frobenius(q.matrix @ p.matrix - q.matrix)
        outside = frobenius(q.matrix @ p.matrix)
        if inside <= threshold:
            selected.add(i)
        elif outside > threshold:
            raise NotInContext(f'Projection cuts block {i} of context {v.id}.')
    if frobenius(alpha(v, selected).matrix - p.matrix) > threshold:
        raise NotInContext(f'Projection is not a sum of blocks of context {v.id}.')
    return frozenset(selected)


def is_subobject(family: ContextFamily, components: Components) -> bool:
    if set(components) != set(family.ids):
        return False
    for small, large in family.order:
        if small == large:
            continue
        mapping = family.restriction(small, large)
        target = components[small]
        if any(mapping[b] not in target for b in components[large]):
            return False
    return True


class ClopenSubobject:
    """A subobject of the spectral presheaf, given by one set of block indices per context."""

    __slots__ = ('family', 'components')

    family: ContextFamily
    components: Dict[ContextId, FrozenSet[int]]

    def __init__(self, family: ContextFamily, components: Components, check: bool = True) -> None:
        frozen = {k: frozenset(components.get(k, ())) for k in family.ids}
        if check:
            extra = set(components) - set(family.ids)
            if extra:
                raise NotASubobject(f'{len(extra)} components are indexed by contexts outside the family.')
            for k, selected in frozen.items():
                if any(not 0 <= b < len(family[k]) for b in selected):
                    raise NotASubobject(f'Component at {k} selects a block out of range.')
            if not is_subobject(family, frozen):
                raise NotASubobject('Components are not stable under restriction.')
        object.__setattr__(self, 'family', family)
        object.__setattr__(self, 'components', frozen)

    def __setattr__(self, name, value):
        raise AttributeError('ClopenSubobject is immutable.')

    def __getitem__(self, key: ContextId) -> FrozenSet[int]:
        return self.components[key]

    def __eq__(self, other) -> bool:
        return isinstance(other, ClopenSubobject) and self.family == other.family \
            and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.family, frozenset(self.components.items())))

    def __le__(self, other: ClopenSubobject) -> bool:
        return sub_leq(self, other)

    def __and__(self, other: ClopenSubobject) -> ClopenSubobject:
        return sub_meet(self, other)

    def __or__(self, other: ClopenSubobject) -> ClopenSubobject:
        return sub_join(self, other)

    def __repr__(self) -> str:
        return f'ClopenSubobject({self.to_literal()!r})'

    def projection_at(self, key: ContextId) -> Projection:
        return alpha(self.family[key], self.components[key])

    def is_top(self) -> bool:
        return all(len(s) == len(self.family[k]) for k, s in self.components.items())

    def is_bottom(self) -> bool:
        return not any(self.components.values())

    def to_literal(self) -> Union[str, Dict[int, List[int]]]:
        if self.is_top():
            return 'top'
        if self.is_bottom():
            return 'bottom'
        return {self.family.index(k): sorted(s) for k, s in self.components.items()}


def projection_at(s: ClopenSubobject, key: ContextId) -> Projection:
    return s.projection_at(key)


def top(family: ContextFamily) -> ClopenSubobject:
    return ClopenSubobject(family, {k: range(len(family[k])) for k in family.ids}, check=False)


def bottom(family: ContextFamily) -> ClopenSubobject:
    return ClopenSubobject(family, {}, check=False)


def downward_closure(family: ContextFamily, components: Components) -> ClopenSubobject:
    """Smallest subobject containing the given components."""
    closed: Dict[ContextId, set] = {k: set(components.get(k, ())) for k in family.ids}
    for small, large in family.order:
        if small == large:
            continue
        mapping = family.restriction(small, large)
        closed[small].update(mapping[b] for b in components.get(large, ()))
    return ClopenSubobject(family, closed, check=False)


def complete_component(family: ContextFamily, key: ContextId, selected: Iterable[int]) -> ClopenSubobject:
    """Smallest subobject whose component at ``key`` is ``selected``."""
    return downward_closure(family, {key: frozenset(selected)})


def outer_daseinisation(p: Projection, family: ContextFamily) -> ClopenSubobject:
    """Per context, the blocks overlapping ``p``: the smallest projection of the context above ``p``."""
    if p.dim != family.dim:
        raise DimensionMismatch(f'Projection of dimension {p.dim} does not match family of dimension {family.dim}.')
    threshold = tolerances().overlap
    components = {}
    for v in family:
        components[v.id] = {i for i, q in enumerate(v.blocks) if frobenius(q.matrix @ p.matrix) > threshold}
    return ClopenSubobject(family, components, check=False)


def _same_family(s: ClopenSubobject, t: ClopenSubobject) -> None:
    if s.family != t.family:
        raise FamilyMismatch('Subobjects live on different context families.')


def sub_leq(s: ClopenSubobject, t: ClopenSubobject) -> bool:
    _same_family(s, t)
    return all(s.components[k] <= t.components[k] for k in s.family.ids)


def sub_meet(s: ClopenSubobject, t: ClopenSubobject) -> ClopenSubobject:
    _same_family(s, t)
    return ClopenSubobject(s.family, {k: s.components[k] & t.components[k] for k in s.family.ids}, check=False)


def sub_join(s: ClopenSubobject, t: ClopenSubobject) -> ClopenSubobject:
    _same_family(s, t)
    return ClopenSubobject(s.family, {k: s.components[k] | t.components[k] for k in s.family.ids}, check=False)


def heyting_implies(s: ClopenSubobject, t: ClopenSubobject) -> ClopenSubobject:
    """Largest ``R`` with ``R & s <= t``."""
    _same_family(s, t)
    family = s.family
    components = {}
    for key in family.ids:
        below = family.below(key)
        selected = set()
        for b in range(len(family[key])):
            if all(family.restriction(small, key)[b] in t.components[small]
                   or family.restriction(small, key)[b] not in s.components[small] for small in below):
                selected.add(b)
        components[key] = selected
    return ClopenSubobject(family, components, check=False)


def coheyting_subtract(s: ClopenSubobject, t: ClopenSubobject) -> ClopenSubobject:
    """Smallest ``R`` with ``s <= t | R``."""
    _same_family(s, t)
    return downward_closure(s.family, {k: s.components[k] - t.components[k] for k in s.family.ids})


def heyting_negation(s: ClopenSubobject) -> ClopenSubobject:
    return heyting_implies(s, bottom(s.family))


def coheyting_negation(s: ClopenSubobject) -> ClopenSubobject:
    return coheyting_subtract(top(s.family), s)


def enumerate_subobjects(family: ContextFamily, limit: int = 16) -> Iterator[ClopenSubobject]:
    """Every subobject of a small family.

    ``limit`` caps the total number of blocks, since the candidates grow as ``2**blocks``.
    """
    total = sum(len(v) for v in family)
    if total > limit:
        raise ValueError(f'Family has {total} blocks; enumerating subobjects is capped at {limit}.')
    choices = []
    for v in family:
        blocks = range(len(v))
        choices.append([frozenset(c) for r in range(len(v) + 1) for c in itertools.combinations(blocks, r)])
    for combination in itertools.product(*choices):
        components = dict(zip(family.ids, combination))
        if is_subobject(family, components):
            yield ClopenSubobject(family, components, check=False)


def random_subobject(family: ContextFamily, rng: np.random.Generator,
                     density: Optional[float] = None) -> ClopenSubobject:
    """Downward closure of randomly selected blocks; ``density`` is the selection probability."""
    if density is None:
        density = float(rng.uniform(0.1, 0.6))
    components = {}
    for v in family:
        components[v.id] = {i for i in range(len(v)) if rng.random() < density}
    return downward_closure(family, components)


__all__ = [
    'ClopenSubobject',
    'alpha',
    'alpha_inv',
    'bottom',
    'coheyting_negation',
    'coheyting_subtract',
    'complete_component',
    'downward_closure',
    'enumerate_subobjects',
    'heyting_implies',
    'heyting_negation',
    'is_subobject',
    'outer_daseinisation',
    'projection_at',
    'random_subobject',
    'sub_join',
    'sub_leq',
    'sub_meet',
    'top',
]
