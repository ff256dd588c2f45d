"""Gelfand spectra, restriction of characters and the global-section search."""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .contexts import Context, ContextFamily, ContextId, context_leq
from .errors import FamilyMismatch, NotComparable
from .matrix import projection_leq
from .settings import default_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Character:
    """The character of a context that sends block ``block_index`` to 1."""

    context: ContextId
    block_index: int


def spectrum(v: Context) -> List[Character]:
    return [Character(v.id, i) for i in range(len(v))]


def restrict_character(lam: Character, v: Context, vp: Context) -> Character:
    """Restrict ``lam``, a character of ``v``, to the subcontext ``vp``.

    Raises:
        NotComparable: If ``vp`` is not a subcontext of ``v``.
    """
    if lam.context != v.id:
        raise ValueError(f'Character belongs to {lam.context}, not to {v.id}.')
    if not 0 <= lam.block_index < len(v):
        raise ValueError(f'Block index {lam.block_index} out of range for {v}.')
    if not context_leq(vp, v):
        raise NotComparable(f'Context {vp.id} is not below {v.id}.')
    p = v.blocks[lam.block_index]
    for n, q in enumerate(vp.blocks):
        if projection_leq(p, q):
            return Character(vp.id, n)
    raise NotComparable(f'No block of {vp.id} dominates block {lam.block_index} of {v.id}.')


@dataclass(frozen=True)
class GlobalSection:
    family: ContextFamily
    assignment: Mapping[ContextId, int]

    def character(self, key: ContextId) -> Character:
        return Character(key, self.assignment[key])

    def violations(self) -> List[Tuple[ContextId, ContextId]]:
        """Order pairs ``(V', V)`` whose assignments disagree under restriction."""
        if set(self.assignment) != set(self.family.ids):
            raise FamilyMismatch('Assignment does not cover the family.')
        bad = []
        for small, large in sorted(self.family.order):
            if small == large:
                continue
            if self.family.restriction(small, large)[self.assignment[large]] != self.assignment[small]:
                bad.append((small, large))
        return bad

    def is_consistent(self) -> bool:
        return not self.violations()

    def to_literal(self) -> Dict[int, int]:
        return {self.family.index(k): b for k, b in self.assignment.items()}


class SearchStatus(enum.Enum):
    FOUND = 'found'
    ABSENT = 'absent'
    EXHAUSTED = 'exhausted'


@dataclass
class SearchResult:
    status: SearchStatus
    section: Optional[GlobalSection] = None
    nodes: int = 0
    elapsed: float = field(default=0.0, compare=False)

    def __bool__(self) -> bool:
        return self.status is SearchStatus.FOUND


class _BudgetExhausted(Exception):
    pass


def search_order(family: ContextFamily) -> List[ContextId]:
    """Most refined contexts first, ties broken by id."""
    return sorted(family.ids, key=lambda k: (-len(family[k]), k))


def search_global_section(family: ContextFamily, budget: Optional[int] = None) -> SearchResult:
    """Backtracking search for a global section of the spectral presheaf over ``family``.

    Every tentative assignment of a block to a context counts as one node. Returns the first
    witness in search order, ``ABSENT`` after an exhaustive search, or ``EXHAUSTED`` once
    more than ``budget`` nodes have been visited.
    A branch is pruned as soon as two assigned contexts force different blocks on a context below both.
    """
    if budget is None:
        budget = int(default_config()['search']['budget'])
    order = search_order(family)

    # for each position, the comparable contexts assigned earlier and how to check them
    constraints: List[List[Tuple[int, bool, Tuple[int, ...]]]] = []
    for k, key in enumerate(order):
        checks = []
        for j in range(k):
            other = order[j]
            if family.leq(other, key):
                checks.append((j, True, family.restriction(other, key)))
            elif family.leq(key, other):
                checks.append((j, False, family.restriction(key, other)))
        constraints.append(checks)
    # for each position, the later contexts below it, whose block it already fixes
    forced: List[List[Tuple[int, Tuple[int, ...]]]] = [[] for _ in order]
    for k, key in enumerate(order):
        for j in range(k + 1, len(order)):
            if family.leq(order[j], key):
                forced[k].append((j, family.restriction(order[j], key)))

    values = [0] * len(order)
    implied: List[List[int]] = [[] for _ in order]
    nodes = 0

    def consistent(k: int, b: int) -> bool:
        for j, below, mapping in constraints[k]:
            if below and mapping[b] != values[j]:
                return False
            if not below and mapping[values[j]] != b:
                return False
        return all(v == b for v in implied[k])

    def propagate(k: int, b: int) -> List[int]:
        pushed = []
        for j, mapping in forced[k]:
            value = mapping[b]
            pushed.append(j)
            implied[j].append(value)
            if implied[j][0] != value:
                break
        return pushed

    def extend(k: int) -> bool:
        nonlocal nodes
        if k == len(order):
            return True
        for b in range(len(family[order[k]])):
            nodes += 1
            if nodes > budget:
                raise _BudgetExhausted
            if not consistent(k, b):
                continue
            values[k] = b
            pushed = propagate(k, b)
            clash = any(implied[j][0] != implied[j][-1] for j in pushed)
            if not clash and extend(k + 1):
                return True
            for j in pushed:
                implied[j].pop()
        return False

    start = time.perf_counter()
    try:
        found = extend(0)
    except _BudgetExhausted:
        elapsed = time.perf_counter() - start
        logger.warning(f'Global section search gave up after {budget} nodes.')
        return SearchResult(SearchStatus.EXHAUSTED, None, nodes, elapsed)
    elapsed = time.perf_counter() - start

    if not found:
        logger.info(f'No global section over {len(family)} contexts ({nodes} nodes).')
        return SearchResult(SearchStatus.ABSENT, None, nodes, elapsed)
    section = GlobalSection(family, {key: values[k] for k, key in enumerate(order)})
    logger.info(f'Found a global section over {len(family)} contexts ({nodes} nodes).')
    return SearchResult(SearchStatus.FOUND, section, nodes, elapsed)


def find_global_section(family: ContextFamily, budget: Optional[int] = None) -> Optional[GlobalSection]:
    """The first global section in search order, or ``None`` if there is none (or the budget ran out)."""
    return search_global_section(family, budget).section


__all__ = [
    'Character',
    'GlobalSection',
    'SearchResult',
    'SearchStatus',
    'find_global_section',
    'restrict_character',
    'search_global_section',
    'search_order',
    'spectrum',
]
