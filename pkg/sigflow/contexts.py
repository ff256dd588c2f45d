"""Contexts (resolutions of the identity) and finite families of them.

A context stands for the abelian subalgebra generated by its blocks, the minimal
projections. Families are finite fragments of the context poset, closed under non-trivial
meets, with the inclusion order precomputed.
"""
from __future__ import annotations

import hashlib
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

from .errors import (CanonicalizationClash, DimensionMismatch, EmptySeed, NonCommuting, NotComparable,
                     TrivialContext)
from .matrix import HermitianOperator, Projection, UnitaryOperator, conjugate, frobenius, grid_key, \
    projection_leq, purify, spectral_decompose
from .settings import tolerances
from .utils import matrix_literal

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ContextId:
    key: bytes

    def __str__(self) -> str:
        return hashlib.sha1(self.key).hexdigest()[:12]

    def __repr__(self) -> str:
        return f'ContextId({self})'


def _block_key(p: Projection) -> Tuple[int, Tuple[int, ...]]:
    return p.rank, tuple(int(x) for x in grid_key(p))


class Context:
    """A resolution of the identity into at least two pairwise orthogonal projections.

    Blocks are kept in canonical order: by rank, then by their entries rounded to the
    ``key_rounding`` grid.
    """

    __slots__ = ('blocks', 'dim', 'id')

    blocks: Tuple[Projection, ...]
    dim: int
    id: ContextId

    def __init__(self, blocks: Sequence[Projection]) -> None:
        tol = tolerances()
        if len(blocks) < 2:
            raise TrivialContext('A context needs at least two blocks.')
        dims = {p.dim for p in blocks}
        if len(dims) != 1:
            raise DimensionMismatch(f'Blocks have different dimensions: {sorted(dims)}')
        dim = dims.pop()
        if any(p.rank < 1 for p in blocks):
            raise TrivialContext('Context blocks must be non-zero.')
        for p, q in itertools.combinations(blocks, 2):
            if frobenius(p.matrix @ q.matrix) > tol.validation:
                raise TrivialContext('Context blocks are not pairwise orthogonal.')
        if frobenius(sum(p.matrix for p in blocks) - np.eye(dim)) > tol.validation:
            raise TrivialContext('Context blocks do not sum to the identity.')

        ordered = sorted(blocks, key=_block_key)
        key = b''.join(np.array([p.rank], dtype=np.int64).tobytes() + grid_key(p).tobytes() for p in ordered)
        object.__setattr__(self, 'blocks', tuple(ordered))
        object.__setattr__(self, 'dim', dim)
        object.__setattr__(self, 'id', ContextId(key))

    def __setattr__(self, name, value):
        raise AttributeError('Context is immutable.')

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, Context) and self.id == other.id

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return f'Context({self.id}, ranks={self.ranks})'

    @property
    def ranks(self) -> Tuple[int, ...]:
        return tuple(p.rank for p in self.blocks)

    def close_to(self, other: Context) -> bool:
        if self.dim != other.dim or self.ranks != other.ranks:
            return False
        threshold = tolerances().comparison
        # blocks near a rounding boundary may sort differently
        return all(any(p.close_to(q, threshold) for q in other.blocks) for p in self.blocks)

    def match_block(self, p: Projection) -> int:
        """Index of the block equal to ``p`` within ``comparison`` tolerance."""
        distances = [frobenius(q.matrix - p.matrix) for q in self.blocks]
        best = int(np.argmin(distances))
        if distances[best] > tolerances().comparison:
            raise ValueError(f'Projection is not a block of {self.id}.')
        return best

    def to_literal(self) -> List:
        return [matrix_literal(p.matrix) for p in self.blocks]


def _check_same_dim(*contexts: Context) -> None:
    dims = {v.dim for v in contexts}
    if len(dims) != 1:
        raise DimensionMismatch(f'Contexts have different dimensions: {sorted(dims)}')


def context_from_operators(ops: Sequence[HermitianOperator]) -> Context:
    """The context generated by pairwise commuting self-adjoint operators.

    Raises:
        NonCommuting: If two operators do not commute.
        TrivialContext: If every operator is a multiple of the identity.
    """
    if not ops:
        raise TrivialContext('No operators given.')
    tol = tolerances()
    dims = {a.dim for a in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f'Operators have different dimensions: {sorted(dims)}')
    for a, b in itertools.combinations(ops, 2):
        if frobenius(a.matrix @ b.matrix - b.matrix @ a.matrix) > tol.comparison:
            logger.error('Operators do not commute.')
            raise NonCommuting('Operators do not commute.')

    blocks = [Projection.identity(dims.pop())]
    for a in ops:
        refined = []
        for b in blocks:
            for _, e in spectral_decompose(a):
                piece = b.matrix @ e.matrix @ b.matrix
                if np.trace(piece).real > 0.5:
                    refined.append(purify(piece))
        blocks = refined
    if len(blocks) < 2:
        raise TrivialContext('Operators generate the trivial algebra.')
    return Context(blocks)


def context_leq(vp: Context, v: Context) -> bool:
    """Whether ``vp`` is a subalgebra of ``v``, i.e. every block of ``vp`` is a sum of blocks of ``v``."""
    _check_same_dim(vp, v)
    threshold = tolerances().comparison
    for q in vp.blocks:
        covered = sum((p.matrix for p in v.blocks if projection_leq(p, q)), np.zeros_like(q.matrix))
        if frobenius(covered - q.matrix) > threshold:
            return False
    return True


def context_meet(v: Context, w: Context) -> Optional[Context]:
    """Intersection of two contexts, or ``None`` when it is the trivial algebra."""
    _check_same_dim(v, w)
    threshold = tolerances().overlap
    nodes = [('v', i) for i in range(len(v))] + [('w', j) for j in range(len(w))]
    components = UnionFind(nodes)
    for (i, p), (j, q) in itertools.product(enumerate(v.blocks), enumerate(w.blocks)):
        if frobenius(p.matrix @ q.matrix) > threshold:
            components.union(('v', i), ('w', j))

    blocks = []
    for component in components.to_sets():
        total = sum(v.blocks[i].matrix for side, i in component if side == 'v')
        blocks.append(purify(total))
    if len(blocks) < 2:
        return None
    return Context(blocks)


def conjugate_context(u: UnitaryOperator, v: Context) -> Context:
    if u.dim != v.dim:
        raise DimensionMismatch(f'Unitary of dimension {u.dim} cannot act on a context of dimension {v.dim}.')
    return Context([Projection(conjugate(u, p)) for p in v.blocks])


class ContextFamily:
    """A finite set of contexts with the inclusion order computed for every pair.

    Iteration order is by ``ContextId``. Families compare equal when they hold the same
    context ids.
    """

    def __init__(self, contexts: Iterable[Context]) -> None:
        members: Dict[ContextId, Context] = {}
        for v in contexts:
            _insert(members, v)
        if not members:
            raise EmptySeed('A context family needs at least one context.')
        _check_same_dim(*members.values())

        self._ids: Tuple[ContextId, ...] = tuple(sorted(members))
        self._contexts = {k: members[k] for k in self._ids}
        self._index = {k: n for n, k in enumerate(self._ids)}
        self.dim: int = next(iter(members.values())).dim

        graph = nx.DiGraph()
        graph.add_nodes_from(self._ids)
        for a, b in itertools.permutations(self._ids, 2):
            if context_leq(self._contexts[a], self._contexts[b]):
                graph.add_edge(a, b)
        self._graph = graph
        self._restrictions: Dict[Tuple[ContextId, ContextId], Tuple[int, ...]] = {}
        logger.debug(f'Context family with {len(self)} contexts and {graph.number_of_edges()} strict order pairs.')

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self) -> Iterator[Context]:
        return (self._contexts[k] for k in self._ids)

    def __contains__(self, key: object) -> bool:
        return key in self._contexts

    def __getitem__(self, key: ContextId) -> Context:
        return self._contexts[key]

    def __eq__(self, other) -> bool:
        return isinstance(other, ContextFamily) and self._ids == other._ids

    def __hash__(self) -> int:
        return hash(self._ids)

    def __repr__(self) -> str:
        return f'ContextFamily(size={len(self)}, dim={self.dim})'

    @property
    def ids(self) -> Tuple[ContextId, ...]:
        return self._ids

    @property
    def order(self) -> FrozenSet[Tuple[ContextId, ContextId]]:
        """All pairs ``(V', V)`` with ``V' <= V``, reflexive pairs included."""
        return frozenset(self._graph.edges) | frozenset((k, k) for k in self._ids)

    def index(self, key: ContextId) -> int:
        return self._index[key]

    def leq(self, a: ContextId, b: ContextId) -> bool:
        return a == b or self._graph.has_edge(a, b)

    def below(self, key: ContextId) -> List[ContextId]:
        """Members ``V'`` with ``V' <= V``, the context itself included, in family order."""
        return [k for k in self._ids if self.leq(k, key)]

    def covering_pairs(self) -> List[Tuple[ContextId, ContextId]]:
        reduced = nx.transitive_reduction(self._graph)
        return sorted(reduced.edges)

    def restriction(self, vp: ContextId, v: ContextId) -> Tuple[int, ...]:
        """Restriction map on characters, as block index of ``v`` -> block index of ``vp``."""
        cached = self._restrictions.get((vp, v))
        if cached is not None:
            return cached
        if not self.leq(vp, v):
            raise NotComparable(f'Context {vp} is not below {v}.')
        small, large = self._contexts[vp], self._contexts[v]
        mapping = []
        for p in large.blocks:
            targets = [n for n, q in enumerate(small.blocks) if projection_leq(p, q)]
            if len(targets) != 1:
                raise NotComparable(f'Block of {v} has {len(targets)} dominating blocks in {vp}.')
            mapping.append(targets[0])
        self._restrictions[(vp, v)] = tuple(mapping)
        return self._restrictions[(vp, v)]

    def locate(self, context: Context) -> Optional[ContextId]:
        """The member equal to ``context`` within ``comparison`` tolerance, if any."""
        if context.id in self._contexts:
            return context.id
        for k in self._ids:
            if self._contexts[k].close_to(context):
                return k
        return None

    def is_closed(self) -> bool:
        for a, b in itertools.combinations(self._ids, 2):
            meet = context_meet(self._contexts[a], self._contexts[b])
            if meet is not None and self.locate(meet) is None:
                return False
        return True

    def extended(self, contexts: Iterable[Context]) -> ContextFamily:
        return close_family(list(self) + list(contexts))

    def to_literal(self) -> Dict[str, List]:
        return {
            'contexts': [v.to_literal() for v in self],
            'order': [[self._index[a], self._index[b]] for a, b in sorted(self._graph.edges)],
        }


def _insert(members: Dict[ContextId, Context], v: Context) -> bool:
    existing = members.get(v.id)
    if existing is None:
        # equal contexts can straddle a rounding boundary of the key grid
        if any(w.close_to(v) for w in members.values()):
            return False
        members[v.id] = v
        return True
    if not existing.close_to(v):
        logger.error(f'Two different contexts share the id {v.id}.')
        raise CanonicalizationClash(f'Two different contexts share the id {v.id}.')
    return False


def close_family(seed: Sequence[Context]) -> ContextFamily:
    """Smallest family containing ``seed`` and closed under non-trivial meets."""
    if not seed:
        raise EmptySeed('Cannot close an empty seed.')
    _check_same_dim(*seed)

    members: Dict[ContextId, Context] = {}
    for v in seed:
        _insert(members, v)

    done = set()
    while True:
        added = False
        for a, b in itertools.combinations(sorted(members), 2):
            if (a, b) in done:
                continue
            done.add((a, b))
            meet = context_meet(members[a], members[b])
            if meet is not None and _insert(members, meet):
                added = True
        if not added:
            break
    return ContextFamily(members.values())


__all__ = [
    'Context',
    'ContextFamily',
    'ContextId',
    'close_family',
    'conjugate_context',
    'context_from_operators',
    'context_leq',
    'context_meet',
]
