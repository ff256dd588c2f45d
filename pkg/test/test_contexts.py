import itertools

import numpy as np
import pytest

from sigflow.contexts import Context, ContextFamily, close_family, conjugate_context, context_from_operators, \
    context_leq, context_meet
from sigflow.errors import CanonicalizationClash, DimensionMismatch, EmptySeed, NonCommuting, NotComparable, \
    TrivialContext
from sigflow.matrix import HermitianOperator, Projection, UnitaryOperator

from .utils.randomized import coarsen, context_of, random_context, random_family, random_unitary

E1, E2, E3 = (Projection(np.diag(v)) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1]))
E23 = Projection(np.diag([0, 1, 1]))
E12 = Projection(np.diag([1, 1, 0]))

FINE = Context([E1, E2, E3])
COARSE = Context([E1, E23])
OTHER_COARSE = Context([E12, E3])


def _rotated_fine(theta):
    c, s = np.cos(theta), np.sin(theta)
    f = np.array([0, c, s])
    g = np.array([0, -s, c])
    return Context([E1, Projection(np.outer(f, f)), Projection(np.outer(g, g))])


def test_context_validation():
    with pytest.raises(TrivialContext):
        Context([Projection.identity(2)])
    with pytest.raises(TrivialContext):
        Context([E1, E2])
    with pytest.raises(TrivialContext):
        Context([E12, E23])
    with pytest.raises(DimensionMismatch):
        Context([Projection(np.diag([1, 0])), E23])


def test_canonical_order_and_id():
    shuffled = Context([E3, E1, E2])
    assert shuffled == FINE
    assert shuffled.id == FINE.id
    assert [p.rank for p in COARSE.blocks] == [1, 2]
    assert len(str(FINE.id)) == 12
    assert FINE.id != COARSE.id


@pytest.mark.parametrize('ops, ranks', [
    ([[[1, 0], [0, -1]]], (1, 1)),
    ([np.diag([1, 1, 2])], (1, 2)),
    ([np.diag([1, 1, 2]), np.diag([1, 2, 2])], (1, 1, 1)),
    ([np.diag([1, 1, 2, 2]), np.diag([5, 5, 5, 7])], (1, 1, 2)),
], ids=['sigma-z', 'degenerate', 'refined', 'partial'])
def test_context_from_operators(ops, ranks):
    v = context_from_operators([HermitianOperator(a) for a in ops])
    assert v.ranks == ranks


def test_context_from_operators_errors():
    with pytest.raises(NonCommuting):
        context_from_operators([HermitianOperator([[0, 1], [1, 0]]), HermitianOperator([[1, 0], [0, -1]])])
    with pytest.raises(TrivialContext):
        context_from_operators([HermitianOperator(2 * np.eye(3))])
    with pytest.raises(TrivialContext):
        context_from_operators([])


def test_context_leq():
    assert context_leq(COARSE, FINE)
    assert not context_leq(FINE, COARSE)
    assert context_leq(FINE, FINE)
    assert not context_leq(COARSE, OTHER_COARSE)


@pytest.mark.parametrize('v, w, expected', [
    (FINE, COARSE, COARSE),
    (COARSE, OTHER_COARSE, None),
    (FINE, _rotated_fine(0.3), COARSE),
    (FINE, FINE, FINE),
], ids=['comparable', 'trivial', 'rotated', 'self'])
def test_context_meet(v, w, expected):
    meet = context_meet(v, w)
    if expected is None:
        assert meet is None
    else:
        assert meet == expected


def test_qubit_meet_is_trivial():
    diagonal = Context([Projection(np.diag([1, 0])), Projection(np.diag([0, 1]))])
    hadamard = Context([Projection(np.full((2, 2), 0.5)), Projection(np.array([[0.5, -0.5], [-0.5, 0.5]]))])
    assert context_meet(diagonal, hadamard) is None


@pytest.mark.parametrize('seed', range(10))
def test_meet_is_below_both(seed):
    rng = np.random.default_rng(seed)
    v = random_context(rng, 4, 4)
    w = coarsen(rng, v)
    assert w is not None
    u = random_context(rng, 4)
    assert context_meet(v, w) == w
    meet = context_meet(v, u)
    if meet is not None:
        assert context_leq(meet, v) and context_leq(meet, u)


def test_conjugate_context():
    swap = UnitaryOperator(np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]]))
    assert conjugate_context(swap, FINE) == FINE
    assert conjugate_context(swap, COARSE) == COARSE
    assert conjugate_context(swap, OTHER_COARSE) == Context([Projection(np.diag([1, 0, 1])), E2])


def test_close_family():
    family = close_family([FINE, _rotated_fine(0.3)])
    assert len(family) == 3
    assert COARSE.id in family
    assert family.is_closed()
    assert len(family.covering_pairs()) == 2
    assert family.leq(COARSE.id, FINE.id)
    assert not family.leq(FINE.id, COARSE.id)
    assert family.below(FINE.id) == sorted([COARSE.id, FINE.id])


def test_family_restriction():
    family = ContextFamily([FINE, COARSE])
    mapping = family.restriction(COARSE.id, FINE.id)
    for i, p in enumerate(FINE.blocks):
        q = COARSE.blocks[mapping[i]]
        assert np.allclose(q.matrix @ p.matrix, p.matrix)
    assert family.restriction(FINE.id, FINE.id) == tuple(range(3))
    with pytest.raises(NotComparable):
        family.restriction(FINE.id, COARSE.id)


def test_family_equality_and_locate():
    a = ContextFamily([FINE, COARSE])
    b = ContextFamily([COARSE, FINE, FINE])
    assert a == b
    assert len(b) == 2
    assert a.locate(Context([E23, E1])) == COARSE.id
    assert a.locate(OTHER_COARSE) is None
    literal = a.to_literal()
    assert len(literal['contexts']) == 2
    assert literal['order'] == [[a.index(COARSE.id), a.index(FINE.id)]]


def test_close_family_errors():
    with pytest.raises(EmptySeed):
        close_family([])
    with pytest.raises(DimensionMismatch):
        close_family([FINE, Context([Projection(np.diag([1, 0])), Projection(np.diag([0, 1]))])])


def test_canonicalization_clash():
    # rounds to the same grid as FINE but is a different context
    with pytest.raises(CanonicalizationClash):
        close_family([FINE, _rotated_fine(1e-7)])


@pytest.mark.parametrize('seed', range(10))
def test_random_family_is_closed(seed):
    rng = np.random.default_rng(seed)
    family = random_family(rng, int(rng.integers(2, 5)), size=4)
    assert family.is_closed()
    assert close_family(list(family)) == family
    for small, large in family.order:
        assert context_leq(family[small], family[large])


@pytest.mark.parametrize('seed', range(5))
def test_family_conjugation_preserves_order(seed):
    rng = np.random.default_rng(seed)
    family = random_family(rng, 4, size=4)
    u = random_unitary(rng, 4)
    image = ContextFamily(conjugate_context(u, v) for v in family)
    assert len(image) == len(family)
    assert len(image.order) == len(family.order)


def _straddling_pair():
    # (0, 0) entries just either side of a half step of the key grid
    pair = []
    for delta in (-1e-12, 1e-12):
        c = 0.2500005 + delta
        psi = np.array([np.sqrt(c), np.sqrt(1 - c)])
        pair.append(context_of(Projection(np.outer(psi, psi))))
    return pair


def test_equal_contexts_across_key_grid_boundary():
    a, b = _straddling_pair()
    assert a.id != b.id
    assert a.close_to(b)

    family = ContextFamily([a, b])
    assert len(family) == 1
    assert family.locate(b) == a.id
    assert family.covering_pairs() == []
    assert close_family([a, b]) == family


@pytest.mark.parametrize('seed', range(10))
def test_meet_is_greatest_lower_bound(seed):
    rng = np.random.default_rng(seed)
    family = random_family(rng, 4, size=4)
    for v, w in itertools.combinations(family, 2):
        meet = context_meet(v, w)
        lower = [u for u in family if context_leq(u, v) and context_leq(u, w)]
        if meet is None:
            assert lower == []
        else:
            assert all(context_leq(u, meet) for u in lower)
            assert family.locate(meet) in {u.id for u in lower}


@pytest.mark.parametrize('seed', range(5))
def test_context_from_operators_ignores_operator_order(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 4).matrix
    ops = [HermitianOperator(u @ np.diag(values) @ u.conj().T)
           for values in ([1, 1, 2, 2], [5, 7, 5, 7], [3, 3, 3, 4])]
    contexts = [context_from_operators(list(order)) for order in itertools.permutations(ops)]
    assert contexts[0].ranks == (1, 1, 1, 1)
    assert all(v.id == contexts[0].id for v in contexts)
