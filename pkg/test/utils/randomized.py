from typing import List, Optional

import numpy as np

from sigflow.contexts import Context, ContextFamily, close_family
from sigflow.matrix import DensityState, HermitianOperator, Projection, UnitaryOperator


def _gaussian(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng: np.random.Generator, d: int) -> HermitianOperator:
    a = _gaussian(rng, d)
    return HermitianOperator((a + a.conj().T) / 2)


def random_unitary(rng: np.random.Generator, d: int) -> UnitaryOperator:
    q, r = np.linalg.qr(_gaussian(rng, d))
    phases = np.diag(r) / np.abs(np.diag(r))
    return UnitaryOperator(q * phases)


def random_projection(rng: np.random.Generator, d: int, rank: Optional[int] = None) -> Projection:
    if rank is None:
        rank = int(rng.integers(1, d))
    v = random_unitary(rng, d).matrix[:, :rank]
    return Projection(v @ v.conj().T)


def random_state(rng: np.random.Generator, d: int) -> DensityState:
    g = _gaussian(rng, d)
    rho = g @ g.conj().T
    return DensityState(rho / np.trace(rho).real)


def random_context(rng: np.random.Generator, d: int, blocks: Optional[int] = None) -> Context:
    """Random basis grouped into ``blocks`` non-empty blocks."""
    if blocks is None:
        blocks = int(rng.integers(2, d + 1))
    basis = random_unitary(rng, d).matrix
    labels = np.concatenate([np.arange(blocks), rng.integers(0, blocks, size=d - blocks)])
    rng.shuffle(labels)
    projections = []
    for b in range(blocks):
        v = basis[:, labels == b]
        projections.append(Projection(v @ v.conj().T))
    return Context(projections)


def context_of(p: Projection) -> Context:
    return Context([p, Projection(np.eye(p.dim) - p.matrix)])


def coarsen(rng: np.random.Generator, v: Context) -> Optional[Context]:
    """Merge two random blocks of ``v``; ``None`` if that leaves a single block."""
    if len(v) < 3:
        return None
    i, j = rng.choice(len(v), size=2, replace=False)
    merged = Projection(v.blocks[i].matrix + v.blocks[j].matrix)
    return Context([merged] + [p for n, p in enumerate(v.blocks) if n not in (i, j)])


def random_family(rng: np.random.Generator, d: int, size: int = 3, extra: Optional[List[Context]] = None) -> ContextFamily:
    """Closed family from random contexts and some of their coarse-grainings."""
    seed = list(extra or [])
    while len(seed) < size:
        v = random_context(rng, d, d)
        seed.append(v)
        coarse = coarsen(rng, v)
        if coarse is not None and len(seed) < size:
            seed.append(coarse)
    return close_family(seed)
