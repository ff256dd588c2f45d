"""Dense complex matrices and the validated operator types built on them.

Every operator wraps a read-only ``numpy`` array; instances are immutable and safe to share
between threads.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, List, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, InvalidOperator, NonHermitian
from .settings import tolerances

logger = logging.getLogger(__name__)


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def as_matrix(entries: Any) -> np.ndarray:
    """Validate ``entries`` as a square, finite complex matrix and return a read-only copy."""
    matrix = np.array(entries, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise InvalidOperator(f'Expected a non-empty square matrix, got shape {matrix.shape}.')
    if not np.all(np.isfinite(matrix)):
        raise InvalidOperator('Matrix has NaN or infinite entries.')
    matrix.setflags(write=False)
    return matrix


def _hermitian_part(matrix: np.ndarray) -> np.ndarray:
    d = matrix.shape[0]
    if frobenius(matrix - matrix.conj().T) > tolerances().hermitian * d:
        raise NonHermitian(f'Matrix is not Hermitian (||M - M*|| = {frobenius(matrix - matrix.conj().T):.3e}).')
    h = (matrix + matrix.conj().T) / 2
    h.setflags(write=False)
    return h


def _matrix_of(a: Union[np.ndarray, '_Operator']) -> np.ndarray:
    return a.matrix if isinstance(a, _Operator) else np.asarray(a, dtype=complex)


@dataclass(frozen=True, eq=False)
class _Operator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def close_to(self, other: Union[np.ndarray, _Operator], tol: float) -> bool:
        m = _matrix_of(other)
        return m.shape == self.matrix.shape and frobenius(self.matrix - m) <= tol

    def __repr__(self) -> str:
        return f'{type(self).__name__}(dim={self.dim})'


@dataclass(frozen=True, eq=False)
class HermitianOperator(_Operator):

    def __post_init__(self) -> None:
        object.__setattr__(self, 'matrix', _hermitian_part(as_matrix(self.matrix)))


@dataclass(frozen=True, eq=False)
class Projection(_Operator):
    rank: int = field(init=False, default=-1)

    def __post_init__(self) -> None:
        tol = tolerances()
        matrix = _hermitian_part(as_matrix(self.matrix))
        if frobenius(matrix @ matrix - matrix) > tol.validation:
            raise InvalidOperator('Matrix is not idempotent.')
        trace = float(np.trace(matrix).real)
        rank = int(round(trace))
        if abs(trace - rank) > tol.validation:
            raise InvalidOperator(f'Projection trace {trace} is not an integer.')
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'rank', rank)

    @classmethod
    def zero(cls, dim: int) -> Projection:
        return cls(np.zeros((dim, dim), dtype=complex))

    @classmethod
    def identity(cls, dim: int) -> Projection:
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[complex]]) -> Projection:
        """Projection onto the span of ``vectors`` (need not be orthonormal, must be independent)."""
        basis = np.array(vectors, dtype=complex).T
        q, _ = np.linalg.qr(basis)
        return cls(q @ q.conj().T)

    @property
    def is_zero(self) -> bool:
        return self.rank == 0


@dataclass(frozen=True, eq=False)
class UnitaryOperator(_Operator):

    def __post_init__(self) -> None:
        matrix = as_matrix(self.matrix)
        if frobenius(matrix @ matrix.conj().T - np.eye(matrix.shape[0])) > tolerances().validation:
            raise InvalidOperator('Matrix is not unitary.')
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def identity(cls, dim: int) -> UnitaryOperator:
        return cls(np.eye(dim, dtype=complex))

    def adjoint(self) -> UnitaryOperator:
        return UnitaryOperator(self.matrix.conj().T)

    def __matmul__(self, other: UnitaryOperator) -> UnitaryOperator:
        if self.dim != other.dim:
            raise DimensionMismatch(f'Cannot multiply unitaries of dimension {self.dim} and {other.dim}.')
        return UnitaryOperator(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class DensityState(_Operator):

    def __post_init__(self) -> None:
        tol = tolerances()
        matrix = _hermitian_part(as_matrix(self.matrix))
        if np.linalg.eigvalsh(matrix).min() < -tol.hermitian:
            raise InvalidOperator('Density matrix is not positive semidefinite.')
        if abs(np.trace(matrix).real - 1.0) > tol.validation:
            raise InvalidOperator('Density matrix does not have unit trace.')
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> DensityState:
        psi = np.array(vector, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidOperator('State vector is zero.')
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityState:
        return cls(np.eye(dim, dtype=complex) / dim)

    def expectation(self, a: Union[np.ndarray, _Operator]) -> float:
        return float(np.trace(self.matrix @ _matrix_of(a)).real)


def _check_dims(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise DimensionMismatch(f'Dimension mismatch: {sorted(shapes)}')


def spectral_decompose(h: HermitianOperator) -> List[Tuple[float, Projection]]:
    """Eigenvalues (strictly increasing) with their eigenprojections.

    Eigenvalues closer than ``tolerances().comparison`` to their neighbour are merged into
    one cluster; its eigenvalue is the cluster mean.
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(h)
    values, vectors = np.linalg.eigh(h.matrix)
    threshold = tolerances().comparison

    clusters: List[List[int]] = []
    for k in range(len(values)):
        if clusters and values[k] - values[clusters[-1][-1]] <= threshold:
            clusters[-1].append(k)
        else:
            clusters.append([k])

    result = []
    for cluster in clusters:
        v = vectors[:, cluster]
        result.append((float(np.mean(values[cluster])), Projection(v @ v.conj().T)))
    return result


def unitary_exp(h: HermitianOperator, t: float) -> UnitaryOperator:
    """``exp(itH)`` as a sum of phases times eigenprojections."""
    u = sum(np.exp(1j * t * value) * p.matrix for value, p in spectral_decompose(h))
    return UnitaryOperator(u)


def conjugate(u: Union[UnitaryOperator, np.ndarray], a: Union[np.ndarray, _Operator]) -> np.ndarray:
    um, am = _matrix_of(u), _matrix_of(a)
    _check_dims(um, am)
    return um @ am @ um.conj().T


def grid_key(a: Union[np.ndarray, _Operator]) -> np.ndarray:
    """Entries rounded to the ``key_rounding`` grid, row-major, real part before imaginary part."""
    scaled = _matrix_of(a) / tolerances().key_rounding
    return np.rint(np.stack([scaled.real, scaled.imag], axis=-1)).astype(np.int64).ravel()


def projection_leq(p: Projection, q: Projection) -> bool:
    _check_dims(p.matrix, q.matrix)
    return frobenius(q.matrix @ p.matrix - p.matrix) <= tolerances().validation


def range_projection(a: Union[np.ndarray, _Operator], threshold: float) -> Projection:
    """Projection onto the eigenvectors of the Hermitian ``a`` with eigenvalue above ``threshold``."""
    values, vectors = np.linalg.eigh(_hermitian_part(as_matrix(_matrix_of(a))))
    v = vectors[:, values > threshold]
    return Projection(v @ v.conj().T)


def purify(a: Union[np.ndarray, _Operator]) -> Projection:
    # snaps a near-projection onto the exact projection it approximates
    return range_projection(a, 0.5)


def projection_join(p: Projection, q: Projection) -> Projection:
    _check_dims(p.matrix, q.matrix)
    return range_projection(p.matrix + q.matrix, tolerances().overlap)


def orthocomplement(p: Projection) -> Projection:
    return Projection(np.eye(p.dim) - p.matrix)


def projection_meet(p: Projection, q: Projection) -> Projection:
    return orthocomplement(projection_join(orthocomplement(p), orthocomplement(q)))


def spectral_projection(h: HermitianOperator, low: float, high: float) -> Projection:
    """Spectral projection of ``h`` for the closed window ``[low, high]`` (with ``window`` slack)."""
    if low > high:
        raise ValueError(f'Empty window [{low}, {high}].')
    slack = tolerances().window
    total = np.zeros((h.dim, h.dim), dtype=complex)
    for value, p in spectral_decompose(h):
        if low - slack <= value <= high + slack:
            total = total + p.matrix
    return Projection(total)


__all__ = [
    'DensityState',
    'HermitianOperator',
    'Projection',
    'UnitaryOperator',
    'as_matrix',
    'conjugate',
    'frobenius',
    'grid_key',
    'orthocomplement',
    'projection_join',
    'projection_leq',
    'projection_meet',
    'purify',
    'range_projection',
    'spectral_decompose',
    'spectral_projection',
    'unitary_exp',
]
