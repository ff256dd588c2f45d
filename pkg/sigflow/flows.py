"""Unitary flows on the spectral presheaf, on clopen subobjects and on probability sections.

Sign conventions, for ``U_t = exp(itH)``:

========================  ===============================================
quantity                  at time ``t``
========================  ===============================================
proposition ``P_t``       ``U_{-t} P_0 U_t``
state ``rho_t``           ``U_t rho_0 U_t*``
subobject ``S_t``         ``act_on_subobject(U_{-t}, S_0)``, on ``U_{-t} F U_t``
section ``m_t``           ``act_on_section(U_t, m_0)``, on ``U_t F U_t*``
========================  ===============================================

With these, evolving the daseinisation of ``P_0`` gives the daseinisation of ``P_t``.
Conjugating a family produces another finite family; :func:`transport_family` materialises
it (or finds it inside an ``onto`` family) together with the block correspondence.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .contexts import Context, ContextFamily, ContextId, conjugate_context
from .errors import DimensionMismatch, FamilyMismatch, MissingContext
from .matrix import DensityState, HermitianOperator, Projection, UnitaryOperator, conjugate, frobenius, unitary_exp
from .measures import CPGlobalSection, pairing, section_from_state
from .settings import tolerances
from .subobjects import ClopenSubobject, outer_daseinisation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportedFamily:
    """A family together with its conjugate ``U F U*`` and the induced correspondences."""

    base: ContextFamily
    unitary: UnitaryOperator
    image: ContextFamily
    images: Dict[ContextId, ContextId]
    # base key -> (block index in base context -> block index in image context)
    blocks: Dict[ContextId, Tuple[int, ...]]

    def image_of(self, key: ContextId) -> ContextId:
        return self.images[key]

    def preimage_of(self, key: ContextId) -> ContextId:
        for base_key, image_key in self.images.items():
            if image_key == key:
                return base_key
        raise KeyError(key)


def transport_family(family: ContextFamily, u: UnitaryOperator,
                     onto: Optional[ContextFamily] = None) -> TransportedFamily:
    """Conjugate every context of ``family`` by ``u``.

    With ``onto`` the conjugates are looked up in that family, which must consist of
    exactly these conjugates.

    Raises:
        MissingContext: If a conjugate is not a member of ``onto``.
    """
    if u.dim != family.dim:
        raise DimensionMismatch(f'Unitary of dimension {u.dim} cannot act on a family of dimension {family.dim}.')
    conjugates = {v.id: conjugate_context(u, v) for v in family}

    if onto is None:
        image = ContextFamily(conjugates.values())
        images = {k: w.id for k, w in conjugates.items()}
    else:
        image = onto
        images = {}
        for k, w in conjugates.items():
            found = onto.locate(w)
            if found is None:
                logger.error(f'Conjugate of context {k} is not in the target family.')
                raise MissingContext(f'Conjugate of context {k} is not in the target family.')
            images[k] = found
        if set(images.values()) != set(onto.ids):
            raise FamilyMismatch('Target family is not the conjugate of the source family.')

    blocks = {}
    for v in family:
        target = image[images[v.id]]
        try:
            blocks[v.id] = tuple(target.match_block(Projection(conjugate(u, p))) for p in v.blocks)
        except ValueError as e:
            raise MissingContext(str(e)) from e
    return TransportedFamily(family, u, image, images, blocks)


def act_on_subobject(u: UnitaryOperator, s: ClopenSubobject,
                     onto: Optional[ContextFamily] = None) -> ClopenSubobject:
    """The subobject on ``U F U*`` whose component projection at ``U W U*`` is ``U P_W U*``."""
    transported = transport_family(s.family, u, onto)
    components = {}
    for key, mapping in transported.blocks.items():
        components[transported.images[key]] = {mapping[i] for i in s.components[key]}
    return ClopenSubobject(transported.image, components, check=False)


def act_on_section(u: UnitaryOperator, m: CPGlobalSection, onto: Optional[ContextFamily] = None) -> CPGlobalSection:
    """The section on ``U F U*`` giving block ``U p U*`` the probability ``m`` gives ``p``."""
    transported = transport_family(m.family, u, onto)
    values = {}
    for key, mapping in transported.blocks.items():
        vector = np.zeros(len(mapping))
        vector[list(mapping)] = m.values[key]
        values[transported.images[key]] = vector
    return CPGlobalSection(transported.image, values, check=False)


@dataclass(frozen=True)
class SpectralAutomorphism:
    """The automorphism of the spectral presheaf induced by a unitary ``U``.

    On the base it sends ``V`` to ``U V U*``; its component at ``V`` sends the character of
    block ``U p U*`` of ``U V U*`` back to the character of block ``p`` of ``V``.
    Composition follows the opposite group: ``A(U).compose(A(W)) == A(W @ U)``.
    """

    unitary: UnitaryOperator

    def base_map(self, v: Context) -> Context:
        return conjugate_context(self.unitary, v)

    def component(self, v: Context) -> Tuple[int, ...]:
        """Block index in ``U V U*`` -> block index in ``V``."""
        image = self.base_map(v)
        result = [0] * len(v)
        for i, p in enumerate(v.blocks):
            result[image.match_block(Projection(conjugate(self.unitary, p)))] = i
        return tuple(result)

    def inverse(self) -> SpectralAutomorphism:
        return SpectralAutomorphism(self.unitary.adjoint())

    def compose(self, other: SpectralAutomorphism) -> SpectralAutomorphism:
        """``self`` after ``other``."""
        return SpectralAutomorphism(other.unitary @ self.unitary)

    def on_subobject(self, s: ClopenSubobject, onto: Optional[ContextFamily] = None) -> ClopenSubobject:
        """Direct image of ``s``, living on ``U* F U``."""
        return act_on_subobject(self.unitary.adjoint(), s, onto)

    def close_to(self, other: SpectralAutomorphism) -> bool:
        # unitaries differing by a phase induce the same automorphism
        a, b = self.unitary.matrix, other.unitary.matrix
        overlap = np.trace(b.conj().T @ a)
        if abs(overlap) < 1e-12:
            return False
        phase = overlap / abs(overlap)
        return frobenius(a - phase * b) <= tolerances().comparison


@dataclass(frozen=True, eq=False)
class UnitaryFlow:
    """The one-parameter group ``t -> exp(itH)`` and the transports it induces.

    The last ``cache_size`` unitaries and transports are memoised per flow.
    """

    hamiltonian: HermitianOperator
    cache_size: int = 128
    _unitary: Callable[[float], UnitaryOperator] = field(init=False, repr=False)
    _transport: Callable[[ContextFamily, float], TransportedFamily] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cached = functools.lru_cache(maxsize=self.cache_size)
        object.__setattr__(self, '_unitary', cached(lambda t: unitary_exp(self.hamiltonian, t)))
        object.__setattr__(self, '_transport', cached(lambda family, t: transport_family(family, self.unitary(t))))

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def unitary(self, t: float) -> UnitaryOperator:
        return self._unitary(float(t))

    def automorphism(self, t: float) -> SpectralAutomorphism:
        return SpectralAutomorphism(self.unitary(t))

    def transport(self, family: ContextFamily, t: float) -> TransportedFamily:
        """``U_t F U_t*`` for a family and a time."""
        return self._transport(family, float(t))

    def evolve_projection(self, t: float, p: Projection) -> Projection:
        return Projection(conjugate(self.unitary(-t), p))


def _check_flow(flow: UnitaryFlow, dim: int) -> None:
    if flow.dim != dim:
        raise DimensionMismatch(f'Flow of dimension {flow.dim} does not match dimension {dim}.')


def heisenberg_evolve(flow: UnitaryFlow, t: float, s0: ClopenSubobject,
                      onto: Optional[ContextFamily] = None) -> ClopenSubobject:
    _check_flow(flow, s0.family.dim)
    if onto is None:
        onto = flow.transport(s0.family, -t).image
    return act_on_subobject(flow.unitary(-t), s0, onto)


def schrodinger_evolve_state(flow: UnitaryFlow, t: float, rho0: DensityState) -> DensityState:
    _check_flow(flow, rho0.dim)
    return DensityState(conjugate(flow.unitary(t), rho0))


def schrodinger_evolve_section(flow: UnitaryFlow, t: float, m: CPGlobalSection,
                               onto: Optional[ContextFamily] = None) -> CPGlobalSection:
    _check_flow(flow, m.family.dim)
    if onto is None:
        onto = flow.transport(m.family, t).image
    return act_on_section(flow.unitary(t), m, onto)


@dataclass(frozen=True)
class IdentityRow:
    context: ContextId
    image: ContextId
    lhs: float
    rhs: float
    discrepancy: float

    @classmethod
    def of(cls, context: ContextId, image: ContextId, lhs: float, rhs: float) -> IdentityRow:
        return cls(context, image, lhs, rhs, abs(lhs - rhs))


@dataclass
class IdentityReport:
    kind: str
    t: float
    rows: List[IdentityRow]

    @property
    def max_discrepancy(self) -> float:
        return max((row.discrepancy for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= tolerances().check

    @property
    def minima(self) -> Tuple[float, float]:
        return min(row.lhs for row in self.rows), min(row.rhs for row in self.rows)


def _log_report(report: IdentityReport) -> IdentityReport:
    if report.passed:
        logger.debug(f'{report.kind} at t={report.t}: max discrepancy {report.max_discrepancy:.3e}')
    else:
        logger.warning(f'{report.kind} fails at t={report.t}: max discrepancy {report.max_discrepancy:.3e}')
    return report


def check_compatibility(rho0: DensityState, s0: ClopenSubobject, flow: UnitaryFlow, t: float) -> IdentityReport:
    """Compare the evolved state on ``S_0`` at ``V`` with ``rho_0`` on ``S_t`` at ``U_{-t} V U_t``."""
    family = s0.family
    _check_flow(flow, family.dim)
    if rho0.dim != family.dim:
        raise DimensionMismatch(f'State of dimension {rho0.dim} does not match family of dimension {family.dim}.')
    backward = flow.transport(family, -t)

    schrodinger = pairing(section_from_state(schrodinger_evolve_state(flow, t, rho0), family), s0)
    s_t = heisenberg_evolve(flow, t, s0, onto=backward.image)
    heisenberg = pairing(section_from_state(rho0, backward.image), s_t)

    rows = [IdentityRow.of(k, backward.images[k], schrodinger[k], heisenberg[backward.images[k]]) for k in family.ids]
    return _log_report(IdentityReport('compat', float(t), rows))


def check_covariance(rho0: DensityState, s0: ClopenSubobject, flow: UnitaryFlow, t: float) -> IdentityReport:
    """Compare ``rho_0`` on ``S_0`` at ``V`` with ``rho_t`` on ``S_{-t}`` at ``U_t V U_{-t}``."""
    family = s0.family
    _check_flow(flow, family.dim)
    if rho0.dim != family.dim:
        raise DimensionMismatch(f'State of dimension {rho0.dim} does not match family of dimension {family.dim}.')
    forward = flow.transport(family, t)

    before = pairing(section_from_state(rho0, family), s0)
    s_minus = heisenberg_evolve(flow, -t, s0, onto=forward.image)
    after = pairing(section_from_state(schrodinger_evolve_state(flow, t, rho0), forward.image), s_minus)

    rows = [IdentityRow.of(k, forward.images[k], before[k], after[forward.images[k]]) for k in family.ids]
    return _log_report(IdentityReport('covariance', float(t), rows))


def check_flow_identity(p0: Projection, flow: UnitaryFlow, t: float, family: ContextFamily) -> IdentityReport:
    """Compare the evolved daseinisation of ``P_0`` with the daseinisation of ``P_t``, per context.

    Row values are the ranks of the two component projections; the discrepancy is the
    Frobenius distance between them.
    """
    _check_flow(flow, family.dim)
    backward = flow.transport(family, -t)
    evolved = heisenberg_evolve(flow, t, outer_daseinisation(p0, family), onto=backward.image)
    direct = outer_daseinisation(flow.evolve_projection(t, p0), backward.image)

    rows = []
    for k in family.ids:
        image = backward.images[k]
        lhs, rhs = evolved.projection_at(image), direct.projection_at(image)
        rows.append(IdentityRow(k, image, float(lhs.rank), float(rhs.rank), frobenius(lhs.matrix - rhs.matrix)))
    return _log_report(IdentityReport('flow-identity', float(t), rows))


__all__ = [
    'IdentityReport',
    'IdentityRow',
    'SpectralAutomorphism',
    'TransportedFamily',
    'UnitaryFlow',
    'act_on_section',
    'act_on_subobject',
    'check_compatibility',
    'check_covariance',
    'check_flow_identity',
    'heisenberg_evolve',
    'schrodinger_evolve_section',
    'schrodinger_evolve_state',
    'transport_family',
]
