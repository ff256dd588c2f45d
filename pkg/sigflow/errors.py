from __future__ import annotations

from typing import Optional


class SigflowError(RuntimeError):
    pass


class NonHermitian(SigflowError):
    pass


class InvalidOperator(SigflowError):
    pass


class DimensionMismatch(SigflowError):
    pass


class NonCommuting(SigflowError):
    pass


class TrivialContext(SigflowError):
    pass


class CanonicalizationClash(SigflowError):
    pass


class EmptySeed(SigflowError):
    pass


class NotComparable(SigflowError):
    pass


class NotInContext(SigflowError):
    pass


class NotASubobject(SigflowError):
    pass


class FamilyMismatch(SigflowError):
    pass


class WellDefinednessViolation(SigflowError):
    pass


class MissingContext(SigflowError):
    pass


class InvalidSection(SigflowError):
    pass


class ScenarioError(SigflowError):
    """Invalid scenario document.

    The ``field`` is a dotted path into the document (``observables.2.matrix``) so that
    the command line can point at the offending entry.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        super().__init__(f'{field}: {message}' if field else message)


class UnknownObservable(ScenarioError):
    pass


class UnknownProposition(ScenarioError):
    pass


class MissingHamiltonian(ScenarioError):
    pass


class MissingState(ScenarioError):
    pass


__all__ = [
    'CanonicalizationClash',
    'DimensionMismatch',
    'EmptySeed',
    'FamilyMismatch',
    'InvalidOperator',
    'InvalidSection',
    'MissingContext',
    'MissingHamiltonian',
    'MissingState',
    'NonCommuting',
    'NonHermitian',
    'NotASubobject',
    'NotComparable',
    'NotInContext',
    'ScenarioError',
    'SigflowError',
    'TrivialContext',
    'UnknownObservable',
    'UnknownProposition',
    'WellDefinednessViolation',
]
