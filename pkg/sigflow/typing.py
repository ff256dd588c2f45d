from typing import Dict, List, Literal, TypedDict, Union


CheckKind = Literal[
    'compat',
    'covariance',
    'axioms',
    'flow-identity',
]

Command = Literal[
    'contexts',
    'daseinise',
    'evolve',
    'check',
    'ks',
]

# [re, im] pair, a bare real, or a rational string such as "1/2"
Entry = Union[List[float], float, int, str]

MatrixLiteral = List[List[Entry]]


class ToleranceConfig(TypedDict):
    hermitian: float
    validation: float
    comparison: float
    overlap: float
    key_rounding: float
    clamp: float
    check: float
    window: float


class SearchConfig(TypedDict):
    budget: int


class OutputConfig(TypedDict):
    significant_digits: int


class RandomConfig(TypedDict):
    seed: int
    subobject_pairs: int


class Config(TypedDict):
    tolerance: ToleranceConfig
    search: SearchConfig
    output: OutputConfig
    random: RandomConfig


class DiscrepancySummary(TypedDict):
    name: str
    max_discrepancy: float
    passed: bool


class RunReportDict(TypedDict):
    command: str
    inputs_digest: str
    outputs: List[str]
    discrepancies: List[DiscrepancySummary]
    status: str
    wall_time: float
    details: Dict[str, Union[str, int, float]]
