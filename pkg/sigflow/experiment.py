from __future__ import annotations

import csv
import dataclasses
import io
import logging
import shutil
import sys
import tempfile
import time
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple, TypedDict, cast

import numpy as np
import yaml

from . import __version__
from .contexts import ContextFamily
from .errors import ScenarioError
from .flows import IdentityReport, UnitaryFlow, check_compatibility, check_covariance, check_flow_identity, \
    schrodinger_evolve_state
from .measures import CPGlobalSection, measure_axioms_check, section_from_state, trace_probability
from .scenario import Scenario, load_scenario
from .settings import Tolerances, merged_config, using_tolerances
from .spectral import SearchStatus, search_global_section
from .subobjects import outer_daseinisation
from .typing import CheckKind, Command, Config, DiscrepancySummary, RunReportDict
from .utils import ensure_dir, format_float

if sys.version_info < (3, 11):
    from typing_extensions import Unpack
else:
    from typing import Unpack

if TYPE_CHECKING:
    from _typeshed import StrPath

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_EXHAUSTED = 3


class _ExperimentArgs(TypedDict, total=False):
    tol: Optional[float]
    budget: Optional[int]
    seed: Optional[int]
    config: Config


class Options(TypedDict, total=False):
    tol: Optional[float]
    budget: Optional[int]
    check: Optional[CheckKind]
    proposition: Optional[str]
    seed: Optional[int]
    config: Optional[Config]


def _csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


class Experiment:
    """Runs one command over a scenario and collects its tables in ``work_dir``."""

    def __init__(self, scenario: Scenario, work_dir: StrPath, /, **kwargs: Unpack[_ExperimentArgs]) -> None:
        self.scenario = scenario
        self.work_dir = Path(work_dir)
        self.config: Config = kwargs.get('config', merged_config())
        self.digits = int(self.config['output']['significant_digits'])
        budget = kwargs.get('budget')
        self.budget = int(self.config['search']['budget']) if budget is None else budget
        if self.budget <= 0:
            raise ScenarioError(f'search budget must be positive, got {self.budget}', '--budget')
        self.pairs = int(self.config['random']['subobject_pairs'])
        seed = kwargs.get('seed')
        self.seed = int(self.config['random']['seed']) if seed is None else seed

        self.tolerances = Tolerances.from_config(self.config)
        tol = kwargs.get('tol')
        if tol is not None:
            if tol <= 0:
                raise ScenarioError(f'tolerance must be positive, got {tol}', '--tol')
            self.tolerances = dataclasses.replace(self.tolerances, check=tol)

        self.outputs: List[str] = []
        self.discrepancies: List[DiscrepancySummary] = []
        self.details: Dict[str, object] = {}
        self.status = 'ok'
        self.exit_code = EXIT_OK
        self._family: Optional[ContextFamily] = None

    @property
    def family(self) -> ContextFamily:
        if self._family is None:
            self._family = self.scenario.family()
            logger.info(f'Context family: {len(self._family)} contexts.')
        return self._family

    def _float(self, x: float) -> str:
        return format_float(x, self.digits)

    def _ranks(self, index: int) -> str:
        key = self.family.ids[index]
        return ';'.join(str(r) for r in self.family[key].ranks)

    def _write(self, name: str, content: str) -> None:
        (self.work_dir / name).write_text(content, encoding='utf-8')
        self.outputs.append(name)
        logger.debug(f'Write {name}')

    def _fail(self, status: str, exit_code: int = EXIT_FAILED) -> None:
        self.status = status
        self.exit_code = max(self.exit_code, exit_code)

    def _propositions(self, name: Optional[str]) -> List[str]:
        if name is not None:
            self.scenario.proposition(name)
            return [name]
        if not self.scenario.propositions:
            raise ScenarioError('no propositions defined', 'propositions')
        return list(self.scenario.propositions)

    def _times(self) -> List[float]:
        return self.scenario.times or [0.0]

    def _summarize(self, name: str, worst: float) -> None:
        passed = worst <= self.tolerances.check
        self.discrepancies.append({'name': name, 'max_discrepancy': float(worst), 'passed': passed})
        if passed:
            logger.info(f'{name}: max discrepancy {worst:.3e}')
        else:
            logger.warning(f'{name}: max discrepancy {worst:.3e} exceeds {self.tolerances.check:.1e}')
            self._fail('failed')

    def contexts(self) -> Experiment:
        family = self.family
        rows = []
        for n, key in enumerate(family.ids):
            below = [str(family.index(k)) for k in family.below(key) if k != key]
            rows.append([n, str(key), self._ranks(n), ';'.join(below)])
        self._write('contexts.csv', _csv(['index', 'context_id', 'ranks', 'below'], rows))

        lines = ['digraph contexts {']
        for n in range(len(family)):
            lines.append(f'  c{n} [label="{n}: {self._ranks(n)}"];')
        for small, large in family.covering_pairs():
            lines.append(f'  c{family.index(small)} -> c{family.index(large)};')
        lines.append('}')
        self._write('hasse.dot', '\n'.join(lines) + '\n')
        self.details['contexts'] = len(family)
        self.details['covering_pairs'] = len(family.covering_pairs())
        return self

    def daseinise(self, proposition: Optional[str] = None) -> Experiment:
        family = self.family
        for name in self._propositions(proposition):
            p = self.scenario.projection(name)
            if p.is_zero:
                logger.info(f'Proposition {name} has an empty window, its daseinisation is bottom.')
            s = outer_daseinisation(p, family)
            rows = []
            for n, key in enumerate(family.ids):
                selected = ';'.join(str(i) for i in sorted(s[key]))
                rows.append([n, str(key), self._ranks(n), selected, s.projection_at(key).rank])
            self._write(f'daseinise_{name}.csv',
                        _csv(['index', 'context_id', 'ranks', 'selected', 'component_rank'], rows))
            self.details[f'daseinise_{name}'] = 'top' if s.is_top() else 'bottom' if s.is_bottom() else 'proper'
        return self

    def evolve(self, proposition: Optional[str] = None) -> Experiment:
        family = self.family
        flow = UnitaryFlow(self.scenario.hamiltonian)
        rho0 = self.scenario.require_state()
        rows, minima = [], []
        worst = 0.0
        for t in self._times():
            for name in self._propositions(proposition):
                p0 = self.scenario.projection(name)
                report = check_compatibility(rho0, outer_daseinisation(p0, family), flow, t)
                for row in report.rows:
                    rows.append([self._float(t), name, family.index(row.context), str(row.context),
                                 self._float(row.lhs), self._float(row.rhs)])
                schrodinger_min, heisenberg_min = report.minima
                oracle = trace_probability(schrodinger_evolve_state(flow, t, rho0), p0)
                minima.append([self._float(t), name, self._float(schrodinger_min), self._float(heisenberg_min),
                               self._float(oracle)])
                worst = max(worst, abs(schrodinger_min - heisenberg_min))
        self._write('evolve.csv', _csv(['t', 'proposition', 'index', 'context_id', 'schrodinger', 'heisenberg'], rows))
        self._write('evolve_minima.csv',
                    _csv(['t', 'proposition', 'schrodinger_min', 'heisenberg_min', 'trace_oracle'], minima))
        self._summarize('evolve-minima', worst)
        return self

    def _identity_table(self, kind: CheckKind, reports: Sequence[Tuple[str, IdentityReport]]) -> None:
        rows = []
        for name, report in reports:
            for row in report.rows:
                rows.append([self._float(report.t), name, self.family.index(row.context), str(row.context),
                             self._float(row.lhs), self._float(row.rhs), self._float(row.discrepancy)])
        self._write(f'check_{kind}.csv',
                    _csv(['t', 'proposition', 'index', 'context_id', 'lhs', 'rhs', 'discrepancy'], rows))
        self._summarize(kind, max((r.max_discrepancy for _, r in reports), default=0.0))

    def _section(self) -> CPGlobalSection:
        family = self.family
        m = section_from_state(self.scenario.require_state(), family)
        if not self.scenario.section:
            return m
        values = {k: list(v) for k, v in m.values.items()}
        seeds = self.scenario.seed_contexts()
        for index, probabilities in self.scenario.section.items():
            key = family.locate(seeds[index])
            if key is None or len(probabilities) != len(family[key]):
                raise ScenarioError(f'expected {len(seeds[index])} probabilities', f'section.{index}')
            values[key] = probabilities
        logger.info(f'Section overridden at {len(self.scenario.section)} seed contexts.')
        return CPGlobalSection(family, values, check=False)

    def check(self, kind: CheckKind, proposition: Optional[str] = None) -> Experiment:
        family = self.family
        if kind == 'axioms':
            report = measure_axioms_check(self._section(), rng=np.random.default_rng(self.seed), pairs=self.pairs)
            rows = [['normalization', self._float(report.normalization)],
                    ['modularity', self._float(report.modularity)],
                    ['compatibility', self._float(report.compatibility)]]
            self._write('check_axioms.csv', _csv(['quantity', 'max_violation'], rows))
            self.details['subobject_pairs'] = report.pairs
            self._summarize('axioms', report.max_violation)
            return self

        flow = UnitaryFlow(self.scenario.hamiltonian)
        reports = []
        for t in self._times():
            for name in self._propositions(proposition):
                p0 = self.scenario.projection(name)
                if kind == 'flow-identity':
                    reports.append((name, check_flow_identity(p0, flow, t, family)))
                    continue
                rho0 = self.scenario.require_state()
                s0 = outer_daseinisation(p0, family)
                checker = check_compatibility if kind == 'compat' else check_covariance
                reports.append((name, checker(rho0, s0, flow, t)))
        self._identity_table(kind, reports)
        return self

    def ks(self) -> Experiment:
        family = self.family
        result = search_global_section(family, self.budget)
        self.details['nodes'] = result.nodes
        self.details['search_time'] = round(result.elapsed, 6)
        self.details['search'] = result.status.value
        if result.status is SearchStatus.FOUND:
            assert result.section is not None
            rows = [[family.index(k), str(k), result.section.assignment[k]] for k in family.ids]
            self._write('ks.csv', _csv(['index', 'context_id', 'block'], rows))
            logger.info(f'Global section found after {result.nodes} nodes.')
        elif result.status is SearchStatus.ABSENT:
            logger.info(f'NO-SECTION after {result.nodes} nodes.')
            self._fail('no-section')
        else:
            logger.warning(f'Search budget of {self.budget} nodes exhausted.')
            self._fail('exhausted', EXIT_EXHAUSTED)
        return self

    def report(self, command: Command, wall_time: float) -> RunReportDict:
        details = {k: v for k, v in self.details.items() if isinstance(v, (str, int, float))}
        details['version'] = __version__
        return {
            'command': command,
            'inputs_digest': self.scenario.digest,
            'outputs': list(self.outputs),
            'discrepancies': list(self.discrepancies),
            'status': self.status,
            'wall_time': round(wall_time, 6),
            'details': details,
        }

    def run(self, command: Command, **kwargs: Unpack[Options]) -> Experiment:
        with using_tolerances(self.tolerances):
            if command == 'contexts':
                return self.contexts()
            if command == 'daseinise':
                return self.daseinise(kwargs.get('proposition'))
            if command == 'evolve':
                return self.evolve(kwargs.get('proposition'))
            if command == 'check':
                kind = kwargs.get('check')
                if kind is None:
                    raise ScenarioError('the check command needs --check', '--check')
                return self.check(kind, kwargs.get('proposition'))
            if command == 'ks':
                return self.ks()
        raise ValueError(f'Unknown command {command!r}.')


def run(
    command: Command,
    scenario: StrPath,
    out: Optional[StrPath] = None,
    **kwargs: Unpack[Options]
) -> Tuple[int, RunReportDict]:
    """Run one command over a scenario file.

    Tables are produced in a temporary directory. With ``out`` they are moved there together
    with ``report.yaml``; otherwise they are printed to stdout.

    Args:
        command: One of ``contexts``, ``daseinise``, ``evolve``, ``check`` and ``ks``.
        scenario: Path of the scenario file.
        out: Output directory, created if missing.

    Returns:
        The exit code and the run report.

    Raises:
        ScenarioError: If the scenario is invalid or lacks what the command needs.
        FileNotFoundError: If the scenario does not exist.
    """
    config = merged_config(kwargs.get('config'))
    start = time.perf_counter()
    with using_tolerances(Tolerances.from_config(config)):
        loaded = load_scenario(scenario)

    with tempfile.TemporaryDirectory(prefix='sigflow-') as temp_dir:
        experiment = Experiment(loaded, temp_dir, tol=kwargs.get('tol'), budget=kwargs.get('budget'),
                                seed=kwargs.get('seed'), config=config)
        experiment.run(command, **kwargs)
        report = experiment.report(command, time.perf_counter() - start)

        if out is not None:
            out_dir = Path(out).resolve()
            ensure_dir(out_dir)
            with open(Path(temp_dir) / 'report.yaml', 'w') as f:
                yaml.dump(report, f, allow_unicode=True, default_flow_style=False, sort_keys=False)
            for name in experiment.outputs + ['report.yaml']:
                shutil.move(str(Path(temp_dir) / name), str(out_dir / name))
            logger.info(f'Wrote {len(experiment.outputs) + 1} files to {out_dir}')
        else:
            for name in experiment.outputs:
                if len(experiment.outputs) > 1:
                    sys.stdout.write(f'# {name}\n')
                sys.stdout.write((Path(temp_dir) / name).read_text(encoding='utf-8'))
            if command == 'ks' and experiment.status == 'no-section':
                sys.stdout.write(f'NO-SECTION nodes={report["details"]["nodes"]}\n')

    return experiment.exit_code, cast(RunReportDict, report)


__all__ = [
    'EXIT_EXHAUSTED',
    'EXIT_FAILED',
    'EXIT_INPUT',
    'EXIT_OK',
    'Experiment',
    'Options',
    'run',
]
