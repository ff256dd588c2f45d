from os import chdir
from pathlib import Path

import pytest

from sigflow.settings import DEFAULT_SCENARIO_PATH

from .utils.dataloader import load_api_test_data, load_cli_test_data

TEST_DATA_DIR = Path(__file__).parent / 'test_data'


@pytest.fixture(scope='function')
def temp_dir(tmp_path):
    old_cwd = Path.cwd()
    chdir(tmp_path)
    yield tmp_path
    chdir(old_cwd)


def _scenario(name):
    for base in (TEST_DATA_DIR / 'scenarios', DEFAULT_SCENARIO_PATH):
        if (base / name).exists():
            return base / name
    # there are some test cases that tests the scenario is not found
    return Path(name)


def test_version():
    from sigflow import __version__
    assert len(__version__) > 0


def test_cli_version(capsys):
    from sigflow import __version__
    from sigflow.cli import main
    with pytest.raises(SystemExit):
        main(['--version'])
    captured = capsys.readouterr()
    assert captured.out.strip() == __version__


@pytest.mark.parametrize('args', [[], ['ks'], ['explain', '--scenario', 'qubit.json']],
                         ids=['empty', 'no-scenario', 'bad-command'])
def test_cli_usage_errors(capsys, args):
    from sigflow.cli import main
    with pytest.raises(SystemExit) as e:
        main(args)
    assert e.value.code == 2


@pytest.mark.parametrize('scenario_name, args, exit_code, assertion', load_cli_test_data())
def test_cli(temp_dir, scenario_name, args, exit_code, assertion):
    from sigflow.cli import main

    out_dir = temp_dir / 'out'
    args = [arg.replace('$TEST_DATA', str(TEST_DATA_DIR)) for arg in args]

    assert main(args + ['--scenario', str(_scenario(scenario_name)), '--out', str(out_dir)]) == exit_code
    assertion(out_dir)


@pytest.mark.parametrize('scenario_name, args, assertion, expectation', load_api_test_data())
def test_api(temp_dir, scenario_name, args, assertion, expectation):
    from sigflow.experiment import run

    out_dir = temp_dir / 'out'
    args = dict(args)
    command = args.pop('command')

    with expectation:
        exit_code, report = run(command, _scenario(scenario_name), out_dir, **args)

        assert exit_code == {'ok': 0, 'exhausted': 3}.get(report['status'], 1)
        assert sorted(p.name for p in out_dir.iterdir()) == sorted(report['outputs'] + ['report.yaml'])
        assertion(out_dir)


def test_stdout_tables(temp_dir, capsys):
    from sigflow.cli import main
    assert main(['contexts', '--scenario', str(_scenario('qutrit.json'))]) == 0
    captured = capsys.readouterr()
    assert '# contexts.csv' in captured.out
    assert 'index,context_id,ranks,below' in captured.out
    assert 'digraph contexts {' in captured.out
    assert not (temp_dir / 'report.yaml').exists()


def test_stdout_single_table(temp_dir, capsys):
    from sigflow.cli import main
    assert main(['ks', '--scenario', str(_scenario('qubit.json'))]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith('index,context_id,block\n')


def test_stdout_no_section(temp_dir, capsys):
    from sigflow.cli import main
    assert main(['ks', '--scenario', str(_scenario('cabello18.json'))]) == 1
    captured = capsys.readouterr()
    assert 'NO-SECTION nodes=' in captured.out


@pytest.mark.parametrize('value, exit_code', [('abc', 2), ('1e-6', 0)], ids=['invalid', 'valid'])
def test_tolerance_from_environment(temp_dir, monkeypatch, value, exit_code):
    from sigflow.cli import main
    monkeypatch.setenv('SIGFLOW_TOL', value)
    args = ['check', '--check', 'covariance', '--scenario', str(_scenario('qubit.json')), '--out', 'out']
    assert main(args) == exit_code


def test_rerun_overwrites_outputs(temp_dir):
    from sigflow.experiment import run
    first, _ = run('contexts', _scenario('qutrit.json'), temp_dir / 'out')
    second, report = run('contexts', _scenario('qutrit.json'), temp_dir / 'out')
    assert first == second == 0
    assert (temp_dir / 'out' / 'contexts.csv').read_text() != ''
    assert report['outputs'] == ['contexts.csv', 'hasse.dot']
