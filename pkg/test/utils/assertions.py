import csv

import yaml


def _read_csv(out_dir, file):
    assert (out_dir / file).is_file(), f'{file} is missing'
    with open(out_dir / file, 'r', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def assert_file(out_dir, file, expect=None):
    assert (out_dir / file).is_file()
    if expect is None:
        return
    with open(out_dir / file, 'r') as f:
        actual = f.read()
        assert actual == expect, f'actual: {actual}, expect: {expect}'


def assert_no_file(out_dir, file):
    assert not (out_dir / file).is_file()


def assert_rows(out_dir, file, count):
    actual = len(_read_csv(out_dir, file))
    assert actual == count, f'actual: {actual}, expect: {count}'


def assert_column(out_dir, file, column, expect):
    actual = sorted(row[column] for row in _read_csv(out_dir, file))
    assert actual == sorted(str(x) for x in expect), f'actual: {actual}, expect: {expect}'


def assert_column_max(out_dir, file, column, bound):
    actual = max(abs(float(row[column])) for row in _read_csv(out_dir, file))
    assert actual <= bound, f'{column} reaches {actual}, bound is {bound}'


def assert_columns_close(out_dir, file, columns, tol=1e-9):
    first, second = columns
    for row in _read_csv(out_dir, file):
        assert abs(float(row[first]) - float(row[second])) <= tol, f'{first} and {second} differ in {row}'


def assert_hasse_edges(out_dir, count):
    assert (out_dir / 'hasse.dot').is_file()
    with open(out_dir / 'hasse.dot', 'r') as f:
        content = f.read()
    assert content.startswith('digraph contexts {')
    actual = content.count('->')
    assert actual == count, f'actual: {actual}, expect: {count}'


def assert_report(out_dir, status='ok', command=None, outputs=None, details=None):
    assert (out_dir / 'report.yaml').is_file()
    with open(out_dir / 'report.yaml', 'r', encoding='utf-8') as f:
        report = yaml.safe_load(f)
    assert report['status'] == status, f'actual: {report["status"]}, expect: {status}'
    assert len(report['inputs_digest']) == 64
    assert report['wall_time'] >= 0
    if command is not None:
        assert report['command'] == command
    if outputs is not None:
        assert sorted(report['outputs']) == sorted(outputs), f'actual: {report["outputs"]}, expect: {outputs}'
    for key, value in (details or {}).items():
        assert report['details'][key] == value, f'{key}: actual {report["details"][key]}, expect {value}'


def assert_discrepancies(out_dir, passed=True):
    with open(out_dir / 'report.yaml', 'r', encoding='utf-8') as f:
        report = yaml.safe_load(f)
    assert report['discrepancies'], 'no discrepancy summary'
    for summary in report['discrepancies']:
        assert summary['passed'] == passed, f'{summary["name"]}: {summary["max_discrepancy"]}'
