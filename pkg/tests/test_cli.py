import json

import pytest

from bryant_lab import cli


@pytest.fixture(autouse=True)
def no_jobs_override(monkeypatch):
    monkeypatch.setattr(cli, 'BRYANT_LAB_JOBS', None)


def _run(capsys, *argv):
    code = cli.main(['--jobs', '1', *argv])
    return code, capsys.readouterr()


def test_catalog(capsys):
    code, captured = _run(capsys, 'catalog')
    assert code == 0
    payload = json.loads(captured.out)
    assert payload['tool'] == 'bryant_lab'
    assert len(payload['result']['families']) == 15
    assert payload['run']['jobs'] == 1


def test_build_then_curvature_from_the_spec_file(capsys, tmp_path):
    spec_file = tmp_path / "catenoid.json"
    code, _ = _run(capsys, 'build', '--family', 'catenoid_cousin', '--out', str(spec_file))
    assert code == 0
    code, captured = _run(capsys, 'curvature', '--spec', str(spec_file))
    assert code == 0
    result = json.loads(captured.out)['result']['gauss_bonnet']
    assert result['primal']['over_pi'] == pytest.approx(3.2)
    assert result['dual']['over_pi'] == pytest.approx(4.0)


def test_output_is_byte_identical_across_runs(capsys):
    _, first = _run(capsys, 'build', '--family', 'trinoid', '--param', 'mu1=-0.4')
    _, second = _run(capsys, 'build', '--family', 'trinoid', '--param', 'mu1=-0.4')
    assert first.out == second.out
    assert json.loads(first.out)['result']['spec']['params']['mu1'] == -0.4


@pytest.mark.parametrize("argv", [
    ['catalog', '--bogus'],
    ['build'],
    ['classify', '--ta-max', '3pi'],
    ['mesh', '--family', 'catenoid_cousin', '--res', '1x5'],
])
def test_usage_errors(capsys, argv):
    code, _ = _run(capsys, *argv)
    assert code == 2


@pytest.mark.parametrize("argv, error", [
    (['build', '--family', 'helicoid'], 'UnknownFamily'),
    (['build', '--family', 'trinoid', '--param', 'mu1=0.9', '--param', 'mu2=0.9', '--param', 'mu3=0.9'],
     'Inadmissible'),
    (['build', '--family', 'trinoid', '--param', 'mu4=0.1'], 'BadParameter'),
])
def test_domain_errors(capsys, argv, error):
    code, captured = _run(capsys, *argv)
    assert code == 1
    assert json.loads(captured.out)['error'] == error


def test_classify(capsys):
    code, captured = _run(capsys, 'classify', '--ta-max', '4pi')
    assert code == 0
    result = json.loads(captured.out)['result']
    assert result['labels'] == ['O(-2,-2)', 'O(-4)', 'O(0)']
    assert [t['type'] for t in result['excluded']] == ['O(-2,-3)']
    assert result['ta_max']['over_pi'] == pytest.approx(4.0)


def test_verify(capsys):
    code, captured = _run(capsys, 'verify', '--prop', 'O(1,-2,-3)')
    assert code == 0
    assert json.loads(captured.out)['result']['holds']


def test_toml_config_supplies_flags(capsys, tmp_path):
    config = tmp_path / "lab.toml"
    config.write_text('jobs = 1\n\n[build]\nfamily = "catenoid_cousin"\nparam = { l = 0.6 }\n')
    code = cli.main(['--config', str(config), 'build'])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload['run']['jobs'] == 1
    assert payload['result']['spec']['params']['l'] == 0.6


def test_unknown_config_table(capsys, tmp_path):
    config = tmp_path / "lab.toml"
    config.write_text('[rebuild]\nfamily = "trinoid"\n')
    assert cli.main(['--config', str(config), 'catalog']) == 2


def test_version(capsys):
    assert cli.main(['--version']) == 0
    assert capsys.readouterr().out.strip() == f"bryant_lab {cli.VERSION}"


@pytest.mark.slow
def test_selftest(capsys):
    code, captured = _run(capsys, 'selftest')
    summary = json.loads(captured.out)['result']
    assert code == 0
    assert summary['failed'] == 0
