import json

import pytest

import config
from modules.errors import ConfigError
from modules.run_config import (RunConfig, build_run_config, default_workers, flatten_config,
                                load_config_file, validate_config_schema)
from modules.simgen import Setting


def _config_file(tmp_path, payload):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


def test_defaults():
    run = build_run_config('simulate')
    assert run.n_iter == config.DEFAULT_N_ITER
    assert run.burn_in == config.DEFAULT_BURN_IN
    assert run.seed == config.DEFAULT_SEED
    assert run.setting == 'I' and run.pliable
    assert run.n_replications is None


def test_flags_override_file_and_none_flags_are_ignored():
    file_values = {'n_iter': 800, 'seed': 5, 'setting': 'III'}
    run = build_run_config('simulate', {'n_iter': 400, 'seed': None, 'burn_in': 100}, file_values)
    assert run.n_iter == 400
    assert run.seed == 5
    assert run.setting == 'III'
    assert run.burn_in == 100


def test_setting_number_and_string_booleans():
    run = build_run_config('benchmark', {'setting': '4', 'pliable': 'false', 'n_iter': 200, 'burn_in': 50})
    assert run.setting == Setting.IV.value
    assert run.pliable is False


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        build_run_config('simulate', {'iterations': 10})


@pytest.mark.parametrize('flags', [
    {'burn_in': 6000},
    {'level': 1.5},
    {'formats': ['xml']},
    {'family': 'poisson'},
    {'missing_fraction': 1.2},
    {'n_replications': 0},
    {'workers': 0},
])
def test_invalid_values(flags):
    with pytest.raises(ConfigError):
        build_run_config('benchmark', flags)


def test_fit_needs_inputs(tmp_path):
    with pytest.raises(ConfigError):
        build_run_config('fit', {})
    with pytest.raises(ConfigError):
        build_run_config('fit', {'x': str(tmp_path / 'X.csv'), 'y': str(tmp_path / 'y.csv')})


def test_schema_validation_messages():
    ok, errors = validate_config_schema({'sampler': {'n_iter': 'many'}, 'bogus': 1})
    assert not ok
    assert any('n_iter' in e for e in errors)
    assert any('bogus' in e for e in errors)
    ok, errors = validate_config_schema({'simulation': {'n_iter': 10}})
    assert not ok and 'sampler' in errors[0]
    assert validate_config_schema([1, 2]) == (False, ["Config must be a JSON object"])


def test_flatten_sections():
    flat = flatten_config({'out': 'o', 'sampler': {'n_iter': 10}, 'simulation': {'n': 50}})
    assert flat == {'out': 'o', 'n_iter': 10, 'n': 50}


def test_load_config_file(tmp_path):
    path = _config_file(tmp_path, {'sampler': {'n_iter': 300, 'burn_in': 100, 'pliable': False},
                                   'simulation': {'setting': 'II', 'q': 3},
                                   'benchmark': {'n_replications': 4}})
    values = load_config_file(path)
    run = build_run_config('benchmark', {}, values)
    assert (run.n_iter, run.burn_in, run.pliable) == (300, 100, False)
    assert run.setting == 'II' and run.q == 3 and run.n_replications == 4
    assert run.sim_spec().setting is Setting.II
    assert run.sampler_config().n_stored == 200


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / 'absent.json'))
    bad = tmp_path / 'bad.json'
    bad.write_text('{not json', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config_file(str(bad))
    with pytest.raises(ConfigError):
        load_config_file(_config_file(tmp_path, {'sampler': {'thin': 'x'}}))


def test_to_dict_is_json_ready():
    run = build_run_config('simulate', {'formats': ['csv', 'json']})
    payload = run.to_dict()
    assert payload['formats'] == ['csv', 'json']
    json.dumps(payload)
    assert isinstance(RunConfig('repro').cases, tuple)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(config.WORKERS_ENV, '3')
    assert build_run_config('benchmark').workers == 3
    monkeypatch.delenv(config.WORKERS_ENV)
    assert default_workers() >= 1


@pytest.mark.parametrize('raw', ['many', '0', '-2', '1.5'])
def test_bad_worker_environment_is_config_error(monkeypatch, raw):
    monkeypatch.setenv(config.WORKERS_ENV, raw)
    with pytest.raises(ConfigError):
        build_run_config('benchmark')
    # an explicit value never reads the environment
    assert build_run_config('benchmark', {'workers': 2}).workers == 2
