import json
import os

import numpy as np
import pytest

from .context import subrad
from subrad import config as cfg, defaults
from subrad.errors import ConfigError


def test_defaults_are_valid():

    config = cfg.load_config()

    assert config.model.phi == defaults.PHI
    assert [t.label for t in config.mode_targets()] == [
        'band_edge_low/nearest_omega',
        'fixed_k=0.7500pi/nearest_omega',
    ]
    specs = config.chain_specs()
    assert len(specs) == len(defaults.N_GRID) * len(defaults.W_GRID)
    # W-major
    assert [s.n_qubits for s in specs[:2]] == defaults.N_GRID[:2]
    assert {s.disorder_w for s in specs[:16]} == {defaults.W_GRID[0]}
    assert config.spectrum_spec().n_qubits == 100


def test_round_trip_through_dict():

    config = cfg.load_config(overrides=['model.phi_pi=0.25'])
    assert cfg.from_dict(cfg.to_dict(config)) == config
    assert np.isclose(config.chain_specs()[0].phi, 0.25 * np.pi)


@pytest.mark.parametrize(
    'document, path',
    [
        ({'colour': 1}, 'colour'),
        ({'model': {'phi': 1.0}}, 'model.phi'),
        ({'model': {'gamma': None}}, 'model.gamma'),
        ({'model': {'phi_pi': 0.0}}, 'model.phi_pi'),
        ({'model': 3}, 'model'),
        ({'grid': {'n_qubits': [10, 2.5]}}, 'grid.n_qubits.1'),
        ({'grid': {'n_qubits': []}}, 'grid.n_qubits'),
        ({'grid': {'disorder_w': [0.1, 1.0]}}, 'grid.disorder_w.1'),
        ({'ensemble': {'n_realizations': True}}, 'ensemble.n_realizations'),
        ({'ensemble': {'master_seed': -3}}, 'ensemble.master_seed'),
        ({'ensemble': {'workers': 0}}, 'ensemble.workers'),
        ({'targets': []}, 'targets'),
        ({'targets': [{'kind': 'middle'}]}, 'targets.0.kind'),
        ({'targets': [{'kind': 'fixed_k'}]}, 'targets.0.k_pi'),
        ({'targets': [{'kind': 'fixed_k', 'k_pi': 0.5}]}, 'targets.0.k_pi'),
        (
            {'targets': [{'kind': 'band_edge_low'}] * 2},
            'targets.1',
        ),
        (
            {
                'targets': [
                    {'kind': 'fixed_k', 'k_pi': 0.75, 'selector': 'min_gamma'}
                ]
            },
            'targets.0.selector',
        ),
        ({'analysis': {'wc_box': [0.1, 0.0]}}, 'analysis.wc_box'),
        ({'analysis': {'nu_box': [0.0, 2.0]}}, 'analysis.nu_box'),
        ({'analysis': {'nu_box': [1.0]}}, 'analysis.nu_box'),
        (
            {'analysis': {'center_estimator': 'mean'}},
            'analysis.center_estimator',
        ),
        ({'output': {'format_version': 2}}, 'output.format_version'),
    ],
)
def test_invalid_documents(document, path):

    with pytest.raises(ConfigError) as err:
        cfg.from_dict(document)
    assert err.value.path == path
    assert str(err.value).startswith(f'{path}: ')


def test_numbers_accept_integers():

    config = cfg.from_dict(
        {'model': {'gamma': 2}, 'grid': {'disorder_w': [0]}}
    )
    assert config.model.gamma == 2.0
    assert isinstance(config.grid.disorder_w[0], float)


def test_overrides():

    document = cfg.apply_overrides(
        {'grid': {'n_qubits': [5]}},
        ['grid.n_qubits=[10,20]', 'output.directory=runs/a', 'model.gamma=2'],
    )
    assert document == {
        'grid': {'n_qubits': [10, 20]},
        'output': {'directory': 'runs/a'},
        'model': {'gamma': 2},
    }


def test_override_list_items():

    config = cfg.load_config(overrides=['targets.1.selector=sorted_index'])
    assert config.targets[1].selector == 'sorted_index'
    assert config.targets[0].kind == 'band_edge_low'


@pytest.mark.parametrize(
    'override, path',
    [
        ('grid.n_qubits', '--set'),
        ('grid..n_qubits=3', '--set'),
        ('targets.5.kind=fixed_k', 'targets.5'),
        ('targets.x.kind=fixed_k', 'targets.x'),
        ('model.phii=0.3', 'model.phii'),
        ('ensemble.n_realizations=many', 'ensemble.n_realizations'),
    ],
)
def test_bad_overrides(override, path):

    with pytest.raises(ConfigError) as err:
        cfg.load_config(overrides=[override])
    assert err.value.path == path


def test_load_document(tmp_path):

    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'ensemble': {'n_realizations': 10}}))
    config = cfg.load_config(path, ['ensemble.start_index=5'])
    assert config.ensemble.n_realizations == 10
    assert config.ensemble.start_index == 5


def test_malformed_json_reports_position(tmp_path):

    path = tmp_path / 'bad.json'
    path.write_text('{\n  "model": {"gamma": 1,}\n}\n')
    with pytest.raises(ConfigError, match='line 2 column'):
        cfg.load_config(path)


def test_missing_config_file(tmp_path):

    with pytest.raises(ConfigError, match='not found'):
        cfg.load_config(tmp_path / 'absent.json')


def test_hash_ignores_placement():

    base = cfg.load_config()
    moved = cfg.load_config(
        overrides=['ensemble.workers=3', 'output.directory=elsewhere']
    )
    reseeded = cfg.load_config(overrides=['ensemble.master_seed=1'])

    assert len(cfg.config_hash(base)) == 64
    assert cfg.config_hash(base) == cfg.config_hash(moved)
    assert cfg.config_hash(base) != cfg.config_hash(reseeded)

    portable = cfg.to_dict(moved, portable=True)
    assert 'workers' not in portable['ensemble']
    assert 'directory' not in portable['output']
    assert cfg.to_dict(moved)['ensemble']['workers'] == 3


def test_schema():

    text = json.dumps(cfg.SCHEMA)
    assert json.loads(text)['format_version'] == defaults.FORMAT_VERSION

    properties = cfg.SCHEMA['properties']
    assert set(properties) == {
        'model',
        'grid',
        'targets',
        'ensemble',
        'spectrum',
        'analysis',
        'output',
    }
    phi = properties['model']['properties']['phi_pi']
    assert phi['type'] == 'number'
    assert phi['default'] == 0.5
    assert phi['maximum'] == 0.5
    assert len(properties['targets']['default']) == 2


def test_resolve_workers():

    assert cfg.resolve_workers(3, environ={'SUBRAD_WORKERS': '2'}) == 3
    assert cfg.resolve_workers(environ={'SUBRAD_WORKERS': '2'}) == 2
    assert cfg.resolve_workers(environ={}) == (os.cpu_count() or 1)

    with pytest.raises(ConfigError) as err:
        cfg.resolve_workers(0)
    assert err.value.path == '--workers'
    for raw in ('x', '0'):
        with pytest.raises(ConfigError) as err:
            cfg.resolve_workers(environ={'SUBRAD_WORKERS': raw})
        assert err.value.path == 'SUBRAD_WORKERS'
