import numpy as np
import pandas as pd
import pytest

from .context import subrad
from subrad import config as cfg, fake_data, io, model
from subrad.errors import DataError


def test_table_reads_back_exactly(tmp_path):

    frame = pd.DataFrame(
        {
            'n_qubits': [25, 50],
            'gamma_typ': [1.0 / 3.0, np.exp(-7.123456789)],
            'label': ['a', 'b'],
        }
    )
    path = io.write_table(frame, tmp_path / 'rates.csv')

    pd.testing.assert_frame_equal(
        io.read_table(path), frame, check_exact=True
    )
    assert io.sidecar_path(path).name == 'rates.meta.json'


def test_many_floats_read_back_exactly(tmp_path):

    rng = np.random.default_rng(11)
    values = np.concatenate(
        [rng.random(2000), np.exp(-rng.uniform(0, 40, 2000))]
    )
    path = io.write_table(pd.DataFrame({'v': values}), tmp_path / 'v.csv')
    assert np.array_equal(io.read_table(path)['v'].to_numpy(), values)


def test_sidecar_metadata(tmp_path):

    config = cfg.load_config(overrides=['ensemble.master_seed=7'])
    path = io.write_table(
        pd.DataFrame({'x': [1]}), tmp_path / 'x.csv', config, extra={'a': 1}
    )
    meta = io.read_json(io.sidecar_path(path))

    assert meta['config_hash'] == cfg.config_hash(config)
    assert meta['master_seed'] == 7
    assert meta['a'] == 1
    assert meta['format_version'] == subrad.defaults.FORMAT_VERSION
    assert meta['versions']['subrad'] == subrad.__version__
    assert 'workers' not in meta['config']['ensemble']


def test_writes_are_deterministic(tmp_path):

    config = cfg.load_config()
    frame = fake_data.ensemble_table([25, 50], [0.1], lambda n, w: 1.0 / n)
    first = io.write_table(frame, tmp_path / 'a' / 'ensemble.csv', config)
    second = io.write_table(frame, tmp_path / 'b' / 'ensemble.csv', config)

    pairs = [(first, second)]
    pairs.append((io.sidecar_path(first), io.sidecar_path(second)))
    for a, b in pairs:
        with open(a, 'rb') as fa, open(b, 'rb') as fb:
            assert fa.read() == fb.read()


def test_json_plain_values(tmp_path):

    document = {
        'array': np.arange(3),
        'scalar': np.float64(0.5),
        'missing': float('nan'),
        'nested': {1: (np.int64(2), None)},
    }
    path = io.write_json(document, tmp_path / 'doc.json')
    assert io.read_json(path) == {
        'array': [0, 1, 2],
        'scalar': 0.5,
        'missing': None,
        'nested': {'1': [2, None]},
    }
    text = io.dumps({'b': 1, 'a': 2})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith('\n')


def test_read_table_errors(tmp_path):

    with pytest.raises(DataError, match='missing'):
        io.read_table(tmp_path / 'absent.csv')
    with pytest.raises(DataError, match='missing'):
        io.read_json(tmp_path / 'absent.json')

    path = io.write_table(pd.DataFrame({'x': [1]}), tmp_path / 'x.csv')
    with pytest.raises(DataError, match='lacks columns'):
        io.read_table(path, ['x', 'y'])
    with pytest.raises(DataError):
        io.read_ensemble(tmp_path)


def test_read_xi_table(tmp_path):

    table = fake_data.critical_xi_table()
    frame = table.frame.assign(target='band_edge_low')
    path = io.write_table(frame, tmp_path / 'xi_table.csv')

    again = io.read_xi_table(path, target='band_edge_low')
    assert again.sizes == table.sizes
    assert np.array_equal(again.frame['xi'], table.frame['xi'])
    assert io.read_xi_table(path, target='other').frame.empty


def test_hamiltonian_round_trip(tmp_path):

    spec = model.ChainSpec(7, disorder_w=0.3, master_seed=5)
    h = model.build_h_eff(model.realize(spec, 2), spec.gamma, spec.phi)
    path = io.save_hamiltonian(h, tmp_path / 'h.npz')
    loaded = io.load_hamiltonian(path)

    assert np.array_equal(loaded.entries, h.entries)
    assert np.array_equal(loaded.entries, loaded.entries.T)
    assert loaded.gamma == h.gamma
    assert loaded.phi == h.phi
    assert loaded.realization_index == 2

    with pytest.raises(DataError):
        io.load_hamiltonian(tmp_path / 'absent.npz')


def test_hamiltonian_metadata(tmp_path):

    config = cfg.load_config(overrides=['ensemble.master_seed=9'])
    spec = model.ChainSpec(4, disorder_w=0.1, master_seed=9)
    h = model.build_h_eff(model.realize(spec, 0), spec.gamma, spec.phi)
    meta = io.hamiltonian_metadata(
        io.save_hamiltonian(h, tmp_path / 'h.npz', config)
    )

    assert meta['config_hash'] == cfg.config_hash(config)
    assert meta['master_seed'] == 9
    assert meta['versions']['subrad'] == subrad.__version__
    assert 'config' not in io.hamiltonian_metadata(
        io.save_hamiltonian(h, tmp_path / 'bare.npz')
    )


def test_json_carries_config(tmp_path):

    config = cfg.load_config()
    path = io.write_json({'result': 1.5}, tmp_path / 'r.json', config)
    document = io.read_json(path)

    assert document['result'] == 1.5
    assert document['config_hash'] == cfg.config_hash(config)
    assert document['format_version'] == subrad.defaults.FORMAT_VERSION
