"""Full-size checks of the subradiant scaling transition.

One ensemble over the default size grid with 1000 realizations per cell
feeds every test here; it takes tens of minutes on a multicore machine.
"""

import os
import warnings

import numpy as np
import pytest

from .context import subrad
from subrad import config as cfg, defaults, ensemble, io, scaling
from subrad.analysis import run_analysis

pytestmark = pytest.mark.slow

EXTRA_W = [0.0, 0.03, 0.05, 0.06, 0.1, 0.2, 0.3, 0.4]
STRONG, WEAK, SUPER = range(3)


@pytest.fixture(scope='module')
def run(tmp_path_factory):

    out_dir = tmp_path_factory.mktemp('transition')
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        config = cfg.from_dict(
            {
                'grid': {
                    'n_qubits': defaults.N_GRID,
                    'disorder_w': sorted(set(defaults.W_GRID + EXTRA_W)),
                },
                'targets': [
                    {'kind': 'band_edge_low'},
                    {'kind': 'fixed_k', 'k_pi': 0.75},
                    {'kind': 'fixed_k', 'k_pi': 0.48},
                ],
                'ensemble': {'n_realizations': 1000},
                'analysis': {'n_bootstrap': 0},
                'output': {'directory': str(out_dir)},
            }
        )
        stats = ensemble.run_ensemble(
            config.chain_specs(),
            config.mode_targets(),
            1000,
            workers=os.cpu_count() or 1,
            quiet=True,
        )
        io.write_table(ensemble.stats_table(stats), out_dir / 'ensemble.csv')
        io.write_table(ensemble.modes_table(stats), out_dir / 'modes.csv')
        run_analysis(config, out_dir)
    return config, out_dir


def _series(run, target, w, n_min=0):
    config, out_dir = run
    target = config.mode_targets()[target]
    series = scaling.series_from_table(
        io.read_ensemble(out_dir),
        w,
        target.kind,
        target.target_k,
        target.selector,
    )
    keep = series.n >= n_min
    return scaling.ScalingSeries.from_arrays(
        series.n[keep], series.values[keep]
    )


def _label(run, target):
    return run[0].mode_targets()[target].label


@pytest.mark.parametrize('target', [STRONG, WEAK])
def test_strong_disorder_is_exponential(run, target):

    comparison = scaling.compare_models(_series(run, target, 0.4, 100))
    exponential = comparison.exponential

    assert exponential.r_squared > 0.99
    assert exponential.residual_rms < comparison.power.residual_rms


def test_crossover_size_shrinks_with_disorder(run):

    frame = io.read_table(run[1] / 'crossover.csv')
    frame = frame[frame['target'] == _label(run, STRONG)]
    n_c = frame.set_index('disorder_w')['n_c']

    sizes = [n_c[w] for w in (0.06, 0.1, 0.2, 0.4)]
    assert np.all(np.isfinite(sizes))
    assert np.all(np.diff(sizes) < 0)

    ordered = _series(run, STRONG, 0.0)
    fit = scaling.fit_exponential(ordered.tail(8))
    assert scaling.detect_crossover_nc(ordered, ordered, fit) is None


def test_xi_saturates_only_under_strong_disorder(run):

    xi = io.read_xi_table(
        run[1] / 'xi_table.csv', target=_label(run, STRONG)
    ).frame
    large = xi[xi['n_max'] >= 200]
    for w, group in large.groupby('disorder_w'):
        values = group.sort_values('n_max')['xi'].to_numpy()
        if w >= 0.3:
            assert (values.max() - values.min()) / values.min() < 0.1
        elif 0 < w <= 0.05:
            assert values[-1] > 1.1 * values[0]


def test_collapse_exponents(run):

    document = io.read_json(run[1] / 'collapse.json')
    strong = document[_label(run, STRONG)]
    weak = document[_label(run, WEAK)]
    superradiant = document[_label(run, SUPER)]

    assert abs(strong['w_c']) <= 0.03
    assert abs(strong['nu'] - 1.5) <= 0.2
    assert abs(weak['nu'] - 1.95) <= 0.25
    assert superradiant['cost'] >= 5 * max(strong['cost'], weak['cost'])


def test_localization_length_collapse(run):

    document = io.read_json(run[1] / 'localization.json')
    for target, nu in ((STRONG, 1.51), (WEAK, 1.93)):
        record = document[_label(run, target)]['xi_phi_collapse']
        assert abs(record['nu'] - nu) <= 0.25

    equivalence = io.read_json(run[1] / 'equivalence.json')
    strong = equivalence[_label(run, STRONG)]
    assert 1.6 <= strong['median_ratio'] <= 2.4
    assert strong['overlap']['overlaps']


def test_effective_potentials(run):

    document = io.read_json(run[1] / 'localization.json')
    strong = document[_label(run, STRONG)]['sizes']
    assert strong
    assert all(cell['fit']['kind'] == 'constant' for cell in strong.values())

    weak = document[_label(run, WEAK)]
    harmonic = [
        cell
        for cell in weak['sizes'].values()
        if cell['fit']['kind'] == 'harmonic'
    ]
    assert len(harmonic) >= 3
    assert weak['alpha'] > 1.0


def test_mean_rate_decays_as_inverse_size(run):

    table = io.read_ensemble(run[1])
    assert (table['gamma_typ'] <= table['gamma_avg']).all()

    exponents = ensemble.mean_vs_typical(table)
    for target in (STRONG, WEAK):
        target = run[0].mode_targets()[target]
        rows = exponents[
            (exponents['target_kind'] == target.kind)
            & np.isclose(exponents['target_k'], target.target_k)
            & (exponents['disorder_w'] >= 0.2)
        ]
        assert len(rows)
        assert np.all(np.abs(rows['avg_exponent'] + 1.0) <= 0.3)
