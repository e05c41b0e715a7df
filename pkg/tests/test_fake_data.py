import numpy as np
import pytest

from .context import subrad
from subrad import ensemble, fake_data


def test_power_law_series():

    series = fake_data.power_law_series([1, 2, 4], -2.0, prefactor=3.0)
    assert np.allclose(series.values, [3.0, 0.75, 0.1875])

    noisy = fake_data.power_law_series([1, 2, 4], -2.0, noise=0.1, seed=1)
    again = fake_data.power_law_series([1, 2, 4], -2.0, noise=0.1, seed=1)
    assert np.array_equal(noisy.values, again.values)
    assert not np.array_equal(noisy.values, series.values / 3.0)


def test_exponential_series():

    series = fake_data.exponential_series([0, 5, 10], 5.0, prefactor=2.0)
    assert np.allclose(series.values, 2.0 * np.exp([0.0, -1.0, -2.0]))


def test_critical_xi_table():

    table = fake_data.critical_xi_table()

    assert table.sizes == [100, 200, 400]
    assert len(table.disorder_values) == 12
    assert np.isclose(table.disorder_values[0], 0.05)
    assert (table.frame['xi'] <= table.frame['n_max']).all()
    # xi saturates at N only for the weakest disorder of the smallest size
    row = table.at(100).iloc[0]
    assert row['xi'] == 100.0


def test_random_xi_table():

    table = fake_data.random_xi_table(seed=2)
    ratio = table.frame['xi'] / table.frame['n_max']
    assert ratio.between(0.2, 0.8).all()
    assert table.frame['xi_nmin_shift'].isna().all()


@pytest.mark.parametrize('kind', ['uniform', 'gaussian'])
def test_center_samples(kind):

    samples = fake_data.center_samples(50, 2000, kind=kind, seed=4)
    assert len(samples) == 2000
    assert samples.min() >= 1
    assert samples.max() <= 50


def test_center_samples_rejects_unknown_kind():

    with pytest.raises(ValueError):
        fake_data.center_samples(50, 10, kind='cauchy')


def test_profiles_are_unit_norm():

    for vector in (
        fake_data.exponential_profile(30, 10, 2.0),
        fake_data.sine_profile(30, 4),
    ):
        assert np.isclose(np.linalg.norm(vector), 1.0)


def test_ensemble_table():

    table = fake_data.ensemble_table(
        [10, 20], [0.0, 0.1], lambda n, w: 1.0 / n
    )
    assert list(table.columns) == ensemble.STATS_COLUMNS
    assert len(table) == 4
    assert (table['gamma_typ'] == table['gamma_avg']).all()
