import numpy as np
import pandas as pd
import pytest

from .context import subrad, NU_ATOL
from subrad import fake_data, fss
from subrad.errors import CollapseError
from subrad.fss import CollapseResult


def _points(n, w, y):
    return pd.DataFrame({'n': n, 'w': w, 'y': y})


def test_cost_of_monotonic_data_is_zero():

    points = _points([1, 2, 3, 4], [1.0] * 4, [0.0, 1.0, 2.0, 5.0])
    assert fss.cost_function(points, 0.0, 1.0) == 0.0


def test_cost_counts_reversals():

    points = _points([1, 2, 3, 4], [1.0] * 4, [0.0, 1.0, 0.0, 1.0])
    assert np.isclose(fss.cost_function(points, 0.0, 1.0), 2.0)

    as_tuples = [fss.CollapsePoint(*row) for row in points.to_numpy()]
    assert fss.cost_function(as_tuples, 0.0, 1.0) == fss.cost_function(
        points, 0.0, 1.0
    )


def test_cost_ignores_point_order_and_y_units():

    points = fss.points_from_xi_table(fake_data.critical_xi_table())
    cost = fss.cost_function(points, 0.0, 1.37)
    assert cost > 0

    rng = np.random.default_rng(8)
    shuffled = points.iloc[rng.permutation(len(points))]
    assert np.isclose(fss.cost_function(shuffled, 0.0, 1.37), cost)
    rescaled = points.assign(y=3.0 * points['y'] + 2.0)
    assert np.isclose(fss.cost_function(rescaled, 0.0, 1.37), cost)


def test_cost_function_errors():

    with pytest.raises(CollapseError):
        fss.cost_function(_points([1, 2], [1.0, 1.0], [0.0, 1.0]), 0.0, 1.0)
    with pytest.raises(CollapseError, match='zero range'):
        fss.cost_function(_points([1, 2, 3], [1.0] * 3, [2.0] * 3), 0.0, 1.0)
    with pytest.raises(CollapseError, match='w_c'):
        fss.cost_function(
            _points([1, 2, 3], [0.1, 0.2, 0.3], [1.0, 2.0, 3.0]), 0.1, 1.0
        )


@pytest.mark.parametrize('nu', [1.5, 2.0])
def test_collapse_recovers_critical_parameters(nu):

    table = fake_data.critical_xi_table(nu=nu)
    result = fss.collapse(table, n_bootstrap=0, label='synthetic')

    assert abs(result.nu - nu) < NU_ATOL
    assert abs(result.w_c) < 0.02
    assert result.cost < 0.05
    assert not result.at_boundary
    assert not result.no_collapse
    assert result.uncertainty is None
    assert result.label == 'synthetic'


def test_master_curve():

    table = fake_data.critical_xi_table()
    result = fss.collapse(table, n_bootstrap=0)
    curve = result.master_curve

    assert list(curve.columns) == ['x', 'y', 'n', 'w']
    assert len(curve) == 36
    assert curve['x'].is_monotonic_increasing


def test_collapse_accepts_point_frames():

    table = fake_data.critical_xi_table()
    points = fss.points_from_xi_table(table)
    from_table = fss.collapse(table, n_bootstrap=0)
    from_points = fss.collapse(points, n_bootstrap=0)

    assert from_points.w_c == from_table.w_c
    assert from_points.nu == from_table.nu


def test_points_from_xi_table():

    table = fake_data.critical_xi_table(disorder_w=[0.05, 0.1, 0.2])
    points = fss.points_from_xi_table(table, min_w=0.05, sizes=[100, 400])

    assert len(points) == 4
    assert (points['w'] > 0.05).all()
    assert set(points['n']) == {100.0, 400.0}
    row = points[(points['n'] == 400) & (points['w'] == 0.2)].iloc[0]
    assert np.isclose(row['y'], 400 * 0.2 ** 1.5 / 2.0)


def test_random_table_does_not_collapse():

    table = fake_data.random_xi_table(seed=11)
    with pytest.warns(UserWarning, match='do not collapse'):
        result = fss.collapse(table, n_bootstrap=0)
    assert result.no_collapse
    assert result.cost > 1.0


def test_collapse_needs_enough_data():

    table = fake_data.critical_xi_table(sizes=(100, 200))
    with pytest.raises(CollapseError, match='3 sizes'):
        fss.collapse(table, n_bootstrap=0)

    table = fake_data.critical_xi_table(disorder_w=[0.1, 0.2, 0.3, 0.4])
    with pytest.raises(CollapseError, match='5 disorder'):
        fss.collapse(table, n_bootstrap=0)


def test_bootstrap_is_seeded():

    table = fake_data.critical_xi_table()
    first = fss.collapse(table, n_bootstrap=20, seed=1)
    second = fss.collapse(table, n_bootstrap=20, seed=1)

    assert first.uncertainty == second.uncertainty
    assert all(np.isfinite(u) and u >= 0 for u in first.uncertainty)
    record = first.as_record()
    assert record['n_bootstrap'] == 20
    assert record['w_c_err'] == first.uncertainty[0]


def test_record_without_bootstrap():

    record = fss.collapse(
        fake_data.critical_xi_table(), n_bootstrap=0
    ).as_record()
    assert np.isnan(record['nu_err'])
    assert record['n_points'] == 36


def _curve_result(x, y):
    curve = pd.DataFrame({'x': x, 'y': y, 'n': 1.0, 'w': 1.0})
    return CollapseResult(0.0, 1.5, 0.0, curve)


def test_compare_collapse_with_itself():

    x = np.linspace(1.0, 50.0, 40)
    a = _curve_result(x, 1.0 + np.log1p(x))
    report = fss.compare_collapse(a, a)

    assert np.isclose(report.x_scale, 1.0)
    assert np.isclose(report.y_scale, 1.0)
    assert report.residual_rms < 1e-8
    assert report.params_a == report.params_b == (0.0, 1.5)


def test_compare_collapse_recovers_axis_scales():

    x = np.linspace(1.0, 50.0, 40)
    y = 1.0 + np.log1p(x)
    a = _curve_result(x, y)
    b = _curve_result(2.0 * x, 0.5 * y)
    report = fss.compare_collapse(a, b)

    assert np.isclose(report.x_scale, 0.5, rtol=1e-6)
    assert np.isclose(report.y_scale, 2.0, rtol=1e-6)
    assert report.residual_rms < 1e-6
    assert report.n_overlap >= 38


def test_compare_collapse_disjoint():

    x = np.linspace(1.0, 50.0, 40)
    a = _curve_result(x, 1.0 + x)
    b = _curve_result(x + 1000.0, 1.0 + x)
    with pytest.raises(CollapseError, match='disjoint'):
        fss.compare_collapse(a, b)


def test_vs_k_table():

    results = {
        k: fss.collapse(
            fake_data.critical_xi_table(nu=nu), n_bootstrap=0, label=label
        )
        for k, nu, label in (
            (0.75 * np.pi, 2.0, 'slow'),
            (0.6 * np.pi, 1.5, 'fast'),
        )
    }
    table = fss.vs_k_table(results)

    assert table.columns[0] == 'k'
    assert np.allclose(table['k'], [0.6 * np.pi, 0.75 * np.pi])
    assert np.allclose(table['nu'], [1.5, 2.0], atol=NU_ATOL)
    assert table['label'].tolist() == ['fast', 'slow']


def test_vs_k_table_empty():

    assert list(fss.vs_k_table({}).columns) == ['k']
