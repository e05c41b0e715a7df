# -*- coding: utf-8 -*-
"""Power-law and exponential scaling of typical decay rates with chain
size, the moment-based characteristic scale xi and the crossover size
N_c."""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd
from statsmodels.formula.api import ols

from .errors import DataError

PowerLawFit = namedtuple(
    'PowerLawFit',
    ['exponent', 'prefactor', 'r_squared', 'residual_rms', 'n_points'],
)
ExponentialFit = namedtuple(
    'ExponentialFit',
    ['xi_inf', 'prefactor', 'r_squared', 'residual_rms', 'n_points'],
)
ModelComparison = namedtuple(
    'ModelComparison', ['power', 'exponential', 'preferred']
)
DivergenceFit = namedtuple(
    'DivergenceFit', ['nu', 'prefactor', 'r_squared', 'w_c', 'n_points']
)

XI_COLUMNS = ['n_max', 'disorder_w', 'xi', 'xi_nmin_shift']


@dataclass(frozen=True, eq=False)
class ScalingSeries:
    """A rate as a function of chain size for one (W, target).

    Parameters
    ----------
    n : numpy.ndarray
        strictly increasing sizes
    values : numpy.ndarray
        positive rates, one per size
    disorder_w, target, selector : optional
        provenance carried into tables
    """

    n: np.ndarray
    values: np.ndarray
    disorder_w: float = None
    target: str = None
    selector: str = None

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if n.ndim != 1 or n.shape != values.shape:
            raise DataError(
                f'sizes and values must be 1-d of equal length, got '
                f'{n.shape} and {values.shape}'
            )
        if np.any(np.diff(n) <= 0):
            raise DataError('sizes must be strictly increasing')
        if not np.all(values > 0):
            bad = n[~(values > 0)]
            raise DataError(f'non-positive values at sizes {bad.tolist()}')
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_arrays(cls, n, values, **meta):
        return cls(np.asarray(n), np.asarray(values), **meta)

    @classmethod
    def from_points(cls, points, **meta):
        n, values = zip(*points) if len(points) else ((), ())
        return cls(np.array(n), np.array(values), **meta)

    @property
    def points(self):
        return list(zip(self.n.tolist(), self.values.tolist()))

    def __len__(self):
        return len(self.n)

    def head(self, count):
        """The first ``count`` points, provenance kept."""
        return ScalingSeries(
            self.n[:count],
            self.values[:count],
            self.disorder_w,
            self.target,
            self.selector,
        )

    def tail(self, count):
        return ScalingSeries(
            self.n[-count:],
            self.values[-count:],
            self.disorder_w,
            self.target,
            self.selector,
        )


def linear_fit(x, y):
    """OLS line ``y = a + b x``.

    Returns
    -------
    intercept, slope, r_squared, residual_rms : float
    """

    frame = pd.DataFrame(
        {'x': np.asarray(x, dtype=float), 'y': np.asarray(y, dtype=float)}
    )
    fit = ols('y ~ x', frame).fit()
    rms = float(np.sqrt(np.mean(np.asarray(fit.resid) ** 2)))
    return (
        float(fit.params['Intercept']),
        float(fit.params['x']),
        float(fit.rsquared),
        rms,
    )


def _require(series, min_points):
    if len(series) < min_points:
        raise DataError(
            f'need at least {min_points} points, got {len(series)}'
        )


def fit_power_law(series, min_points=3):
    """Least-squares line through (ln n, ln value).

    Returns
    -------
    fit : PowerLawFit
        slope as ``exponent``, ``exp(intercept)`` as ``prefactor``, the
        coefficient of determination and the ln-space residual RMS
    """

    _require(series, min_points)
    intercept, slope, r2, rms = linear_fit(
        np.log(series.n), np.log(series.values)
    )
    return PowerLawFit(slope, float(np.exp(intercept)), r2, rms, len(series))


def fit_exponential(series, min_points=3):
    """Least-squares line through (n, ln value), ``xi_inf = -1 / slope``.

    Raises
    ------
    DataError
        fewer than ``min_points`` points, or a non-negative slope (the
        series does not decay)
    """

    _require(series, min_points)
    intercept, slope, r2, rms = linear_fit(series.n, np.log(series.values))
    if not slope < 0:
        raise DataError(
            f'series is not an exponential decay, semilog slope {slope}'
        )
    return ExponentialFit(
        -1.0 / slope, float(np.exp(intercept)), r2, rms, len(series)
    )


def compare_models(series, min_points=3):
    """Power-law and exponential fits side by side.

    ``preferred`` is the model with the smaller ln-space residual RMS;
    a non-decaying series is always ``power``.
    """

    power = fit_power_law(series, min_points)
    try:
        exponential = fit_exponential(series, min_points)
    except DataError:
        return ModelComparison(power, None, 'power')
    if exponential.residual_rms < power.residual_rms:
        return ModelComparison(power, exponential, 'exponential')
    return ModelComparison(power, exponential, 'power')


def xi_from_moments(series):
    """Characteristic scale ``xi = M3/M2 - M2/M1``.

    Moments are ``M_q = sum_n w_n n^q value(n)`` over all points of the
    series, with ``w_n`` the local grid spacing (``numpy.gradient``), so
    a uniform grid of any step gives the plain discrete sums.

    Raises
    ------
    DataError
        fewer than two points, or a non-positive result
    """

    if len(series) < 2:
        raise DataError('xi needs at least two points')
    n = series.n
    weights = np.gradient(n) * series.values
    m1 = np.sum(weights * n)
    m2 = np.sum(weights * n ** 2)
    m3 = np.sum(weights * n ** 3)
    xi = float(m3 / m2 - m2 / m1)
    if not xi > 0:
        raise DataError(f'degenerate series, xi = {xi}')
    return xi


def detect_crossover_nc(series, ordered_reference, exp_fit):
    """Smallest size at which a disordered series has left its ordered
    counterpart, ``series / reference <= 1/e``, while still within a
    factor 2 of its exponential fit, ``series / fit >= 2/e``.

    Parameters
    ----------
    series : ScalingSeries
        disordered typical rates
    ordered_reference : ScalingSeries
        ordered-chain rates on the same sizes
    exp_fit : ExponentialFit or (xi_inf, prefactor)

    Returns
    -------
    n_c : int or None
        None when no size qualifies (N_c beyond the grid)
    """

    if not np.array_equal(series.n, ordered_reference.n):
        raise DataError('series and ordered reference differ in sizes')
    xi_inf, prefactor = exp_fit[0], exp_fit[1]
    fitted = prefactor * np.exp(-series.n / xi_inf)

    tol = 1.0 + 1e-12
    departed = series.values / ordered_reference.values <= np.exp(-1.0) * tol
    on_fit = series.values / fitted * tol >= 2.0 * np.exp(-1.0)
    hits = np.flatnonzero(departed & on_fit)
    if not len(hits):
        return None
    return int(series.n[hits[0]])


@dataclass(frozen=True, eq=False)
class XiTable:
    """Characteristic scales xi by (n_max, W) for one mode target.

    ``frame`` has the columns ``XI_COLUMNS``; ``xi_nmin_shift`` is xi
    recomputed without the smallest size, a sensitivity diagnostic.
    """

    frame: pd.DataFrame
    target: str = None

    def __post_init__(self):
        missing = {'n_max', 'disorder_w', 'xi'} - set(self.frame.columns)
        if missing:
            raise DataError(f'xi table lacks columns {sorted(missing)}')
        if not np.all(self.frame['xi'] > 0):
            raise DataError('xi table values must be positive')

    @property
    def rows(self):
        return list(
            self.frame[['n_max', 'disorder_w', 'xi']].itertuples(
                index=False, name=None
            )
        )

    @property
    def sizes(self):
        return sorted(self.frame['n_max'].unique())

    @property
    def disorder_values(self):
        return sorted(self.frame['disorder_w'].unique())

    def at(self, n_max):
        rows = self.frame[self.frame['n_max'] == n_max]
        return rows.sort_values('disorder_w')

    def pivot(self):
        return self.frame.pivot(
            index='n_max', columns='disorder_w', values='xi'
        )


def xi_table(series_by_w, target=None, min_points=3):
    """XiTable of every W series, one row per n_max from the
    ``min_points``-th size on."""

    rows = []
    for w in sorted(series_by_w):
        series = series_by_w[w]
        for count in range(min_points, len(series) + 1):
            head = series.head(count)
            shifted = head.tail(count - 1)
            rows.append(
                {
                    'n_max': int(head.n[-1]),
                    'disorder_w': float(w),
                    'xi': xi_from_moments(head),
                    'xi_nmin_shift': xi_from_moments(shifted),
                }
            )
    return XiTable(pd.DataFrame(rows, columns=XI_COLUMNS), target)


def crossover_table(series_by_w, ordered_reference, fit_fraction=0.5):
    """N_c per W.

    The exponential fit uses the largest ``fit_fraction`` of the sizes
    (at least three), where a disordered series has settled on its
    exponential tail.
    """

    rows = []
    for w in sorted(series_by_w):
        series = series_by_w[w]
        count = max(3, int(np.ceil(fit_fraction * len(series))))
        try:
            fit = fit_exponential(series.tail(count))
        except DataError:
            rows.append({'disorder_w': w, 'n_c': None, 'xi_inf': None})
            continue
        n_c = detect_crossover_nc(series, ordered_reference, fit)
        rows.append({'disorder_w': w, 'n_c': n_c, 'xi_inf': fit.xi_inf})
    return pd.DataFrame(rows, columns=['disorder_w', 'n_c', 'xi_inf'])


def fit_divergence(table, w_c=0.0):
    """Fit ``xi(N_max, W) = A (W - w_c)^(-nu)`` at the largest size."""

    largest = table.at(max(table.sizes))
    largest = largest[largest['disorder_w'] > w_c]
    if len(largest) < 3:
        raise DataError('divergence fit needs three disorder values above w_c')
    intercept, slope, r2, _ = linear_fit(
        np.log(largest['disorder_w'] - w_c), np.log(largest['xi'])
    )
    return DivergenceFit(
        -slope, float(np.exp(intercept)), r2, w_c, len(largest)
    )


def series_from_table(
    table, disorder_w, target_kind, target_k, selector, column='gamma_typ'
):
    """ScalingSeries of one (W, target) out of an ensemble table."""

    mask = (
        np.isclose(table['disorder_w'], disorder_w)
        & (table['target_kind'] == target_kind)
        & np.isclose(table['target_k'], target_k)
        & (table['selector'] == selector)
    )
    rows = table[mask].sort_values('n_qubits')
    if rows.empty:
        raise DataError(
            f'no ensemble rows for W={disorder_w}, target {target_kind} '
            f'k={target_k} {selector}'
        )
    return ScalingSeries.from_arrays(
        rows['n_qubits'].to_numpy(),
        rows[column].to_numpy(),
        disorder_w=float(disorder_w),
        target=target_kind,
        selector=selector,
    )
