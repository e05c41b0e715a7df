# -*- coding: utf-8 -*-
"""Finite-size-scaling data collapse of ``N / xi = F[N (W - W_c)^nu]``.

The collapse cost is the total variation of y along the sorted scaling
variable, divided by the y range, minus one. It is zero exactly when y is
monotonic in x. The minimum is found with a coarse grid, a zoomed grid
around the best cell and a Nelder-Mead refinement.
"""

from collections import namedtuple
from dataclasses import dataclass
import warnings

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from tqdm import tqdm

from .errors import CollapseError
from . import defaults

CollapsePoint = namedtuple('CollapsePoint', ['n', 'w', 'y'])

OverlapReport = namedtuple(
    'OverlapReport',
    [
        'x_scale',
        'y_scale',
        'residual_rms',
        'n_overlap',
        'params_a',
        'params_b',
    ],
)

# cost ties on the grid within this absolute tolerance
_TIE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class CollapseResult:
    """Fitted critical parameters and master curve of one collapse.

    ``master_curve`` has columns x, y, n, w sorted by x;
    ``uncertainty`` holds bootstrap half-widths (w_c, nu) and is None
    without resamples. ``at_boundary`` flags an optimum on the edge of the
    search box and ``no_collapse`` a cost above the threshold.
    """

    w_c: float
    nu: float
    cost: float
    master_curve: pd.DataFrame
    uncertainty: tuple = None
    at_boundary: bool = False
    no_collapse: bool = False
    n_bootstrap: int = 0
    label: str = None

    def as_record(self):
        w_c_err, nu_err = self.uncertainty or (np.nan, np.nan)
        return {
            'label': self.label,
            'w_c': self.w_c,
            'nu': self.nu,
            'cost': self.cost,
            'w_c_err': w_c_err,
            'nu_err': nu_err,
            'at_boundary': self.at_boundary,
            'no_collapse': self.no_collapse,
            'n_bootstrap': self.n_bootstrap,
            'n_points': len(self.master_curve),
        }


def _as_arrays(points):
    if isinstance(points, pd.DataFrame):
        return (
            points['n'].to_numpy(dtype=float),
            points['w'].to_numpy(dtype=float),
            points['y'].to_numpy(dtype=float),
        )
    n, w, y = (np.array(col, dtype=float) for col in zip(*points))
    return n, w, y


def _total_variation_cost(x, y):
    # sort by y, then stably by x, so ties in x are ordered by y
    by_y = np.argsort(y, kind='stable')
    order = by_y[np.argsort(x[by_y], kind='stable')]
    span = y.max() - y.min()
    return float(np.sum(np.abs(np.diff(y[order]))) / span - 1.0)


def cost_function(points, w_c, nu):
    """Collapse cost of points for trial critical parameters.

    Parameters
    ----------
    points : list of CollapsePoint or pandas.DataFrame
        at least three points with columns n, w, y
    w_c, nu : float
        trial critical disorder and exponent

    Returns
    -------
    cost : float
        ``sum_j |y_{j+1} - y_j| / (max y - min y) - 1`` along ascending
        ``x = n (w - w_c)^nu``; zero iff y is monotonic in x

    Raises
    ------
    CollapseError
        fewer than three points, zero y range or any ``w <= w_c``
    """

    n, w, y = _as_arrays(points)
    if len(y) < 3:
        raise CollapseError(f'need at least 3 points, got {len(y)}')
    if not y.max() > y.min():
        raise CollapseError('y has zero range, nothing to collapse')
    if np.any(w <= w_c):
        raise CollapseError(
            f'all disorder values must exceed w_c={w_c}, '
            f'min W is {w.min()}'
        )
    return _total_variation_cost(n * (w - w_c) ** nu, y)


def _cost_grid(n, w, y, wc_values, nu_values):
    """Cost on the outer product of trial values, inf where W <= w_c."""
    span = y.max() - y.min()
    costs = np.full((len(wc_values), len(nu_values)), np.inf)
    by_y = np.argsort(y, kind='stable')
    n_y, w_y, y_y = n[by_y], w[by_y], y[by_y]
    for i, w_c in enumerate(wc_values):
        if np.any(w_y <= w_c):
            continue
        x = n_y[None, :] * (w_y - w_c)[None, :] ** nu_values[:, None]
        order = np.argsort(x, axis=1, kind='stable')
        tv = np.sum(np.abs(np.diff(y_y[order], axis=1)), axis=1)
        costs[i] = tv / span - 1.0
    return costs


def _grid_optimum(n, w, y, wc_values, nu_values):
    costs = _cost_grid(n, w, y, wc_values, nu_values)
    best = costs.min()
    if not np.isfinite(best):
        raise CollapseError('no grid cell has W > w_c for every point')
    ties = np.argwhere(costs <= best + _TIE_ATOL)
    start = np.array(
        [wc_values[ties[:, 0]].mean(), nu_values[ties[:, 1]].mean()]
    )
    first = np.array([wc_values[ties[0, 0]], nu_values[ties[0, 1]]])
    return best, start, first


def _objective(n, w, y, box):
    (wc_lo, wc_hi), (nu_lo, nu_hi) = box
    # outside the box or with W <= w_c the cost is a large constant
    penalty = 1e9

    def cost(params):
        w_c, nu = params
        if not (wc_lo <= w_c <= wc_hi and nu_lo <= nu <= nu_hi):
            return penalty
        if np.any(w <= w_c):
            return penalty
        return _total_variation_cost(n * (w - w_c) ** nu, y)

    return cost


def _refine(n, w, y, box, start, start_cost):
    objective = _objective(n, w, y, box)
    result = minimize(
        objective,
        start,
        method='Nelder-Mead',
        options={'xatol': 1e-6, 'fatol': 1e-9, 'maxiter': 2000},
    )
    if result.fun < start_cost:
        return np.asarray(result.x, dtype=float), float(result.fun)
    return np.asarray(start, dtype=float), float(start_cost)


def _search(n, w, y, box, grid):
    (wc_lo, wc_hi), (nu_lo, nu_hi) = box
    wc_values = np.linspace(wc_lo, wc_hi, grid)
    nu_values = np.linspace(nu_lo, nu_hi, grid)
    objective = _objective(n, w, y, box)
    best, start, first = _grid_optimum(n, w, y, wc_values, nu_values)
    center = start if objective(start) <= best + _TIE_ATOL else first

    # zoom to +-2 coarse steps around the best cells
    wc_step = (wc_hi - wc_lo) / (grid - 1)
    nu_step = (nu_hi - nu_lo) / (grid - 1)
    fine_wc = np.linspace(
        max(wc_lo, center[0] - 2 * wc_step),
        min(wc_hi, center[0] + 2 * wc_step),
        grid,
    )
    fine_nu = np.linspace(
        max(nu_lo, center[1] - 2 * nu_step),
        min(nu_hi, center[1] + 2 * nu_step),
        grid,
    )
    best, start, first = _grid_optimum(n, w, y, fine_wc, fine_nu)
    start_cost = objective(start)
    if start_cost > best + _TIE_ATOL:
        # centroid of a non-convex tie set fell off the plateau
        start, start_cost = first, best
    return _refine(n, w, y, box, start, start_cost)


def _master_curve(n, w, y, w_c, nu):
    x = n * (w - w_c) ** nu
    frame = pd.DataFrame({'x': x, 'y': y, 'n': n, 'w': w})
    return frame.sort_values(['x', 'y'], kind='mergesort').reset_index(
        drop=True
    )


def points_from_xi_table(table, min_w=0.0, sizes=None):
    """Collapse points ``(N, W, N / xi)`` from an XiTable.

    Rows with ``W <= min_w`` (the ordered chain by default) are dropped;
    ``sizes`` restricts the n_max values used.
    """

    frame = table.frame
    frame = frame[frame['disorder_w'] > min_w]
    if sizes is not None:
        frame = frame[frame['n_max'].isin(list(sizes))]
    return pd.DataFrame(
        {
            'n': frame['n_max'].to_numpy(dtype=float),
            'w': frame['disorder_w'].to_numpy(dtype=float),
            'y': (frame['n_max'] / frame['xi']).to_numpy(dtype=float),
        }
    )


def collapse(
    xi_table,
    search_box=None,
    grid=defaults.COLLAPSE_GRID,
    n_bootstrap=defaults.N_BOOTSTRAP,
    seed=0,
    cost_threshold=defaults.COLLAPSE_COST_THRESHOLD,
    min_w=0.0,
    sizes=None,
    label=None,
    quiet=True,
):
    """Estimate (W_c, nu) by collapsing ``N / xi`` onto one curve.

    Parameters
    ----------
    xi_table : XiTable or pandas.DataFrame
        characteristic scales, or collapse points with columns n, w, y
    search_box : ((w_c_lo, w_c_hi), (nu_lo, nu_hi)), optional
        defaults to ``defaults.WC_BOX`` and ``defaults.NU_BOX``
    grid : int
        grid points per axis of the coarse and the zoomed search
    n_bootstrap : int
        resamples over disorder columns for the uncertainties
    seed : int
        seed of the bootstrap generator
    cost_threshold : float
        costs above this flag the result as ``no_collapse``
    min_w : float
        disorder values at or below this are dropped
    sizes : list of int, optional
        n_max values to use, all by default
    label : str, optional
        name recorded on the result
    quiet : bool, defaults to True
        set to False for a bootstrap progress bar

    Returns
    -------
    result : CollapseResult

    Raises
    ------
    CollapseError
        fewer than 3 sizes or 5 disorder values, or degenerate y
    """

    if isinstance(xi_table, pd.DataFrame):
        points = xi_table
    else:
        points = points_from_xi_table(xi_table, min_w, sizes)
    n, w, y = _as_arrays(points)

    n_sizes, n_w = len(np.unique(n)), len(np.unique(w))
    if n_sizes < 3 or n_w < 5:
        raise CollapseError(
            f'collapse needs >= 3 sizes and >= 5 disorder values, got '
            f'{n_sizes} and {n_w}'
        )
    if not y.max() > y.min():
        raise CollapseError('y has zero range, nothing to collapse')

    box = search_box or (defaults.WC_BOX, defaults.NU_BOX)
    (w_c, nu), cost = _search(n, w, y, box, grid)

    uncertainty = None
    if n_bootstrap:
        uncertainty = _bootstrap(
            n, w, y, box, (w_c, nu), n_bootstrap, seed, quiet
        )

    (wc_lo, wc_hi), (nu_lo, nu_hi) = box
    half_wc = 0.5 * (wc_hi - wc_lo) / (grid - 1)
    half_nu = 0.5 * (nu_hi - nu_lo) / (grid - 1)
    at_boundary = bool(
        min(w_c - wc_lo, wc_hi - w_c) < half_wc
        or min(nu - nu_lo, nu_hi - nu) < half_nu
    )
    if at_boundary:
        warnings.warn(
            f'collapse {label or ""} optimum (w_c={w_c:.4f}, nu={nu:.4f}) '
            'is on the search-box boundary'
        )
    no_collapse = bool(cost > cost_threshold)
    if no_collapse:
        warnings.warn(
            f'collapse {label or ""} cost {cost:.3f} exceeds '
            f'{cost_threshold}, the data do not collapse'
        )

    return CollapseResult(
        w_c=float(w_c),
        nu=float(nu),
        cost=float(cost),
        master_curve=_master_curve(n, w, y, w_c, nu),
        uncertainty=uncertainty,
        at_boundary=at_boundary,
        no_collapse=no_collapse,
        n_bootstrap=int(n_bootstrap),
        label=label,
    )


def _bootstrap(n, w, y, box, optimum, n_bootstrap, seed, quiet):
    """Half widths of the central 68% of resampled optima.

    Disorder columns are drawn with replacement; every resample is
    refined from the full-data optimum.
    """

    rng = np.random.default_rng(seed)
    columns = np.unique(w)
    samples = []
    for _ in tqdm(range(n_bootstrap), disable=quiet):
        picked = rng.choice(columns, size=len(columns), replace=True)
        if len(np.unique(picked)) < 2:
            continue
        rows = np.concatenate([np.flatnonzero(w == c) for c in picked])
        bn, bw, by = n[rows], w[rows], y[rows]
        if not by.max() > by.min():
            continue
        start_cost = _objective(bn, bw, by, box)(optimum)
        params, _ = _refine(bn, bw, by, box, np.array(optimum), start_cost)
        samples.append(params)
    if len(samples) < 2:
        return None
    samples = np.array(samples)
    low, high = np.percentile(samples, [16, 84], axis=0)
    half = 0.5 * (high - low)
    return float(half[0]), float(half[1])


def _unique_curve(curve):
    # average y over repeated x so interpolation sees a function
    grouped = curve.groupby('x', sort=True)['y'].mean()
    return grouped.index.to_numpy(dtype=float), grouped.to_numpy(dtype=float)


def compare_collapse(a, b):
    """Rescale b's master curve onto a's in log coordinates.

    One multiplicative factor per axis is fitted by least squares of
    ``ln y`` on the overlapping x range, starting from the offsets that
    align the medians.

    Returns
    -------
    report : OverlapReport
        scale factors applied to b, residual RMS in ln y, the number of
        overlapping points and both (w_c, nu) pairs

    Raises
    ------
    CollapseError
        the x ranges of the two master curves do not overlap
    """

    ax, ay = _unique_curve(a.master_curve)
    bx = b.master_curve['x'].to_numpy(dtype=float)
    by = b.master_curve['y'].to_numpy(dtype=float)
    if bx.max() < ax.min() or bx.min() > ax.max():
        raise CollapseError(
            f'master curves are disjoint in x: [{ax.min():.4g}, '
            f'{ax.max():.4g}] and [{bx.min():.4g}, {bx.max():.4g}]'
        )

    lax, lay = np.log(ax), np.log(ay)
    lbx, lby = np.log(bx), np.log(by)

    def residuals(params):
        shifted = lbx + params[0]
        inside = (shifted >= lax[0]) & (shifted <= lax[-1])
        if inside.sum() < 2:
            return None
        return lby[inside] + params[1] - np.interp(shifted[inside], lax, lay)

    def objective(params):
        res = residuals(params)
        return 1e9 if res is None else float(np.mean(res ** 2))

    bux, buy = _unique_curve(b.master_curve)
    start = np.array(
        [
            np.median(lax) - np.median(np.log(bux)),
            np.median(lay) - np.median(np.log(buy)),
        ]
    )
    result = minimize(
        objective,
        start,
        method='Nelder-Mead',
        options={'xatol': 1e-10, 'fatol': 1e-16, 'maxiter': 4000},
    )
    params = result.x if result.fun < objective(start) else start
    res = residuals(params)
    if res is None:
        raise CollapseError('rescaled master curves do not overlap')

    return OverlapReport(
        x_scale=float(np.exp(params[0])),
        y_scale=float(np.exp(params[1])),
        residual_rms=float(np.sqrt(np.mean(res ** 2))),
        n_overlap=len(res),
        params_a=(a.w_c, a.nu),
        params_b=(b.w_c, b.nu),
    )


def vs_k_table(results):
    """One row per k out of ``{k: CollapseResult}``."""
    rows = []
    for k in sorted(results):
        record = results[k].as_record()
        record['k'] = float(k)
        rows.append(record)
    columns = ['k'] + [c for c in rows[0] if c != 'k'] if rows else ['k']
    return pd.DataFrame(rows, columns=columns)
