# -*- coding: utf-8 -*-
"""Localization diagnostics of the selected modes: participation-ratio
lengths, wavepacket-center statistics with the effective potential
``V(x0) = -ln P(x0)``, and the boundary-radiation prediction of the
typical decay rate."""

from collections import namedtuple
from dataclasses import dataclass, replace
import warnings

import numpy as np
import pandas as pd
from statsmodels.formula.api import ols

from .errors import DataError
from . import defaults
from .scaling import ScalingSeries, XiTable, fit_power_law, linear_fit

CENTER_ESTIMATORS = ('argmax', 'centroid')

PotentialFit = namedtuple(
    'PotentialFit',
    [
        'kind',
        'level',
        'center',
        'sigma',
        'bic_constant',
        'bic_harmonic',
        'curvature',
    ],
)
EquivalenceReport = namedtuple(
    'EquivalenceReport',
    ['cells', 'mean_ratio', 'median_ratio', 'std_ratio', 'n_cells'],
)


def _weights(mode):
    vector = np.asarray(getattr(mode, 'vector', mode))
    return np.abs(vector) ** 2


def participation_ratio(mode):
    """Localization length ``xi_phi = 1 / sum_x |phi(x)|^4`` in sites.

    Parameters
    ----------
    mode : EigenMode or array_like
        mode with unit-norm vector, or the vector itself
    """

    return float(1.0 / np.sum(_weights(mode) ** 2))


def wavepacket_center(mode, estimator=defaults.CENTER_ESTIMATOR):
    """Site (1..N) a mode is localized at.

    ``argmax`` returns the site of the largest ``|phi(m)|^2``, the smallest
    such site on ties; ``centroid`` the mean ``sum_m m |phi(m)|^2``.
    """

    weights = _weights(mode)
    if estimator == 'argmax':
        return int(np.argmax(weights)) + 1
    if estimator == 'centroid':
        sites = np.arange(1, len(weights) + 1)
        return float(np.sum(sites * weights) / np.sum(weights))
    raise ValueError(
        f'unknown center estimator {estimator!r}, use one of '
        f'{CENTER_ESTIMATORS}'
    )


@dataclass(frozen=True, eq=False)
class LocalizationStats:
    """Wavepacket-center statistics of one (N, W, target) ensemble.

    ``density`` is P(x0) per bin of ``edges`` (sum of density times bin
    width is one), ``potential`` is ``-ln P`` and ``interior`` masks the
    bins used for fits, outside the depleted chain ends.
    """

    n_qubits: int
    n_modes: int
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    potential: np.ndarray
    interior: np.ndarray
    xi_phi_typ: float = None
    xi_phi_mean: float = None
    fit: PotentialFit = None
    alpha: float = None

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    def with_fit(self, bic_margin=defaults.BIC_MARGIN):
        return replace(self, fit=fit_potential(self, bic_margin))

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)

    def profile(self):
        """Potential profile table, one row per bin."""
        return pd.DataFrame(
            {
                'x0': self.centers,
                'left': self.edges[:-1],
                'right': self.edges[1:],
                'count': self.counts,
                'density': self.density,
                'potential': self.potential,
                'interior': self.interior,
            }
        )


def default_bins(n_qubits):
    return int(np.ceil(n_qubits / 10))


def typical_xi_phi(values):
    """Typical localization length ``exp(<ln xi_phi>)``."""
    from .ensemble import typical

    return typical(values)


def _modes_columns(modes, estimator):
    if isinstance(modes, pd.DataFrame):
        column = 'x0' if estimator == 'argmax' else 'x0_centroid'
        xi_phi = modes['xi_phi'] if 'xi_phi' in modes else None
        return modes[column].to_numpy(dtype=float), xi_phi
    modes = list(modes)
    if modes and hasattr(modes[0], 'vector'):
        centers = [wavepacket_center(m, estimator) for m in modes]
        xi_phi = [participation_ratio(m) for m in modes]
        return np.array(centers, dtype=float), np.array(xi_phi)
    return np.asarray(modes, dtype=float), None


def center_statistics(
    modes,
    n_qubits,
    n_bins=None,
    estimator=defaults.CENTER_ESTIMATOR,
    edge_fraction=defaults.EDGE_FRACTION,
    min_samples=defaults.MIN_CENTER_SAMPLES,
):
    """Histogram the wavepacket centers of an ensemble of modes.

    Parameters
    ----------
    modes : pandas.DataFrame, list of EigenMode or array_like
        selected-mode table with ``x0`` / ``x0_centroid`` and ``xi_phi``
        columns, the modes themselves, or bare centers
    n_qubits : int
        chain size N; bins cover [0.5, N + 0.5]
    n_bins : int, optional
        defaults to ``ceil(N / 10)``
    estimator : str
        ``argmax`` or ``centroid``
    edge_fraction : float
        bins centered within this fraction of N of either end are left
        out of fits
    min_samples : int
        fewer modes than this triggers a warning

    Returns
    -------
    stats : LocalizationStats

    Raises
    ------
    DataError
        no modes, or all of them in a single bin

    Notes
    -----
    Empty interior bins get one count (add-one smoothing) so the
    potential stays finite where fits are made; empty edge bins keep an
    infinite potential.
    """

    centers, xi_phi = _modes_columns(modes, estimator)
    if not len(centers):
        raise DataError('no modes to histogram')
    if len(centers) < min_samples:
        warnings.warn(
            f'only {len(centers)} modes for center statistics, '
            f'{min_samples} or more recommended'
        )

    n_bins = default_bins(n_qubits) if n_bins is None else int(n_bins)
    edges = np.linspace(0.5, n_qubits + 0.5, n_bins + 1)
    counts, _ = np.histogram(centers, bins=edges)
    if n_bins > 1 and counts.max() == counts.sum():
        raise DataError(
            'all wavepacket centers fall in one bin, '
            f'[{edges[counts.argmax()]}, {edges[counts.argmax() + 1]}]'
        )

    mids = 0.5 * (edges[1:] + edges[:-1])
    margin = edge_fraction * n_qubits
    interior = (mids >= 0.5 + margin) & (mids <= n_qubits + 0.5 - margin)

    counts = counts.astype(float)
    counts[interior & (counts == 0)] = 1.0
    density = counts / (counts.sum() * np.diff(edges))
    with np.errstate(divide='ignore'):
        potential = -np.log(density)

    typ = mean = None
    if xi_phi is not None:
        xi_phi = np.asarray(xi_phi, dtype=float)
        typ = typical_xi_phi(xi_phi)
        mean = float(np.mean(xi_phi))

    return LocalizationStats(
        n_qubits=int(n_qubits),
        n_modes=len(centers),
        edges=edges,
        counts=counts,
        density=density,
        potential=potential,
        interior=interior,
        xi_phi_typ=typ,
        xi_phi_mean=mean,
    )


def fit_potential(stats, bic_margin=defaults.BIC_MARGIN):
    """Fit the interior potential with a constant and with a parabola.

    The harmonic form ``V = (x0 - c)^2 / (2 sigma^2) + v0`` is chosen only
    when its curvature is positive and it lowers the BIC by more than
    ``bic_margin``; otherwise the constant level is kept.

    Returns
    -------
    fit : PotentialFit
        ``kind`` is ``constant`` or ``harmonic``; ``center`` and ``sigma``
        are None for a constant fit
    """

    keep = stats.interior & np.isfinite(stats.potential)
    frame = pd.DataFrame(
        {'x': stats.centers[keep], 'v': stats.potential[keep]}
    )
    if len(frame) < 2:
        raise DataError('potential fit needs at least two interior bins')

    constant = ols('v ~ 1', frame).fit()
    level = float(constant.params['Intercept'])
    if len(frame) < 4:
        return PotentialFit(
            'constant', level, None, None, float(constant.bic), None, None
        )

    # center x before squaring to keep the design well conditioned
    shift = float(frame['x'].mean())
    frame['u'] = frame['x'] - shift
    harmonic = ols('v ~ u + I(u ** 2)', frame).fit()
    a0 = float(harmonic.params['Intercept'])
    a1 = float(harmonic.params['u'])
    a2 = float(harmonic.params['I(u ** 2)'])

    improvement = float(constant.bic - harmonic.bic)
    if a2 > 0 and improvement > bic_margin:
        return PotentialFit(
            'harmonic',
            a0 - a1 ** 2 / (4.0 * a2),
            shift - a1 / (2.0 * a2),
            float(np.sqrt(1.0 / (2.0 * a2))),
            float(constant.bic),
            float(harmonic.bic),
            a2,
        )
    return PotentialFit(
        'constant',
        level,
        None,
        None,
        float(constant.bic),
        float(harmonic.bic),
        a2,
    )


def sigma_scaling(fits):
    """Width exponent alpha of ``sigma(N) ~ N^alpha``.

    Parameters
    ----------
    fits : list of (N, sigma)
        harmonic widths over at least three sizes
    """

    fits = sorted(fits)
    if len(fits) < 3:
        raise DataError(f'need at least 3 sizes, got {len(fits)}')
    return fit_power_law(ScalingSeries.from_points(fits)).exponent


def attach_alpha(cells):
    """Cells with the width exponent of their harmonic fits attached.

    ``alpha`` stays None when fewer than three cells have a harmonic fit.
    """

    harmonic = [
        (c.n_qubits, c.fit.sigma)
        for c in cells
        if c.fit is not None and c.fit.kind == 'harmonic'
    ]
    if len(harmonic) < 3:
        return list(cells)
    alpha = sigma_scaling(harmonic)
    return [c.with_alpha(alpha) for c in cells]


def _log_cosh(z):
    z = np.abs(z)
    return z + np.log1p(np.exp(-2.0 * z)) - np.log(2.0)


def predict_typ_rate(density, edges, xi_phi, n_qubits):
    """Boundary-radiation estimate of ln Gamma^typ up to a constant.

    Midpoint quadrature of
    ``int ln(exp(-N/xi_phi) cosh((2 x0 - N)/xi_phi)) P(x0) dx0`` over the
    histogram bins. Only differences in N are meaningful.

    Raises
    ------
    DataError
        P not normalized over the bins, or non-positive ``xi_phi``
    """

    density = np.asarray(density, dtype=float)
    edges = np.asarray(edges, dtype=float)
    widths = np.diff(edges)
    total = float(np.sum(density * widths))
    if abs(total - 1.0) > 1e-6:
        raise DataError(f'center density integrates to {total}, not 1')
    if not xi_phi > 0:
        raise DataError(f'xi_phi must be positive, got {xi_phi}')

    mids = 0.5 * (edges[1:] + edges[:-1])
    integrand = -n_qubits / xi_phi + _log_cosh((2 * mids - n_qubits) / xi_phi)
    return float(np.sum(integrand * density * widths))


def predicted_slope(cells):
    """Slope in N of the predicted ln Gamma^typ.

    Parameters
    ----------
    cells : list of LocalizationStats
        one per size at fixed W, each with ``xi_phi_typ``
    """

    if len(cells) < 2:
        raise DataError('slope needs at least two sizes')
    sizes = [c.n_qubits for c in cells]
    exponents = [
        predict_typ_rate(c.density, c.edges, c.xi_phi_typ, c.n_qubits)
        for c in cells
    ]
    return linear_fit(sizes, exponents)[1]


def xi_phi_table(modes):
    """Typical and mean xi_phi per (N, W, target) of a modes table."""

    keys = ['n_qubits', 'disorder_w', 'target_kind', 'target_k', 'selector']
    rows = []
    for key, group in modes.groupby(keys, sort=True):
        values = group['xi_phi'].to_numpy(dtype=float)
        rows.append(
            dict(
                zip(keys, key),
                xi_phi_typ=typical_xi_phi(values),
                xi_phi_mean=float(np.mean(values)),
                n_modes=len(values),
            )
        )
    return pd.DataFrame(
        rows, columns=keys + ['xi_phi_typ', 'xi_phi_mean', 'n_modes']
    )


def as_xi_table(table, column='xi_phi_typ', target=None):
    """XiTable of localization lengths, for collapses of N / xi_phi."""
    frame = pd.DataFrame(
        {
            'n_max': table['n_qubits'].astype(int),
            'disorder_w': table['disorder_w'].astype(float),
            'xi': table[column].astype(float),
            'xi_nmin_shift': np.nan,
        }
    )
    return XiTable(frame.reset_index(drop=True), target)


def equivalence_check(
    xi_table,
    xi_phi_table,
    crossover=None,
    saturation_factor=defaults.SATURATION_FACTOR,
):
    """Ratio xi / xi_phi on saturated cells.

    Parameters
    ----------
    xi_table : XiTable
        characteristic scales by (n_max, W)
    xi_phi_table : XiTable
        typical localization lengths by (N, W), see ``as_xi_table``
    crossover : dict, optional
        N_c per W; a cell is saturated when ``N >= saturation_factor *
        N_c``. Without it every cell with W > 0 counts as saturated. W = 0
        and W without a detected N_c are never saturated.

    Returns
    -------
    report : EquivalenceReport
    """

    merged = pd.merge(
        xi_table.frame[['n_max', 'disorder_w', 'xi']],
        xi_phi_table.frame[['n_max', 'disorder_w', 'xi']].rename(
            columns={'xi': 'xi_phi'}
        ),
        on=['n_max', 'disorder_w'],
    )
    saturated = merged['disorder_w'] > 0
    if crossover is not None:
        limit = merged['disorder_w'].map(
            lambda w: _nc_lookup(crossover, w) * saturation_factor
        )
        saturated &= merged['n_max'] >= limit
    cells = merged[saturated].copy()
    if cells.empty:
        raise DataError('no overlapping saturated (N, W) cells')

    cells['ratio'] = cells['xi'] / cells['xi_phi']
    ratio = cells['ratio'].to_numpy()
    return EquivalenceReport(
        cells.reset_index(drop=True),
        float(np.mean(ratio)),
        float(np.median(ratio)),
        float(np.std(ratio)),
        len(ratio),
    )


def _nc_lookup(crossover, w):
    for key, n_c in crossover.items():
        if np.isclose(key, w):
            if n_c is None or not np.isfinite(n_c):
                return np.inf
            return n_c
    return np.inf
