# -*- coding: utf-8 -*-
"""User utilities for generating synthetic rates, characteristic-scale
surfaces, wavepacket centers and mode profiles with known answers."""

import numpy as np
import pandas as pd

from .ensemble import STATS_COLUMNS
from .scaling import XI_COLUMNS, ScalingSeries, XiTable
from . import defaults


def _noisy(values, noise, seed):
    if not noise:
        return values
    rng = np.random.default_rng(seed)
    return values * (1.0 + noise * rng.standard_normal(len(values)))


def power_law_series(n, exponent, prefactor=1.0, noise=0.0, seed=None):
    """``prefactor * n^exponent`` with optional multiplicative noise.

    Parameters
    ----------
    n : array_like
        strictly increasing sizes
    exponent, prefactor : float
    noise : float
        relative standard deviation of Gaussian multiplicative noise
    seed : {None, int}
        seed of ``numpy.random.default_rng``
    """

    n = np.asarray(n, dtype=float)
    values = _noisy(prefactor * n ** exponent, noise, seed)
    return ScalingSeries(n, values)


def exponential_series(n, xi, prefactor=1.0, noise=0.0, seed=None):
    """``prefactor * exp(-n / xi)`` with optional multiplicative noise."""
    n = np.asarray(n, dtype=float)
    values = _noisy(prefactor * np.exp(-n / xi), noise, seed)
    return ScalingSeries(n, values)


def critical_xi_table(
    sizes=(100, 200, 400),
    disorder_w=None,
    nu=1.5,
    amplitude=2.0,
    w_c=0.0,
    target=None,
):
    """XiTable with ``xi(N, W) = min(N, amplitude * (W - w_c)^-nu)``.

    The default disorder grid is 0.05, 0.10, ..., 0.60.
    """

    if disorder_w is None:
        disorder_w = np.round(np.arange(1, 13) * 0.05, 10)
    rows = []
    for n in sizes:
        for w in disorder_w:
            xi = min(float(n), amplitude * (w - w_c) ** (-nu))
            rows.append(
                {
                    'n_max': int(n),
                    'disorder_w': float(w),
                    'xi': xi,
                    'xi_nmin_shift': xi,
                }
            )
    return XiTable(pd.DataFrame(rows, columns=XI_COLUMNS), target)


def random_xi_table(sizes=(100, 200, 400), disorder_w=None, seed=None):
    """XiTable whose xi ignores W: uniform noise around N / 2."""
    if disorder_w is None:
        disorder_w = np.round(np.arange(1, 13) * 0.05, 10)
    rng = np.random.default_rng(seed)
    rows = [
        {
            'n_max': int(n),
            'disorder_w': float(w),
            'xi': float(n) * rng.uniform(0.2, 0.8),
            'xi_nmin_shift': np.nan,
        }
        for n in sizes
        for w in disorder_w
    ]
    return XiTable(pd.DataFrame(rows, columns=XI_COLUMNS))


def center_samples(
    n_qubits, size, kind='uniform', center=None, sigma=None, seed=None
):
    """Wavepacket centers on the sites 1..N.

    ``uniform`` draws sites uniformly; ``gaussian`` draws rounded normal
    samples around ``center`` (default N/2) with width ``sigma`` (default
    N/6), redrawing those that fall off the chain.
    """

    rng = np.random.default_rng(seed)
    if kind == 'uniform':
        return rng.integers(1, n_qubits + 1, size=size)
    if kind != 'gaussian':
        raise ValueError("kind must be 'uniform' or 'gaussian'")

    center = 0.5 * n_qubits if center is None else center
    sigma = n_qubits / 6.0 if sigma is None else sigma
    samples = np.empty(0, dtype=int)
    while len(samples) < size:
        draw = np.rint(rng.normal(center, sigma, size=size)).astype(int)
        draw = draw[(draw >= 1) & (draw <= n_qubits)]
        samples = np.concatenate([samples, draw])
    return samples[:size]


def exponential_profile(n_qubits, center, decay_length):
    """Unit-norm real vector ``exp(-|m - center| / decay_length)``."""
    sites = np.arange(1, n_qubits + 1)
    vector = np.exp(-np.abs(sites - center) / decay_length)
    return vector / np.linalg.norm(vector)


def sine_profile(n_qubits, q):
    """Unit-norm discrete sine mode ``sin(q m pi / (N + 1))``."""
    sites = np.arange(1, n_qubits + 1)
    vector = np.sin(q * sites * np.pi / (n_qubits + 1))
    return vector / np.linalg.norm(vector)


def ensemble_table(
    sizes,
    disorder_w,
    rate,
    target_kind='band_edge_low',
    target_k=0.0,
    selector='nearest_omega',
    n_real=1,
    master_seed=defaults.MASTER_SEED,
):
    """Ensemble table with ``gamma_typ = gamma_avg = rate(N, W)``.

    Parameters
    ----------
    sizes, disorder_w : iterable
        grid of the table
    rate : callable
        ``rate(n, w)`` returning a positive rate
    """

    rows = []
    for w in disorder_w:
        for n in sizes:
            value = float(rate(n, w))
            rows.append(
                {
                    'n_qubits': int(n),
                    'disorder_w': float(w),
                    'target_kind': target_kind,
                    'target_k': float(target_k),
                    'selector': selector,
                    'n_real': n_real,
                    'gamma_typ': value,
                    'gamma_avg': value,
                    'ln_gamma_std': 0.0,
                    'master_seed': master_seed,
                    'n_failed': 0,
                    'phi': defaults.PHI,
                    'gamma': defaults.GAMMA,
                }
            )
    return pd.DataFrame(rows, columns=STATS_COLUMNS)
