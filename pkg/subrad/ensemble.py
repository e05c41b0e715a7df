# -*- coding: utf-8 -*-
"""Seeded disorder ensembles over (N, W) grids with typical and mean
decay-rate statistics per mode target.

Every realization is an independent work item keyed by its index, so
results are collected into an indexed buffer and reduced in index order
whatever the number of workers.
"""

from collections import namedtuple
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import partial
from math import ceil
from multiprocessing import Pool
import warnings

import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import (
    ConfigError,
    DataError,
    EnsembleError,
    SingularSpacingError,
    SpectrumError,
)
from . import defaults, tools
from .localization import participation_ratio, wavepacket_center
from .model import ChainSpec, build_h_eff, ordered_realization, realize
from .scaling import ScalingSeries, fit_power_law
from .spectrum import boundary_rate_identity, diagonalize, select_target_mode

RealizationRecord = namedtuple('RealizationRecord', ['index', 'rows', 'error'])

STATS_COLUMNS = [
    'n_qubits',
    'disorder_w',
    'target_kind',
    'target_k',
    'selector',
    'n_real',
    'gamma_typ',
    'gamma_avg',
    'ln_gamma_std',
    'master_seed',
    'n_failed',
    'phi',
    'gamma',
]


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Decay-rate statistics of one (N, W, target) cell.

    ``modes`` holds one row per successful realization with the selected
    mode's summary (Omega, Gamma, k_est, class, boundary populations,
    xi_phi and wavepacket centers).
    """

    n_qubits: int
    disorder_w: float
    target: object
    n_realizations: int
    gamma_typ: float
    gamma_avg: float
    ln_gamma_std: float
    master_seed: int
    index_range: tuple
    phi: float = defaults.PHI
    gamma: float = defaults.GAMMA
    n_failed: int = 0
    failures: tuple = ()
    modes: pd.DataFrame = field(default=None, repr=False)

    @property
    def seed_provenance(self):
        return self.master_seed, self.index_range

    def as_record(self):
        return {
            'n_qubits': self.n_qubits,
            'disorder_w': self.disorder_w,
            'target_kind': self.target.kind,
            'target_k': self.target.target_k,
            'selector': self.target.selector,
            'n_real': self.n_realizations,
            'gamma_typ': self.gamma_typ,
            'gamma_avg': self.gamma_avg,
            'ln_gamma_std': self.ln_gamma_std,
            'master_seed': self.master_seed,
            'n_failed': self.n_failed,
            'phi': self.phi,
            'gamma': self.gamma,
        }


def _positive_rates(values, indices=None):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DataError('no rates to average')
    bad = np.flatnonzero(~(values > 0))
    if len(bad):
        where = bad[0] if indices is None else indices[bad[0]]
        raise DataError(
            f'non-positive decay rate {values[bad[0]]} at realization {where}'
        )
    return values


def typical(values, indices=None):
    """Typical value ``exp(<ln x>)``, reduced in the given order.

    Parameters
    ----------
    values : array_like
        positive rates, one per realization
    indices : sequence of int, optional
        realization indices used to name the offender in errors

    Returns
    -------
    rate : float
        the geometric mean, exactly the common value for a constant list

    Raises
    ------
    DataError
        a non-positive value, or no values at all
    """

    values = _positive_rates(values, indices)
    if np.all(values == values[0]):
        return float(values[0])
    return float(np.exp(np.mean(np.log(values))))


def _mean(values):
    if np.all(values == values[0]):
        return float(values[0])
    return float(np.mean(values))


def _log_std(values):
    if np.all(values == values[0]):
        return 0.0
    return float(np.std(np.log(values)))


def rate_statistics(values, indices=None):
    """Typical rate, mean rate and standard deviation of ln Gamma.

    The typical rate is clamped to the mean, which it never exceeds
    mathematically but can by rounding.
    """

    values = _positive_rates(values, indices)
    avg = _mean(values)
    return min(typical(values, indices), avg), avg, _log_std(values)


def _mode_row(mode, gamma):
    rates = boundary_rate_identity(mode, gamma)
    return {
        'Omega': mode.Omega,
        'Gamma': mode.Gamma,
        'k_est': mode.k_est,
        'node_index': mode.node_index,
        'mode_class': mode.mode_class,
        'pop_first': float(abs(mode.vector[0]) ** 2),
        'pop_last': float(abs(mode.vector[-1]) ** 2),
        'boundary_population': rates.population,
        'xi_phi': participation_ratio(mode),
        'x0': wavepacket_center(mode, 'argmax'),
        'x0_centroid': wavepacket_center(mode, 'centroid'),
    }


def run_realization(realization_index, spec, targets):
    """Single-realization pipeline, one diagonalization for all targets.

    Returns
    -------
    record : RealizationRecord
        ``rows`` maps target label to the selected mode's summary;
        ``error`` is the failure message, None on success
    """

    try:
        realization = realize(spec, realization_index)
        h = build_h_eff(realization, gamma=spec.gamma, phi=spec.phi)
        modes = diagonalize(h)
        rows = {}
        for target in targets:
            mode = select_target_mode(modes, target, spec.phi, spec.gamma)
            rows[target.label] = _mode_row(mode, spec.gamma)
    except (SingularSpacingError, SpectrumError, DataError) as err:
        return RealizationRecord(realization_index, None, str(err))
    return RealizationRecord(realization_index, rows, None)


def _validate_targets(targets, phi):
    if not targets:
        raise ConfigError('at least one target is required', 'targets')
    for target in targets:
        if target.selector == 'min_gamma' and target.kind == 'fixed_k':
            raise ConfigError(
                'min_gamma is defined for band-edge targets only',
                'targets.selector',
            )
        target.check(phi)


def _aggregate(spec, targets, records, start, max_failed_fraction):

    n_total = len(records)
    failures = tuple((r.index, r.error) for r in records if r.error)
    if len(failures) > max_failed_fraction * n_total:
        first_index, first_error = failures[0]
        raise EnsembleError(
            f'cell N={spec.n_qubits}, W={spec.disorder_w}: '
            f'{len(failures)} of {n_total} realizations failed, first at '
            f'{first_index}: {first_error}'
        )
    if failures:
        warnings.warn(
            f'cell N={spec.n_qubits}, W={spec.disorder_w}: '
            f'{len(failures)} failed realizations recorded '
            f'{[index for index, _ in failures]}'
        )

    good = [r for r in records if r.error is None]
    indices = [r.index for r in good]
    cell = []
    for target in targets:
        modes = pd.DataFrame([r.rows[target.label] for r in good])
        modes.insert(0, 'realization', indices)
        typ, avg, log_std = rate_statistics(
            modes['Gamma'].to_numpy(), indices
        )
        cell.append(
            EnsembleStats(
                n_qubits=spec.n_qubits,
                disorder_w=spec.disorder_w,
                target=target,
                n_realizations=len(good),
                gamma_typ=typ,
                gamma_avg=avg,
                ln_gamma_std=log_std,
                master_seed=spec.master_seed,
                index_range=(start, start + n_total),
                phi=spec.phi,
                gamma=spec.gamma,
                n_failed=len(failures),
                failures=failures,
                modes=modes,
            )
        )
    return cell


@contextmanager
def _worker_pool(workers):
    if workers <= 1:
        yield None
        return
    with Pool(workers, initializer=tools.init_worker) as pool:
        yield pool


def run_ensemble(
    specs,
    targets,
    n_realizations=defaults.N_REALIZATIONS,
    workers=1,
    quiet=False,
    start_index=0,
    max_failed_fraction=defaults.MAX_FAILED_FRACTION,
):
    """Run the disorder ensemble over a grid of chain configurations.

    Parameters
    ----------
    specs : list of ChainSpec
        one spec per (N, W) cell
    targets : list of ModeTarget
        modes followed in every realization
    n_realizations : int
        realizations per cell, indices ``start_index`` onwards
    workers : int, defaults to 1
        number of processes mapping realizations
    quiet : bool, defaults to False
        set to True to disable the progress bar and per-cell lines
    start_index : int, defaults to 0
        first realization index
    max_failed_fraction : float
        abort a cell when more than this fraction of realizations fail

    Returns
    -------
    stats : list of EnsembleStats
        cells in spec order, targets in the given order within a cell

    Notes
    -----
    BLAS is pinned to one thread in this process and in every worker,
    which makes the eigendecompositions, and so every output, identical
    for any worker count.
    """

    if n_realizations < 1:
        raise ConfigError(
            f'must be >= 1, got {n_realizations}', 'ensemble.n_realizations'
        )
    if start_index < 0:
        raise ConfigError(f'must be >= 0, got {start_index}', 'start_index')
    for phi in sorted({spec.phi for spec in specs}):
        _validate_targets(targets, phi)

    indices = range(start_index, start_index + n_realizations)
    chunksize = max(1, ceil(n_realizations / max(workers, 1)))

    stats = []
    with tools.single_threaded(np), _worker_pool(workers) as pool:
        for spec in tqdm(specs, disable=quiet):
            processor = partial(run_realization, spec=spec, targets=targets)
            if pool is None:
                records = list(map(processor, indices))
            else:
                records = pool.map(processor, indices, chunksize=chunksize)
            cell = _aggregate(
                spec, targets, records, start_index, max_failed_fraction
            )
            stats.extend(cell)
            if not quiet:
                summary = ', '.join(
                    f'{s.target.label} typ={s.gamma_typ:.4g}' for s in cell
                )
                tqdm.write(
                    f'N={spec.n_qubits} W={spec.disorder_w}: {summary}'
                )
    return stats


def stats_table(stats):
    """Flatten ensemble results into one row per (N, W, target)."""
    return pd.DataFrame([s.as_record() for s in stats], columns=STATS_COLUMNS)


def modes_table(stats):
    """Per-realization selected-mode summaries of every cell."""
    frames = []
    for s in stats:
        frame = s.modes.copy()
        frame.insert(0, 'selector', s.target.selector)
        frame.insert(0, 'target_k', s.target.target_k)
        frame.insert(0, 'target_kind', s.target.kind)
        frame.insert(0, 'disorder_w', s.disorder_w)
        frame.insert(0, 'n_qubits', s.n_qubits)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def ordered_rates(n_list, target, phi=defaults.PHI, gamma=defaults.GAMMA):
    """Decay rate of the target mode in ordered chains, one per N."""
    rates = []
    for n in n_list:
        spec = ChainSpec(int(n), phi=phi, gamma=gamma)
        h = build_h_eff(ordered_realization(spec), gamma=gamma, phi=phi)
        rates.append(select_target_mode(diagonalize(h), target, phi, gamma))
    return np.array([mode.Gamma for mode in rates])


def mean_vs_typical(table, min_sizes=3):
    """Power-law exponents of Gamma^avg(N) and Gamma^typ(N).

    Parameters
    ----------
    table : pandas.DataFrame
        ensemble table as returned by ``stats_table``
    min_sizes : int
        cells with fewer sizes are skipped

    Returns
    -------
    exponents : pandas.DataFrame
        one row per (W, target) with ``avg_exponent``, ``typ_exponent``
        and ``am_gm`` (typical never above mean in any cell)
    """

    rows = []
    keys = ['disorder_w', 'target_kind', 'target_k', 'selector']
    for key, group in table.groupby(keys, sort=True):
        group = group.sort_values('n_qubits')
        if len(group) < min_sizes:
            continue
        n = group['n_qubits'].to_numpy()
        avg = fit_power_law(ScalingSeries.from_arrays(n, group['gamma_avg']))
        typ = fit_power_law(ScalingSeries.from_arrays(n, group['gamma_typ']))
        rows.append(
            dict(
                zip(keys, key),
                avg_exponent=avg.exponent,
                typ_exponent=typ.exponent,
                am_gm=bool(
                    np.all(group['gamma_typ'] <= group['gamma_avg'])
                ),
            )
        )
    columns = keys + ['avg_exponent', 'typ_exponent', 'am_gm']
    return pd.DataFrame(rows, columns=columns)
