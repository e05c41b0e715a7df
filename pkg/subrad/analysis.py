# -*- coding: utf-8 -*-
"""Analysis of ensemble outputs: scaling fits, characteristic scales,
crossover sizes, data collapses, localization statistics and the
plot-ready tables ``fig2a.csv`` ... ``fig4d.csv``.

Each stage that lacks the data it needs warns and is skipped; a missing
input file is an error.
"""

from pathlib import Path
import re
import warnings

import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import CollapseError, DataError
from . import ensemble, fss, io, localization, scaling
from .model import build_h_inv, realize

FIT_COLUMNS = [
    'target',
    'disorder_w',
    'n_points',
    'power_exponent',
    'power_prefactor',
    'power_r2',
    'power_rms',
    'exp_xi_inf',
    'exp_prefactor',
    'exp_r2',
    'exp_rms',
    'preferred',
]


def _target_rows(table, target):
    mask = (
        (table['target_kind'] == target.kind)
        & np.isclose(table['target_k'], target.target_k)
        & (table['selector'] == target.selector)
    )
    return table[mask]


def _nearest(values, goal):
    values = np.asarray(sorted(values), dtype=float)
    return float(values[np.argmin(np.abs(values - goal))])


def _slug(label):
    return re.sub(r'[^A-Za-z0-9.]+', '_', label).strip('_')


def _first(targets, strong):
    """First band-edge (``strong``) or fixed-k target, None without."""
    for target in targets:
        if (target.kind != 'fixed_k') == strong:
            return target
    return None


class _Target:
    """Per-target intermediate products shared by the stages."""

    def __init__(self, target, rows, phi, gamma):
        self.target = target
        self.kind = target.kind
        self.label = target.label
        self.rows = rows
        self.series = {}
        for w in sorted(rows['disorder_w'].unique()):
            self.series[float(w)] = scaling.series_from_table(
                rows, w, target.kind, target.target_k, target.selector
            )
        self.disordered = {w: s for w, s in self.series.items() if w > 0}
        self.reference = self._reference(phi, gamma)
        self.xi = scaling.xi_table(self.series, self.label)
        self.crossover = self._crossover()

    def _reference(self, phi, gamma):
        if 0.0 in self.series:
            return self.series[0.0]
        sizes = sorted(self.rows['n_qubits'].unique())
        rates = ensemble.ordered_rates(sizes, self.target, phi, gamma)
        return scaling.ScalingSeries.from_arrays(sizes, rates)

    def _crossover(self):
        same_sizes = {
            w: s
            for w, s in self.disordered.items()
            if np.array_equal(s.n, self.reference.n)
        }
        table = scaling.crossover_table(same_sizes, self.reference)
        table.insert(0, 'target', self.label)
        return table

    @property
    def crossover_by_w(self):
        return dict(zip(self.crossover['disorder_w'], self.crossover['n_c']))


def _fits_rows(info):
    rows = []
    for w, series in info.series.items():
        try:
            comparison = scaling.compare_models(series)
        except DataError as err:
            warnings.warn(f'{info.label} W={w}: no fit, {err}')
            continue
        power, exponential = comparison.power, comparison.exponential
        row = {
            'target': info.label,
            'disorder_w': w,
            'n_points': power.n_points,
            'power_exponent': power.exponent,
            'power_prefactor': power.prefactor,
            'power_r2': power.r_squared,
            'power_rms': power.residual_rms,
            'exp_xi_inf': np.nan,
            'exp_prefactor': np.nan,
            'exp_r2': np.nan,
            'exp_rms': np.nan,
            'preferred': comparison.preferred,
        }
        if exponential is not None:
            row.update(
                exp_xi_inf=exponential.xi_inf,
                exp_prefactor=exponential.prefactor,
                exp_r2=exponential.r_squared,
                exp_rms=exponential.residual_rms,
            )
        rows.append(row)
    return rows


def _fit_curves(info, w):
    """Gamma^typ(N) at one W with both fitted curves."""
    series = info.series[w]
    comparison = scaling.compare_models(series)
    frame = pd.DataFrame(
        {
            'target': info.label,
            'disorder_w': w,
            'n_qubits': series.n.astype(int),
            'gamma_typ': series.values,
            'power_fit': comparison.power.prefactor
            * series.n ** comparison.power.exponent,
            'exp_fit': np.nan,
        }
    )
    if comparison.exponential is not None:
        exponential = comparison.exponential
        frame['exp_fit'] = exponential.prefactor * np.exp(
            -series.n / exponential.xi_inf
        )
    return frame


def _weak_disorder_curve(info, w):
    series = info.series[w]
    frame = pd.DataFrame(
        {
            'target': info.label,
            'disorder_w': w,
            'n_qubits': series.n.astype(int),
            'gamma_typ': series.values,
        }
    )
    if np.array_equal(series.n, info.reference.n):
        frame['ordered'] = info.reference.values
        frame['suppression'] = series.values / info.reference.values
    return frame


class _Writer:
    def __init__(self, out_dir, config):
        self.out_dir = Path(out_dir)
        self.config = config
        self.written = []

    def table(self, frame, name, extra=None):
        path = io.write_table(
            frame, self.out_dir / name, self.config, extra=extra
        )
        self.written.append(path)
        return path

    def json(self, document, name):
        path = io.write_json(document, self.out_dir / name, self.config)
        self.written.append(path)
        return path


def _scaling_stage(infos, table, writer, settings):
    rows = [row for info in infos for row in _fits_rows(info)]
    writer.table(pd.DataFrame(rows, columns=FIT_COLUMNS), 'fits.csv')
    xi = pd.concat(
        [info.xi.frame.assign(target=info.label) for info in infos],
        ignore_index=True,
    )
    writer.table(xi, 'xi_table.csv')
    crossover = pd.concat([info.crossover for info in infos])
    writer.table(crossover.reset_index(drop=True), 'crossover.csv')
    writer.table(ensemble.mean_vs_typical(table), 'mean_vs_typical.csv')

    for name, strong in (('fig2a.csv', False), ('fig2b.csv', True)):
        info = _first(infos, strong)
        if info is None or not info.disordered:
            warnings.warn(f'no target or disordered data for {name}')
            continue
        w = _nearest(info.disordered, settings.fit_disorder_w)
        try:
            writer.table(_fit_curves(info, w), name)
        except DataError as err:
            warnings.warn(f'skipping {name}: {err}')

    weak = [
        _weak_disorder_curve(
            info, _nearest(info.disordered, settings.weak_disorder_w)
        )
        for info in infos
        if info.disordered
    ]
    if weak:
        writer.table(pd.concat(weak, ignore_index=True), 'fig2c.csv')
    writer.table(
        crossover[['target', 'disorder_w', 'n_c']].reset_index(drop=True),
        'fig2c_inset.csv',
    )
    columns = ['target', 'n_max', 'disorder_w', 'xi', 'xi_nmin_shift']
    writer.table(
        xi[columns].sort_values(['target', 'n_max', 'disorder_w']),
        'fig2d.csv',
    )
    writer.table(
        xi[columns].sort_values(['target', 'disorder_w', 'n_max']),
        'fig2e.csv',
    )


def _collapse_args(config):
    settings = config.analysis
    return dict(
        search_box=(tuple(settings.wc_box), tuple(settings.nu_box)),
        grid=settings.collapse_grid,
        n_bootstrap=settings.n_bootstrap,
        seed=config.ensemble.master_seed,
        cost_threshold=settings.cost_threshold,
        min_w=settings.min_collapse_w,
    )


def _try_collapse(table, label, args, quiet):
    try:
        return fss.collapse(table, label=label, quiet=quiet, **args)
    except CollapseError as err:
        warnings.warn(f'no collapse for {label}: {err}')
        return None


def _divergence(info, w_c):
    if info.xi.frame.empty:
        return None
    try:
        return scaling.fit_divergence(info.xi, w_c)
    except DataError:
        return None


def _fss_stage(infos, writer, config, quiet):
    args = _collapse_args(config)
    results = {}
    document = {}
    for info in tqdm(infos, disable=quiet):
        result = _try_collapse(info.xi, info.label, args, quiet)
        if result is None:
            continue
        results[info.label] = result
        record = result.as_record()
        fit = _divergence(info, result.w_c)
        if fit is not None:
            record['divergence'] = fit._asdict()
        document[info.label] = record
        writer.table(
            result.master_curve, f'master_{_slug(info.label)}.csv'
        )
    writer.json(document, 'collapse.json')

    for name, strong in (('fig3a.csv', True), ('fig3b.csv', False)):
        info = _first(infos, strong)
        if info is None or info.label not in results:
            warnings.warn(f'no collapse for {name}')
            continue
        writer.table(results[info.label].master_curve, name)

    by_k = {}
    for info in infos:
        if info.label in results:
            by_k.setdefault(info.target.target_k, results[info.label])
    if by_k:
        vs_k = fss.vs_k_table(by_k)
        writer.table(vs_k, 'collapse_vs_k.csv')
        for name, column in (
            ('fig3c.csv', 'w_c'),
            ('fig3d.csv', 'nu'),
            ('fig3e.csv', 'cost'),
        ):
            writer.table(vs_k[['k', column, 'label']], name)
    return results


def _potential_cells(info, modes, w, settings):
    rows = _target_rows(modes, info.target)
    rows = rows[np.isclose(rows['disorder_w'], w)]
    cells = []
    for n, group in rows.groupby('n_qubits', sort=True):
        try:
            stats = localization.center_statistics(
                group,
                int(n),
                n_bins=settings.n_bins,
                estimator=settings.center_estimator,
                edge_fraction=settings.edge_fraction,
                min_samples=settings.min_center_samples,
            )
            cells.append(stats.with_fit(settings.bic_margin))
        except DataError as err:
            warnings.warn(f'{info.label} N={n} W={w}: {err}')
    return cells


def _localization_record(info, cells, w):
    cells = localization.attach_alpha(cells)
    record = {'disorder_w': w, 'sizes': {}, 'alpha': cells[0].alpha}
    for stats in cells:
        record['sizes'][str(stats.n_qubits)] = {
            'n_modes': stats.n_modes,
            'xi_phi_typ': stats.xi_phi_typ,
            'xi_phi_mean': stats.xi_phi_mean,
            'fit': stats.fit._asdict(),
        }

    record['predicted_slope'] = record['measured_slope'] = None
    if len(cells) >= 2 and w in info.series:
        record['predicted_slope'] = localization.predicted_slope(cells)
        series = info.series[w]
        keep = np.isin(series.n, [c.n_qubits for c in cells])
        record['measured_slope'] = scaling.linear_fit(
            series.n[keep], np.log(series.values[keep])
        )[1]
    return record


def _master_rows(result, label, quantity, overlap=None):
    """fig4d rows of a master curve, rescaled onto the xi curve when an
    overlap report is given."""
    x_scale, y_scale = 1.0, 1.0
    if overlap is not None:
        x_scale, y_scale = overlap.x_scale, overlap.y_scale
    curve = result.master_curve
    return curve.assign(
        x=curve['x'] * x_scale,
        y=curve['y'] * y_scale,
        x_scale=x_scale,
        y_scale=y_scale,
        target=label,
        quantity=quantity,
    )


def _overlap_record(overlap, xi_result, xi_phi_result, threshold):
    record = {
        'x_scale': overlap.x_scale,
        'y_scale': overlap.y_scale,
        'residual_rms': overlap.residual_rms,
        'n_overlap': overlap.n_overlap,
        'xi': dict(zip(('w_c', 'nu'), overlap.params_a)),
        'xi_phi': dict(zip(('w_c', 'nu'), overlap.params_b)),
        'overlaps': overlap.residual_rms <= threshold,
        'within_errors': None,
    }
    errors = xi_result.uncertainty, xi_phi_result.uncertainty
    if all(e is not None for e in errors):
        record['within_errors'] = all(
            abs(a - b) <= ea + eb
            for a, b, ea, eb in zip(
                overlap.params_a, overlap.params_b, *errors
            )
        )
    return record


def _overlap(info, xi_results, result):
    xi_result = xi_results.get(info.label)
    if xi_result is None:
        return None
    try:
        return fss.compare_collapse(xi_result, result)
    except CollapseError as err:
        warnings.warn(f'no master-curve overlap for {info.label}: {err}')
        return None


def _localization_stage(infos, modes, writer, config, quiet, xi_results):
    settings = config.analysis
    xi_phi = localization.xi_phi_table(modes)
    writer.table(xi_phi, 'xi_phi.csv')

    document = {}
    equivalence = {}
    master = []
    args = _collapse_args(config)
    for info in tqdm(infos, disable=quiet):
        rows = _target_rows(xi_phi, info.target)
        if rows.empty:
            warnings.warn(f'no mode summaries for {info.label}')
            continue
        xi_phi_xi = localization.as_xi_table(rows, target=info.label)

        w = _nearest(rows['disorder_w'], settings.localization_disorder_w)
        cells = _potential_cells(info, modes, w, settings)
        record = _localization_record(info, cells, w) if cells else {}
        strong = info.kind != 'fixed_k'
        if cells and _first(infos, strong) is info:
            name = 'fig4b.csv' if strong else 'fig4c.csv'
            profile = pd.concat(
                [c.profile().assign(n_qubits=c.n_qubits) for c in cells],
                ignore_index=True,
            )
            writer.table(profile.assign(target=info.label), name)

        entry = {}
        result = _try_collapse(
            xi_phi_xi, f'{info.label}/xi_phi', args, quiet
        )
        if result is not None:
            record['xi_phi_collapse'] = result.as_record()
            overlap = _overlap(info, xi_results, result)
            if overlap is not None:
                entry['overlap'] = _overlap_record(
                    overlap,
                    xi_results[info.label],
                    result,
                    settings.overlap_threshold,
                )
            master.append(
                _master_rows(result, info.label, 'xi_phi', overlap)
            )
        document[info.label] = record

        try:
            report = localization.equivalence_check(
                info.xi,
                xi_phi_xi,
                info.crossover_by_w,
                settings.saturation_factor,
            )
        except DataError as err:
            warnings.warn(f'no equivalence check for {info.label}: {err}')
        else:
            entry.update(
                mean_ratio=report.mean_ratio,
                median_ratio=report.median_ratio,
                std_ratio=report.std_ratio,
                n_cells=report.n_cells,
                cells=report.cells.to_dict(orient='records'),
            )
        if entry:
            equivalence[info.label] = entry

    writer.json(document, 'localization.json')
    writer.json(equivalence, 'equivalence.json')
    return master


def _coefficients_table(config):
    spec = config.spectrum_spec()
    realization = realize(spec, config.ensemble.start_index)
    h_inv = build_h_inv(realization, gamma=spec.gamma, phi=spec.phi)
    n = h_inv.n_qubits
    offdiag = np.full(n, np.nan)
    offdiag[: n - 1] = h_inv.offdiag.real
    phases = np.full(n, np.nan)
    phases[: n - 1] = realization.spacing_phases
    return pd.DataFrame(
        {
            'site': np.arange(1, n + 1),
            'position': realization.positions,
            'spacing_phase': phases,
            'diag_re': h_inv.diag.real,
            'diag_im': h_inv.diag.imag,
            'offdiag': offdiag,
        }
    )


def run_analysis(config, in_dir, out_dir=None, quiet=True):
    """Analyse the outputs of an ensemble run.

    Parameters
    ----------
    config : RunConfig
        resolved configuration, its ``analysis`` section selects the stages
    in_dir : str or pathlib.Path
        directory holding ``ensemble.csv`` and ``modes.csv``
    out_dir : str or pathlib.Path, optional
        defaults to ``in_dir``
    quiet : bool, defaults to True
        set to False for progress bars

    Returns
    -------
    written : list of pathlib.Path
        every file written, in order

    Raises
    ------
    DataError
        a required input file is missing or empty
    """

    in_dir = Path(in_dir)
    writer = _Writer(in_dir if out_dir is None else out_dir, config)
    table = io.read_ensemble(in_dir)
    if table.empty:
        raise DataError(f'{in_dir / "ensemble.csv"} has no rows')
    phi, gamma = float(table['phi'].iloc[0]), float(table['gamma'].iloc[0])

    infos = []
    for target in config.mode_targets():
        rows = _target_rows(table, target)
        if rows.empty:
            warnings.warn(f'no ensemble rows for target {target.label}')
            continue
        infos.append(_Target(target, rows, phi, gamma))
    if not infos:
        raise DataError(
            f'{in_dir / "ensemble.csv"} has no rows for the configured '
            'targets'
        )

    settings = config.analysis
    if settings.scaling:
        _scaling_stage(infos, table, writer, settings)

    master, results = [], {}
    if settings.fss:
        results = _fss_stage(infos, writer, config, quiet)
        master = [
            _master_rows(results[info.label], info.label, 'xi')
            for info in infos
            if info.label in results
        ]

    if settings.localization:
        modes = io.read_modes(in_dir)
        master += _localization_stage(
            infos, modes, writer, config, quiet, results
        )
        writer.table(_coefficients_table(config), 'fig4a.csv')

    if master:
        writer.table(pd.concat(master, ignore_index=True), 'fig4d.csv')
    return writer.written
