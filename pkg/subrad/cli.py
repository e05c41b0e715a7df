# -*- coding: utf-8 -*-
"""Command line interface, ``subrad <command> [options]``.

Commands
--------
spectrum
    eigenmodes of one (N, W) cell, one or more realizations
ensemble
    disorder ensembles over the (N, W) grid for every target
analyze
    scaling, collapse and localization analysis of ensemble outputs
report
    resolved config or schema, and a summary of the output files

Exit codes are 0 on success, 1 on a runtime failure and 2 on an invalid
configuration.
"""

import argparse
import json
from pathlib import Path
import sys

import pandas as pd

from .errors import ConfigError, SubradError
from . import __version__, config as cfg, ensemble, io
from .analysis import run_analysis
from .model import build_h_eff, build_h_inv, realize, verify_h_inv
from .spectrum import diagonalize, eigen_residuals, mode_table


def cmd_spectrum(config, quiet=False):
    """Write the eigenmodes of the configured spectrum cell.

    Returns
    -------
    written : list of pathlib.Path
        ``spectrum.csv``, ``spectrum_inverse.csv`` and, when enabled, one
        ``hamiltonian_<index>.npz`` per realization
    """

    spec = config.spectrum_spec()
    out_dir = Path(config.output.directory)
    start = config.ensemble.start_index
    frames, checks, written = [], [], []
    for index in range(start, start + config.spectrum.realizations):
        realization = realize(spec, index)
        h = build_h_eff(realization, gamma=spec.gamma, phi=spec.phi)
        modes = diagonalize(h)
        frame = mode_table(modes, spec.gamma)
        frame.insert(0, 'realization', index)
        frame['residual'] = eigen_residuals(h, modes)
        frames.append(frame)

        check = verify_h_inv(
            build_h_inv(realization, gamma=spec.gamma, phi=spec.phi), h
        )
        checks.append(dict(realization=index, **check._asdict()))
        if config.spectrum.save_hamiltonian:
            written.append(
                io.save_hamiltonian(
                    h, out_dir / f'hamiltonian_{index}.npz', config
                )
            )

    cell = {'n_qubits': spec.n_qubits, 'disorder_w': spec.disorder_w}
    written.insert(
        0,
        io.write_table(
            pd.concat(frames, ignore_index=True),
            out_dir / 'spectrum.csv',
            config,
            extra={'cell': cell},
        ),
    )
    written.insert(
        1,
        io.write_table(
            pd.DataFrame(checks),
            out_dir / 'spectrum_inverse.csv',
            config,
            extra={'cell': cell},
        ),
    )
    return written


def cmd_ensemble(config, workers=1, quiet=False):
    """Run the ensemble over the config grid.

    Returns
    -------
    written : list of pathlib.Path
        ``ensemble.csv``, ``modes.csv`` and ``ensemble.json``
    """

    out_dir = Path(config.output.directory)
    settings = config.ensemble
    stats = ensemble.run_ensemble(
        config.chain_specs(),
        config.mode_targets(),
        n_realizations=settings.n_realizations,
        workers=workers,
        quiet=quiet,
        start_index=settings.start_index,
        max_failed_fraction=settings.max_failed_fraction,
    )
    cells = [
        {
            **s.as_record(),
            'target': s.target.label,
            'index_range': list(s.index_range),
            'failures': [list(failure) for failure in s.failures],
        }
        for s in stats
    ]
    return [
        io.write_table(
            ensemble.stats_table(stats), out_dir / 'ensemble.csv', config
        ),
        io.write_table(
            ensemble.modes_table(stats), out_dir / 'modes.csv', config
        ),
        io.write_json(
            {'cells': cells}, out_dir / 'ensemble.json', config
        ),
    ]


def cmd_analyze(config, in_dir=None, quiet=False):
    """Analyse ``in_dir`` (the output directory by default) into the
    output directory."""
    out_dir = Path(config.output.directory)
    in_dir = out_dir if in_dir is None else Path(in_dir)
    return run_analysis(config, in_dir, out_dir, quiet=quiet)


def _sidecar_summary(path):
    sidecar = io.sidecar_path(path)
    entry = {'file': path.name, 'rows': len(pd.read_csv(path))}
    if sidecar.exists():
        meta = io.read_json(sidecar)
        entry['config_hash'] = meta.get('config_hash')
        entry['format_version'] = meta.get('format_version')
    else:
        entry['config_hash'] = None
    return entry


def cmd_report(config, schema=False):
    """Resolved config with its hash and the output files it produced,
    or the published schema."""

    if schema:
        return cfg.SCHEMA
    out_dir = Path(config.output.directory)
    digest = cfg.config_hash(config)
    outputs = []
    if out_dir.is_dir():
        for path in sorted(out_dir.glob('*.csv')):
            entry = _sidecar_summary(path)
            entry['matches_config'] = entry['config_hash'] == digest
            outputs.append(entry)
    return {
        'config': cfg.to_dict(config),
        'config_hash': digest,
        'outputs': outputs,
        'version': __version__,
    }


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='JSON run config')
    common.add_argument('--out', type=Path, help='output directory')
    common.add_argument(
        '--seed', type=int, help='master seed, unsigned 64 bit'
    )
    common.add_argument(
        '--workers',
        type=int,
        help='worker processes, else $SUBRAD_WORKERS, else all cores',
    )
    common.add_argument(
        '--set',
        dest='overrides',
        action='append',
        default=[],
        metavar='KEY=VALUE',
        help='override a config leaf, e.g. grid.n_qubits=[50,100]',
    )
    common.add_argument(
        '--quiet', action='store_true', help='no progress output'
    )

    parser = argparse.ArgumentParser(
        prog='subrad',
        description='Subradiant decay of disordered qubit chains '
        'coupled to a waveguide.',
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {__version__}'
    )
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser(
        'spectrum', parents=[common], help='eigenmodes of one (N, W) cell'
    )
    commands.add_parser(
        'ensemble', parents=[common], help='disorder ensembles over the grid'
    )
    analyze = commands.add_parser(
        'analyze', parents=[common], help='analyse ensemble outputs'
    )
    analyze.add_argument(
        '--in',
        dest='in_dir',
        type=Path,
        help='directory with ensemble outputs, defaults to --out',
    )
    report = commands.add_parser(
        'report', parents=[common], help='resolved config and outputs'
    )
    report.add_argument(
        '--schema', action='store_true', help='print the config schema'
    )
    return parser


def resolve_config(args):
    """RunConfig from the config file, ``--set`` overrides and the
    ``--seed`` / ``--out`` shortcuts, in that order."""

    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f'ensemble.master_seed={args.seed}')
    if args.out is not None:
        overrides.append(f'output.directory={json.dumps(str(args.out))}')
    return cfg.load_config(args.config, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == 'report':
            sys.stdout.write(io.dumps(cmd_report(config, args.schema)))
            return 0

        workers = cfg.resolve_workers(
            args.workers if args.workers is not None
            else config.ensemble.workers
        )
        if args.command == 'spectrum':
            written = cmd_spectrum(config, args.quiet)
        elif args.command == 'ensemble':
            written = cmd_ensemble(config, workers, args.quiet)
        else:
            written = cmd_analyze(config, args.in_dir, args.quiet)
    except ConfigError as err:
        print(f'subrad: invalid config: {err}', file=sys.stderr)
        return 2
    except SubradError as err:
        print(f'subrad: {err}', file=sys.stderr)
        return 1

    if not args.quiet:
        print(f'wrote {len(written)} files to {config.output.directory}')
    return 0


if __name__ == '__main__':
    sys.exit(main())
