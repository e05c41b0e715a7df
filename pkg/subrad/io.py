# -*- coding: utf-8 -*-
"""User utilities for writing and reading subrad tables, JSON documents
and saved Hamiltonians.

Every CSV gets a ``<name>.meta.json`` sidecar with the resolved config,
its hash, the master seed and library versions. Nothing time-dependent is
written, so the same config always produces the same bytes.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import scipy
import statsmodels

from .errors import DataError
from .config import config_hash, to_dict
from .ensemble import STATS_COLUMNS
from .model import DenseHamiltonian
from .scaling import XiTable
from . import defaults

FLOAT_FORMAT = '%.17g'


def versions():
    from . import __version__

    return {
        'subrad': __version__,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
        'statsmodels': statsmodels.__version__,
    }


def _plain(value):
    """JSON-ready copy: numpy scalars and arrays unwrapped, NaN as null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def dumps(document):
    return json.dumps(_plain(document), sort_keys=True, indent=2) + '\n'


def write_json(document, path, config=None):
    """Write a JSON document with sorted keys and fixed indentation.

    With ``config`` given, the entries of ``metadata(config)`` are merged
    in at the top level, the document's own keys taking precedence.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if config is not None:
        document = {**metadata(config), **document}
    with open(path, 'w', newline='\n') as stream:
        stream.write(dumps(document))
    return path


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f'missing input file {path}')
    with open(path) as stream:
        return json.load(stream)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(f'{path.stem}.meta.json')


def metadata(config=None, extra=None):
    """Sidecar document for an output file.

    Parameters
    ----------
    config : RunConfig, optional
        resolved configuration, embedded with its hash and seed
    extra : dict, optional
        further entries, e.g. verification results
    """

    meta = {
        'format_version': defaults.FORMAT_VERSION,
        'versions': versions(),
    }
    if config is not None:
        meta['config'] = to_dict(config, portable=True)
        meta['config_hash'] = config_hash(config)
        meta['master_seed'] = config.ensemble.master_seed
    if extra:
        meta.update(extra)
    return meta


def write_table(frame, path, config=None, extra=None):
    """Write a DataFrame as CSV with a metadata sidecar.

    Floats are written with 17 significant digits so they read back
    exactly; the index is not written.

    Returns
    -------
    path : pathlib.Path
        the CSV path
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n'
    )
    write_json(metadata(config, extra), sidecar_path(path))
    return path


def read_table(path, columns=None):
    """Read a CSV written by ``write_table``.

    Raises
    ------
    DataError
        the file is missing or lacks required ``columns``
    """

    path = Path(path)
    if not path.exists():
        raise DataError(f'missing input file {path}')
    frame = pd.read_csv(path, float_precision='round_trip')
    if columns is not None:
        missing = set(columns) - set(frame.columns)
        if missing:
            raise DataError(f'{path} lacks columns {sorted(missing)}')
    return frame


def read_ensemble(directory):
    return read_table(Path(directory) / 'ensemble.csv', STATS_COLUMNS)


def read_modes(directory):
    return read_table(
        Path(directory) / 'modes.csv',
        ['n_qubits', 'disorder_w', 'target_kind', 'Gamma', 'xi_phi', 'x0'],
    )


def read_xi_table(path, target=None):
    frame = read_table(path, ['n_max', 'disorder_w', 'xi'])
    if target is not None and 'target' in frame:
        frame = frame[frame['target'] == target].reset_index(drop=True)
    return XiTable(frame, target)


def save_hamiltonian(h, path, config=None):
    """Save a DenseHamiltonian to ``.npz``, with its metadata document
    stored as a JSON string under ``metadata``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        entries=h.entries,
        gamma=h.gamma,
        phi=h.phi,
        realization_index=h.realization_index,
        metadata=np.array(dumps(metadata(config))),
    )
    return path


def hamiltonian_metadata(path):
    """Metadata document of a ``.npz`` written by ``save_hamiltonian``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f'missing input file {path}')
    with np.load(path) as data:
        if 'metadata' not in data.files:
            raise DataError(f'{path} carries no metadata')
        return json.loads(str(data['metadata']))


def load_hamiltonian(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f'missing input file {path}')
    with np.load(path) as data:
        return DenseHamiltonian(
            entries=data['entries'],
            gamma=float(data['gamma']),
            phi=float(data['phi']),
            realization_index=int(data['realization_index']),
        )
