# -*- coding: utf-8 -*-
"""Run configuration: a JSON document validated against a published
schema, with dotted-path overrides and a stable hash.

Angles are given in units of pi (``phi_pi``, ``k_pi``) so documents stay
exact and readable.
"""

import copy
from dataclasses import asdict, dataclass, field, fields, is_dataclass
import hashlib
import json
import numbers
import os
from pathlib import Path

import numpy as np

from .errors import ConfigError
from . import defaults


def _leaf(default, kind, **rules):
    rules['type'] = kind
    return field(
        default_factory=lambda: copy.deepcopy(default), metadata=rules
    )


def _section(cls):
    return field(default_factory=cls, metadata={'section': cls})


@dataclass
class ModelConfig:
    phi_pi: float = _leaf(
        defaults.PHI / np.pi, 'number', minimum=0.0, exclusive_minimum=True,
        maximum=0.5,
    )
    gamma: float = _leaf(
        defaults.GAMMA, 'number', minimum=0.0, exclusive_minimum=True
    )
    spacing: float = _leaf(
        defaults.SPACING, 'number', minimum=0.0, exclusive_minimum=True
    )

    @property
    def phi(self):
        return self.phi_pi * np.pi


@dataclass
class GridConfig:
    n_qubits: list = _leaf(
        defaults.N_GRID, 'array', items='integer', minimum=1, min_items=1
    )
    disorder_w: list = _leaf(
        defaults.W_GRID,
        'array',
        items='number',
        minimum=0.0,
        maximum=1.0,
        exclusive_maximum=True,
        min_items=1,
    )


@dataclass
class TargetConfig:
    kind: str = _leaf(
        'band_edge_low',
        'string',
        choices=['band_edge_low', 'band_edge_high', 'fixed_k'],
    )
    k_pi: float = _leaf(
        None, 'number', nullable=True, minimum=0.0, exclusive_minimum=True,
        maximum=1.0, exclusive_maximum=True,
    )
    selector: str = _leaf(
        'nearest_omega',
        'string',
        choices=['nearest_omega', 'sorted_index', 'min_gamma'],
    )

    def mode_target(self):
        from .spectrum import ModeTarget

        k = None if self.k_pi is None else self.k_pi * np.pi
        return ModeTarget(self.kind, k, self.selector)


def _default_targets():
    return [
        TargetConfig(
            kind, None if k is None else round(k / np.pi, 12), selector
        )
        for kind, k, selector in defaults.TARGETS
    ]


@dataclass
class EnsembleConfig:
    n_realizations: int = _leaf(
        defaults.N_REALIZATIONS, 'integer', minimum=1
    )
    master_seed: int = _leaf(
        defaults.MASTER_SEED, 'integer', minimum=0, maximum=2 ** 64 - 1
    )
    workers: int = _leaf(None, 'integer', nullable=True, minimum=1)
    start_index: int = _leaf(0, 'integer', minimum=0)
    max_failed_fraction: float = _leaf(
        defaults.MAX_FAILED_FRACTION, 'number', minimum=0.0, maximum=1.0
    )


@dataclass
class SpectrumConfig:
    n_qubits: int = _leaf(100, 'integer', minimum=1)
    disorder_w: float = _leaf(
        0.2, 'number', minimum=0.0, maximum=1.0, exclusive_maximum=True
    )
    realizations: int = _leaf(1, 'integer', minimum=1)
    save_hamiltonian: bool = _leaf(False, 'boolean')


@dataclass
class AnalysisConfig:
    scaling: bool = _leaf(True, 'boolean')
    fss: bool = _leaf(True, 'boolean')
    localization: bool = _leaf(True, 'boolean')
    n_bootstrap: int = _leaf(defaults.N_BOOTSTRAP, 'integer', minimum=0)
    collapse_grid: int = _leaf(defaults.COLLAPSE_GRID, 'integer', minimum=5)
    wc_box: list = _leaf(
        list(defaults.WC_BOX), 'array', items='number', length=2
    )
    nu_box: list = _leaf(
        list(defaults.NU_BOX), 'array', items='number', length=2
    )
    cost_threshold: float = _leaf(
        defaults.COLLAPSE_COST_THRESHOLD, 'number', minimum=0.0,
        exclusive_minimum=True,
    )
    overlap_threshold: float = _leaf(
        defaults.OVERLAP_RMS_THRESHOLD, 'number', minimum=0.0,
        exclusive_minimum=True,
    )
    min_collapse_w: float = _leaf(0.0, 'number', minimum=0.0)
    center_estimator: str = _leaf(
        defaults.CENTER_ESTIMATOR, 'string', choices=['argmax', 'centroid']
    )
    edge_fraction: float = _leaf(
        defaults.EDGE_FRACTION, 'number', minimum=0.0, maximum=0.5,
        exclusive_maximum=True,
    )
    n_bins: int = _leaf(None, 'integer', nullable=True, minimum=1)
    bic_margin: float = _leaf(defaults.BIC_MARGIN, 'number', minimum=0.0)
    saturation_factor: float = _leaf(
        defaults.SATURATION_FACTOR, 'number', minimum=0.0,
        exclusive_minimum=True,
    )
    min_center_samples: int = _leaf(
        defaults.MIN_CENTER_SAMPLES, 'integer', minimum=1
    )
    fit_disorder_w: float = _leaf(0.4, 'number', minimum=0.0)
    weak_disorder_w: float = _leaf(0.06, 'number', minimum=0.0)
    localization_disorder_w: float = _leaf(0.2, 'number', minimum=0.0)


@dataclass
class OutputConfig:
    directory: str = _leaf('subrad_out', 'string')
    format_version: int = _leaf(
        defaults.FORMAT_VERSION,
        'integer',
        minimum=defaults.FORMAT_VERSION,
        maximum=defaults.FORMAT_VERSION,
    )


@dataclass
class RunConfig:
    """Resolved configuration of a subrad run."""

    model: ModelConfig = _section(ModelConfig)
    grid: GridConfig = _section(GridConfig)
    targets: list = field(
        default_factory=_default_targets, metadata={'items': TargetConfig}
    )
    ensemble: EnsembleConfig = _section(EnsembleConfig)
    spectrum: SpectrumConfig = _section(SpectrumConfig)
    analysis: AnalysisConfig = _section(AnalysisConfig)
    output: OutputConfig = _section(OutputConfig)

    def mode_targets(self):
        return [target.mode_target() for target in self.targets]

    def chain_specs(self):
        """One ChainSpec per grid cell, W-major."""
        from .model import ChainSpec

        return [
            ChainSpec(
                int(n),
                phi=self.model.phi,
                disorder_w=float(w),
                gamma=self.model.gamma,
                master_seed=self.ensemble.master_seed,
                spacing=self.model.spacing,
            )
            for w in self.grid.disorder_w
            for n in self.grid.n_qubits
        ]

    def spectrum_spec(self):
        from .model import ChainSpec

        return ChainSpec(
            self.spectrum.n_qubits,
            phi=self.model.phi,
            disorder_w=self.spectrum.disorder_w,
            gamma=self.model.gamma,
            master_seed=self.ensemble.master_seed,
            spacing=self.model.spacing,
        )


def _describe(cls):
    described = {}
    for f in fields(cls):
        if 'section' in f.metadata:
            described[f.name] = {
                'type': 'object',
                'properties': _describe(f.metadata['section']),
            }
        elif 'items' in f.metadata and is_dataclass(f.metadata['items']):
            described[f.name] = {
                'type': 'array',
                'items': {
                    'type': 'object',
                    'properties': _describe(f.metadata['items']),
                },
                'default': [asdict(t) for t in f.default_factory()],
            }
        else:
            leaf = dict(f.metadata)
            leaf['default'] = f.default_factory()
            described[f.name] = leaf
    return described


#: published schema, one entry per leaf with type, bounds and default
SCHEMA = {
    'type': 'object',
    'format_version': defaults.FORMAT_VERSION,
    'properties': _describe(RunConfig),
}


def _is_number(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _is_integer(value):
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


_TYPE_CHECKS = {
    'number': _is_number,
    'integer': _is_integer,
    'boolean': lambda value: isinstance(value, bool),
    'string': lambda value: isinstance(value, str),
}


def _check_bounds(value, rules, path):
    low, high = rules.get('minimum'), rules.get('maximum')
    if low is not None:
        bad = value <= low if rules.get('exclusive_minimum') else value < low
        if bad:
            op = '>' if rules.get('exclusive_minimum') else '>='
            raise ConfigError(f'must be {op} {low}, got {value}', path)
    if high is not None:
        bad = value >= high if rules.get('exclusive_maximum') else value > high
        if bad:
            op = '<' if rules.get('exclusive_maximum') else '<='
            raise ConfigError(f'must be {op} {high}, got {value}', path)


def _check_scalar(value, kind, rules, path):
    if not _TYPE_CHECKS[kind](value):
        raise ConfigError(f'must be of type {kind}, got {value!r}', path)
    if kind in ('number', 'integer'):
        if kind == 'number' and not np.isfinite(value):
            raise ConfigError(f'must be finite, got {value}', path)
        _check_bounds(value, rules, path)
    if 'choices' in rules and value not in rules['choices']:
        raise ConfigError(
            f'must be one of {rules["choices"]}, got {value!r}', path
        )
    return float(value) if kind == 'number' else value


def _check_leaf(value, rules, path):
    if value is None:
        if rules.get('nullable'):
            return None
        raise ConfigError('must not be null', path)
    if rules['type'] != 'array':
        return _check_scalar(value, rules['type'], rules, path)

    if not isinstance(value, list):
        raise ConfigError(f'must be an array, got {value!r}', path)
    if 'length' in rules and len(value) != rules['length']:
        raise ConfigError(f'must have {rules["length"]} items', path)
    if len(value) < rules.get('min_items', 0):
        raise ConfigError(
            f'must have at least {rules["min_items"]} items', path
        )
    return [
        _check_scalar(item, rules['items'], rules, f'{path}.{i}')
        for i, item in enumerate(value)
    ]


def _build(cls, document, path):
    if not isinstance(document, dict):
        raise ConfigError(f'must be an object, got {document!r}', path)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(document) - set(known))
    if unknown:
        where = f'{path}.{unknown[0]}' if path else unknown[0]
        raise ConfigError(f'unknown key, allowed are {sorted(known)}', where)

    values = {}
    for name, value in document.items():
        f = known[name]
        leaf_path = f'{path}.{name}' if path else name
        if 'section' in f.metadata:
            values[name] = _build(f.metadata['section'], value, leaf_path)
        elif 'items' in f.metadata and is_dataclass(f.metadata['items']):
            if not isinstance(value, list) or not value:
                raise ConfigError('must be a non-empty array', leaf_path)
            values[name] = [
                _build(f.metadata['items'], item, f'{leaf_path}.{i}')
                for i, item in enumerate(value)
            ]
        else:
            values[name] = _check_leaf(value, f.metadata, leaf_path)
    return cls(**values)


def _cross_check(config):
    analysis = config.analysis
    boxes = (('wc_box', analysis.wc_box), ('nu_box', analysis.nu_box))
    for name, box in boxes:
        if not box[0] < box[1]:
            raise ConfigError(
                f'lower bound must be below upper, got {box}',
                f'analysis.{name}',
            )
    if analysis.nu_box[0] <= 0:
        raise ConfigError('exponents must be positive', 'analysis.nu_box')

    labels = set()
    for i, target in enumerate(config.targets):
        try:
            mode_target = target.mode_target()
            mode_target.check(config.model.phi)
        except ConfigError as err:
            leaf = 'k_pi' if err.path == 'k' else err.path
            raise ConfigError(
                str(err).split(': ', 1)[-1], f'targets.{i}.{leaf}'
            ) from err
        if mode_target.selector == 'min_gamma' and target.kind == 'fixed_k':
            raise ConfigError(
                'min_gamma is defined for band-edge targets only',
                f'targets.{i}.selector',
            )
        if mode_target.label in labels:
            raise ConfigError(
                f'duplicate target {mode_target.label}', f'targets.{i}'
            )
        labels.add(mode_target.label)

    try:
        config.chain_specs()
        config.spectrum_spec()
    except ConfigError as err:
        raise ConfigError(str(err).split(': ', 1)[-1], err.path) from err


def from_dict(document):
    """Validate a configuration document and build the RunConfig.

    Raises
    ------
    ConfigError
        unknown keys, wrong types or values out of bounds; the error
        carries the dotted path of the offending leaf
    """

    config = _build(RunConfig, document, '')
    _cross_check(config)
    return config


def to_dict(config, portable=False):
    """Plain dict of a RunConfig.

    ``portable`` leaves out the worker count and the output directory,
    which do not change any result.
    """

    document = asdict(config)
    if portable:
        document['ensemble'].pop('workers', None)
        document['output'].pop('directory', None)
    return document


def config_hash(config):
    """SHA-256 of the canonical JSON of the portable config."""
    canonical = json.dumps(
        to_dict(config, portable=True),
        sort_keys=True,
        separators=(',', ':'),
    )
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def load_document(path):
    """Read a JSON config document.

    Raises
    ------
    ConfigError
        missing file, or malformed JSON reported with line and column
    """

    path = Path(path)
    if not path.exists():
        raise ConfigError('config file not found', str(path))
    try:
        with open(path) as stream:
            return json.load(stream)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f'line {err.lineno} column {err.colno}: {err.msg}', str(path)
        ) from err


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(document, overrides):
    """Apply ``key=value`` overrides to a config document.

    Keys are dotted paths, list items addressed by index
    (``targets.0.selector``); values are JSON literals, anything else is
    taken as a string.

    Returns
    -------
    document : dict
        a modified deep copy
    """

    document = copy.deepcopy(document)
    for override in overrides:
        if '=' not in override:
            raise ConfigError(
                f'expected key=value, got {override!r}', '--set'
            )
        key, text = override.split('=', 1)
        parts = key.strip().split('.')
        if not all(parts):
            raise ConfigError(f'malformed key {key!r}', '--set')
        node = document
        for depth, part in enumerate(parts[:-1]):
            where = '.'.join(parts[: depth + 1])
            if isinstance(node, list):
                node = _list_item(node, part, where)
            else:
                node = node.setdefault(part, {})
            if not isinstance(node, (dict, list)):
                raise ConfigError('is not an object or array', where)
        last = parts[-1]
        if isinstance(node, list):
            index = _list_index(node, last, key)
            node[index] = _parse_value(text)
        else:
            node[last] = _parse_value(text)
    return document


def _list_index(node, part, where):
    try:
        index = int(part)
    except ValueError:
        raise ConfigError('array items are addressed by index', where)
    if not 0 <= index < len(node):
        raise ConfigError(f'index out of range 0..{len(node) - 1}', where)
    return index


def _list_item(node, part, where):
    return node[_list_index(node, part, where)]


def load_config(path=None, overrides=()):
    """Load, override and validate a run configuration.

    Without a path the defaults are used; overrides still apply. Lists
    that are not in the document are filled from the defaults before
    overriding so items can be addressed by index.
    """

    document = load_document(path) if path is not None else {}
    if any(o.split('=', 1)[0].startswith('targets.') for o in overrides):
        document.setdefault(
            'targets', [asdict(t) for t in _default_targets()]
        )
    return from_dict(apply_overrides(document, overrides))


def resolve_workers(flag=None, environ=None):
    """Worker count from the flag, else ``SUBRAD_WORKERS``, else the
    number of cores."""

    if flag is not None:
        if flag < 1:
            raise ConfigError(f'must be >= 1, got {flag}', '--workers')
        return int(flag)
    environ = os.environ if environ is None else environ
    raw = environ.get(defaults.WORKERS_ENV)
    if raw:
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(
                f'must be an integer, got {raw!r}', defaults.WORKERS_ENV
            )
        if workers < 1:
            raise ConfigError(
                f'must be >= 1, got {workers}', defaults.WORKERS_ENV
            )
        return workers
    return os.cpu_count() or 1
