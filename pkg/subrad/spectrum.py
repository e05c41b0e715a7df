# -*- coding: utf-8 -*-
"""Single-excitation spectrum of the effective Hamiltonian: eigenmodes,
decay rates, quasimomentum labels, mode classes and per-realization
target-mode selection."""

from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache
import warnings

import numpy as np
import pandas as pd
from scipy import linalg

from .errors import ConfigError, DataError, SingularSpacingError, SpectrumError
from . import defaults
from .localization import participation_ratio, wavepacket_center
from .model import ChainSpec, build_h_eff, ordered_realization

STRONG = 'strong_subradiant'
WEAK = 'weak_subradiant'
SUPERRADIANT = 'superradiant'
MODE_CLASSES = (STRONG, WEAK, SUPERRADIANT)

TARGET_KINDS = ('band_edge_low', 'band_edge_high', 'fixed_k')
SELECTORS = ('nearest_omega', 'sorted_index', 'min_gamma')

#: constant c in Im(1/omega) = c (|phi(1)|^2 + |phi(N)|^2) / gamma,
#: fixed by the numerical identity for Gamma = -Im(omega)
BOUNDARY_FACTOR = 1.0

# relative tolerance for equal discrete-sine projections
_TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenMode:
    """One right eigenpair of the effective Hamiltonian.

    Parameters
    ----------
    omega : complex
        eigenvalue, ``Omega - i Gamma``
    vector : numpy.ndarray
        unit-norm right eigenvector
    k_est : float
        estimated quasimomentum in (0, pi)
    node_index : int
        discrete-sine index q* in 1..N, ``k_est = q* pi / (N + 1)``
    mode_class : str
        one of ``MODE_CLASSES``
    """

    omega: complex
    vector: np.ndarray
    k_est: float
    node_index: int
    mode_class: str

    @property
    def Omega(self):
        return float(np.real(self.omega))

    @property
    def Gamma(self):
        return float(-np.imag(self.omega))

    @property
    def n_qubits(self):
        return len(self.vector)


@dataclass(frozen=True)
class ModeTarget:
    """Which mode to follow across realizations.

    ``kind`` is ``band_edge_low`` (k -> 0), ``band_edge_high`` (k -> pi)
    or ``fixed_k`` with ``k`` in (0, pi); ``selector`` is how the mode is
    picked out of a disordered spectrum.
    """

    kind: str
    k: float = None
    selector: str = 'nearest_omega'

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ConfigError(
                f'unknown target kind {self.kind!r}, use one of '
                f'{TARGET_KINDS}',
                'kind',
            )
        if self.selector not in SELECTORS:
            raise ConfigError(
                f'unknown selector {self.selector!r}, use one of '
                f'{SELECTORS}',
                'selector',
            )
        if self.kind == 'fixed_k':
            if self.k is None or not 0.0 < self.k < np.pi:
                raise ConfigError(
                    f'fixed_k targets need 0 < k < pi, got {self.k}', 'k'
                )
        elif self.k is not None:
            raise ConfigError(f'{self.kind} takes no k value', 'k')

    @property
    def target_k(self):
        """Real quasimomentum of the target, band edges as limits."""
        if self.kind == 'band_edge_low':
            return 0.0
        if self.kind == 'band_edge_high':
            return np.pi
        return float(self.k)

    @property
    def label(self):
        if self.kind == 'fixed_k':
            return f'fixed_k={self.k / np.pi:.4f}pi/{self.selector}'
        return f'{self.kind}/{self.selector}'

    def in_superradiant_window(self, phi):
        return (
            self.kind == 'fixed_k'
            and abs(self.k - phi) < defaults.SUPERRADIANT_WINDOW
        )

    def check(self, phi):
        """Reject a target on the dispersion pole, warn when it sits in
        the superradiant window."""
        if self.kind == 'fixed_k' and abs(self.k - phi) <= defaults.POLE_GUARD:
            raise ConfigError(
                f'k={self.k} is on the superradiant pole k = phi', 'k'
            )
        if self.in_superradiant_window(phi):
            warnings.warn(
                f'target {self.label} lies within 0.05 pi of phi={phi:.4f};'
                ' these modes are superradiant and show no subradiant '
                'scaling'
            )


BoundaryRates = namedtuple(
    'BoundaryRates',
    ['lhs', 'rhs', 'gamma_tilde', 'gamma_approx', 'population'],
)


def ordered_dispersion(phi, k, gamma=defaults.GAMMA):
    """Ordered-chain dispersion
    ``omega(k) = (gamma/4) [cot((phi + k)/2) + cot((phi - k)/2)]``.

    Parameters
    ----------
    phi : float
        phase per lattice spacing
    k : float or array_like
        real quasimomentum in [0, pi]; 0 and pi give the band-edge limits
    gamma : float
        single-qubit decay rate

    Returns
    -------
    omega : float or numpy.ndarray
        real frequency of the ordered band

    Raises
    ------
    SingularSpacingError
        k within the pole guard of phi, where the band diverges
    """

    k_arr = np.asarray(k, dtype=float)
    if np.any((k_arr < 0.0) | (k_arr > np.pi)):
        raise ValueError(f'k must lie in [0, pi], got {k}')
    if np.any(np.abs(k_arr - phi) <= defaults.POLE_GUARD):
        raise SingularSpacingError(
            f'k={k} sits on the superradiant pole k = phi = {phi}'
        )
    omega = 0.25 * gamma * (
        1.0 / np.tan(0.5 * (phi + k_arr)) + 1.0 / np.tan(0.5 * (phi - k_arr))
    )
    return float(omega) if omega.ndim == 0 else omega


def branch_midpoint(phi, gamma=defaults.GAMMA):
    """Frequency separating the k < phi branch (above) from k > phi."""
    return 0.5 * gamma / np.tan(phi)


def branch_of(omega, phi, gamma=defaults.GAMMA):
    """``'low_k'`` for modes on the k < phi branch, ``'high_k'`` otherwise."""
    if np.real(omega) > branch_midpoint(phi, gamma):
        return 'low_k'
    return 'high_k'


def _sine_projections(vectors):
    """|<sin(q m pi / (N+1)) | v>| for q = 1..N, one column per vector."""
    n = vectors.shape[0]
    sites = np.arange(1, n + 1)
    basis = np.sin(np.outer(sites, sites) * np.pi / (n + 1))
    return np.abs(basis @ vectors)


def _node_indices(projections):
    # ties go to the smallest q
    peak = projections.max(axis=0)
    ties = projections >= peak * (1.0 - _TIE_RTOL)
    return np.argmax(ties, axis=0) + 1


def estimate_k(mode):
    """Quasimomentum label of a mode from its discrete-sine projection.

    Parameters
    ----------
    mode : EigenMode or array_like
        mode, or its eigenvector

    Returns
    -------
    k_est : float
        ``q* pi / (N + 1)`` with q* maximising the sine projection, the
        smallest such q on ties
    """

    vector = np.asarray(getattr(mode, 'vector', mode))
    n = len(vector)
    q_star = _node_indices(_sine_projections(vector.reshape(n, 1)))[0]
    return q_star * np.pi / (n + 1)


def classify_mode(k_est, node_index, n_qubits, phi):
    if abs(k_est - phi) < defaults.SUPERRADIANT_WINDOW:
        return SUPERRADIANT
    near_edge = min(k_est, np.pi - k_est) < defaults.BAND_EDGE_WINDOW
    if node_index in (1, n_qubits) or near_edge:
        return STRONG
    return WEAK


def diagonalize(h):
    """Diagonalize a dense effective Hamiltonian.

    Parameters
    ----------
    h : DenseHamiltonian

    Returns
    -------
    modes : list of EigenMode
        N modes in ascending Omega (ties by ascending Gamma), unit-norm
        right eigenvectors with their largest component real positive

    Raises
    ------
    SpectrumError
        the eigensolver fails or returns non-finite values, tagged with
        the realization index
    """

    try:
        eigvals, eigvecs = linalg.eig(h.entries)
    except (linalg.LinAlgError, ValueError) as err:
        raise SpectrumError(str(err), h.realization_index) from err

    if not (np.all(np.isfinite(eigvals)) and np.all(np.isfinite(eigvecs))):
        raise SpectrumError('non-finite eigenpairs', h.realization_index)

    order = np.lexsort((-eigvals.imag, eigvals.real))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    eigvecs = eigvecs / np.linalg.norm(eigvecs, axis=0)
    peaks = np.argmax(np.abs(eigvecs), axis=0)
    columns = np.arange(eigvecs.shape[1])
    anchors = eigvecs[peaks, columns]
    eigvecs = eigvecs * (np.abs(anchors) / anchors)

    n = h.n_qubits
    node_indices = _node_indices(_sine_projections(eigvecs))
    k_ests = node_indices * np.pi / (n + 1)

    modes = []
    for j in range(n):
        vector = eigvecs[:, j].copy()
        vector.setflags(write=False)
        modes.append(
            EigenMode(
                omega=complex(eigvals[j]),
                vector=vector,
                k_est=float(k_ests[j]),
                node_index=int(node_indices[j]),
                mode_class=classify_mode(
                    k_ests[j], node_indices[j], n, h.phi
                ),
            )
        )
    return modes


def eigen_residuals(h, modes):
    """Relative residuals ``|H v - omega v| / |H|`` (2-norms)."""
    scale = np.linalg.norm(h.entries, 2)
    return np.array(
        [
            np.linalg.norm(h.entries @ m.vector - m.omega * m.vector) / scale
            for m in modes
        ]
    )


@lru_cache(maxsize=None)
def _ordered_target_position(n_qubits, phi, gamma, kind, k):
    spec = ChainSpec(n_qubits, phi=phi, gamma=gamma)
    ordered = diagonalize(
        build_h_eff(ordered_realization(spec), gamma=gamma, phi=phi)
    )
    omegas = np.array([m.Omega for m in ordered])
    target = ModeTarget(kind, k, 'nearest_omega')
    return int(np.argmin(np.abs(omegas - _target_omega(target, phi, gamma))))


def _target_omega(target, phi, gamma):
    return ordered_dispersion(phi, target.target_k, gamma)


def select_target_mode(modes, target, phi, gamma=defaults.GAMMA):
    """Pick the mode that follows ``target`` in one realization.

    Parameters
    ----------
    modes : list of EigenMode
        spectrum as returned by ``diagonalize``
    target : ModeTarget
        mode to follow and how to select it
    phi : float
        phase per lattice spacing
    gamma : float
        single-qubit decay rate

    Returns
    -------
    mode : EigenMode

    Notes
    -----
    ``nearest_omega`` picks the mode whose Omega is closest to the ordered
    dispersion at the target k (band edges as limits). ``sorted_index``
    takes the position the nearest_omega mode has in the Omega-sorted
    spectrum of the ordered chain of the same size. ``min_gamma`` takes the
    least-Gamma mode on the target's branch of the band, split at
    ``branch_midpoint``; it is only defined for band-edge targets.
    """

    if not len(modes):
        raise DataError('cannot select a target mode from an empty spectrum')

    if target.selector == 'min_gamma':
        if target.kind == 'fixed_k':
            raise ConfigError(
                'min_gamma is defined for band-edge targets only', 'selector'
            )
        branch = 'low_k' if target.kind == 'band_edge_low' else 'high_k'
        candidates = [
            m for m in modes if branch_of(m.omega, phi, gamma) == branch
        ]
        candidates = candidates or list(modes)
        return min(candidates, key=lambda m: m.Gamma)

    if target.selector == 'nearest_omega':
        omegas = np.array([m.Omega for m in modes])
        goal = _target_omega(target, phi, gamma)
        return modes[int(np.argmin(np.abs(omegas - goal)))]

    position = _ordered_target_position(
        len(modes[0].vector), float(phi), float(gamma), target.kind, target.k
    )
    by_omega = sorted(modes, key=lambda m: (m.Omega, m.Gamma))
    return by_omega[position]


def boundary_rate_identity(mode, gamma=defaults.GAMMA):
    """Boundary-radiation form of a mode's decay rate.

    Returns
    -------
    rates : BoundaryRates
        ``lhs = Gamma / (Gamma^2 + Omega^2) = Im(1/omega)``;
        ``rhs = c (|v(1)|^2 + |v(N)|^2) / gamma``; the subradiant
        approximation ``gamma_approx = gamma_tilde (|v(1)|^2 + |v(N)|^2)``
        with ``gamma_tilde = c Omega^2 / gamma``; and the boundary
        ``population``

    Notes
    -----
    For N = 1 the two end sites coincide and the population counts site 1
    twice. Omega = 0 there, so the subradiant approximation does not apply.
    """

    vector = mode.vector
    population = float(abs(vector[0]) ** 2 + abs(vector[-1]) ** 2)
    omega_re, decay = mode.Omega, mode.Gamma
    lhs = decay / (decay ** 2 + omega_re ** 2)
    rhs = BOUNDARY_FACTOR * population / gamma
    gamma_tilde = BOUNDARY_FACTOR * omega_re ** 2 / gamma
    return BoundaryRates(
        lhs, rhs, gamma_tilde, gamma_tilde * population, population
    )


def boundary_factor(modes, gamma=defaults.GAMMA):
    """Estimate the boundary constant c from a set of modes (N >= 2)."""
    ratios = []
    for mode in modes:
        if mode.n_qubits < 2:
            continue
        rates = boundary_rate_identity(mode, gamma)
        ratios.append(rates.lhs * gamma / rates.population)
    if not ratios:
        raise DataError('boundary factor needs modes of chains with N >= 2')
    return float(np.median(ratios))


def mode_table(modes, gamma=defaults.GAMMA):
    """Per-mode summary as a pandas DataFrame, one row per mode."""
    rows = []
    for mode in modes:
        rates = boundary_rate_identity(mode, gamma)
        rows.append(
            {
                'omega_re': mode.omega.real,
                'omega_im': mode.omega.imag,
                'Omega': mode.Omega,
                'Gamma': mode.Gamma,
                'k_est': mode.k_est,
                'node_index': mode.node_index,
                'mode_class': mode.mode_class,
                'pop_first': float(abs(mode.vector[0]) ** 2),
                'pop_last': float(abs(mode.vector[-1]) ** 2),
                'boundary_lhs': rates.lhs,
                'boundary_rhs': rates.rhs,
                'xi_phi': participation_ratio(mode),
                'x0': wavepacket_center(mode),
                'x0_centroid': wavepacket_center(mode, 'centroid'),
            }
        )
    return pd.DataFrame(rows)
