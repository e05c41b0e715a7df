# -*- coding: utf-8 -*-
"""Qubit chain geometries and the two single-excitation Hamiltonians:
the dense non-Hermitian effective Hamiltonian and its tridiagonal
inverse.

Positions are stored in length units, ``x_m = (m + delta_m) * d`` for
``m = 1..N``, and the resonant wavevector is ``k0 = phi / d``.
"""

from collections import namedtuple
from dataclasses import dataclass, field
import numbers

import numpy as np
from scipy import linalg

from .errors import ConfigError, DataError, SingularSpacingError
from . import defaults


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ChainSpec:
    """Immutable description of one physical configuration.

    Parameters
    ----------
    n_qubits : int
        number of qubits N, at least 1
    phi : float
        phase per lattice spacing, ``0 < phi <= pi/2``
    disorder_w : float
        disorder strength, ``0 <= W < 1`` keeps the qubits ordered
    gamma : float
        single-qubit decay rate, positive
    master_seed : int
        unsigned 64-bit seed of the disorder ensemble
    spacing : float
        lattice spacing d of the ordered chain
    """

    n_qubits: int
    phi: float = defaults.PHI
    disorder_w: float = 0.0
    gamma: float = defaults.GAMMA
    master_seed: int = defaults.MASTER_SEED
    spacing: float = defaults.SPACING

    def __post_init__(self):

        if isinstance(self.n_qubits, bool) or not isinstance(
            self.n_qubits, numbers.Integral
        ):
            raise ConfigError('must be an integer', 'n_qubits')
        if self.n_qubits < 1:
            raise ConfigError(f'must be >= 1, got {self.n_qubits}', 'n_qubits')
        if not 0.0 <= self.disorder_w < 1.0:
            raise ConfigError(
                f'must satisfy 0 <= W < 1, got {self.disorder_w}',
                'disorder_w',
            )
        if not 0.0 < self.phi <= 0.5 * np.pi:
            raise ConfigError(
                f'must satisfy 0 < phi <= pi/2, got {self.phi}', 'phi'
            )
        if not self.gamma > 0.0:
            raise ConfigError(f'must be positive, got {self.gamma}', 'gamma')
        if not self.spacing > 0.0:
            raise ConfigError(
                f'must be positive, got {self.spacing}', 'spacing'
            )
        if isinstance(self.master_seed, bool) or not isinstance(
            self.master_seed, numbers.Integral
        ):
            raise ConfigError('must be an integer', 'master_seed')
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError(
                'must be an unsigned 64-bit integer', 'master_seed'
            )

    @property
    def k0(self):
        return self.phi / self.spacing


@dataclass(frozen=True, eq=False)
class Realization:
    """One disorder draw.

    ``offsets`` are the dimensionless delta_m, ``positions`` the x_m in
    length units and ``spacing_phases`` the N - 1 phases
    ``k0 * (x_{m+1} - x_m)``. Arrays are read-only.
    """

    offsets: np.ndarray
    positions: np.ndarray
    spacing_phases: np.ndarray
    realization_index: int = 0
    spacing: float = defaults.SPACING

    @property
    def n_qubits(self):
        return len(self.positions)


@dataclass(frozen=True, eq=False)
class DenseHamiltonian:
    """N x N complex symmetric effective Hamiltonian."""

    entries: np.ndarray
    gamma: float
    phi: float
    realization_index: int = 0

    @property
    def n_qubits(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class TridiagonalInverse:
    """Symmetric tridiagonal inverse ``H0 + iV`` of the effective
    Hamiltonian, stored as its diagonal and first off-diagonal.

    ``offdiag_sign`` records the global sign convention of the
    off-diagonal; flipping it is a diagonal +-1 similarity transform and
    leaves the spectrum unchanged.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    gamma: float
    offdiag_sign: int = 1
    realization_index: int = 0

    @property
    def n_qubits(self):
        return len(self.diag)

    def to_dense(self):
        dense = np.diag(self.diag.astype(complex))
        if len(self.offdiag):
            dense += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return dense

    def hermitian_part(self):
        """Real symmetric tight-binding part H0."""
        return self.to_dense().real

    def boundary_part(self):
        """Real diagonal dissipator V, supported on the chain ends."""
        return self.to_dense().imag

    def eigvals(self):
        return linalg.eigvals(self.to_dense())


InverseCheck = namedtuple(
    'InverseCheck', ['rel_error', 'boundary_residual', 'offdiag_sign']
)


def realization_rng(master_seed, realization_index):
    """Return the Philox generator of one realization.

    Philox is a 64-bit counter-based generator; the key is derived by
    ``numpy.random.SeedSequence`` hashing of ``(master_seed,
    realization_index)``, so any realization can be regenerated alone,
    in any order and on any worker.
    """

    if realization_index < 0:
        raise ValueError(
            f'realization_index must be >= 0, got {realization_index}'
        )
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(realization_index),)
    )
    return np.random.Generator(np.random.Philox(seq))


def sample_offsets(spec, realization_index):
    """Draw the N dimensionless offsets delta_m uniformly on [-W/2, W/2].

    Parameters
    ----------
    spec : ChainSpec
        configuration supplying N, W and the master seed
    realization_index : int
        non-negative index of the realization

    Returns
    -------
    offsets : numpy.ndarray
        N offsets, all zero when W = 0
    """

    rng = realization_rng(spec.master_seed, realization_index)
    if spec.disorder_w == 0.0:
        return np.zeros(spec.n_qubits)
    half = 0.5 * spec.disorder_w
    return rng.uniform(-half, half, size=spec.n_qubits)


def _pole_distance(phases):
    """Distance of each phase to the nearest multiple of pi."""
    residue = np.mod(phases, np.pi)
    return np.minimum(residue, np.pi - residue)


def spacing_phases(positions, phi, spacing=defaults.SPACING):
    return (phi / spacing) * np.diff(positions)


def check_spacing_phases(phases, pole_guard=defaults.POLE_GUARD):
    singular = np.flatnonzero(_pole_distance(phases) < pole_guard)
    if len(singular):
        raise SingularSpacingError(
            'spacing phases within the pole guard of a multiple of pi at '
            f'bonds {(singular + 1).tolist()}: {phases[singular].tolist()}'
        )


def build_positions(spec, offsets, realization_index=0):
    """Place the qubits at ``x_m = (m + delta_m) * d``.

    Parameters
    ----------
    spec : ChainSpec
        configuration supplying N, phi, W and d
    offsets : array_like
        N offsets, each in [-W/2, W/2]
    realization_index : int, optional
        index recorded on the realization

    Returns
    -------
    realization : Realization

    Raises
    ------
    DataError
        wrong number of offsets, offsets outside [-W/2, W/2] or positions
        that are not strictly increasing
    SingularSpacingError
        a spacing phase within ``POLE_GUARD`` of a multiple of pi
    """

    offsets = np.asarray(offsets, dtype=float)
    if offsets.shape != (spec.n_qubits,):
        raise DataError(
            f'expected {spec.n_qubits} offsets, got shape {offsets.shape}'
        )
    half = 0.5 * spec.disorder_w
    outside = np.flatnonzero(np.abs(offsets) > half + 1e-12)
    if len(outside):
        raise DataError(
            f'offsets outside [-{half}, {half}] at sites '
            f'{(outside + 1).tolist()}'
        )

    sites = np.arange(1, spec.n_qubits + 1)
    positions = (sites + offsets) * spec.spacing

    # impossible for W < 1, kept for hand-made offsets
    gaps = np.diff(positions)
    if np.any(gaps <= 0):
        raise DataError(
            'qubit positions must be strictly increasing, bonds '
            f'{(np.flatnonzero(gaps <= 0) + 1).tolist()} are not'
        )

    phases = spacing_phases(positions, spec.phi, spec.spacing)
    check_spacing_phases(phases)

    return Realization(
        offsets=_frozen(offsets, float),
        positions=_frozen(positions, float),
        spacing_phases=_frozen(phases, float),
        realization_index=int(realization_index),
        spacing=spec.spacing,
    )


def realize(spec, realization_index):
    """sample_offsets followed by build_positions."""
    offsets = sample_offsets(spec, realization_index)
    return build_positions(spec, offsets, realization_index)


def ordered_realization(spec):
    return build_positions(spec, np.zeros(spec.n_qubits), 0)


def build_h_eff(realization, gamma=defaults.GAMMA, phi=defaults.PHI):
    """Dense effective Hamiltonian ``-(i gamma/2) exp(i k0 |x_m - x_n|)``.

    Parameters
    ----------
    realization : Realization
        qubit positions
    gamma : float
        single-qubit decay rate
    phi : float
        phase per lattice spacing, ``k0 = phi / d``

    Returns
    -------
    h : DenseHamiltonian
    """

    x = realization.positions - realization.positions[0]
    distance = np.abs(np.subtract.outer(x, x))
    k0 = phi / realization.spacing
    entries = -0.5j * gamma * np.exp(1j * k0 * distance)
    return DenseHamiltonian(
        entries=_frozen(entries, complex),
        gamma=gamma,
        phi=phi,
        realization_index=realization.realization_index,
    )


def build_h_inv(realization, gamma=defaults.GAMMA, phi=defaults.PHI):
    """Tridiagonal inverse of the effective Hamiltonian.

    With spacing phases ``a_m = k0 (x_{m+1} - x_m)`` the inverse is

    * off-diagonal ``csc(a_m) / gamma``
    * bulk diagonal ``(-cot(a_m) - cot(a_{m-1})) / gamma``
    * end sites ``(i - cot(a_1)) / gamma`` and ``(i - cot(a_{N-1})) / gamma``

    A single qubit has ``H^-1 = 2i / gamma``.

    Raises
    ------
    SingularSpacingError
        a spacing phase at a pole of cot / csc
    """

    n = realization.n_qubits
    if n == 1:
        return TridiagonalInverse(
            diag=_frozen([2j / gamma], complex),
            offdiag=_frozen([], complex),
            gamma=gamma,
            realization_index=realization.realization_index,
        )

    phases = spacing_phases(realization.positions, phi, realization.spacing)
    check_spacing_phases(phases)
    cot = 1.0 / np.tan(phases)
    csc = 1.0 / np.sin(phases)

    diag = np.zeros(n, dtype=complex)
    diag[:-1] -= cot
    diag[1:] -= cot
    diag[0] += 1j
    diag[-1] += 1j

    return TridiagonalInverse(
        diag=_frozen(diag / gamma, complex),
        offdiag=_frozen(csc / gamma, complex),
        gamma=gamma,
        offdiag_sign=1,
        realization_index=realization.realization_index,
    )


def verify_h_inv(h_inv, h_eff):
    """Check a tridiagonal inverse against dense numerical inversion.

    Returns
    -------
    check : InverseCheck
        ``rel_error`` is the max-norm of ``H^-1 H - 1``;
        ``boundary_residual`` the max deviation of Im(inv(H)) from
        ``(|1><1| + |N><N|) / gamma``; ``offdiag_sign`` the sign of the
        off-diagonal that matches the numerical inverse (0 for N = 1)
    """

    n = h_eff.n_qubits
    dense = h_inv.to_dense()
    rel_error = np.max(np.abs(dense @ h_eff.entries - np.eye(n)))

    numerical = linalg.inv(h_eff.entries)
    expected_im = np.zeros((n, n))
    expected_im[0, 0] += 1.0 / h_eff.gamma
    expected_im[-1, -1] += 1.0 / h_eff.gamma
    boundary_residual = np.max(np.abs(numerical.imag - expected_im))

    sign = 0
    if n > 1:
        # stored off-diagonal is offdiag_sign * csc / gamma
        reference = h_inv.offdiag.real * h_inv.offdiag_sign
        sign = int(np.sign(np.sum(np.diag(numerical, 1).real * reference)))

    return InverseCheck(float(rel_error), float(boundary_residual), sign)
