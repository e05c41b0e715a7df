import numpy as np
import pytest

from .context import subrad, EXACT_ATOL
from subrad import model
from subrad.errors import ConfigError, DataError, SingularSpacingError


@pytest.mark.parametrize(
    'kwargs, path',
    [
        (dict(n_qubits=0), 'n_qubits'),
        (dict(n_qubits=True), 'n_qubits'),
        (dict(n_qubits=2.0), 'n_qubits'),
        (dict(n_qubits=4, disorder_w=1.0), 'disorder_w'),
        (dict(n_qubits=4, disorder_w=-0.1), 'disorder_w'),
        (dict(n_qubits=4, phi=0.0), 'phi'),
        (dict(n_qubits=4, phi=0.6 * np.pi), 'phi'),
        (dict(n_qubits=4, gamma=0.0), 'gamma'),
        (dict(n_qubits=4, spacing=-1.0), 'spacing'),
        (dict(n_qubits=4, master_seed=-1), 'master_seed'),
        (dict(n_qubits=4, master_seed=2 ** 64), 'master_seed'),
    ],
)
def test_chain_spec_rejects(kwargs, path):

    with pytest.raises(ConfigError) as err:
        model.ChainSpec(**kwargs)
    assert err.value.path == path


def test_chain_spec_k0():

    spec = model.ChainSpec(3, phi=0.5 * np.pi, spacing=2.0)
    assert spec.k0 == 0.25 * np.pi


def test_offsets_ordered_chain():

    spec = model.ChainSpec(10, disorder_w=0.0)
    for index in (0, 3, 17):
        assert np.all(model.sample_offsets(spec, index) == 0.0)


def test_offsets_reproducible_and_order_independent():

    spec = model.ChainSpec(50, disorder_w=0.4, master_seed=7)
    first = model.sample_offsets(spec, 5)
    model.sample_offsets(spec, 4)
    model.sample_offsets(spec, 6)
    again = model.sample_offsets(spec, 5)

    assert np.array_equal(first, again)
    assert not np.array_equal(first, model.sample_offsets(spec, 4))


def test_offsets_depend_on_master_seed():

    a = model.ChainSpec(20, disorder_w=0.4, master_seed=7)
    b = model.ChainSpec(20, disorder_w=0.4, master_seed=8)
    assert not np.array_equal(
        model.sample_offsets(a, 0), model.sample_offsets(b, 0)
    )


def test_offsets_uniform_moments():

    n = 100_000
    spec = model.ChainSpec(n, disorder_w=0.4, master_seed=7)
    offsets = model.sample_offsets(spec, 3)

    assert offsets.min() >= -0.2
    assert offsets.max() <= 0.2
    standard_error = 0.4 / np.sqrt(12.0) / np.sqrt(n)
    assert abs(offsets.mean()) < 5 * standard_error


def test_realization_rng_rejects_negative_index():

    with pytest.raises(ValueError):
        model.realization_rng(7, -1)


def test_build_positions_direct_formula():

    spec = model.ChainSpec(3, phi=0.5 * np.pi, disorder_w=0.4)
    realization = model.build_positions(spec, [0.1, -0.2, 0.0])

    assert np.allclose(realization.positions, [1.1, 1.8, 3.0])
    assert np.allclose(realization.spacing_phases, [0.35 * np.pi, 0.6 * np.pi])
    assert realization.n_qubits == 3
    assert not realization.positions.flags.writeable


def test_ordered_positions():

    spec = model.ChainSpec(2, phi=0.5 * np.pi)
    realization = model.ordered_realization(spec)

    assert np.array_equal(realization.positions, [1.0, 2.0])
    assert np.allclose(realization.spacing_phases, [0.5 * np.pi])


def test_build_positions_rejects_bad_offsets():

    spec = model.ChainSpec(3, disorder_w=0.2)
    with pytest.raises(DataError):
        model.build_positions(spec, [0.0, 0.0])
    with pytest.raises(DataError):
        model.build_positions(spec, [0.0, 0.3, 0.0])


def test_pole_guard():

    with pytest.raises(SingularSpacingError):
        model.check_spacing_phases(np.array([0.5, np.pi + 1e-12]))
    with pytest.raises(SingularSpacingError):
        model.check_spacing_phases(np.array([2 * np.pi]))
    model.check_spacing_phases(np.array([0.5, np.pi - 1e-6]))


def test_h_eff_small_chains():

    one = model.build_h_eff(
        model.ordered_realization(model.ChainSpec(1)), gamma=1.0
    )
    assert np.allclose(one.entries, [[-0.5j]])

    spec = model.ChainSpec(2, phi=0.5 * np.pi)
    two = model.build_h_eff(
        model.ordered_realization(spec), gamma=1.0, phi=spec.phi
    )
    assert np.allclose(two.entries, [[-0.5j, 0.5], [0.5, -0.5j]])

    spec = model.ChainSpec(3, phi=0.5 * np.pi)
    three = model.build_h_eff(
        model.ordered_realization(spec), gamma=1.0, phi=spec.phi
    )
    assert np.isclose(three.entries[0, 2], 0.5j)


def test_h_eff_structure():

    spec = model.ChainSpec(9, phi=0.3 * np.pi, disorder_w=0.6, gamma=2.0)
    h = model.build_h_eff(model.realize(spec, 11), spec.gamma, spec.phi)

    assert np.array_equal(h.entries, h.entries.T)
    assert np.allclose(np.diag(h.entries), -1.0j)
    assert np.allclose(np.abs(h.entries), 1.0)
    assert h.realization_index == 11


def test_h_inv_two_qubits():

    spec = model.ChainSpec(2, phi=0.5 * np.pi)
    h_inv = model.build_h_inv(
        model.ordered_realization(spec), gamma=1.0, phi=spec.phi
    )
    assert np.allclose(h_inv.to_dense(), [[1j, 1.0], [1.0, 1j]])

    spec = model.ChainSpec(2, phi=np.pi / 3)
    h_inv = model.build_h_inv(
        model.ordered_realization(spec), gamma=1.0, phi=spec.phi
    )
    assert np.allclose(h_inv.diag, 1j - 1.0 / np.sqrt(3.0))


def test_h_inv_single_qubit():

    realization = model.ordered_realization(model.ChainSpec(1))
    h_inv = model.build_h_inv(realization, gamma=1.0)
    h = model.build_h_eff(realization, gamma=1.0)

    assert np.allclose(h_inv.to_dense(), [[2j]])
    check = model.verify_h_inv(h_inv, h)
    assert check.rel_error < EXACT_ATOL
    assert check.offdiag_sign == 0


@pytest.mark.parametrize('phi', [0.5 * np.pi, 0.25 * np.pi])
@pytest.mark.parametrize('n_qubits', range(2, 13))
def test_h_inv_matches_dense_inverse(n_qubits, phi):

    spec = model.ChainSpec(
        n_qubits, phi=phi, disorder_w=0.5, master_seed=1234
    )
    for index in range(10):
        realization = model.realize(spec, index)
        h = model.build_h_eff(realization, spec.gamma, spec.phi)
        h_inv = model.build_h_inv(realization, spec.gamma, spec.phi)
        check = model.verify_h_inv(h_inv, h)

        assert check.rel_error < EXACT_ATOL
        assert check.boundary_residual < EXACT_ATOL
        assert check.offdiag_sign == h_inv.offdiag_sign == 1


def test_h_inv_parts():

    spec = model.ChainSpec(
        6, phi=0.5 * np.pi, disorder_w=0.3, gamma=2.0, master_seed=5
    )
    h_inv = model.build_h_inv(model.realize(spec, 0), spec.gamma, spec.phi)

    h0 = h_inv.hermitian_part()
    v = h_inv.boundary_part()
    assert np.array_equal(h0, h0.T)
    expected = np.zeros((6, 6))
    expected[0, 0] = expected[-1, -1] = 0.5
    assert np.allclose(v, expected)
    assert np.allclose(h0 + 1j * v, h_inv.to_dense())


def test_h_inv_spectrum_reciprocal():

    spec = model.ChainSpec(16, phi=0.5 * np.pi, disorder_w=0.3)
    realization = model.realize(spec, 2)
    h = model.build_h_eff(realization, spec.gamma, spec.phi)
    h_inv = model.build_h_inv(realization, spec.gamma, spec.phi)

    dense = np.linalg.eigvals(h.entries)
    for value in 1.0 / h_inv.eigvals():
        assert np.min(np.abs(dense - value)) < 1e-8
