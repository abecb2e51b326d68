import numpy as np
import pytest
import scipy.linalg as la

import fluorospec as fs
from fluorospec import _kernels
from fluorospec.model import trace_functional

from conftest import random_block_state, random_spec
import markovian_oracle


def test_validate_minimal_spec_is_empty(markovian):
    assert fs.validate(markovian) == []


def test_validate_negative_phi_entry_named():
    spec = fs.spectral_two_state(1.0, 0.7, 0.1, 0.01)
    phi = np.array(spec.rates.phi)
    phi[0, 1] = -0.5
    bad = fs.ModelSpec(space=spec.space, per_state=spec.per_state,
                       rates=fs.FluctuationRates(phi=phi, gamma_cross=spec.rates.gamma_cross))
    problems = fs.validate(bad)
    assert len(problems) == 1
    assert "rates.phi[0][1]" in problems[0]


def test_validate_per_state_length_mismatch():
    spec = fs.single_state(1.0, 0.7)
    bad = fs.ModelSpec(space=fs.ConfigSpace(2), per_state=spec.per_state,
                       rates=fs.FluctuationRates.none(2))
    assert any("per_state" in p for p in fs.validate(bad))


def test_validate_duplicate_channel_kind():
    eta = np.array([[0.0, 1.0], [1.0, 0.0]])
    spec = fs.ModelSpec(
        space=fs.ConfigSpace(2),
        per_state=(fs.PerStateParams(0, 1, 0), fs.PerStateParams(0, 1, 0)),
        rates=fs.FluctuationRates.none(2),
        extra_channels=(fs.GeneralJumpChannel(fs.OperatorKind.IDENTITY, eta),
                        fs.GeneralJumpChannel(fs.OperatorKind.IDENTITY, eta)))
    assert any("duplicate" in p for p in fs.validate(spec))


def test_pure_decay_spectrum():
    gen = fs.build_generator(fs.single_state(gamma=1.0, omega_rabi=0.0))
    eigs = np.sort(la.eigvals(gen.matrix).real)
    assert np.allclose(eigs, [-1.0, -0.5, -0.5, 0.0], atol=1e-14)
    assert np.abs(la.eigvals(gen.matrix).imag).max() < 1e-14


@pytest.mark.parametrize("r_max", [1, 2, 5])
def test_trace_functional_is_left_null_vector(r_max):
    rng = np.random.default_rng(7 + r_max)
    spec = random_spec(rng, r_max, with_channels=True)
    m = fs.build_generator(spec).matrix
    assert np.abs(trace_functional(r_max) @ m).max() < 1e-12


@pytest.mark.parametrize("r_max", [1, 2, 5])
def test_dense_matches_matrix_free(r_max):
    rng = np.random.default_rng(100 + r_max)
    spec = random_spec(rng, r_max, with_channels=True)
    m = fs.build_generator(spec).matrix
    for _ in range(20):
        x = random_block_state(rng, r_max)
        dense = m @ x.to_vector()
        free = fs.apply_generator(spec, x).to_vector()
        assert np.abs(dense - free).max() <= 1e-12 * max(np.abs(dense).max(), 1.0)


def test_dense_matches_matrix_free_fig2a(fig2a):
    rng = np.random.default_rng(2)
    m = fs.build_generator(fig2a).matrix
    for _ in range(20):
        x = random_block_state(rng, 2)
        dense = m @ x.to_vector()
        free = fs.apply_generator(fig2a, x).to_vector()
        assert np.abs(dense - free).max() <= 1e-12 * np.abs(dense).max()


def test_apply_generator_on_steady_is_zero(fig2a):
    st = fs.steady_state(fs.build_generator(fig2a))
    out = fs.apply_generator(fig2a, st).to_vector()
    scale = la.norm(fs.build_generator(fig2a).matrix) * la.norm(st.to_vector())
    assert la.norm(out) <= 1e-10 * scale


def test_decay_direction_from_mixed_state():
    spec = fs.single_state(gamma=1.0, omega_rabi=0.0)
    mixed = fs.BlockState(0.5 * np.eye(2, dtype=complex)[None, :, :])
    d = fs.apply_generator(spec, mixed).blocks[0]
    assert d[1, 1].real < 0
    assert d[0, 0].real > 0
    assert abs(d[0, 0] + d[1, 1]) < 1e-15


def test_effective_decay_no_cross(markovian):
    assert fs.effective_decay(markovian, 0) == 1.0


def test_effective_decay_fig5(fig5):
    assert fs.effective_decay(fig5, 0) == pytest.approx(1.0015, abs=1e-12)
    assert fs.effective_decay(fig5, 1) == pytest.approx(10.02, abs=1e-12)
    with pytest.raises(IndexError):
        fs.effective_decay(fig5, 2)


@pytest.mark.parametrize("r_max", [1, 2, 5])
def test_trace_preservation_under_application(r_max):
    rng = np.random.default_rng(200 + r_max)
    spec = random_spec(rng, r_max, with_channels=True)
    for _ in range(5):
        x = random_block_state(rng, r_max, physical=True)
        dx = fs.apply_generator(spec, x)
        assert abs(dx.total_trace()) < 1e-12


@pytest.mark.parametrize("r_max", [1, 3])
def test_hermiticity_preservation(r_max):
    rng = np.random.default_rng(300 + r_max)
    spec = random_spec(rng, r_max, with_channels=True)
    x = random_block_state(rng, r_max, physical=True)
    d = fs.apply_generator(spec, x).blocks
    assert np.abs(d - d.conj().transpose(0, 2, 1)).max() < 1e-12


def test_markovian_reduction_matches_hand_coded_liouvillian():
    gamma, omega, delta = 1.3, 0.8, -0.4
    spec = fs.single_state(gamma=gamma, omega_rabi=omega, detuning=delta)
    ours = fs.build_generator(spec).matrix
    ref = markovian_oracle.liouvillian(gamma, omega, delta)
    assert np.abs(ours - ref).max() < 1e-14


def test_vectorization_round_trip():
    rng = np.random.default_rng(11)
    x = random_block_state(rng, 3)
    again = fs.BlockState.from_vector(x.to_vector())
    assert np.array_equal(x.blocks, again.blocks)
    # layout: block-major, column-major within block (aa, ba, ab, bb)
    v = x.to_vector()
    assert v[0] == x.blocks[0, 0, 0]
    assert v[1] == x.blocks[0, 1, 0]
    assert v[2] == x.blocks[0, 0, 1]
    assert v[3] == x.blocks[0, 1, 1]
    assert v[4] == x.blocks[1, 0, 0]


def test_kernel_backends_agree():
    numba = pytest.importorskip("numba")
    rng = np.random.default_rng(13)
    spec = random_spec(rng, 4, with_channels=True)
    x = random_block_state(rng, 4)
    args = (np.ascontiguousarray(x.blocks),
            np.ascontiguousarray(fs.model.block_hamiltonians(spec)),
            spec.gammas(), spec.effective_decays(),
            np.ascontiguousarray(spec.rates.phi),
            np.ascontiguousarray(spec.rates.gamma_cross),
            np.array([ch.operator_kind.matrix() for ch in spec.extra_channels]),
            np.array([ch.eta for ch in spec.extra_channels]))
    a = _kernels.apply_blocks_numpy(*args)
    b = numba.njit(cache=True)(_kernels._apply_blocks_loops)(*args)
    assert np.abs(a - b).max() < 1e-13
