import math

import numpy as np
import pytest

from qsawtooth.errors import BasisMismatchError
from qsawtooth.params import build_params
from qsawtooth.quantum import (
    NoisePlan,
    QuantumState,
    _initial_position_batch,
    _Propagator,
    centered_indices,
    echo_fidelity_trace,
    echo_realizations,
    evolve,
    momentum_distribution,
    qsm_step,
    to_momentum,
    to_position,
)


def random_state(N, seed=0, basis="position"):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=N) + 1j * rng.normal(size=N)
    return QuantumState(v / np.linalg.norm(v), basis)


def dft_matrix(N):
    # <p|q> = exp(-2 pi i p q / N) / sqrt(N), centred indices
    p = centered_indices(N)
    return np.exp(-2j * math.pi * np.outer(p, p) / N) / math.sqrt(N)


def dense_step(params, zeta):
    """U_kin U_pot built as explicit N x N matrices in the position basis."""
    N = params.N
    x = centered_indices(N)
    F = dft_matrix(N)
    U_pot = np.diag(np.exp(1j * (params.k + zeta) * (params.beta * x) ** 2 / 2))
    U_kin_p = np.diag(np.exp(-1j * params.hbar * x.astype(float) ** 2 / 2))
    return F.conj().T @ U_kin_p @ F @ U_pot


def test_dft_against_brute_force_sum():
    N = 8
    psi = random_state(N, 1)
    p = centered_indices(N)
    expected = np.array(
        [sum(np.exp(-2j * math.pi * pp * q / N) * a for q, a in zip(p, psi.amplitudes)) for pp in p]
    ) / math.sqrt(N)
    assert np.max(np.abs(to_momentum(psi).amplitudes - expected)) < 1e-12


def test_uniform_position_is_zero_momentum():
    N = 16
    psi = QuantumState(np.full(N, 1 / math.sqrt(N)), "position")
    P = momentum_distribution(psi)
    assert P[N // 2] == pytest.approx(1.0)
    assert P.sum() == pytest.approx(1.0)


def test_round_trip():
    psi = random_state(64, 2)
    back = to_position(to_momentum(psi))
    assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-12


def test_basis_mismatch():
    with pytest.raises(BasisMismatchError):
        to_momentum(random_state(8, basis="momentum"))
    with pytest.raises(BasisMismatchError):
        to_position(random_state(8, basis="position"))


def test_eigenstates():
    s = QuantumState.momentum_eigenstate(8, -4)
    assert s.amplitudes[0] == 1
    with pytest.raises(ValueError):
        QuantumState.momentum_eigenstate(8, 4)
    assert QuantumState.position_eigenstate(8, 1).basis == "position"


def test_free_evolution_is_diagonal():
    params = build_params(4, 1, K=0.7)
    state = QuantumState.momentum_eigenstate(16, 3)
    out = qsm_step(state, params, zeta=-params.k, output_basis="momentum")
    expected = np.exp(-0.5j * params.hbar * 9)
    assert out.amplitudes[3 + 8] == pytest.approx(expected, abs=1e-12)
    np.testing.assert_allclose(momentum_distribution(out), momentum_distribution(state), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_dense_oracle_trajectory(n):
    params = build_params(n, 1, K=1.571)
    zetas = [0.0, 0.3, -1.2, 2.5, 0.01]
    psi = random_state(params.N, 4)
    ref = psi.amplitudes.copy()
    for z in zetas:
        psi = qsm_step(psi, params, z)
        ref = dense_step(params, z) @ ref
        assert np.max(np.abs(psi.amplitudes - ref)) < 1e-12


def test_propagator_matches_public_step():
    params = build_params(5, 1, K=0.9)
    prop = _Propagator(params)
    batch = _initial_position_batch(params.N, 1, 2)
    zetas = np.array([0.4, -0.7])
    out = prop.step(batch, zetas)
    for b, z in enumerate(zetas):
        ref = qsm_step(QuantumState.momentum_eigenstate(params.N, 1), params, z)
        np.testing.assert_allclose(np.fft.fftshift(out[b]), ref.amplitudes, atol=1e-12)


def test_norm_drift_100_steps_n12():
    params = build_params(12, 1, K=0.9)
    prop = _Propagator(params)
    psi = _initial_position_batch(params.N, 0, 1)
    z = NoisePlan(0.5, 3).draws(100)
    for t in range(100):
        psi = prop.step(psi, z[t : t + 1])
    assert abs(1 - np.sum(np.abs(psi) ** 2)) < 1e-10


def test_step_preserves_norm_and_output_basis():
    params = build_params(6, 1, K=0.6)
    psi = random_state(64, 5)
    out = qsm_step(psi, params, 1.3, output_basis="momentum")
    assert out.basis == "momentum"
    assert abs(out.norm() - 1) < 1e-12
    assert momentum_distribution(out).sum() == pytest.approx(1, abs=1e-10)


def test_echo_identity_by_inverting_steps():
    params = build_params(4, 1, K=0.9)
    sigma, steps = 0.8, 6
    fa = NoisePlan(sigma, 9, 0, "forward").draws(steps)
    fb = NoisePlan(sigma, 9, 0, "backward").draws(steps)
    f = echo_realizations(params, sigma, steps, 1, master_seed=9, p0=1)[0]
    psi0 = QuantumState.momentum_eigenstate(params.N, 1)
    for t in range(1, steps + 1):
        Ua = np.eye(params.N, dtype=complex)
        Ub = np.eye(params.N, dtype=complex)
        for s in range(t):
            Ua = dense_step(params, fa[s]) @ Ua
            Ub = dense_step(params, fb[s]) @ Ub
        start = to_position(psi0).amplitudes
        echo = start.conj() @ (Ub.conj().T @ (Ua @ start))
        assert f[t] == pytest.approx(abs(echo) ** 2, abs=1e-12)


def test_zero_noise_echo_is_one():
    params = build_params(6, 1, K=0.6)
    tr = echo_fidelity_trace(params, 0.0, 10, 5)
    assert np.all(tr.f_mean == 1.0) and np.all(tr.f_stderr == 0.0)


def test_trace_invariants_and_reproducibility():
    params = build_params(6, 1, K=0.6)
    a = echo_fidelity_trace(params, 0.9, 8, 40, master_seed=2, batch_size=7)
    b = echo_fidelity_trace(params, 0.9, 8, 40, master_seed=2, batch_size=7, workers=3)
    assert a.f_mean[0] == 1.0
    assert np.all((a.f_mean >= 0) & (a.f_mean <= 1))
    assert np.array_equal(a.f_mean, b.f_mean)
    c = echo_fidelity_trace(params, 0.9, 8, 40, master_seed=3)
    assert not np.array_equal(a.f_mean, c.f_mean)
    assert a.metadata()["realizations"] == 40


def test_batching_does_not_change_realizations():
    params = build_params(5, 1, K=0.9)
    a = echo_realizations(params, 1.0, 5, 10, master_seed=4, batch_size=3)
    b = echo_realizations(params, 1.0, 5, 10, master_seed=4, batch_size=10)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_noise_statistics():
    z = np.concatenate([NoisePlan(2.0, 1, r).draws(1000) for r in range(100)])
    assert abs(z.mean()) < 0.01 * 2.0 * 3
    assert z.var() == pytest.approx(4.0, rel=0.01)


def test_noise_plan_determinism():
    a = NoisePlan(1.0, 5, 3, "forward").draws(10)
    assert np.array_equal(a, NoisePlan(1.0, 5, 3, "forward").draws(10))
    assert not np.array_equal(a, NoisePlan(1.0, 5, 3, "backward").draws(10))
    assert np.all(NoisePlan(0.0).draws(4) == 0)


def test_evolve_applies_each_kick():
    params = build_params(3, 1, K=1.3)
    psi = random_state(8, 7)
    out = evolve(psi, params, [0.1, 0.2])
    ref = qsm_step(qsm_step(psi, params, 0.1), params, 0.2)
    np.testing.assert_allclose(out.amplitudes, ref.amplitudes)


def test_argument_checks():
    params = build_params(3, 1, K=1.3)
    with pytest.raises(ValueError):
        echo_realizations(params, -1.0, 3, 2)
    with pytest.raises(ValueError):
        echo_realizations(params, 1.0, 0, 2)
    with pytest.raises(ValueError):
        qsm_step(random_state(16), params)
