"""State-vector simulation of the quantum sawtooth map.

One period is ``U = U_kin U_pot`` with

* ``U_pot = exp(i k (beta q)^2 / 2)``, diagonal in position ``|q>``;
* ``U_kin = exp(-i hbar p^2 / 2)``, diagonal in momentum ``|p>``;

where ``p, q`` run over the centred range ``-N/2 .. N/2-1`` and
``beta = 2*pi/N``.  The two bases are related by

    <p|psi> = N^(-1/2) sum_q exp(-2*pi*i*p*q/N) <q|psi>

Public states store amplitudes in centred order (index ``j`` holds
``p`` or ``q = j - N/2``).  The batched evolution loop instead works in
"wrapped" order (index ``j`` holds ``j mod N``), where the centred
transform is exactly a plain FFT, so no shifts are needed per step.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import BasisMismatchError
from .params import MapParams

Basis = Literal["position", "momentum"]
Branch = Literal["forward", "backward"]

_BRANCH_CODE = {"forward": 0, "backward": 1}


def centered_indices(N: int) -> np.ndarray:
    return np.arange(-(N // 2), N - N // 2)


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    basis: Basis = "momentum"

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.basis not in ("position", "momentum"):
            raise ValueError(f"unknown basis {self.basis!r}")

    @property
    def N(self) -> int:
        return self.amplitudes.size

    @property
    def indices(self) -> np.ndarray:
        return centered_indices(self.N)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def momentum_eigenstate(cls, N: int, p0: int = 0) -> "QuantumState":
        if not -(N // 2) <= p0 < N - N // 2:
            raise ValueError(f"p0={p0} outside [-N/2, N/2) for N={N}")
        amps = np.zeros(N, dtype=complex)
        amps[p0 + N // 2] = 1.0
        return cls(amps, "momentum")

    @classmethod
    def position_eigenstate(cls, N: int, q0: int = 0) -> "QuantumState":
        state = cls.momentum_eigenstate(N, q0)
        state.basis = "position"
        return state


def to_momentum(state: QuantumState) -> QuantumState:
    """Position-basis state -> momentum basis (unitary centred DFT)."""
    if state.basis != "position":
        raise BasisMismatchError(f"to_momentum expects a position state, got {state.basis}")
    amps = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(state.amplitudes), norm="ortho"))
    return QuantumState(amps, "momentum")


def to_position(state: QuantumState) -> QuantumState:
    """Inverse of :func:`to_momentum`."""
    if state.basis != "momentum":
        raise BasisMismatchError(f"to_position expects a momentum state, got {state.basis}")
    amps = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(state.amplitudes), norm="ortho"))
    return QuantumState(amps, "position")


def kick_phase_arg(params: MapParams) -> np.ndarray:
    """``(beta q)^2 / 2`` in centred order; multiply by the kick for the phase."""
    q = centered_indices(params.N)
    return 0.5 * (params.beta * q) ** 2


def kinetic_phase(params: MapParams) -> np.ndarray:
    """Diagonal of ``U_kin`` in centred momentum order."""
    p = centered_indices(params.N)
    return np.exp(-0.5j * params.hbar * p * p)


def qsm_step(
    state: QuantumState,
    params: MapParams,
    zeta: float = 0.0,
    output_basis: Basis = "position",
) -> QuantumState:
    """Apply one noisy period ``U_kin U_pot`` with quantum kick ``k + zeta``."""
    if state.N != params.N:
        raise ValueError(f"state has {state.N} amplitudes, params expect {params.N}")
    if state.basis == "momentum":
        state = to_position(state)
    kicked = QuantumState(
        state.amplitudes * np.exp(1j * (params.k + zeta) * kick_phase_arg(params)), "position"
    )
    out = to_momentum(kicked)
    out.amplitudes *= kinetic_phase(params)
    return to_position(out) if output_basis == "position" else out


def momentum_distribution(state: QuantumState) -> np.ndarray:
    """``P_p = |<p|psi>|^2`` in centred order."""
    if state.basis == "position":
        state = to_momentum(state)
    return np.abs(state.amplitudes) ** 2


@dataclass(frozen=True)
class NoisePlan:
    """Kick noise for one branch of one realization.

    Draws are standard normals from numpy's PCG64 generator (ziggurat
    sampler) seeded by ``SeedSequence(master_seed,
    spawn_key=(realization_index, branch_code))`` and scaled by
    ``sigma``.  Bit-reproducible within a single numpy build.
    """

    sigma: float
    master_seed: int = 0
    realization_index: int = 0
    branch: Branch = "forward"

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.realization_index, _BRANCH_CODE[self.branch])
        )
        return np.random.Generator(np.random.PCG64(seq))

    def draws(self, steps: int) -> np.ndarray:
        """``zeta_1 .. zeta_steps``."""
        if self.sigma == 0:
            return np.zeros(steps)
        return self.sigma * self.generator().standard_normal(steps)


@dataclass
class FidelityTrace:
    t: np.ndarray
    f_mean: np.ndarray
    f_stderr: np.ndarray
    realizations: int
    params: MapParams
    sigma: float
    master_seed: int = 0
    p0: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.params.N

    def metadata(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "sigma": self.sigma,
            "steps": int(self.t[-1]),
            "realizations": self.realizations,
            "master_seed": self.master_seed,
            "p0": self.p0,
            **self.meta,
        }


class _Propagator:
    """Batched split-operator evolution in wrapped index order."""

    def __init__(self, params: MapParams):
        N = params.N
        self.params = params
        q = np.fft.ifftshift(centered_indices(N))
        x2 = 0.5 * (params.beta * q) ** 2
        self.base_kick = np.exp(1j * params.k * x2)
        self.kin = np.exp(-0.5j * params.hbar * q * q)
        # x2 is even in q: evaluate the noise phase on q = 0..N/2 and mirror
        half = N // 2 + 1
        self.x2_half = x2[:half]
        self.mirror = np.concatenate([np.arange(half), np.arange(N - half, 0, -1)])

    def step(self, psi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
        """``psi`` has shape (batch, N) in position basis; ``zeta`` shape (batch,)."""
        noise = np.exp(1j * np.multiply.outer(zeta, self.x2_half))[:, self.mirror]
        psi = psi * noise
        psi *= self.base_kick
        phi = np.fft.fft(psi, axis=-1, norm="ortho")
        phi *= self.kin
        return np.fft.ifft(phi, axis=-1, norm="ortho")


def _initial_position_batch(N: int, p0: int, batch: int) -> np.ndarray:
    # |p0> in wrapped position order: exp(2 pi i p0 q / N) / sqrt(N)
    q = np.fft.ifftshift(centered_indices(N))
    row = np.exp(2j * math.pi * p0 * q / N) / math.sqrt(N)
    return np.broadcast_to(row, (batch, N)).copy()


def _echo_batch(
    prop: _Propagator, sigma: float, steps: int, seed: int, p0: int, indices: range
) -> np.ndarray:
    N = prop.params.N
    B = len(indices)
    fwd = np.stack([NoisePlan(sigma, seed, r, "forward").draws(steps) for r in indices])
    bwd = np.stack([NoisePlan(sigma, seed, r, "backward").draws(steps) for r in indices])
    phi = _initial_position_batch(N, p0, B)
    chi = phi.copy()
    f = np.empty((B, steps + 1))
    f[:, 0] = 1.0
    for t in range(steps):
        phi = prop.step(phi, fwd[:, t])
        chi = prop.step(chi, bwd[:, t])
        overlap = np.einsum("ij,ij->i", chi.conj(), phi)
        f[:, t + 1] = overlap.real**2 + overlap.imag**2
    return np.clip(f, 0.0, 1.0)


def echo_realizations(
    params: MapParams,
    sigma: float,
    steps: int,
    realizations: int,
    master_seed: int = 0,
    p0: int = 1,
    batch_size: int = 256,
    workers: int = 1,
) -> np.ndarray:
    """Per-realization echo fidelities, shape ``(realizations, steps + 1)``.

    Realization ``r`` evolves ``|p0>`` along two branches with
    independent kick noise and records ``|<chi(t)|phi(t)>|^2``, which
    equals ``|<psi| U_B^-t U_A^t |psi>|^2``.  Rows come back in
    realization order whatever the worker count.
    """
    if steps < 1 or realizations < 1:
        raise ValueError("need steps >= 1 and realizations >= 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        # both branches see the same noiseless propagator
        return np.ones((realizations, steps + 1))
    prop = _Propagator(params)
    chunks = [
        range(lo, min(lo + batch_size, realizations))
        for lo in range(0, realizations, batch_size)
    ]

    def run(idx: range) -> np.ndarray:
        return _echo_batch(prop, sigma, steps, master_seed, p0, idx)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts, axis=0)


def echo_fidelity_trace(
    params: MapParams,
    sigma: float,
    steps: int,
    realizations: int,
    master_seed: int = 0,
    p0: int = 1,
    batch_size: int = 256,
    workers: int = 1,
) -> FidelityTrace:
    """Realization-averaged two-way Loschmidt echo ``f(t)`` for ``t = 0..steps``."""
    f = echo_realizations(
        params, sigma, steps, realizations, master_seed, p0, batch_size, workers
    )
    # np.mean over axis 0 uses a fixed pairwise order
    mean = f.mean(axis=0)
    if realizations > 1:
        stderr = f.std(axis=0, ddof=1) / math.sqrt(realizations)
    else:
        stderr = np.zeros(steps + 1)
    mean[0] = 1.0
    return FidelityTrace(
        t=np.arange(steps + 1),
        f_mean=mean,
        f_stderr=stderr,
        realizations=realizations,
        params=params,
        sigma=float(sigma),
        master_seed=master_seed,
        p0=p0,
    )


def evolve(
    state: QuantumState, params: MapParams, zetas, output_basis: Basis = "position"
) -> QuantumState:
    """Apply ``len(zetas)`` noisy periods."""
    for z in zetas:
        state = qsm_step(state, params, float(z), output_basis)
    return state
