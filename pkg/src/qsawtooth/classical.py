"""Classical sawtooth map: iteration, chaos metrics and noisy diffusion.

The map acts on an action ``J`` and an angle ``theta``::

    J'     = J + K * theta        (mod 2*pi*L on the torus)
    theta' = theta + J'           (mod 2*pi)

Both coordinates are wrapped into centred intervals ``[-P/2, P/2)``.  On
the cylinder only the angle is wrapped, so ``J`` is free to diffuse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .errors import DomainError

Manifold = Literal["torus", "cylinder"]

TWO_PI = 2.0 * math.pi

# members per independent random stream in an ensemble
BLOCK_SIZE = 8192


def wrap(x, period):
    """Map ``x`` into ``[-period/2, period/2)``."""
    y = x - period * np.floor(x / period + 0.5)
    # float rounding near the edges can land just outside the interval
    half = period / 2
    y = np.where(y < -half, y + period, y)
    y = np.where(y >= half, y - period, y)
    y = np.where(y < -half, -half, y)
    return float(y) if y.ndim == 0 else y


class ClassicalState(NamedTuple):
    J: float
    theta: float


def csm_step(
    state: ClassicalState,
    K: float,
    L: int = 1,
    noise_kick: float = 0.0,
    manifold: Manifold = "torus",
) -> ClassicalState:
    """Advance one period with kick ``K + noise_kick``."""
    J = state.J + (K + noise_kick) * state.theta
    if manifold == "torus":
        J = float(wrap(J, TWO_PI * L))
    elif manifold != "cylinder":
        raise ValueError(f"unknown manifold {manifold!r}")
    theta = float(wrap(state.theta + J, TWO_PI))
    return ClassicalState(J, theta)


def lyapunov_exponent(K):
    """Maximal Lyapunov exponent ``ln[(2 + K + sqrt(K^2 + 4K)) / 2]``.

    Accepts scalars or arrays; every entry must satisfy ``K > 0``.
    """
    K_arr = np.asarray(K, dtype=float)
    if np.any(~(K_arr > 0)):
        raise DomainError("the Lyapunov exponent is only defined here for K > 0")
    # log1p keeps full relative precision as K -> 0
    lam = np.log1p((K_arr + np.sqrt(K_arr * K_arr + 4.0 * K_arr)) / 2.0)
    return float(lam) if lam.ndim == 0 else lam


def diffusion_coefficient(K):
    """Chaotic diffusion rate of the action per step.

    ``(pi^2/3) K^2`` for ``K >= 1`` (random phase approximation) and
    ``3.3 K^(5/2)`` below, where cantori slow the transport.
    """
    K_arr = np.asarray(K, dtype=float)
    if np.any(~(K_arr > 0)):
        raise DomainError("the diffusion coefficient is only defined here for K > 0")
    D = np.where(K_arr >= 1.0, (math.pi**2 / 3.0) * K_arr**2, 3.3 * K_arr**2.5)
    return float(D) if D.ndim == 0 else D


@dataclass
class ChaosMetrics:
    lyapunov: float
    diffusion: float

    @classmethod
    def for_kick(cls, K: float) -> "ChaosMetrics":
        return cls(lyapunov_exponent(K), diffusion_coefficient(K))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


@dataclass
class ClassicalEnsemble:
    """Independent trajectories evolved together.

    Members are split into fixed blocks of :data:`BLOCK_SIZE`; block ``b``
    draws its initial angles and per-step kick noise from its own stream
    keyed by ``(rng_seed, b)``, so results do not depend on how blocks
    are scheduled.
    """

    J: np.ndarray
    theta: np.ndarray
    K: float
    L: int = 1
    manifold: Manifold = "cylinder"
    eps: float = 0.0
    rng_seed: int = 0
    _rngs: list = field(default_factory=list, repr=False)

    @classmethod
    def uniform_angles(
        cls,
        size: int,
        K: float,
        *,
        L: int = 1,
        manifold: Manifold = "cylinder",
        eps: float = 0.0,
        seed: int = 0,
    ) -> "ClassicalEnsemble":
        """``J = 0`` with angles uniform on ``[-pi, pi)``."""
        if size < 1:
            raise ValueError("ensemble needs at least one member")
        n_blocks = -(-size // BLOCK_SIZE)
        rngs = [_block_rng(seed, b) for b in range(n_blocks)]
        theta = np.concatenate(
            [
                rng.uniform(-math.pi, math.pi, min(BLOCK_SIZE, size - b * BLOCK_SIZE))
                for b, rng in enumerate(rngs)
            ]
        )
        theta = wrap(theta, TWO_PI)
        return cls(np.zeros(size), theta, K, L, manifold, eps, seed, rngs)

    def __len__(self) -> int:
        return self.J.size

    def _noise(self) -> np.ndarray:
        if self.eps == 0.0:
            return 0.0
        size = len(self)
        return self.eps * np.concatenate(
            [
                rng.standard_normal(min(BLOCK_SIZE, size - b * BLOCK_SIZE))
                for b, rng in enumerate(self._rngs)
            ]
        )

    def step(self) -> None:
        J = self.J + (self.K + self._noise()) * self.theta
        if self.manifold == "torus":
            J = wrap(J, TWO_PI * self.L)
        self.J = J
        self.theta = wrap(self.theta + J, TWO_PI)


@dataclass
class DiffusionSeries:
    t: np.ndarray
    msd_mean: np.ndarray
    msd_stderr: np.ndarray
    rate: float
    rate_stderr: float
    fit_window: tuple[int, int]


def diffusion_series(
    K: float,
    eps: float = 0.0,
    size: int = 100_000,
    steps: int = 100,
    seed: int = 0,
) -> DiffusionSeries:
    """Mean squared action displacement of a cylinder ensemble.

    The rate is the least-squares slope of ``<(J_t - J_0)^2>`` against
    ``t`` over ``t`` in ``[steps//2, steps]``; its standard error comes
    from regressing each member's squared displacement on the same
    window and taking the spread of the per-member slopes.
    """
    if size < 100:
        raise ValueError(f"ensemble of {size} members is too small (need >= 100)")
    if steps < 10:
        raise ValueError(f"need at least 10 steps, got {steps}")
    ens = ClassicalEnsemble.uniform_angles(size, K, eps=eps, seed=seed, manifold="cylinder")
    J0 = ens.J.copy()
    t = np.arange(steps + 1)
    lo = steps // 2
    tw = t[lo:]
    weights = (tw - tw.mean()) / np.sum((tw - tw.mean()) ** 2)
    msd = np.zeros(steps + 1)
    msd_se = np.zeros(steps + 1)
    member_slope = np.zeros(size)
    for i in range(1, steps + 1):
        ens.step()
        sq = (ens.J - J0) ** 2
        msd[i] = sq.mean()
        msd_se[i] = sq.std(ddof=1) / math.sqrt(size)
        if i >= lo:
            member_slope += weights[i - lo] * sq
    rate = float(member_slope.mean())
    rate_se = float(member_slope.std(ddof=1) / math.sqrt(size))
    return DiffusionSeries(t, msd, msd_se, rate, rate_se, (lo, steps))


def measure_diffusion(
    K: float,
    eps: float = 0.0,
    size: int = 100_000,
    steps: int = 100,
    seed: int = 0,
) -> float:
    """Measured action diffusion rate per step under kick noise ``eps``.

    For chaotic kicks this approaches ``(pi^2/3)(K^2 + eps^2)``.
    """
    return diffusion_series(K, eps, size, steps, seed).rate
