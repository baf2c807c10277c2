"""Closed-form bounds on observing Lyapunov-rate fidelity decay.

Three conditions in the (lambda, Gamma_0) plane must hold together:

1. the noise-driven rate exceeds the Lyapunov rate, ``Gamma_0 > lambda``;
2. the kick is above the localization threshold, ``lambda >= lambda_loc``;
3. enough fidelity is left for ``t_lyap`` Lyapunov steps after the early
   regime, ``Gamma_0 <= (ln(N/a_late) - t_lyap*lambda) / t_early``.

They cut out a triangle whose right corner sits at
``lambda* = ln(N/a_late) / (t_early + t_lyap)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .classical import lyapunov_exponent

Method = Literal["exact", "series3"]

A_LATE = 2.0
T_LYAP = 2.0
T_EARLY = 2.0


class BranchWarning(UserWarning):
    """Neither localization-threshold branch is self-consistent."""


def k_loc_quantum(N: int, L: int = 1) -> float:
    """Threshold on the quantum kick ``k`` below which the map localizes."""
    K = K_loc(N, L)
    return K * N / (2 * math.pi * L)


def K_loc(N: int, L: int = 1) -> float:
    """Classical kick below which dynamical localization sets in.

    The ``K > 1`` form ``4.16 L N^(-1/2)`` is kept when it is itself
    above 1; otherwise the cantori form ``3.12 L^(4/5) N^(-2/5)`` is used.
    """
    if N < 4 or L < 1:
        raise ValueError("need N >= 4 and L >= 1")
    strong = 4.16 * L / math.sqrt(N)
    if strong > 1:
        return strong
    weak = 3.12 * L**0.8 * N**-0.4
    if weak >= 1:
        warnings.warn(
            f"no self-consistent localization branch for N={N}, L={L}; "
            f"using the cantori value {weak:.4g}",
            BranchWarning,
            stacklevel=2,
        )
    return weak


def lambda_loc_series3(N: int, L: int = 1) -> float:
    """Third-order small-K expansion of ``lambda(K_loc)``."""
    return (
        1.77 * L**0.4 * N**-0.2
        - 0.23 * L**1.2 * N**-0.6
        + 2.43 * L**1.6 * N**-0.8
    )


def lambda_loc(N: int, L: int = 1, method: Method = "exact") -> float:
    """Lyapunov exponent at the localization threshold."""
    if method == "exact":
        return lyapunov_exponent(K_loc(N, L))
    if method == "series3":
        return lambda_loc_series3(N, L)
    raise ValueError(f"unknown method {method!r}")


def gamma0_max(
    N: int,
    lam,
    a_late: float = A_LATE,
    t_lyap: float = T_LYAP,
    t_early: float = T_EARLY,
):
    """Largest initial decay rate leaving ``t_lyap`` visible Lyapunov steps.

    Negative values mean the bound cannot be met at that ``lambda``.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    out = (math.log(N / a_late) - t_lyap * np.asarray(lam, dtype=float)) / t_early
    return float(out) if out.ndim == 0 else out


def lambda_star(N: int, a_late: float = A_LATE, t_lyap: float = T_LYAP, t_early: float = T_EARLY) -> float:
    """Where bound (3) meets ``Gamma_0 = lambda``."""
    return math.log(N / a_late) / (t_early + t_lyap)


@dataclass
class RegimeBounds:
    n: int
    L: int
    method: str
    K_loc: float
    lambda_loc_exact: float
    lambda_loc_series3: float
    a_late: float = A_LATE
    t_lyap: float = T_LYAP
    t_early: float = T_EARLY
    vertices: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def lambda_loc(self) -> float:
        return self.lambda_loc_exact if self.method == "exact" else self.lambda_loc_series3

    @property
    def lambda_star(self) -> float:
        return lambda_star(self.N, self.a_late, self.t_lyap, self.t_early)

    @property
    def nonempty(self) -> bool:
        return self.lambda_loc < self.lambda_star

    def gamma0_max(self, lam):
        return gamma0_max(self.N, lam, self.a_late, self.t_lyap, self.t_early)

    @property
    def area(self) -> float:
        if not self.nonempty:
            return 0.0
        height = self.gamma0_max(self.lambda_loc) - self.lambda_loc
        return 0.5 * height * (self.lambda_star - self.lambda_loc)

    def contains(self, lam, gamma0) -> np.ndarray | bool:
        """Conjunction of the three bounds; bound (1) is strict."""
        lam = np.asarray(lam, dtype=float)
        gamma0 = np.asarray(gamma0, dtype=float)
        inside = (gamma0 > lam) & (lam >= self.lambda_loc) & (gamma0 <= self.gamma0_max(lam))
        return bool(inside) if inside.ndim == 0 else inside


def lyapunov_region(
    n: int,
    L: int = 1,
    method: Method = "exact",
    a_late: float = A_LATE,
    t_lyap: float = T_LYAP,
    t_early: float = T_EARLY,
) -> RegimeBounds:
    """Triangle of (lambda, Gamma_0) where Lyapunov decay is observable."""
    if method not in ("exact", "series3"):
        raise ValueError(f"unknown method {method!r}")
    N = 2**n
    rb = RegimeBounds(
        n=n,
        L=L,
        method=method,
        K_loc=K_loc(N, L),
        lambda_loc_exact=lambda_loc(N, L, "exact"),
        lambda_loc_series3=lambda_loc_series3(N, L),
        a_late=a_late,
        t_lyap=t_lyap,
        t_early=t_early,
    )
    if rb.nonempty:
        lo, star = rb.lambda_loc, rb.lambda_star
        rb.vertices = [(lo, lo), (lo, rb.gamma0_max(lo)), (star, star)]
    return rb


@dataclass
class MinQubits:
    n_min: int | None
    table: dict[int, bool]

    def __str__(self) -> str:
        return str(self.n_min) if self.n_min is not None else "> %d" % max(self.table)


def min_qubits(L: int = 1, method: Method = "exact", n_max: int = 20) -> MinQubits:
    """Smallest qubit count (2 .. n_max) with a nonempty Lyapunov region."""
    table = {}
    n_min = None
    for n in range(2, n_max + 1):
        table[n] = lyapunov_region(n, L, method).nonempty
        if table[n] and n_min is None:
            n_min = n
    return MinQubits(n_min, table)
