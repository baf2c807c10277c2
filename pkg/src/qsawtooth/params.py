"""Parameter tuple shared by the classical and quantum sawtooth maps.

The quantum map on ``n`` qubits has ``N = 2**n`` basis states and its
Planck constant is pinned to ``hbar = 2*pi*L/N`` so that the classical
and quantum periodicities match.  The classical kick ``K`` and the
quantum kick ``k`` are tied by ``K = k*hbar``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError

CAT_MAP_TOL = 1e-9


class CatMapWarning(UserWarning):
    """K/L is an integer: the kick phases are not pseudorandom."""


class EvenWindingWarning(UserWarning):
    """Even L lets L/N simplify, which weakens the chaotic dynamics."""


@dataclass(frozen=True)
class MapParams:
    n: int
    L: int
    K: float

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def hbar(self) -> float:
        return 2.0 * math.pi * self.L / self.N

    @property
    def k(self) -> float:
        return self.K / self.hbar

    @property
    def beta(self) -> float:
        return 2.0 * math.pi / self.N

    @property
    def cat_map(self) -> bool:
        ratio = self.K / self.L
        return abs(ratio - round(ratio)) < CAT_MAP_TOL

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "L": self.L,
            "hbar": self.hbar,
            "K": self.K,
            "k": self.k,
            "cat_map": self.cat_map,
        }


def build_params(
    n: int,
    L: int = 1,
    *,
    K: float | None = None,
    k: float | None = None,
    strict: bool = False,
) -> MapParams:
    """Build a consistent :class:`MapParams` from either kick strength.

    Exactly one of ``K`` (classical) or ``k`` (quantum) must be given;
    the other is derived through ``K = k * hbar``.  A cat-map parameter
    set only triggers :class:`CatMapWarning`.  An even ``L`` triggers
    :class:`EvenWindingWarning`, or a :class:`DomainError` when
    ``strict`` is set.
    """
    if (K is None) == (k is None):
        raise ValueError("give exactly one of K or k")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    if int(L) != L or L < 1:
        raise DomainError(f"L must be an integer >= 1, got {L!r}")
    n, L = int(n), int(L)
    hbar = 2.0 * math.pi * L / 2**n
    kick = float(K) if K is not None else float(k) * hbar
    if not kick > 0:
        raise DomainError(f"kick must be positive, got {K if K is not None else k!r}")
    if L % 2 == 0:
        msg = f"even L={L} reduces the pseudorandomness of the kick phases"
        if strict:
            raise DomainError(msg)
        warnings.warn(msg, EvenWindingWarning, stacklevel=2)
    params = MapParams(n=n, L=L, K=kick)
    if params.cat_map:
        warnings.warn(
            f"K/L = {kick / L:g} is an integer; this is a quantum cat map",
            CatMapWarning,
            stacklevel=2,
        )
    return params
