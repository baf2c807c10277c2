"""Decay rates and localization observables extracted from simulations.

Traces may be passed as a :class:`~qsawtooth.quantum.FidelityTrace` or
as a plain sequence of fidelities indexed by step ``t = 0, 1, ...``.
Missing points are represented by ``nan`` and are skipped, never
imputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import diffusion_coefficient
from .errors import DelocalizedError, DomainError, UnderconstrainedFitError
from .params import MapParams
from .quantum import _initial_position_batch, _Propagator


def _values(trace) -> np.ndarray:
    return np.asarray(getattr(trace, "f_mean", trace), dtype=float)


def _log(f: np.ndarray) -> np.ndarray:
    out = np.full(f.shape, np.nan)
    ok = f > 0
    out[ok] = np.log(f[ok])
    return out


def initial_decay_rate(trace) -> float:
    """``Gamma_0 = -(ln f(1) - ln f(0))``."""
    f = _values(trace)
    if f.size < 2:
        raise ValueError("trace needs f(0) and f(1)")
    if not f[1] > 0:
        raise ValueError(
            "f(1) is zero: the one-step fidelity is below resolution; "
            "unfold the trace or average more realizations"
        )
    return float(-(math.log(f[1]) - math.log(f[0])))


def stepwise_rates(trace) -> np.ndarray:
    """``gamma(t) = -(ln f(t+1) - ln f(t))`` for ``t = 0 .. T-1``.

    Pairs touching a non-positive or missing fidelity give ``nan``.
    """
    return -np.diff(_log(_values(trace)))


def unfold(trace, N: int) -> np.ndarray:
    """Remove the uniform-mixing floor: ``f' = N/(N-1) (f - 1/N)``.

    Negative results are marked missing (``nan``).
    """
    if N < 2:
        raise ValueError("unfolding needs N >= 2")
    f = _values(trace)
    out = N / (N - 1) * (f - 1.0 / N)
    out[out < 0] = np.nan
    return out


def intermediate_window(trace, N: int, a_late: float = 2.0) -> np.ndarray:
    """Steps of the intermediate-time regime.

    The contiguous run ``t = 2, 3, ...`` over which ``f(t) > a_late/N``,
    stopping at the first point where the fidelity reaches the late-time
    threshold.  Always selected on the raw fidelity, so unfolding a
    trace never changes which steps qualify.
    """
    f = _values(trace)
    thresh = a_late / N
    window = []
    for t in range(2, f.size):
        if not f[t] > thresh:
            break
        window.append(t)
    return np.asarray(window, dtype=int)


@dataclass
class IntermediateFit:
    gamma: float
    t0: float
    window: np.ndarray
    residual: float
    unfolded: bool

    @property
    def points(self) -> int:
        return int(self.window.size)


def fit_intermediate_rate(trace, N: int, use_unfolded: bool = False) -> IntermediateFit:
    """Fit ``f(t) = exp(-gamma (t - t0))`` over the intermediate window.

    Ordinary least squares on ``ln f``.  With ``use_unfolded`` the
    unfolded values are fitted on the same window.  ``residual`` is the
    RMS deviation of ``ln f`` from the fitted line.
    """
    window = intermediate_window(trace, N)
    if window.size < 2:
        raise UnderconstrainedFitError(
            f"only {window.size} point(s) with t >= 2 and f > 2/N; the fit is underconstrained"
        )
    values = unfold(trace, N) if use_unfolded else _values(trace)
    y = _log(values[window])
    keep = np.isfinite(y)
    t, y = window[keep].astype(float), y[keep]
    if t.size < 2:
        raise UnderconstrainedFitError("fewer than two finite points in the window")
    slope, intercept = np.polyfit(t, y, 1)
    gamma = -float(slope)
    t0 = float(intercept / gamma) if gamma != 0 else float("nan")
    resid = y - (slope * t + intercept)
    return IntermediateFit(gamma, t0, window[keep], float(np.sqrt(np.mean(resid**2))), use_unfolded)


@dataclass
class DecayRates:
    gamma0: float
    gamma_stepwise: np.ndarray
    gamma_fit: float
    t0_fit: float
    fit_window: np.ndarray

    @property
    def gamma_at_t2(self) -> float:
        return float(self.gamma_stepwise[2]) if self.gamma_stepwise.size > 2 else float("nan")


def decay_rates(trace, N: int, use_unfolded: bool = False) -> DecayRates:
    """All rates of one trace; an underconstrained fit leaves ``gamma_fit`` as nan."""
    gamma0 = initial_decay_rate(trace)
    source = unfold(trace, N) if use_unfolded else trace
    steps = stepwise_rates(source)
    try:
        fit = fit_intermediate_rate(trace, N, use_unfolded)
        return DecayRates(gamma0, steps, fit.gamma, fit.t0, fit.window)
    except UnderconstrainedFitError:
        return DecayRates(gamma0, steps, float("nan"), float("nan"), np.array([], dtype=int))


def golden_rule_coefficient(sigma: float, gamma0: float) -> float:
    """``C`` in ``Gamma_0 = C sigma^2`` from a single small-noise point."""
    return gamma0 / sigma**2


@dataclass
class LocalizationEstimate:
    ell_theory: float
    ell_fit: float

    @property
    def tau_H(self) -> float:
        return self.ell_theory


def localization_length_theory(params: MapParams) -> float:
    """Heuristic localization length ``D_K / hbar^2`` in momentum units.

    Equivalent to ``(pi^2/3) k^2`` for ``K > 1`` and
    ``3.3 k^(5/2) (2 pi L / N)^(1/2)`` for ``0 < K < 1``.
    """
    if not params.K > 0:
        raise DomainError("localization length needs K > 0")
    return diffusion_coefficient(params.K) / params.hbar**2


def fit_localization_length(P, p0: int = 0, floor: float = 1e-6) -> float:
    """Fit ``P_p ~ exp(-2|p - p0|/ell) / ell`` to a centred distribution.

    Linear regression of ``ln P_p`` on ``|p - p0|`` over bins above
    ``floor``; ``ell = -2/slope``.  Raises :class:`DelocalizedError`
    when the slope is not negative.
    """
    P = np.asarray(P, dtype=float)
    N = P.size
    p = np.arange(-(N // 2), N - N // 2)
    d = np.abs(p - p0)
    keep = P > floor
    if keep.sum() < 2:
        raise ValueError("fewer than two bins above the floor")
    slope, _ = np.polyfit(d[keep], np.log(P[keep]), 1)
    if slope >= 0 or abs(slope) < 1e-12:
        raise DelocalizedError(f"profile is not decaying (slope {slope:.3g})", float(slope))
    return -2.0 / float(slope)


def time_averaged_profile(
    params: MapParams, start: int, stop: int, p0: int = 0
) -> np.ndarray:
    """Noiseless momentum distribution averaged over steps ``start..stop``."""
    if not 0 <= start <= stop:
        raise ValueError("need 0 <= start <= stop")
    prop = _Propagator(params)
    psi = _initial_position_batch(params.N, p0, 1)
    zero = np.zeros(1)
    acc = np.zeros(params.N)
    for t in range(1, stop + 1):
        psi = prop.step(psi, zero)
        if t >= start:
            acc += np.abs(np.fft.fft(psi[0], norm="ortho")) ** 2
    acc /= stop - start + 1
    return np.fft.fftshift(acc)


def localization_estimate(params: MapParams, p0: int = 0) -> LocalizationEstimate:
    """Compare the heuristic length to a fit of the profile over ``[2 ell, 4 ell]``."""
    ell = localization_length_theory(params)
    start = max(1, int(round(2 * ell)))
    stop = max(start, int(round(4 * ell)))
    P = time_averaged_profile(params, start, stop, p0)
    return LocalizationEstimate(ell, fit_localization_length(P, p0))
