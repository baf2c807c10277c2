"""Gate-error reductions needed to bring a device into the Lyapunov regime.

A device is described by a :class:`HardwareProfile` loaded from an INI
file.  The required reduction in two-qubit gate error at ``n`` qubits is
the product ``r = a * b * c`` of

* ``a``: measured ``Gamma_0`` over the largest admissible ``Gamma_0``;
* ``b``: growth of the two-qubit gate depth from the reference size;
* ``c``: growth of the per-gate crosstalk from the reference size;

each evaluated for a best-case and a worst-case hardware scenario.

Profile layout::

    [profile]
    name = ...
    n_ref = 3                 ; qubits in the baseline measurement
    gamma0_ref = 1.4          ; baseline Gamma_0 at n_ref
    eps_reported = 0.01       ; vendor two-qubit error
    gate_depth_ref = 29       ; two-qubit depth of the baseline circuit
    current_scenario = current

    [scenario.best]           ; also [scenario.worst], optional others
    depth_at_ref = 17         ; depth at n_ref with this connectivity
    depth_exponent = 2        ; gate count ~ n**depth_exponent
    parallel_fraction = 0.5   ; depth divided by parallel_fraction*n (0: serial)
    crosstalk_slope = 1       ; c(n) = (slope*n + offset) / ref
    crosstalk_offset = -2
    crosstalk_ref = 2
    gamma0_ref = ...          ; optional override of the baseline
    eps_effective = ...       ; optional: baseline = depth_at_ref * eps_effective
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Literal

from . import bounds
from .errors import DomainError, ProfileParseError

Rounding = Literal["full", "hand"]

SCENARIO_KEYS = (
    "depth_at_ref",
    "depth_exponent",
    "parallel_fraction",
    "crosstalk_slope",
    "crosstalk_offset",
    "crosstalk_ref",
)


def epsilon_from_gamma0(gamma0: float, G: float) -> float:
    """Per-gate error from ``f(1) = exp(-Gamma_0) = (1 - eps)^G``."""
    if G < 1:
        raise DomainError(f"gate depth must be >= 1, got {G}")
    if gamma0 < 0:
        raise DomainError(f"Gamma_0 must be >= 0, got {gamma0}")
    return -math.expm1(-gamma0 / G)


def epsilon_linearized(gamma0: float, G: float) -> float:
    return gamma0 / G


def infer_effective_error(f_pred: float, f_obs: float, gate_count: int, eps_reported: float) -> float:
    """Per-gate error that explains a drop from ``f_pred`` to ``f_obs``.

    Solves ``f_pred / f_obs = ((1 - eps_reported) / (1 - eps))**gate_count``.
    """
    if gate_count < 1:
        raise DomainError("gate_count must be >= 1")
    if not 0 < f_obs <= 1 or not 0 < f_pred <= 1:
        raise DomainError("fidelities must lie in (0, 1]")
    if f_obs > f_pred:
        raise DomainError(
            f"observed fidelity {f_obs} exceeds prediction {f_pred}; no excess error to infer"
        )
    return 1.0 - (1.0 - eps_reported) * (f_obs / f_pred) ** (1.0 / gate_count)


def round_sig(x: float, digits: int = 2) -> float:
    """Round half-up to ``digits`` significant figures."""
    if x == 0 or not math.isfinite(x):
        return x
    d = Decimal(repr(x))
    exp = d.adjusted() - digits + 1
    return float(d.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Scenario:
    name: str
    depth_at_ref: float
    depth_exponent: float
    parallel_fraction: float
    crosstalk_slope: float
    crosstalk_offset: float
    crosstalk_ref: float
    gamma0_ref: float | None = None
    eps_effective: float | None = None
    description: str = ""


@dataclass
class HardwareProfile:
    name: str
    n_ref: int
    gamma0_ref: float
    eps_reported: float
    gate_depth_ref: float
    scenarios: dict[str, Scenario] = field(default_factory=dict)
    current_scenario: str = "worst"
    source: str = ""

    def scenario(self, name: str) -> Scenario:
        try:
            return self.scenarios[name]
        except KeyError:
            raise ValueError(
                f"profile {self.name!r} has no scenario {name!r}; "
                f"known: {sorted(self.scenarios)}"
            ) from None

    def baseline_gamma0(self, scenario: str) -> float:
        """Measured (or inferred) ``Gamma_0`` at ``n_ref`` for this scenario."""
        s = self.scenario(scenario)
        if s.gamma0_ref is not None:
            return s.gamma0_ref
        if s.eps_effective is not None:
            return s.depth_at_ref * s.eps_effective
        return self.gamma0_ref

    def gate_depth(self, n: int, scenario: str) -> float:
        """Two-qubit gate depth of one map step at ``n`` qubits."""
        s = self.scenario(scenario)
        depth = s.depth_at_ref * (n / self.n_ref) ** s.depth_exponent
        if s.parallel_fraction > 0:
            depth /= s.parallel_fraction * n
        return depth

    def crosstalk(self, n: int, scenario: str) -> float:
        s = self.scenario(scenario)
        return (s.crosstalk_slope * n + s.crosstalk_offset) / s.crosstalk_ref


def _number(section: configparser.SectionProxy, key: str, where: str) -> float:
    try:
        raw = section[key]
    except KeyError:
        raise ProfileParseError(f"{where}: missing required key {key!r}", key) from None
    try:
        return float(raw)
    except ValueError:
        raise ProfileParseError(f"{where}: key {key!r} is not a number: {raw!r}", key) from None


def parse_profile(text: str, source: str = "<string>") -> HardwareProfile:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ProfileParseError(f"{source}: {exc}") from exc
    if not cp.has_section("profile"):
        raise ProfileParseError(f"{source}: missing [profile] section", "profile")
    sec = cp["profile"]
    where = f"{source} [profile]"
    if "name" not in sec:
        raise ProfileParseError(f"{where}: missing required key 'name'", "name")
    n_ref = _number(sec, "n_ref", where)
    if n_ref != int(n_ref) or n_ref < 1:
        raise ProfileParseError(f"{where}: n_ref must be a positive integer", "n_ref")
    prof = HardwareProfile(
        name=sec["name"],
        n_ref=int(n_ref),
        gamma0_ref=_number(sec, "gamma0_ref", where),
        eps_reported=_number(sec, "eps_reported", where),
        gate_depth_ref=_number(sec, "gate_depth_ref", where),
        current_scenario=sec.get("current_scenario", "worst"),
        source=source,
    )
    for sname in cp.sections():
        if not sname.startswith("scenario."):
            continue
        s = cp[sname]
        label = sname.split(".", 1)[1]
        swhere = f"{source} [{sname}]"
        values = {key: _number(s, key, swhere) for key in SCENARIO_KEYS}
        optional = {
            key: _number(s, key, swhere) for key in ("gamma0_ref", "eps_effective") if key in s
        }
        if values["crosstalk_ref"] == 0:
            raise ProfileParseError(f"{swhere}: crosstalk_ref must be nonzero", "crosstalk_ref")
        prof.scenarios[label] = Scenario(
            name=label, description=s.get("description", ""), **values, **optional
        )
    for required in ("best", "worst"):
        if required not in prof.scenarios:
            raise ProfileParseError(
                f"{source}: missing [scenario.{required}] section", f"scenario.{required}"
            )
    if prof.current_scenario not in prof.scenarios:
        raise ProfileParseError(
            f"{source}: current_scenario {prof.current_scenario!r} is not defined",
            "current_scenario",
        )
    return prof


def load_profile(path) -> HardwareProfile:
    path = Path(path)
    return parse_profile(path.read_text(), source=str(path))


def shipped_profiles() -> dict[str, HardwareProfile]:
    """Profiles bundled with the package, keyed by file stem."""
    out = {}
    for entry in sorted(resources.files("qsawtooth.profiles").iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".ini"):
            out[entry.name[:-4]] = parse_profile(entry.read_text(), source=entry.name)
    return out


def gamma0_max_at(n: int, L: int = 1, method: bounds.Method = "series3") -> float:
    """``Gamma_0`` ceiling at the localization threshold for ``n`` qubits."""
    N = 2**n
    return bounds.gamma0_max(N, bounds.lambda_loc(N, L, method))


def _check_size(n: int, L: int, method: bounds.Method) -> None:
    if not bounds.lyapunov_region(n, L, method).nonempty:
        raise DomainError(f"no Lyapunov region at n={n} (L={L}, {method}); reductions undefined")


def a_decay(
    n: int,
    profile: HardwareProfile,
    scenario: str = "best",
    method: bounds.Method = "series3",
    L: int = 1,
) -> float:
    """Required drop in ``Gamma_0``: baseline over the ceiling at ``n`` qubits."""
    _check_size(n, L, method)
    ceiling = gamma0_max_at(n, L, method)
    if ceiling <= 0:
        raise DomainError(f"Gamma_0 ceiling at n={n} is not positive ({ceiling:.3g})")
    return profile.baseline_gamma0(scenario) / ceiling


def b_depth(n: int, profile: HardwareProfile, scenario: str = "best") -> float:
    """Gate-depth growth from the measured baseline circuit to ``n`` qubits."""
    return profile.gate_depth(n, scenario) / profile.gate_depth_ref


def c_crosstalk(n: int, profile: HardwareProfile, scenario: str = "best") -> float:
    return profile.crosstalk(n, scenario)


@dataclass
class ReductionReport:
    profile: str
    n: int
    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]
    r: tuple[float, float]
    rounding: str = "full"

    def row(self) -> dict:
        return {
            "profile": self.profile,
            "n": self.n,
            "a_best": self.a[0],
            "a_worst": self.a[1],
            "b_best": self.b[0],
            "b_worst": self.b[1],
            "c_best": self.c[0],
            "c_worst": self.c[1],
            "r_best": self.r[0],
            "r_worst": self.r[1],
        }


def reduction_factor(
    n: int,
    profile: HardwareProfile,
    method: bounds.Method = "series3",
    L: int = 1,
    rounding: Rounding = "full",
) -> ReductionReport:
    """Best- and worst-case ``r = a * b * c`` at ``n`` qubits.

    ``rounding="hand"`` mimics hand arithmetic: the baseline is rounded
    to two significant figures, the ``Gamma_0`` ceiling to one, and each
    factor and product to two.  The default keeps full precision.
    """
    _check_size(n, L, method)
    ceiling = gamma0_max_at(n, L, method)
    out = {}
    for scen in ("best", "worst"):
        base = profile.baseline_gamma0(scen)
        b = b_depth(n, profile, scen)
        c = c_crosstalk(n, profile, scen)
        if rounding == "hand":
            a = round_sig(round_sig(base, 2) / round_sig(ceiling, 1), 2)
            b, c = round_sig(b, 2), round_sig(c, 2)
            r = round_sig(a * b * c, 2)
        elif rounding == "full":
            a = base / ceiling
            r = a * b * c
        else:
            raise ValueError(f"unknown rounding {rounding!r}")
        out[scen] = (a, b, c, r)
    best, worst = out["best"], out["worst"]
    return ReductionReport(
        profile=profile.name,
        n=n,
        a=(best[0], worst[0]),
        b=(best[1], worst[1]),
        c=(best[2], worst[2]),
        r=(best[3], worst[3]),
        rounding=rounding,
    )


def current_gamma0_estimate(n: int, profile: HardwareProfile, scenario: str | None = None) -> float:
    """Projected ``Gamma_0`` at ``n`` qubits on today's hardware.

    The measured baseline is returned unchanged at ``n_ref``; larger
    sizes scale it by the scenario's depth and crosstalk growth.
    """
    scenario = scenario or profile.current_scenario
    if n < profile.n_ref:
        raise DomainError(f"n={n} is below the reference size {profile.n_ref}")
    base = profile.baseline_gamma0(scenario)
    if n == profile.n_ref:
        return base
    return base * b_depth(n, profile, scenario) * c_crosstalk(n, profile, scenario)
