"""Command-line experiment runner.

Each subcommand writes a CSV table plus a JSON sidecar holding the full
configuration, so any output can be regenerated with the same build.
Settings come from flags, optionally preceded by ``--config FILE`` with
``key = value`` lines; flags win over the file.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bounds, classical, decay, hardware, io
from .errors import DomainError, ProfileParseError
from .params import build_params
from .quantum import echo_fidelity_trace

EXIT_USAGE = 2
EXIT_FAILURE = 1


class UsageError(Exception):
    pass


def _int_range(text: str) -> list[int]:
    """``"6"``, ``"6-12"`` or ``"6,8,10"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _add_map_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=12, help="qubits; Hilbert space size N = 2**n")
    p.add_argument("--L", type=int, default=1, help="torus windings in the action direction")
    kick = p.add_mutually_exclusive_group()
    kick.add_argument("--K", type=float, help="classical kick strength")
    kick.add_argument("--k", type=float, help="quantum kick strength (K = k*hbar)")
    p.add_argument("--steps", type=int, default=12, help="map periods T")
    p.add_argument("--realizations", type=int, default=100, help="noise realizations R")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--p0", type=int, default=1, help="initial momentum eigenstate")
    p.add_argument("--workers", type=int, default=1, help="threads for realization batches")
    p.add_argument("--unfold", action="store_true", help="fit unfolded fidelities")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsawtooth", description="Noisy sawtooth-map experiments with CSV output."
    )
    parser.add_argument("--config", help="key = value file; flags override it")
    parser.add_argument("--selftest", action="store_true", help="run quick installation checks")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("fidelity", help="averaged echo fidelity trace")
    _add_map_flags(p)
    p.add_argument("--sigma", type=float, default=0.0, help="kick noise standard deviation")
    p.add_argument("--out", default="fidelity.csv")

    p = sub.add_parser("sigma-sweep", help="decay rates over a noise grid")
    _add_map_flags(p)
    p.add_argument("--sigma", required=False, help="comma-separated grid, e.g. 0.01,0.1,1")
    p.add_argument("--out", default="rates.csv")

    p = sub.add_parser("regime", help="Lyapunov-region bounds over qubit counts")
    p.add_argument("--n", default="3-14", help="range such as 3-14 or 6,8,10")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--method", choices=["exact", "series3"], default="exact")
    p.add_argument("--out", default="regime.csv")

    p = sub.add_parser("min-qubits", help="smallest n with a Lyapunov region")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--method", choices=["exact", "series3"], default="exact")
    p.add_argument("--n-max", type=int, default=20)

    p = sub.add_parser("hardware", help="required gate-error reductions")
    p.add_argument("--profile", action="append", help="INI profile path (repeatable); default: shipped")
    p.add_argument("--n", default="6-12")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--method", choices=["exact", "series3"], default="series3")
    p.add_argument("--rounding", choices=["full", "hand"], default="full")
    p.add_argument("--out", default="hardware.csv")

    p = sub.add_parser("classical", help="noisy classical diffusion over a (K, eps) grid")
    p.add_argument("--K", default="2", help="comma-separated kicks")
    p.add_argument("--eps", default="0,1", help="comma-separated noise strengths")
    p.add_argument("--size", type=int, default=100_000, help="ensemble members")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="diffusion.csv")
    return parser


def _params(args):
    if args.K is None and args.k is None:
        raise UsageError("give one of --K or --k")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        return build_params(args.n, args.L, K=args.K, k=args.k)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("selftest",)}


def cmd_fidelity(args) -> list[Path]:
    params = _params(args)
    trace = echo_fidelity_trace(
        params, args.sigma, args.steps, args.realizations, args.seed, args.p0, workers=args.workers
    )
    unf = decay.unfold(trace, params.N)
    rows = [
        {"t": int(t), "f_mean": f, "f_stderr": s, "f_unfolded": u}
        for t, f, s, u in zip(trace.t, trace.f_mean, trace.f_stderr, unf)
    ]
    cfg = _config(args) | {"derived": trace.metadata()}
    return list(io.write_table(args.out, "fidelity", rows, cfg))


def cmd_sigma_sweep(args) -> list[Path]:
    if args.sigma is None:
        raise UsageError("--sigma grid is required")
    raw = _float_list(args.sigma)
    grid = sorted(set(raw))
    if len(grid) < len(raw):
        warnings.warn(f"duplicate sigma values removed; {len(grid)} of {len(raw)} kept")
    if len(grid) < 2:
        raise UsageError("a sigma sweep needs at least two distinct grid points")
    if grid[0] <= 0:
        raise UsageError("sigma grid values must be positive")
    params = _params(args)
    lam = classical.lyapunov_exponent(params.K)
    rows = []
    C = None
    for sigma in grid:
        trace = echo_fidelity_trace(
            params, sigma, args.steps, args.realizations, args.seed, args.p0, workers=args.workers
        )
        rates = decay.decay_rates(trace, params.N, use_unfolded=args.unfold)
        if C is None:
            C = decay.golden_rule_coefficient(sigma, rates.gamma0)
        rows.append(
            {
                "sigma": sigma,
                "gamma0": rates.gamma0,
                "gamma_at_t2": rates.gamma_at_t2,
                "gamma_fit": rates.gamma_fit,
                "fit_points": int(rates.fit_window.size),
                "lambda_K": lam,
                "golden_rule": C * sigma**2,
                "underconstrained": bool(math.isnan(rates.gamma_fit)),
            }
        )
    cfg = _config(args) | {"sigma_grid": grid, "params": params.as_dict()}
    return list(io.write_table(args.out, "rates", rows, cfg))


def cmd_regime(args) -> list[Path]:
    ns = _int_range(args.n)
    if not ns:
        raise UsageError("empty n range")
    rows = []
    for n in ns:
        rb = bounds.lyapunov_region(n, args.L, args.method)
        rows.append(
            {
                "n": n,
                "K_loc": rb.K_loc,
                "lambda_loc_exact": rb.lambda_loc_exact,
                "lambda_loc_series3": rb.lambda_loc_series3,
                "lambda_star": rb.lambda_star,
                "gamma0_max_at_corner": rb.gamma0_max(rb.lambda_loc),
                "region_area": rb.area,
                "nonempty": rb.nonempty,
            }
        )
    return list(io.write_table(args.out, "regime", rows, _config(args)))


def cmd_min_qubits(args) -> list[Path]:
    result = bounds.min_qubits(args.L, args.method, args.n_max)
    print(result)
    return []


def cmd_hardware(args) -> list[Path]:
    ns = _int_range(args.n)
    if not ns:
        raise UsageError("empty n range")
    if args.profile:
        profiles = [hardware.load_profile(p) for p in args.profile]
    else:
        profiles = list(hardware.shipped_profiles().values())
    rows = [
        hardware.reduction_factor(n, prof, args.method, args.L, args.rounding).row()
        for prof in profiles
        for n in ns
    ]
    return list(io.write_table(args.out, "hardware", rows, _config(args)))


def cmd_classical(args) -> list[Path]:
    Ks, epss = _float_list(args.K), _float_list(args.eps)
    if not Ks or not epss:
        raise UsageError("empty K or eps grid")
    series_rows, rate_rows = [], []
    for K in Ks:
        for eps in epss:
            ds = classical.diffusion_series(K, eps, args.size, args.steps, args.seed)
            series_rows += [
                {"K": K, "eps": eps, "t": int(t), "msd_mean": m, "msd_stderr": s}
                for t, m, s in zip(ds.t, ds.msd_mean, ds.msd_stderr)
            ]
            # random-phase estimate, meaningful only for chaotic kicks
            theory = (math.pi**2 / 3) * (K * K + eps * eps) if K > 0 else float("nan")
            rate_rows.append(
                {"K": K, "eps": eps, "rate": ds.rate, "rate_stderr": ds.rate_stderr, "rate_theory": theory}
            )
    out = Path(args.out)
    written = list(io.write_table(out, "diffusion", series_rows, _config(args)))
    rates_path = out.with_name(out.stem + "_rates.csv")
    written += io.write_table(rates_path, "diffusion_rates", rate_rows, _config(args))
    return written


COMMANDS = {
    "fidelity": cmd_fidelity,
    "sigma-sweep": cmd_sigma_sweep,
    "regime": cmd_regime,
    "min-qubits": cmd_min_qubits,
    "hardware": cmd_hardware,
    "classical": cmd_classical,
}


def selftest() -> list[str]:
    """Fast sanity checks; returns a list of failure messages."""
    from .classical import ClassicalState, csm_step, lyapunov_exponent
    from .quantum import QuantumState, to_momentum, to_position

    failures = []

    def check(name, ok):
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)

    check("lyapunov(K=1) = ln((3+sqrt5)/2)", abs(lyapunov_exponent(1.0) - math.log((3 + 5**0.5) / 2)) < 1e-12)
    s = csm_step(ClassicalState(0.0, 0.0), 2.0)
    check("csm fixed point at origin", s == (0.0, 0.0))
    psi = QuantumState(np.random.default_rng(0).normal(size=16) + 0j, "position")
    back = to_position(to_momentum(psi))
    check("DFT round trip", np.allclose(back.amplitudes, psi.amplitudes))
    params = build_params(4, 1, K=0.5)
    tr = echo_fidelity_trace(params, 0.0, 3, 2)
    check("sigma = 0 echo is identically 1", np.all(tr.f_mean == 1.0))
    check("min qubits (L=1) = 6", bounds.min_qubits(1).n_min == 6)
    check("unfold(1/N) = 0", decay.unfold(np.array([1 / 8]), 8)[0] == 0.0)
    return failures


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # a config file supplies defaults for the subcommand's flags
    pre, _ = parser.parse_known_args(argv)
    try:
        if pre.config:
            cfg = read_config(pre.config)
            if pre.command:
                sub = parser._subparsers._group_actions[0].choices[pre.command]
                sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"qsawtooth: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qsawtooth: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.selftest:
        return EXIT_FAILURE if selftest() else 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    # values from a config file arrive as strings
    for action in parser._subparsers._group_actions[0].choices[args.command]._actions:
        val = getattr(args, action.dest, None)
        if not isinstance(val, str):
            continue
        if action.type in (int, float):
            setattr(args, action.dest, action.type(val))
        elif isinstance(action, argparse._StoreTrueAction):
            setattr(args, action.dest, val.lower() in ("1", "true", "yes", "on"))
    try:
        written = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qsawtooth {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ProfileParseError, ValueError) as exc:
        print(f"qsawtooth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
