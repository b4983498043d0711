"""Command-line interface: run presets, quick invariant checks, oracle values."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .config import PRESETS, parse_config
from .errors import MuskatLabError


def _cmd_run(args) -> int:
    from .presets import run_preset

    cfg = parse_config(args.config)
    if args.preset:
        cfg = dataclasses.replace(cfg, preset=args.preset)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return run_preset(cfg, args.out, threads=args.threads)


def _cmd_check(args) -> int:
    """Quick invariant battery; one pass/fail line per check."""
    del args
    from .geometry import DomainGeometry, FlatDepth, build_sigma_map, coefficients_from_map
    from .dn import dn_apply
    from .paradiff import (
        DEFAULT_CUTOFFS,
        apply_paradiff,
        bony_remainder,
        symbol_from_function,
        symbols_a_a_upper,
    )
    from .spectral import SpectralFunction, TorusGrid, l2_norm, multiply, sobolev_norm

    checks = []
    grid = TorusGrid(64)

    u = SpectralFunction.from_modes(grid, {3: 1.0, 5: 0.2})
    checks.append(("spectral round-trip", u.roundtrip_error() <= 1e-12))
    checks.append(
        ("parseval", abs(sobolev_norm(u, 0) ** 2 - grid.period * np.mean(u.values**2) * 1.0)
         <= 1e-10 * sobolev_norm(u, 0) ** 2)
    )

    eta = SpectralFunction.from_modes(grid, {1: 0.15})
    geom = DomainGeometry(bottom=FlatDepth(1.0), h=0.4)
    coeffs = coefficients_from_map(build_sigma_map(eta, geom, 24))
    checks.append(("det A == 1", float(np.max(np.abs(coeffs.det_a() - 1.0))) <= 1e-10))

    sa, sA = symbols_a_a_upper(coeffs, 12)
    xi = 5.0
    ids = np.max(np.abs(sa.eval(xi) + sA.eval(xi) + 1j * coeffs.beta[12] * xi))
    idp = np.max(np.abs(sa.eval(xi) * sA.eval(xi) + coeffs.alpha[12] * xi**2))
    checks.append(("factorization identities", bool(ids <= 1e-10 and idp <= 1e-10)))

    f = SpectralFunction.from_modes(grid, {2: 1.0})
    out = dn_apply(SpectralFunction.zero(grid), f, geom, m=32)
    target = 2.0 * np.tanh(2.0)
    rel = l2_norm(out.g - target * f) / l2_norm(target * f)
    checks.append(("flat DN oracle (rel<=2e-3)", rel <= 2e-3))

    out_eta = dn_apply(eta, eta, geom, m=32)
    checks.append(("one-phase B < 1", float(np.max(out_eta.b_field.values)) < 1.0))

    a = SpectralFunction.from_modes(grid, {1: 0.7})
    r = bony_remainder(a, u, DEFAULT_CUTOFFS)
    lhs = multiply(a, u)
    rhs = (
        apply_paradiff(symbol_from_function(a), u)
        + apply_paradiff(symbol_from_function(u), a)
        + r
    )
    checks.append(("bony identity", l2_norm(lhs - rhs) <= 1e-12))

    failed = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += 0 if ok else 1
    return 1 if failed else 0


_ORACLES = {}


def _oracle(name):
    def deco(fn):
        _ORACLES[name] = fn
        return fn

    return deco


@_oracle("flat_dn")
def _oracle_flat_dn(args):
    """DN multiplier of a flat interface: |k| or |k| tanh(depth |k|)."""
    from .dn import flat_dn_multiplier

    return float(flat_dn_multiplier(args.k, args.depth))


@_oracle("one_phase_rate")
def _oracle_one_rate(args):
    """Linearized one-phase decay rate kappa * flat_dn(k)."""
    from .dn import flat_dn_multiplier

    return float(args.kappa * flat_dn_multiplier(args.k, args.depth))


@_oracle("two_phase_rate")
def _oracle_two_rate(args):
    """Linearized two-phase decay rate [rho] m- m+ / (mu- m+ + mu+ m-)."""
    from .dn import flat_dn_multiplier

    m_lo = flat_dn_multiplier(args.k, args.depth)
    m_up = flat_dn_multiplier(args.k, args.top_depth)
    jump = args.rho_minus - args.rho_plus
    return float(jump * m_lo * m_up / (args.mu_minus * m_up + args.mu_plus * m_lo))


@_oracle("sobolev_cos")
def _oracle_sobolev(args):
    """H^s norm of cos(kx) on the default torus: sqrt(pi (1+k^2)^s)."""
    return float(np.sqrt(np.pi * (1.0 + args.k**2) ** args.s))


@_oracle("paper_map_flat")
def _oracle_paper_map(args):
    """d(rho)/dz of the near-surface map at eta = 0 (equals h)."""
    return float(args.h)


def _cmd_oracle(args) -> int:
    fn = _ORACLES.get(args.name)
    if fn is None:
        print(f"unknown oracle {args.name!r}; available: {', '.join(sorted(_ORACLES))}", file=sys.stderr)
        return 1
    value = fn(args)
    print(f"{value:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="muskatlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment preset from a config file")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--config", dest="config_flag", help=argparse.SUPPRESS)
    p_run.add_argument("--out", default="runs/latest", help="output directory")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads for ladders")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--preset", choices=PRESETS, default=None, help="override the config preset")
    p_run.set_defaults(fn=_cmd_run)

    p_check = sub.add_parser("check", help="run the quick invariant suite")
    p_check.set_defaults(fn=_cmd_check)

    p_or = sub.add_parser("oracle", help="print a closed-form oracle value")
    p_or.add_argument("name", help=f"one of: {', '.join(sorted(_ORACLES))}")
    p_or.add_argument("-k", type=float, default=1.0)
    p_or.add_argument("-s", type=float, default=0.0)
    p_or.add_argument("--depth", type=lambda v: None if v == "inf" else float(v), default=None)
    p_or.add_argument("--top-depth", dest="top_depth", type=lambda v: None if v == "inf" else float(v), default=None)
    p_or.add_argument("--kappa", type=float, default=1.0)
    p_or.add_argument("--mu-minus", dest="mu_minus", type=float, default=1.0)
    p_or.add_argument("--mu-plus", dest="mu_plus", type=float, default=1.0)
    p_or.add_argument("--rho-minus", dest="rho_minus", type=float, default=2.0)
    p_or.add_argument("--rho-plus", dest="rho_plus", type=float, default=1.0)
    p_or.add_argument("--h", type=float, default=0.2)
    p_or.set_defaults(fn=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MuskatLabError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("violations", "residual_history", "min_gap", "min_rt"):
            val = getattr(exc, attr, None)
            if val is not None:
                record[attr] = val
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
