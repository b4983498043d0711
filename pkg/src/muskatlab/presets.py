"""Experiment presets: batch runs producing NDJSON monitors, CSV summaries,
SVG plots and a manifest, deterministic for a given config and seed."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .dn import DEFAULT_CG_TOL, dn_apply, flat_dn_multiplier
from .errors import MuskatLabError
from .evolution import EvolutionConfig, run_simulation
from .geometry import SURFACE_RESOLUTION, DomainGeometry, Empty, FlatDepth
from .paradiff import block_ratios, paralinearize_dn
from .spectral import SpectralFunction, TorusGrid, l2_norm, scale_state
from .svgplot import line_plot
from .twophase import TwoPhaseConfig, rayleigh_taylor_bulk, solve_interface_potentials

TOLERANCES = {
    "cg_tol_elliptic": DEFAULT_CG_TOL,
    "krylov_tol_two_phase": 1e-9,
    "dealias_rule": 2.0 / 3.0,
    "surface_resolution": SURFACE_RESOLUTION,
    "cfl_constant": 0.5,
}


# ---------------------------------------------------------------------------
# shared plumbing

def geometry_from(cfg: ExperimentConfig) -> DomainGeometry:
    bottom = Empty() if np.isinf(cfg.depth) else FlatDepth(cfg.depth)
    top = Empty() if np.isinf(cfg.top_depth) else FlatDepth(cfg.top_depth)
    return DomainGeometry(bottom=bottom, top=top, h=cfg.h)


def two_phase_from(cfg: ExperimentConfig) -> TwoPhaseConfig:
    return TwoPhaseConfig(
        mu_plus=cfg.mu_plus,
        mu_minus=cfg.mu_minus,
        rho_plus=cfg.rho_plus,
        rho_minus=cfg.rho_minus,
        geometry=geometry_from(cfg),
    )


def initial_state(cfg: ExperimentConfig, grid: TorusGrid) -> SpectralFunction:
    if cfg.initial_file:
        rows = np.loadtxt(cfg.initial_file, delimiter=",", skiprows=1)
        c = np.zeros(grid.n, dtype=complex)
        for k, re, im in np.atleast_2d(rows):
            c[int(k) % grid.n] = re + 1j * im
        return SpectralFunction.from_coefficients(grid, c)
    return SpectralFunction.from_modes(grid, dict(cfg.modes))


def evo_config(cfg: ExperimentConfig, **overrides) -> EvolutionConfig:
    base = dict(
        kappa=cfg.kappa,
        dt=cfg.dt,
        t_end=cfg.t_end,
        scheme=cfg.scheme,
        epsilon=cfg.epsilon,
        monitor_every=cfg.monitor_every,
        hs_order=cfg.hs_order,
        z_levels=cfg.z_levels,
    )
    base.update(overrides)
    return EvolutionConfig(**base)


def two_phase_rate(cfg: ExperimentConfig, k: float) -> float:
    """Linearized two-phase decay rate [rho] m- m+ / (mu- m+ + mu+ m-)."""
    m_lo = flat_dn_multiplier(k, None if np.isinf(cfg.depth) else cfg.depth)
    m_up = flat_dn_multiplier(k, None if np.isinf(cfg.top_depth) else cfg.top_depth)
    jump = cfg.rho_minus - cfg.rho_plus
    return float(jump * m_lo * m_up / (cfg.mu_minus * m_up + cfg.mu_plus * m_lo))


def one_phase_rate(cfg: ExperimentConfig, k: float) -> float:
    depth = None if np.isinf(cfg.depth) else cfg.depth
    return float(cfg.kappa * flat_dn_multiplier(k, depth))


def measure_decay_rate(
    cfg: ExperimentConfig, grid: TorusGrid, k: int, amplitude: float = 1e-3
):
    """Fit the modal decay rate of a small-amplitude run; returns (rate, theory, records)."""
    eta0 = SpectralFunction.from_modes(grid, {k: amplitude})
    if cfg.phase == "one":
        theory = one_phase_rate(cfg, k)
    else:
        theory = two_phase_rate(cfg, k)
    horizon = 0.5 / max(theory, 1e-12)
    # semi-implicit rate bias is theory*dt/2; keep it well under the 1% target
    n_steps = max(24, int(np.ceil(horizon * theory / 0.004)))
    dt = horizon / n_steps
    run_cfg = evo_config(cfg, dt=dt, t_end=horizon, monitor_every=max(1, n_steps // 8))
    if cfg.phase == "one":
        records, final, _ = run_simulation(eta0, run_cfg, geom=geometry_from(cfg))
    else:
        records, final, _ = run_simulation(eta0, run_cfg, two_phase=two_phase_from(cfg))
    amp0 = abs(eta0.coefficients[k])
    amp1 = abs(final.coefficients[k])
    rate = -np.log(amp1 / amp0) / records[-1].t
    return float(rate), theory, records


# output writers -------------------------------------------------------------

def _write_csv(path, header, rows):
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.17g}"
        return str(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _write_ndjson(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _write_manifest(out_dir, cfg: ExperimentConfig, extra=None):
    manifest = {
        "preset": cfg.preset,
        "seed": cfg.seed,
        "config_sha256": cfg.sha256(),
        "package_version": __version__,
        "tolerances": dict(TOLERANCES),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _monitor_dicts(records, label):
    return [{**r.to_json(), "run": label} for r in records]


# ---------------------------------------------------------------------------
# presets

def _preset_dispersion(cfg, out_dir, threads):
    grid = TorusGrid(cfg.resolutions[-1])
    rows = []
    monitors = []
    curves = []
    for k in (1, 2, 3):
        rate, theory, records = measure_decay_rate(cfg, grid, k)
        rows.append((cfg.phase, k, rate, theory, rate / theory))
        monitors.extend(_monitor_dicts(records, f"k={k}"))
        ts = [r.t for r in records]
        curves.append((ts, [max(r.l2_norm, 1e-300) for r in records], f"k={k}"))
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["phase", "mode", "rate_measured", "rate_theory", "ratio"],
        rows,
    )
    _write_ndjson(os.path.join(out_dir, "monitors.ndjson"), monitors)
    line_plot(
        os.path.join(out_dir, "plots", "decay.svg"),
        curves,
        xlabel="t",
        ylabel="L2 norm",
        title="modal decay",
        logy=True,
    )
    return rows


def _preset_scaling(cfg, out_dir, threads):
    lam = 2
    grid = TorusGrid(cfg.resolutions[-1])
    geom = geometry_from(cfg)
    eta_a = initial_state(cfg, grid)
    eta_b = scale_state(eta_a, lam)
    n_checks = 5
    t_total = cfg.t_end
    seg = t_total / n_checks
    dt_a = cfg.dt
    rows = []
    monitors = []
    state_a, state_b = eta_a, eta_b
    t = 0.0
    for i in range(n_checks):
        cfg_a = evo_config(cfg, dt=dt_a, t_end=lam * seg, monitor_every=10**9)
        cfg_b = evo_config(cfg, dt=dt_a / lam, t_end=seg, monitor_every=10**9)
        recs_a, state_a, _ = run_simulation(state_a, cfg_a, geom=geom)
        recs_b, state_b, _ = run_simulation(state_b, cfg_b, geom=geom)
        t += seg
        target = scale_state(state_a, lam, drop_tol=1e-6)
        rel = l2_norm(state_b - target) / l2_norm(target)
        rows.append((t, rel))
        monitors.extend(_monitor_dicts(recs_a, f"base[{i}]"))
        monitors.extend(_monitor_dicts(recs_b, f"scaled[{i}]"))
    _write_csv(os.path.join(out_dir, "summary.csv"), ["t", "rel_l2_discrepancy"], rows)
    _write_ndjson(os.path.join(out_dir, "monitors.ndjson"), monitors)
    line_plot(
        os.path.join(out_dir, "plots", "scaling.svg"),
        [([r[0] for r in rows], [max(r[1], 1e-300) for r in rows], "discrepancy")],
        xlabel="t",
        ylabel="relative L2 discrepancy",
        title=f"scaling equivariance (lambda={lam})",
        logy=True,
    )
    return rows


def dn_error_ladder(n, ms, depth, ks, tol=DEFAULT_CG_TOL, threads=1):
    """Relative flat-oracle errors over a z-refinement ladder.

    Returns (rows, certificates): rows are (depth_label, k, m, rel_err).
    """
    grid = TorusGrid(n)
    eta0 = SpectralFunction.zero(grid)
    geom = DomainGeometry(
        bottom=Empty() if depth is None else FlatDepth(depth), h=min(0.5, (depth or 1.0) / 2)
    )
    label = "inf" if depth is None else f"{depth:g}"

    def point(args):
        m, k = args
        f = SpectralFunction.from_modes(grid, {k: 1.0})
        out = dn_apply(eta0, f, geom, m=m, tol=tol)
        target = SpectralFunction.from_coefficients(
            grid, f.coefficients * flat_dn_multiplier(grid.wavenumbers, depth)
        )
        rel = l2_norm(out.g - target) / l2_norm(target)
        cert = {"resolution": [n, m], "residual": out.residual, "iterations": out.iterations}
        return (label, k, m, rel), cert

    points = [(m, k) for m in ms for k in ks]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(point, points))
    else:
        results = [point(p) for p in points]
    rows = sorted(r for r, _ in results)
    certs = [c for _, c in results]
    return rows, certs


def fit_order(ms, errs):
    """Least-squares convergence order in the z spacing 1/(m-1)."""
    hs = [1.0 / (m - 1) for m in ms]
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def _preset_convergence(cfg, out_dir, threads):
    n = cfg.resolutions[-1]
    ms = (max(16, cfg.z_levels // 2), cfg.z_levels, cfg.z_levels * 2)
    ks = (1, 2, 3, 5, 8)
    all_rows = []
    certs = []
    slope_rows = []
    for depth in (None, 1.0):
        rows, cs = dn_error_ladder(n, ms, depth, ks, threads=threads)
        all_rows.extend(rows)
        certs.extend(cs)
        label = "inf" if depth is None else f"{depth:g}"
        for k in ks:
            errs = [r[3] for r in rows if r[1] == k]
            slope_rows.append((label, k, fit_order(ms, errs)))
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["depth", "mode", "z_levels", "rel_error"],
        all_rows,
    )
    _write_csv(
        os.path.join(out_dir, "slopes.csv"), ["depth", "mode", "fitted_order"], slope_rows
    )
    _write_ndjson(os.path.join(out_dir, "monitors.ndjson"), certs)
    series = []
    for depth_label in ("inf", "1"):
        for k in (1, 8):
            pts = [(r[2], r[3]) for r in all_rows if r[0] == depth_label and r[1] == k]
            if pts:
                series.append(
                    ([1.0 / (m - 1) for m, _ in pts], [e for _, e in pts], f"{depth_label},k={k}")
                )
    line_plot(
        os.path.join(out_dir, "plots", "convergence.svg"),
        series,
        xlabel="z spacing",
        ylabel="relative error",
        title="flat-oracle convergence",
        logx=True,
        logy=True,
    )
    return slope_rows


def rough_interface(grid: TorusGrid, rng, amplitude=0.5, decay=2.5, k_hi=None):
    """Random interface with power-law spectral decay (H^s-type data)."""
    k_hi = k_hi or int(grid.n / 3)
    c = np.zeros(grid.n, dtype=complex)
    for k in range(1, k_hi + 1):
        phase = np.exp(2j * np.pi * rng.random())
        c[k] = 0.5 * amplitude * k ** (-decay) * phase
        c[-k % grid.n] = np.conj(c[k])
    return SpectralFunction.from_coefficients(grid, c)


def _preset_paralin(cfg, out_dir, threads):
    n = cfg.resolutions[-1]
    grid = TorusGrid(n)
    geom = DomainGeometry(bottom=Empty(), h=cfg.h)
    rows = []

    # flat case: the residual reduces to the DN solve error against the oracle
    f = SpectralFunction.from_modes(grid, {3: 1.0})
    eta0 = SpectralFunction.zero(grid)
    main, resid, out = paralinearize_dn(eta0, f, geom, m=cfg.z_levels)
    oracle = SpectralFunction.from_coefficients(
        grid, f.coefficients * flat_dn_multiplier(grid.wavenumbers, None)
    )
    dn_err = l2_norm(out.g - oracle) + DEFAULT_CG_TOL * l2_norm(f)
    rows.append(("flat_residual", l2_norm(resid)))
    rows.append(("flat_dn_error", dn_err))
    rows.append(("flat_ratio", l2_norm(resid) / dn_err))

    # amplitude ladder (multi-mode data; a single cosine has an exact
    # quadratic cancellation at infinite depth)
    amps = (1e-2, 1e-3, 1e-4)
    errs = []
    for a in amps:
        eta = SpectralFunction.from_modes(grid, {1: a, 2: a})
        _, resid, _ = paralinearize_dn(eta, eta, geom, m=cfg.z_levels, tol=1e-11)
        errs.append(l2_norm(resid))
        rows.append((f"residual_a={a:g}", errs[-1]))
    slope = float(np.polyfit(np.log(amps), np.log(errs), 1)[0])
    rows.append(("amplitude_slope", slope))

    # dyadic block ratios on power-law data
    rng = np.random.default_rng(cfg.seed)
    eta = rough_interface(grid, rng)
    _, resid, out = paralinearize_dn(eta, eta, geom, m=cfg.z_levels, tol=1e-11)
    blocks = block_ratios(resid, out.g)
    rows.append(("max_block_ratio", max(r for _, _, _, r in blocks)))

    _write_csv(os.path.join(out_dir, "summary.csv"), ["quantity", "value"], rows)
    _write_csv(
        os.path.join(out_dir, "blocks.csv"),
        ["j", "norm_residual_block", "norm_g_block", "ratio"],
        blocks,
    )
    _write_ndjson(os.path.join(out_dir, "monitors.ndjson"), [out.certificate([n, cfg.z_levels])])
    line_plot(
        os.path.join(out_dir, "plots", "amplitude.svg"),
        [(list(amps), errs, "residual")],
        xlabel="amplitude",
        ylabel="L2 residual",
        title=f"paralinearization residual (slope {slope:.2f})",
        logx=True,
        logy=True,
    )
    line_plot(
        os.path.join(out_dir, "plots", "blocks.svg"),
        [([b[0] for b in blocks], [b[3] for b in blocks], "r_j")],
        xlabel="dyadic block j",
        ylabel="ratio",
        title="half-derivative smoothing proxy",
    )
    return rows


def rt_mismatch_ladder(cfg: ExperimentConfig, n: int, ms, threads=1):
    """sup |RT_bulk - RT_darcy| (and the literal trace-route gap) per z level count."""
    grid = TorusGrid(n)
    eta = initial_state(cfg, grid)
    cfg2p = two_phase_from(cfg)

    def point(m):
        sol = solve_interface_potentials(eta, cfg2p, m=m, tol=TOLERANCES["krylov_tol_two_phase"])
        bulk = rayleigh_taylor_bulk(eta, sol, cfg2p)
        diff_bulk = float(np.max(np.abs(bulk.values - sol.rt_via_darcy.values)))
        diff_trace = float(np.max(np.abs(sol.rt_via_B.values - sol.rt_via_darcy.values)))
        return (m, diff_bulk, diff_trace, sol.iterations, sol.residual)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = sorted(ex.map(point, ms))
    else:
        rows = sorted(point(m) for m in ms)
    return rows


def _preset_rt(cfg, out_dir, threads):
    if cfg.phase != "two":
        cfg = dataclasses.replace(cfg, phase="two")
    n = cfg.resolutions[-1]
    ms = (max(16, cfg.z_levels // 2), cfg.z_levels, cfg.z_levels * 2)
    rows = rt_mismatch_ladder(cfg, n, ms, threads=threads)
    order = fit_order([r[0] for r in rows], [max(r[1], 1e-300) for r in rows])
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["z_levels", "sup_mismatch_bulk", "sup_mismatch_trace", "iterations", "residual"],
        rows,
    )
    _write_csv(os.path.join(out_dir, "slopes.csv"), ["route", "fitted_order"], [("bulk", order)])
    _write_ndjson(
        os.path.join(out_dir, "monitors.ndjson"),
        [{"z_levels": r[0], "iterations": r[3], "residual": r[4]} for r in rows],
    )
    line_plot(
        os.path.join(out_dir, "plots", "rt_crosscheck.svg"),
        [
            ([1.0 / (r[0] - 1) for r in rows], [r[1] for r in rows], "bulk route"),
            ([1.0 / (r[0] - 1) for r in rows], [max(r[2], 1e-300) for r in rows], "trace route"),
        ],
        xlabel="z spacing",
        ylabel="sup RT mismatch",
        title="Rayleigh-Taylor cross-check",
        logx=True,
        logy=True,
    )
    return rows


def _preset_freeplay(cfg, out_dir, threads):
    grid = TorusGrid(cfg.resolutions[-1])
    eta0 = initial_state(cfg, grid)
    run_cfg = evo_config(cfg)
    if cfg.phase == "one":
        records, final, reason = run_simulation(eta0, run_cfg, geom=geometry_from(cfg))
    else:
        records, final, reason = run_simulation(eta0, run_cfg, two_phase=two_phase_from(cfg))
    _write_ndjson(os.path.join(out_dir, "monitors.ndjson"), _monitor_dicts(records, "freeplay"))
    rows = [
        ("halt_reason", reason),
        ("t_final", records[-1].t),
        ("l2_initial", records[0].l2_norm),
        ("l2_final", records[-1].l2_norm),
        ("dissipation_total", records[-1].dissipation_total),
    ]
    if records[-1].balance_defect is not None:
        rows.append(("balance_defect", records[-1].balance_defect))
    _write_csv(os.path.join(out_dir, "summary.csv"), ["quantity", "value"], rows)
    from .spectral import export_spectrum_csv

    export_spectrum_csv(final, os.path.join(out_dir, "final_spectrum.csv"))
    line_plot(
        os.path.join(out_dir, "plots", "norms.svg"),
        [
            ([r.t for r in records], [r.l2_norm for r in records], "L2"),
            ([r.t for r in records], [r.hs_norm for r in records], f"H^{cfg.hs_order:g}"),
        ],
        xlabel="t",
        ylabel="norm",
        title="freeplay run",
    )
    return rows


_PRESET_RUNNERS = {
    "dispersion": _preset_dispersion,
    "scaling": _preset_scaling,
    "convergence": _preset_convergence,
    "paralin_residual": _preset_paralin,
    "rt_crosscheck": _preset_rt,
    "freeplay": _preset_freeplay,
}


def run_preset(cfg: ExperimentConfig, out_dir: str, threads: int = 1) -> int:
    """Execute the preset, writing all artifacts under ``out_dir``; returns 0 on success."""
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    runner = _PRESET_RUNNERS.get(cfg.preset)
    if runner is None:
        raise MuskatLabError(f"unknown preset {cfg.preset!r}")
    runner(cfg, out_dir, threads)
    _write_manifest(out_dir, cfg)
    return 0
