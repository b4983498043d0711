"""Time integration of the one- and two-phase interface equations.

One phase:  d(eta)/dt + kappa G(eta) eta = eps Lap eta,  kappa = rho-/mu-.
Two phase:  d(eta)/dt = -(1/mu-) G-(eta) f-  with f± from the trace system.

The default scheme is semi-implicit: the geometry is frozen at eta_n and the
(linear-in-data) DN operator acts on eta_{n+1}, giving an unconditionally
stable step eta_{n+1} = (I + dt K)^{-1} eta_n with K symmetric nonnegative;
the L^2 norm is then nonincreasing by construction.  An explicit RK4 path
with a CFL guard is provided for cross-scheme consistency checks.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .dn import DNOperator, flat_dn_multiplier, flat_depth_of
from .errors import CFLError, GeometryError, SolverError, StabilityLossError
from .geometry import DomainGeometry, Empty, FlatDepth, bottom_samples
from .krylov import pcg
from .spectral import SpectralFunction, dealias, derivative, l2_inner, l2_norm, sobolev_norm
from .twophase import TwoPhaseConfig, TwoPhaseOperators, TwoPhaseStepOperator, solve_interface_potentials

CFL_CONSTANT = 0.5


@dataclasses.dataclass(frozen=True)
class EvolutionConfig:
    """Time-integration parameters shared by both phases."""

    kappa: float = 1.0
    dt: float = 0.01
    t_end: float = 0.5
    scheme: str = "semi_implicit"
    epsilon: float = 0.0
    monitor_every: int = 1
    hs_order: float = 2.0
    z_levels: int = 48
    solver_tol: float = 1e-10
    inner_tol: float = 1e-11

    def __post_init__(self):
        if not (self.dt > 0.0 and self.t_end > 0.0):
            raise ValueError("dt and t_end must be positive")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if self.scheme not in ("semi_implicit", "rk4"):
            raise ValueError("scheme must be 'semi_implicit' or 'rk4'")
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")


@dataclasses.dataclass(frozen=True)
class MonitorRecord:
    """One diagnostics sample of a run."""

    t: float
    l2_norm: float
    hs_norm: float
    min_one_minus_b: float | None
    min_rt: float | None
    min_gap_bottom: float
    min_gap_top: float
    dissipation_increment: float
    dissipation_total: float
    solver_iterations: int
    solver_residual: float
    halt_reason: str | None = None
    balance_defect: float | None = None
    elapsed: float = 0.0

    def to_json(self) -> dict:
        rec = dataclasses.asdict(self)
        return {k: v for k, v in rec.items() if v is not None}


def _gap_bottom(eta: SpectralFunction, geom: DomainGeometry) -> float:
    if isinstance(geom.bottom, Empty):
        return np.inf
    return float(np.min(eta.values - bottom_samples(eta, geom)))


def _gap_top(eta: SpectralFunction, geom: DomainGeometry) -> float:
    top = geom.top
    if isinstance(top, Empty):
        return np.inf
    if isinstance(top, FlatDepth):
        return float(np.min(top.depth - eta.values))
    return float(np.min(top.boundary.values - eta.values))


def cfl_limit(grid, rate_coefficient: float, epsilon: float) -> float:
    """Largest stable explicit step, CFL_CONSTANT/(c k_max + eps k_max^2)."""
    kmax = grid.k_max
    return CFL_CONSTANT / (rate_coefficient * kmax + epsilon * kmax**2)


# ---------------------------------------------------------------------------
# one phase

def step_one_phase(
    eta_n: SpectralFunction,
    geom: DomainGeometry,
    cfg: EvolutionConfig,
    op: DNOperator | None = None,
):
    """Advance one step; returns (eta_next, info dict)."""
    if cfg.scheme == "rk4":
        return _step_one_phase_rk4(eta_n, geom, cfg)
    op = op or DNOperator(eta_n, geom, m=cfg.z_levels, tol=cfg.inner_tol)
    grid = eta_n.grid
    k = grid.wavenumbers
    flat = flat_dn_multiplier(k, None if isinstance(geom.bottom, Empty) else op.flat_depth)
    pre_mult = 1.0 / (1.0 + cfg.dt * cfg.kappa * flat + cfg.dt * cfg.epsilon * k**2)

    def apply_op(vals: np.ndarray) -> np.ndarray:
        w = SpectralFunction.from_values(grid, vals)
        g, _ = op.apply_g(w)
        out = w + (cfg.dt * cfg.kappa) * g
        if cfg.epsilon > 0.0:
            out = out + cfg.dt * cfg.epsilon * SpectralFunction.from_coefficients(
                grid, k**2 * w.coefficients
            )
        return out.values

    def apply_pre(vals: np.ndarray) -> np.ndarray:
        c = np.fft.fft(vals) * pre_mult
        return np.fft.ifft(c).real

    result = pcg(apply_op, eta_n.values, apply_m=apply_pre, tol=cfg.solver_tol, maxiter=500)
    eta_next = SpectralFunction.from_values(grid, result.x)
    # dt * (G eta_{n+1}, eta_{n+1}) from the scheme identity
    diff = eta_n - eta_next
    d_inc = (l2_inner(diff, eta_next) / cfg.kappa) - (
        cfg.dt * cfg.epsilon / cfg.kappa
    ) * l2_norm(derivative(eta_next)) ** 2
    info = {"iterations": result.iterations, "residual": result.relres, "dissipation": d_inc, "op": op}
    return eta_next, info


def _one_phase_rhs(eta, geom, cfg):
    op = DNOperator(eta, geom, m=cfg.z_levels, tol=cfg.inner_tol)
    g, _ = op.apply_g(eta)
    rhs = -cfg.kappa * g
    if cfg.epsilon > 0.0:
        k = eta.grid.wavenumbers
        rhs = rhs - cfg.epsilon * SpectralFunction.from_coefficients(
            eta.grid, k**2 * eta.coefficients
        )
    return rhs, op, g


def _step_one_phase_rk4(eta_n, geom, cfg):
    limit = cfl_limit(eta_n.grid, cfg.kappa, cfg.epsilon)
    if cfg.dt > limit:
        raise CFLError(f"explicit step dt={cfg.dt:.3e} exceeds the CFL bound {limit:.3e}")
    k1, op, g1 = _one_phase_rhs(eta_n, geom, cfg)
    k2, _, _ = _one_phase_rhs(dealias(eta_n + (cfg.dt / 2) * k1), geom, cfg)
    k3, _, _ = _one_phase_rhs(dealias(eta_n + (cfg.dt / 2) * k2), geom, cfg)
    k4, _, _ = _one_phase_rhs(dealias(eta_n + cfg.dt * k3), geom, cfg)
    eta_next = dealias(eta_n + (cfg.dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    d_inc = cfg.dt * l2_inner(g1, eta_n)
    info = {"iterations": 0, "residual": 0.0, "dissipation": d_inc, "op": op}
    return eta_next, info


# ---------------------------------------------------------------------------
# two phase

def step_two_phase(
    eta_n: SpectralFunction,
    cfg2p: TwoPhaseConfig,
    cfg: EvolutionConfig,
):
    """Advance one two-phase step; RT admissibility is required at eta_n."""
    if cfg.scheme == "rk4":
        return _step_two_phase_rk4(eta_n, cfg2p, cfg)
    stepper = TwoPhaseStepOperator(eta_n, cfg2p, cfg.dt, m=cfg.z_levels, tol=cfg.solver_tol)
    eta_next, sol = stepper.advance()
    min_rt = float(np.min(sol.rt_via_B.values))
    if min_rt <= 0.0:
        raise StabilityLossError(
            f"Rayleigh-Taylor condition lost (min RT = {min_rt:.4g})", min_rt=min_rt
        )
    d_inc = cfg.dt * l2_inner((1.0 / cfg2p.mu_minus) * sol.g_minus, eta_next)
    info = {
        "iterations": sol.iterations,
        "residual": sol.residual,
        "dissipation": d_inc,
        "solution": sol,
        "min_rt": min_rt,
    }
    return eta_next, info


def _two_phase_rhs(eta, cfg2p, cfg):
    sol = solve_interface_potentials(eta, cfg2p, m=cfg.z_levels, tol=cfg.solver_tol)
    return -(1.0 / cfg2p.mu_minus) * sol.g_minus, sol


def _step_two_phase_rk4(eta_n, cfg2p, cfg):
    rate = cfg2p.jump_rho / (cfg2p.mu_plus + cfg2p.mu_minus)
    limit = cfl_limit(eta_n.grid, rate, cfg.epsilon)
    if cfg.dt > limit:
        raise CFLError(f"explicit step dt={cfg.dt:.3e} exceeds the CFL bound {limit:.3e}")
    k1, sol = _two_phase_rhs(eta_n, cfg2p, cfg)
    min_rt = float(np.min(sol.rt_via_B.values))
    if min_rt <= 0.0:
        raise StabilityLossError(
            f"Rayleigh-Taylor condition lost (min RT = {min_rt:.4g})", min_rt=min_rt
        )
    k2, _ = _two_phase_rhs(dealias(eta_n + (cfg.dt / 2) * k1), cfg2p, cfg)
    k3, _ = _two_phase_rhs(dealias(eta_n + (cfg.dt / 2) * k2), cfg2p, cfg)
    k4, _ = _two_phase_rhs(dealias(eta_n + cfg.dt * k3), cfg2p, cfg)
    eta_next = dealias(eta_n + (cfg.dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    d_inc = cfg.dt * l2_inner((1.0 / cfg2p.mu_minus) * sol.g_minus, eta_n)
    info = {
        "iterations": sol.iterations,
        "residual": sol.residual,
        "dissipation": d_inc,
        "solution": sol,
        "min_rt": min_rt,
    }
    return eta_next, info


# ---------------------------------------------------------------------------
# run loop

def run_simulation(
    initial: SpectralFunction,
    cfg: EvolutionConfig,
    geom: DomainGeometry | None = None,
    two_phase: TwoPhaseConfig | None = None,
):
    """Advance to t_end or to a graceful halt; returns (records, final, reason).

    Monitors are emitted every ``monitor_every`` steps and always at the end;
    the final record carries the halt reason and, for the one-phase problem,
    the defect of the discrete L^2 balance
    |eta(T)|^2 + 2 kappa sum dt (G eta, eta) - |eta(0)|^2.
    """
    if (geom is None) == (two_phase is None):
        raise ValueError("provide exactly one of geom (one-phase) or two_phase")
    one_phase = two_phase is None
    work_geom = geom if one_phase else two_phase.geometry

    eta = dealias(initial)
    t = 0.0
    dt = cfg.dt
    halved = False
    records: list[MonitorRecord] = []
    dissipation_total = 0.0
    l2_initial = l2_norm(eta)
    reason = "completed"
    t_start = time.time()

    def monitor(info, halt=None, balance=None):
        min_b = info.get("min_one_minus_b")
        return MonitorRecord(
            t=t,
            l2_norm=l2_norm(eta),
            hs_norm=sobolev_norm(eta, cfg.hs_order),
            min_one_minus_b=min_b,
            min_rt=info.get("min_rt"),
            min_gap_bottom=_gap_bottom(eta, work_geom),
            min_gap_top=_gap_top(eta, work_geom),
            dissipation_increment=info.get("dissipation", 0.0),
            dissipation_total=dissipation_total,
            solver_iterations=info.get("iterations", 0),
            solver_residual=info.get("residual", 0.0),
            halt_reason=halt,
            balance_defect=balance,
            elapsed=time.time() - t_start,
        )

    def one_phase_b_margin():
        # 1 - max_x B with f = eta, geometry rebuilt at the current state
        op = DNOperator(eta, work_geom, m=cfg.z_levels, tol=cfg.inner_tol)
        out = op.apply(eta)
        return 1.0 - float(np.max(out.b_field.values))

    first = {"dissipation": 0.0}
    if one_phase:
        first["min_one_minus_b"] = one_phase_b_margin()
    records.append(monitor(first))

    step_index = 0
    max_steps = 2 * int(round(cfg.t_end / cfg.dt)) + 16
    while t < cfg.t_end - 1e-12 and step_index < max_steps:
        step_cfg = dataclasses.replace(cfg, dt=dt)
        try:
            if one_phase:
                eta_next, info = step_one_phase(eta, work_geom, step_cfg)
            else:
                eta_next, info = step_two_phase(eta, two_phase, step_cfg)
        except SolverError:
            if not halved:
                dt = dt / 2.0
                halved = True
                continue
            reason = "solver_stall"
            break
        except StabilityLossError:
            reason = "rt_lost"
            break
        except GeometryError:
            reason = "geometry_breach"
            break

        eta = eta_next
        t += dt
        step_index += 1
        dissipation_total += info.get("dissipation", 0.0)

        try:
            gap = _gap_bottom(eta, work_geom)
            top = _gap_top(eta, work_geom)
            if gap < work_geom.h or top < work_geom.h:
                reason = "geometry_breach"
                break
        except GeometryError:
            reason = "geometry_breach"
            break

        if step_index % cfg.monitor_every == 0:
            if one_phase:
                info = {**info, "min_one_minus_b": one_phase_b_margin()}
            records.append(monitor(info))

    balance = None
    if one_phase:
        balance = abs(l2_norm(eta) ** 2 + 2.0 * cfg.kappa * dissipation_total - l2_initial**2)
    records.append(monitor({"dissipation": 0.0}, halt=reason, balance=balance))
    return records, eta, reason
