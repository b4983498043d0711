"""Dirichlet-Neumann evaluation via the straightened variational elliptic solve.

Discretization: Fourier collocation in x, second-order differences on the
(possibly graded) z grid, with the discrete system assembled from the
variational form

    a(u, w) = sum_intervals dz * mean_x [ P ux wx - Q (uz wx + ux wz) + R uz wz ],
    P = d(rho)/dz,  Q = grad_x rho,  R = (1 + Q^2)/P   (interval midpoints),

so the operator is symmetric positive semi-definite by construction
(pointwise det of the coefficient matrix is exactly 1).  The surface row is
pinned to the Dirichlet data, the bottom condition is the natural conormal
one, and the system is solved matrix-free by conjugate gradients
preconditioned with the flat-geometry (x-averaged) operator inverted per
wavenumber as a tridiagonal system in z.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _kernels
from .errors import GeometryError
from .geometry import (
    DomainGeometry,
    Empty,
    FlatDepth,
    StraightenedMap,
    EllipticCoefficients,
    build_paper_map,
    build_sigma_map,
    bottom_samples,
    coefficients_from_map,
    default_truncation_depth,
)
from .krylov import pcg
from .spectral import SpectralFunction, TorusGrid, dealias, derivative, multiply

DEFAULT_Z_LEVELS = 64
DEFAULT_CG_TOL = 1e-10
DEFAULT_CG_MAXITER = 500


@dataclasses.dataclass(frozen=True)
class StraightenedField:
    """Solution values on the (z, x) grid of the straightening map."""

    map: StraightenedMap
    values: np.ndarray
    residual: float = 0.0
    iterations: int = 0


@dataclasses.dataclass(frozen=True)
class DNOutput:
    """G(eta)f at the surface with the derived fields and solver certificate."""

    g: SpectralFunction
    b_field: SpectralFunction
    v_field: SpectralFunction
    residual: float
    iterations: int
    field: StraightenedField | None = None

    def certificate(self, resolution=None) -> dict:
        rec = {"residual": self.residual, "iterations": self.iterations}
        if resolution is not None:
            rec["resolution"] = resolution
        return rec


def flat_dn_multiplier(k, depth: float | None = None):
    """Flat-interface DN symbol: |k| for infinite depth, |k| tanh(depth |k|) else."""
    k = np.abs(np.asarray(k, dtype=float))
    if depth is None or np.isinf(depth):
        return k
    return k * np.tanh(depth * k)


def flat_depth_of(geom: DomainGeometry, grid: TorusGrid) -> float:
    """Rest depth of the lower column (truncation depth for Empty bottoms)."""
    if isinstance(geom.bottom, Empty):
        return geom.truncation_depth or default_truncation_depth(grid)
    if isinstance(geom.bottom, FlatDepth):
        return geom.bottom.depth
    return float(np.mean(-geom.bottom.boundary.values))


class _EllipticSystem:
    """Assembled matvec and flat preconditioner for one straightened geometry."""

    def __init__(self, coeffs: EllipticCoefficients):
        smap = coeffs.map
        self.map = smap
        self.grid = smap.grid
        self.z = smap.z_grid
        self.dz = np.diff(self.z)
        # interval-midpoint fields, derived from the averaged map gradients so
        # the pointwise coefficient matrix keeps det = 1 exactly
        p_mid = 0.5 * (smap.drho_dz[:-1] + smap.drho_dz[1:])
        q_mid = 0.5 * (smap.grad_x_rho[:-1] + smap.grad_x_rho[1:])
        self.p = p_mid
        self.q = q_mid
        self.r = (1.0 + q_mid**2) / p_mid
        self.ik = 1j * np.fft.rfftfreq(self.grid.n, d=self.grid.period / (2 * np.pi * self.grid.n))
        self._build_flat_precond()

    # spectral x-derivative along rows
    def _dx(self, rows: np.ndarray) -> np.ndarray:
        return np.fft.irfft(self.ik * np.fft.rfft(rows, axis=-1), n=self.grid.n, axis=-1)

    def apply_full(self, v: np.ndarray) -> np.ndarray:
        """Energy-pairing residual of the full nodal field (all rows)."""
        vx = self._dx(v)
        mid_vx = 0.5 * (vx[:-1] + vx[1:])
        vz = (v[1:] - v[:-1]) / self.dz[:, None]
        fx = self.p * mid_vx - self.q * vz
        fz = -self.q * mid_vx + self.r * vz
        dxfx = self._dx(fx)
        res = np.zeros_like(v)
        res[1:] += fz
        res[:-1] -= fz
        half = 0.5 * self.dz[:, None] * dxfx
        res[:-1] -= half
        res[1:] -= half
        return res

    def apply_interior(self, u: np.ndarray) -> np.ndarray:
        """Operator restricted to the non-surface rows (surface value zero)."""
        full = np.vstack([u, np.zeros((1, self.grid.n))])
        return self.apply_full(full)[:-1]

    def _build_flat_precond(self):
        m = self.z.shape[0]
        kr = np.abs(self.ik.imag)
        nk = kr.shape[0]
        p_bar = self.p.mean(axis=1)
        r_bar = self.r.mean(axis=1)
        diag = np.zeros((nk, m))
        off = np.zeros((nk, m - 1))
        for j in range(m - 1):
            stiff = r_bar[j] / self.dz[j]
            mass = self.dz[j] * p_bar[j] * kr**2 / 4.0
            diag[:, j] += stiff + mass
            diag[:, j + 1] += stiff + mass
            off[:, j] += -stiff + mass
        # surface node eliminated (Dirichlet row): keep nodes 0..m-2
        self._pre_d = diag[:, : m - 1].copy()
        self._pre_dl = np.zeros((nk, m - 1))
        self._pre_dl[:, 1:] = off[:, : m - 2]
        self._pre_du = np.zeros((nk, m - 1))
        self._pre_du[:, : m - 2] = off[:, : m - 2]

    def precondition(self, r: np.ndarray) -> np.ndarray:
        rhat = np.fft.rfft(r, axis=-1).T.copy()
        sol = _kernels.tridiag_solve_many(self._pre_dl, self._pre_d, self._pre_du, rhat)
        return np.fft.irfft(sol.T, n=self.grid.n, axis=-1)


def solve_elliptic(
    f: SpectralFunction,
    coeffs: EllipticCoefficients,
    side: str = "lower",
    tol: float = DEFAULT_CG_TOL,
    maxiter: int = DEFAULT_CG_MAXITER,
) -> StraightenedField:
    """Solve div(A grad v) = 0 with v = f at z = 0, conormal Neumann at z = -1.

    ``side`` is recorded for bookkeeping; for upper-phase calls the caller
    supplies coefficients already built from the reflected geometry.
    """
    del side
    system = _EllipticSystem(coeffs)
    return _solve_on(system, f, tol, maxiter)


def _solve_on(
    system: _EllipticSystem, f: SpectralFunction, tol: float, maxiter: int
) -> StraightenedField:
    m = system.z.shape[0]
    n = system.grid.n
    lift = np.zeros((m, n))
    lift[-1] = f.values
    rhs = -system.apply_full(lift)[:-1]
    result = pcg(
        system.apply_interior,
        rhs,
        apply_m=system.precondition,
        tol=tol,
        maxiter=maxiter,
    )
    v = np.vstack([result.x, f.values[None, :]])
    return StraightenedField(system.map, v, residual=result.relres, iterations=result.iterations)


def _surface_dz_weights(z: np.ndarray):
    # one-sided second-order first derivative at z=0 from the top three nodes
    a = z[-1] - z[-2]
    b = z[-1] - z[-3]
    w0 = (a + b) / (a * b)
    w1 = -b / (a * (b - a))
    w2 = a / (b * (b - a))
    return w0, w1, w2


def evaluate_dn(field: StraightenedField, smap: StraightenedMap | None = None) -> SpectralFunction:
    """Surface trace [(1+|grad_x rho|^2)/d(rho)/dz * dv/dz - grad_x rho * dv/dx]|_{z=0}.

    dv/dz uses the one-sided second-order stencil on the top three z levels.
    """
    smap = smap or field.map
    v = field.values
    w0, w1, w2 = _surface_dz_weights(smap.z_grid)
    dzv = w0 * v[-1] + w1 * v[-2] + w2 * v[-3]
    k = smap.grid.wavenumbers
    dxv = np.fft.ifft(1j * k * np.fft.fft(v[-1])).real
    p_surf = (1.0 + smap.grad_x_rho[-1] ** 2) / smap.drho_dz[-1]
    raw = p_surf * dzv - smap.grad_x_rho[-1] * dxv
    return dealias(SpectralFunction.from_values(smap.grid, raw))


def vertical_derivative_trace(field: StraightenedField) -> SpectralFunction:
    """(dv/dz) / (d rho/dz) at the surface: the bulk route to B = d(phi)/dy|_Sigma.

    Independent of the trace formula of :func:`evaluate_dn`, hence useful for
    cross-checks that should carry their own discretization error.
    """
    smap = field.map
    w0, w1, w2 = _surface_dz_weights(smap.z_grid)
    v = field.values
    dzv = w0 * v[-1] + w1 * v[-2] + w2 * v[-3]
    return dealias(SpectralFunction.from_values(smap.grid, dzv / smap.drho_dz[-1]))


def compute_b_v(
    f: SpectralFunction, eta: SpectralFunction, g: SpectralFunction
) -> tuple[SpectralFunction, SpectralFunction]:
    """B = (grad eta . grad f + G f)/(1+|grad eta|^2),  V = grad f - B grad eta."""
    deta = derivative(eta)
    df = derivative(f)
    denom = 1.0 + deta.values**2
    b_vals = (deta.values * df.values + g.values) / denom
    b_field = dealias(SpectralFunction.from_values(eta.grid, b_vals))
    v_field = dealias(SpectralFunction.from_values(eta.grid, df.values - b_field.values * deta.values))
    return b_field, v_field


class DNOperator:
    """G(eta) with the geometry frozen: build once, apply to many data.

    The operator is linear in the Dirichlet data, which the semi-implicit
    evolution and the two-phase solves exploit.  ``side="upper"`` reflects
    the upper domain to lower-half form and flips the sign of the trace
    (both phases share the upward normal).
    """

    def __init__(
        self,
        eta: SpectralFunction,
        geom: DomainGeometry,
        m: int = DEFAULT_Z_LEVELS,
        side: str = "lower",
        map_kind: str = "sigma",
        z_kind: str = "sinh",
        tol: float = DEFAULT_CG_TOL,
        maxiter: int = DEFAULT_CG_MAXITER,
    ):
        if side not in ("lower", "upper"):
            raise ValueError("side must be 'lower' or 'upper'")
        self.eta = eta
        self.geom = geom
        self.side = side
        self.tol = tol
        self.maxiter = maxiter
        work_eta = eta if side == "lower" else -eta
        work_geom = geom if side == "lower" else geom.reflected()
        if isinstance(work_geom.bottom, Empty) and work_geom.truncation_depth is None:
            work_geom = dataclasses.replace(
                work_geom, truncation_depth=default_truncation_depth(eta.grid)
            )
        if map_kind == "sigma":
            self.map = build_sigma_map(work_eta, work_geom, m, z_kind=z_kind)
        elif map_kind == "paper":
            if side == "upper":
                raise ValueError("the near-surface map is provided for the lower phase")
            self.map = build_paper_map(work_eta, work_geom.h, m, z_kind=z_kind)
        else:
            raise ValueError(f"unknown map kind {map_kind!r}")
        self.coeffs = coefficients_from_map(self.map)
        self.system = _EllipticSystem(self.coeffs)
        self.flat_depth = flat_depth_of(work_geom, eta.grid)

    def solve(self, f: SpectralFunction) -> StraightenedField:
        return _solve_on(self.system, dealias(f), self.tol, self.maxiter)

    def apply_g(self, f: SpectralFunction) -> tuple[SpectralFunction, StraightenedField]:
        field = self.solve(f)
        g = evaluate_dn(field, self.map)
        if self.side == "upper":
            g = -g
        return g, field

    def apply(self, f: SpectralFunction, keep_field: bool = False) -> DNOutput:
        f = dealias(f)
        g, field = self.apply_g(f)
        b_field, v_field = compute_b_v(f, self.eta, g)
        return DNOutput(
            g,
            b_field,
            v_field,
            residual=field.residual,
            iterations=field.iterations,
            field=field if keep_field else None,
        )


def dn_apply(
    eta: SpectralFunction,
    f: SpectralFunction,
    geom: DomainGeometry,
    side: str = "lower",
    m: int = DEFAULT_Z_LEVELS,
    map_kind: str = "sigma",
    z_kind: str = "sinh",
    tol: float = DEFAULT_CG_TOL,
    maxiter: int = DEFAULT_CG_MAXITER,
    keep_field: bool = False,
) -> DNOutput:
    """Full pipeline: build map -> coefficients -> solve -> trace -> (B, V)."""
    op = DNOperator(
        eta, geom, m=m, side=side, map_kind=map_kind, z_kind=z_kind, tol=tol, maxiter=maxiter
    )
    return op.apply(f, keep_field=keep_field)
