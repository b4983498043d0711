"""Discrete paradifferential calculus.

Quantization acts on Fourier coefficients as

    (T_a u)^(k) = sum_m chi(k - m, xi_m) ahat(k - m, xi_m) psi(xi_m) u^(m),

where ahat(theta, xi) is the DFT in x of the symbol at input frequency xi,
psi is the smooth low-frequency cutoff (0 below 1/5, 1 above 1/4) and chi
the pair cutoff (1 for |theta| <= eps1 |xi|, 0 beyond eps2 |xi|).  The
quantization is materialized as an n-by-n matrix (desk scale keeps n <= 512)
so repeated applications, adjoints and compositions are cheap and
transparent.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from . import _kernels
from .errors import MuskatLabError
from .geometry import EllipticCoefficients
from .krylov import bicgstab
from .spectral import (
    SpectralFunction,
    TorusGrid,
    dealias,
    derivative,
    l2_norm,
    lp_block_range,
    lp_project,
    multiply,
)


@dataclasses.dataclass(frozen=True)
class CutoffPair:
    """The two fixed smooth cutoffs of the quantization.

    psi(xi) vanishes for |xi| <= 1/5 and equals 1 for |xi| >= 1/4;
    chi(theta, xi) = 1 for |theta| <= eps1 |xi| and 0 for |theta| >= eps2 |xi|.
    """

    eps1: float = 0.1
    eps2: float = 0.2
    psi_lo: float = 0.2
    psi_hi: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.eps1 < self.eps2 < 1.0:
            raise ValueError("need 0 < eps1 < eps2 < 1")

    def psi(self, xi):
        return _kernels.psi_lowcut(xi, self.psi_lo, self.psi_hi)

    def chi(self, theta, xi):
        return _kernels.chi_pair(theta, xi, self.eps1, self.eps2)


DEFAULT_CUTOFFS = CutoffPair()


@dataclasses.dataclass(frozen=True)
class SymbolField:
    """Symbol a(x, xi): per-x data plus a closed-form kernel in xi.

    ``kernel(xdata, xi)`` returns the symbol values over the x grid for one
    scalar frequency.  ``x_independent`` marks pure multipliers, which the
    quantization reduces to exactly.
    """

    grid: TorusGrid
    order: float
    xdata: tuple
    kernel: Callable
    regularity: float = 1.0
    x_independent: bool = False
    ellipticity: float = 0.0

    def eval(self, xi: float) -> np.ndarray:
        """Symbol values over the x grid at one frequency."""
        return np.asarray(self.kernel(self.xdata, float(xi)), dtype=complex)

    def eval_grid(self, xis: np.ndarray) -> np.ndarray:
        """(n_x, n_xi) table of symbol values."""
        return np.stack([self.eval(xi) for xi in np.asarray(xis, float)], axis=1)

    def growth_constant(self, sample_xis=None) -> float:
        """Measured sup over samples of |a(x, xi)| / (1+|xi|)^order, |xi| >= 1/2."""
        if sample_xis is None:
            kmax = self.grid.k_max
            sample_xis = [0.5, 1.0, kmax / 4, kmax / 2, kmax]
        best = 0.0
        for xi in sample_xis:
            if abs(xi) < 0.5:
                continue
            mag = float(np.max(np.abs(self.eval(xi))))
            best = max(best, mag / (1.0 + abs(xi)) ** self.order)
        return best


def symbol_from_function(u: SpectralFunction, order: float = 0.0) -> SymbolField:
    """xi-independent symbol a(x, xi) = u(x)."""
    vals = u.values.astype(complex)
    return SymbolField(
        u.grid, order, (vals,), lambda xd, xi: xd[0], x_independent=False
    )


def symbol_from_multiplier(grid: TorusGrid, fn: Callable, order: float) -> SymbolField:
    """x-independent symbol a(x, xi) = fn(xi)."""
    n = grid.n
    return SymbolField(
        grid,
        order,
        (n,),
        lambda xd, xi: np.full(xd[0], complex(fn(xi))),
        x_independent=True,
    )


def symbol_lambda(eta: SpectralFunction) -> SymbolField:
    """Principal symbol of the DN operator.

    In the one-dimensional interface setting it collapses to |xi| for every
    eta; the collapse is asserted on a frequency sample.
    """
    deta = derivative(eta).values
    for xi in (0.7, 3.0, -11.0):
        full = np.sqrt((1.0 + deta**2) * xi**2 - (deta * xi) ** 2)
        if not np.allclose(full, abs(xi), rtol=1e-12, atol=1e-12):
            raise MuskatLabError("principal symbol failed to collapse to |xi| in d=1")
    return symbol_from_multiplier(eta.grid, lambda xi: abs(xi), order=1.0)


def symbol_lambda_eval(grad_eta, xi) -> float:
    """Pointwise principal-symbol formula for interface dimension <= 2 (unit tests)."""
    grad_eta = np.atleast_1d(np.asarray(grad_eta, float))
    xi = np.atleast_1d(np.asarray(xi, float))
    g2 = float(np.dot(grad_eta, grad_eta))
    x2 = float(np.dot(xi, xi))
    gx = float(np.dot(grad_eta, xi))
    return float(np.sqrt((1.0 + g2) * x2 - gx * gx))


def symbols_a_a_upper(
    coeffs: EllipticCoefficients, z_index: int, identity_tol: float = 1e-10
) -> tuple[SymbolField, SymbolField]:
    """First-order factorization symbols (a, A) on one z slice.

    a = (-(i beta xi) - sqrt(4 alpha xi^2 - (beta xi)^2))/2 and A its
    conjugate partner, so a + A = -i beta xi and a A = -alpha xi^2.  The
    discriminant is nonnegative whenever alpha > 0 (it equals
    (2 xi d(rho)/dz / (1+|grad rho|^2))^2 (1+|grad rho|^2)); roundoff
    negatives are clipped within ``identity_tol``.  Re(-a) = alpha/d(rho)/dz
    * |xi| gives the exact ellipticity constant.
    """
    alpha = coeffs.alpha[z_index]
    beta = coeffs.beta[z_index]
    if np.min(alpha) <= 0.0:
        raise MuskatLabError("factorization needs alpha > 0 on the slice")
    drho = coeffs.map.drho_dz[z_index]

    def kernel_a(xd, xi):
        al, be = xd
        disc = 4.0 * al * xi**2 - (be * xi) ** 2
        if np.min(disc) < -identity_tol * max(1.0, abs(xi)) ** 2:
            raise MuskatLabError("negative discriminant beyond roundoff")
        root = np.sqrt(np.maximum(disc, 0.0))
        return 0.5 * (-1j * be * xi - root)

    def kernel_A(xd, xi):
        al, be = xd
        disc = 4.0 * al * xi**2 - (be * xi) ** 2
        if np.min(disc) < -identity_tol * max(1.0, abs(xi)) ** 2:
            raise MuskatLabError("negative discriminant beyond roundoff")
        root = np.sqrt(np.maximum(disc, 0.0))
        return 0.5 * (-1j * be * xi + root)

    c_exact = float(np.min(alpha / drho))
    grid = coeffs.map.grid
    xdata = (alpha.astype(float), beta.astype(float))
    sym_a = SymbolField(grid, 1.0, xdata, kernel_a, ellipticity=c_exact)
    sym_A = SymbolField(grid, 1.0, xdata, kernel_A, ellipticity=c_exact)
    return sym_a, sym_A


def paradiff_matrix(
    a: SymbolField, cut: CutoffPair = DEFAULT_CUTOFFS
) -> np.ndarray:
    """Materialized quantization acting on fft-layout coefficients."""
    grid = a.grid
    n = grid.n
    modes = grid.modes
    scale = 2.0 * np.pi / grid.period
    if a.x_independent:
        sym = np.array([a.eval(scale * m)[0] for m in modes])
        diag = sym * cut.psi(scale * modes.astype(float))
        return np.diag(diag).astype(np.complex128)
    table = a.eval_grid(scale * modes.astype(float))
    ahat = np.fft.fft(table, axis=0) / n
    return _kernels.paradiff_matrix(
        np.ascontiguousarray(ahat),
        modes,
        scale,
        cut.psi_lo,
        cut.psi_hi,
        cut.eps1,
        cut.eps2,
    )


def apply_paradiff(
    a: SymbolField, u: SpectralFunction, cut: CutoffPair = DEFAULT_CUTOFFS
) -> SpectralFunction:
    """T_a u via the discrete quantization (O(n^2) per application)."""
    if a.x_independent:
        grid = a.grid
        scale = 2.0 * np.pi / grid.period
        sym = np.array([a.eval(scale * m)[0] for m in grid.modes])
        c = u.coefficients * sym * cut.psi(scale * grid.modes.astype(float))
        return SpectralFunction.from_coefficients(grid, c)
    mat = paradiff_matrix(a, cut)
    return SpectralFunction.from_coefficients(u.grid, mat @ u.coefficients)


def bony_remainder(
    a: SpectralFunction, u: SpectralFunction, cut: CutoffPair = DEFAULT_CUTOFFS
) -> SpectralFunction:
    """R(a, u) = au - T_a u - T_u a (the product dealiased).

    The splitting identity au = T_a u + T_u a + R(a, u) then holds exactly
    by construction.
    """
    prod = multiply(a, u)
    t_au = apply_paradiff(symbol_from_function(a), u, cut)
    t_ua = apply_paradiff(symbol_from_function(u), a, cut)
    return prod - t_au - t_ua


def paralinearize_dn(
    eta: SpectralFunction,
    f: SpectralFunction,
    geom,
    m: int = 64,
    cut: CutoffPair = DEFAULT_CUTOFFS,
    tol: float = 1e-10,
):
    """Main paradifferential term of G(eta)f and the measured remainder.

    main = T_lambda(f - T_B eta) - T_V . grad eta, remainder = G(eta)f - main.
    Returns (main, remainder, dn_output).
    """
    from .dn import dn_apply  # local import to avoid a cycle

    out = dn_apply(eta, f, geom, m=m, tol=tol)
    lam = symbol_lambda(eta)
    good = dealias(f) - apply_paradiff(symbol_from_function(out.b_field), eta, cut)
    main = apply_paradiff(lam, good, cut) - apply_paradiff(
        symbol_from_function(out.v_field), derivative(eta), cut
    )
    residual = out.g - main
    return main, residual, out


def block_ratios(
    residual: SpectralFunction,
    g: SpectralFunction,
    floor: float = 1e-12,
) -> list[tuple[int, float, float, float]]:
    """Per-dyadic-block smoothing diagnostic rows (j, |P_j r|, |P_j g|, r_j).

    r_j = |P_j residual| / (2^(-j/2) |P_j g| + eps_mach) probes the
    half-derivative gain of the remainder.  Blocks with |P_j g| below
    ``floor`` * |g| are outside the resolved range and skipped.
    """
    eps_mach = np.finfo(float).eps
    g_norm = l2_norm(g)
    rows = []
    for j in lp_block_range(g.grid):
        if j < 0:
            continue
        nr = l2_norm(lp_project(residual, j))
        ng = l2_norm(lp_project(g, j))
        if ng < floor * max(g_norm, eps_mach):
            continue
        rj = nr / (2.0 ** (-j / 2.0) * ng + eps_mach)
        rows.append((j, nr, ng, rj))
    return rows


def measured_ellipticity(p: SymbolField, sample_xis=None) -> float:
    """min over x and sampled xi of Re p(x, xi)/|xi| (ellipticity certificate)."""
    if sample_xis is None:
        kmax = p.grid.k_max
        sample_xis = [1.0, -2.0, kmax / 4, -kmax / 2, kmax]
    worst = np.inf
    for xi in sample_xis:
        if xi == 0.0:
            continue
        worst = min(worst, float(np.min(p.eval(xi).real)) / abs(xi))
    return worst


def parabolic_step(
    p: SymbolField,
    w0: SpectralFunction,
    forcing,
    interval: tuple[float, float],
    steps: int,
    cut: CutoffPair = DEFAULT_CUTOFFS,
    tol: float = 1e-12,
) -> SpectralFunction:
    """March dw/dz + T_p w = f over the interval by Crank-Nicolson.

    ``forcing`` is None or a callable z -> SpectralFunction.  Each implicit
    solve runs BiCGSTAB with T_p as the matvec, preconditioned by the
    x-averaged multiplier of p.  Ellipticity Re p >= c |xi| with c > 0 is
    verified up front.
    """
    c = measured_ellipticity(p)
    if not c > 0.0:
        raise MuskatLabError(f"parabolic step needs Re p >= c|xi| with c > 0, measured {c:.3e}")
    z0, z1 = interval
    if steps < 1 or not z1 > z0:
        raise ValueError("need a nondegenerate interval and at least one step")
    dz = (z1 - z0) / steps
    grid = p.grid
    mat = paradiff_matrix(p, cut)
    scale = 2.0 * np.pi / grid.period
    xi_grid = scale * grid.modes.astype(float)
    pbar = np.array([np.mean(p.eval(xi).real) if xi != 0 else 0.0 for xi in xi_grid])
    pre = 1.0 / (1.0 + 0.5 * dz * np.maximum(pbar, 0.0) * cut.psi(xi_grid))

    ident = np.eye(grid.n, dtype=complex)
    a_mat = ident + 0.5 * dz * mat
    b_mat = ident - 0.5 * dz * mat

    w = w0.coefficients.copy()
    for s in range(steps):
        rhs = b_mat @ w
        if forcing is not None:
            zmid = z0 + (s + 0.5) * dz
            rhs = rhs + dz * forcing(zmid).coefficients
        res = bicgstab(lambda v: a_mat @ v, rhs, apply_m=lambda v: pre * v, tol=tol, maxiter=400)
        w = res.x
    return SpectralFunction.from_coefficients(grid, w)
