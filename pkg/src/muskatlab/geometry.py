"""Fluid-domain descriptions and straightening diffeomorphisms.

The physical column under the interface is flattened onto the computational
strip z in [-1, 0].  Two map kinds are provided:

* ``sigma`` — linear in z over the full column,
  rho(x, z) = eta(x) + z*(eta(x) - b(x)); an empty (infinitely deep) bottom
  is truncated at depth L below the interface with a conormal Neumann
  condition at the artificial bottom.
* ``paper`` — the smoothed near-surface map built with the multipliers
  exp(tau z <D>), covering only the strip of depth h below the interface.

The z nodes may be graded toward the surface (sinh clustering); the map
itself stays as above, evaluated on the graded nodes.
"""

from __future__ import annotations

import dataclasses
from typing import Union

import numpy as np

from .errors import GeometryError, MapValidityError
from .spectral import (
    SpectralFunction,
    TorusGrid,
    apply_multiplier,
    derivative,
    lp_block_range,
    lp_project,
)


@dataclasses.dataclass(frozen=True)
class Empty:
    """No rigid boundary on this side (infinite depth)."""


@dataclasses.dataclass(frozen=True)
class FlatDepth:
    """Rigid boundary at constant distance ``depth`` from the rest level y=0."""

    depth: float

    def __post_init__(self):
        if not self.depth > 0.0:
            raise ValueError("depth must be positive")


@dataclasses.dataclass(frozen=True)
class Sampled:
    """Rigid boundary given as the graph of a sampled Lipschitz function."""

    boundary: SpectralFunction


Boundary = Union[Empty, FlatDepth, Sampled]


@dataclasses.dataclass(frozen=True)
class DomainGeometry:
    """Bottom/top boundary descriptions plus the required separation h.

    ``bottom`` bounds the lower phase (b- below the interface; FlatDepth(H)
    means b- = -H).  ``top`` bounds the upper phase (FlatDepth(H) means
    b+ = +H).  ``truncation_depth`` overrides the default artificial depth L
    used for Empty boundaries.
    """

    bottom: Boundary = Empty()
    top: Boundary = Empty()
    h: float = 0.2
    truncation_depth: float | None = None

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError("separation h must be positive")
        for side in (self.bottom, self.top):
            if isinstance(side, FlatDepth) and not side.depth > self.h:
                raise ValueError("flat boundary depth must exceed the separation h")

    def reflected(self) -> "DomainGeometry":
        """Upper domain recast in lower-half form (y -> -y).

        Used with eta -> -eta; then G+(eta)f = -G_lower(-eta)f, the sign
        flip coming from the shared upward normal.
        """
        top = self.top
        if isinstance(top, Sampled):
            new_bottom: Boundary = Sampled(-top.boundary)
        else:
            new_bottom = top
        return DomainGeometry(
            bottom=new_bottom, top=Empty(), h=self.h, truncation_depth=self.truncation_depth
        )


def default_truncation_depth(grid: TorusGrid) -> float:
    """Artificial depth for Empty boundaries: max(3*period, 10/k_min).

    Harmonic modes decay like exp(-|k| L), so the represented modes feel the
    artificial bottom at most at the exp(-10) level.
    """
    k_min = 2.0 * np.pi / grid.period
    return max(3.0 * grid.period, 10.0 / k_min)


def bottom_samples(eta: SpectralFunction, geom: DomainGeometry) -> np.ndarray:
    """Lower matching level b(x) for the sigma map (truncated for Empty)."""
    if isinstance(geom.bottom, Empty):
        L = geom.truncation_depth or default_truncation_depth(eta.grid)
        return eta.values - L
    if isinstance(geom.bottom, FlatDepth):
        return np.full(eta.grid.n, -geom.bottom.depth)
    return geom.bottom.boundary.values


def check_pairing(eta: SpectralFunction, geom: DomainGeometry) -> float:
    """Verify dist(eta, bottom) >= h for the lower phase; return the min gap."""
    if isinstance(geom.bottom, Empty):
        return np.inf
    b = bottom_samples(eta, geom)
    gap = float(np.min(eta.values - b))
    if gap < geom.h:
        raise GeometryError(
            f"interface/bottom separation {gap:.6g} below required h={geom.h:.6g}",
            min_gap=gap,
        )
    return gap


# ---------------------------------------------------------------------------
# z grids

# Target physical spacing at the surface is SURFACE_RESOLUTION/(m-1) whatever
# the column depth; keeps the one-sided trace stencil accurate for the modes
# the x grid carries.
SURFACE_RESOLUTION = 0.25


def _solve_sinh_parameter(ratio: float) -> float:
    # find c with c/sinh(c) = ratio, ratio in (0, 1)
    lo, hi = 1e-6, 60.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid / np.sinh(mid) > ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def make_z_grid(m: int, depth: float | None = None, kind: str = "sinh") -> np.ndarray:
    """Strictly increasing z nodes in [-1, 0], count m.

    ``sinh`` grades the nodes toward the surface so that the first physical
    spacing is about SURFACE_RESOLUTION/(m-1) for a column of the given
    depth; ``uniform`` is unclustered.
    """
    if m < 8:
        raise ValueError("need at least 8 z levels")
    zeta = np.arange(m) / (m - 1)
    if kind == "uniform":
        return zeta - 1.0
    if kind == "sinh":
        if depth is None:
            raise ValueError("sinh grading needs the column depth")
        ratio = min(1.0, SURFACE_RESOLUTION / depth)
        if ratio >= 1.0:
            return zeta - 1.0
        c = _solve_sinh_parameter(ratio)
        return -np.sinh(c * (1.0 - zeta)) / np.sinh(c)
    raise ValueError(f"unknown z grid kind {kind!r}")


# ---------------------------------------------------------------------------
# straightened maps

@dataclasses.dataclass(frozen=True)
class StraightenedMap:
    """rho(x_i, z_j) with derivative fields on the (z, x) product grid.

    Rows run from the bottom (z=-1) to the surface (z=0).  Validity
    threshold: d(rho)/dz >= min(1, h/2) at every node.
    """

    kind: str
    grid: TorusGrid
    z_grid: np.ndarray
    rho: np.ndarray
    drho_dz: np.ndarray
    grad_x_rho: np.ndarray
    h: float
    tau: float = 0.0

    @property
    def m(self) -> int:
        return self.z_grid.shape[0]

    @property
    def validity_threshold(self) -> float:
        return min(1.0, self.h / 2.0)

    def check_validity(self) -> None:
        lo = float(np.min(self.drho_dz))
        if lo < self.validity_threshold:
            hint = "; try a smaller tau" if self.kind == "paper" else ""
            raise MapValidityError(
                f"map degenerate: min d(rho)/dz = {lo:.6g} below "
                f"threshold {self.validity_threshold:.6g}{hint}",
                min_dz_rho=lo,
                threshold=self.validity_threshold,
            )


def build_sigma_map(
    eta: SpectralFunction,
    geom: DomainGeometry,
    m: int,
    z_kind: str = "sinh",
) -> StraightenedMap:
    """Full-column linear map rho = eta + z*(eta - b)."""
    check_pairing(eta, geom)
    b = bottom_samples(eta, geom)
    depth = float(np.max(eta.values - b))
    z = make_z_grid(m, depth=depth, kind=z_kind)
    col = eta.values - b
    rho = eta.values[None, :] + z[:, None] * col[None, :]
    drho = np.broadcast_to(col, (m, eta.grid.n)).copy()
    deta = derivative(eta).values
    db = np.fft.ifft(1j * eta.grid.wavenumbers * np.fft.fft(b)).real
    gxr = (1.0 + z[:, None]) * deta[None, :] - z[:, None] * db[None, :]
    smap = StraightenedMap("sigma", eta.grid, z, rho, drho, gxr, geom.h)
    smap.check_validity()
    return smap


def default_tau(eta: SpectralFunction, h: float) -> float:
    """tau = h / (4 (1 + proxy)) with proxy = sum_j 2^j ||P_j eta||_inf."""
    proxy = 0.0
    for j in lp_block_range(eta.grid):
        block = lp_project(eta, j)
        proxy += 2.0 ** max(j, 0) * float(np.max(np.abs(block.values)))
    return h / (4.0 * (1.0 + proxy))


def build_paper_map(
    eta: SpectralFunction,
    h: float,
    m: int,
    tau: float | None = None,
    z_kind: str = "sinh",
) -> StraightenedMap:
    """Smoothed near-surface map on the strip of depth h below the interface,

        rho(x, z) = (1+z) e^{tau z <D>} eta - z (e^{-(1+z) tau <D>} eta - h),

    with <D> = (1 + |D|^2)^(1/2) applied spectrally.  Validity (d(rho)/dz
    bounded below) is checked a posteriori.
    """
    if tau is None:
        tau = default_tau(eta, h)
    grid = eta.grid
    z = make_z_grid(m, depth=h, kind=z_kind)
    bracket = np.sqrt(1.0 + grid.wavenumbers**2)

    rho = np.empty((m, grid.n))
    drho = np.empty((m, grid.n))
    for j, zj in enumerate(z):
        up = apply_multiplier(eta, np.exp(tau * zj * bracket))
        down = apply_multiplier(eta, np.exp(-(1.0 + zj) * tau * bracket))
        d_up = apply_multiplier(up, tau * bracket)
        d_down = apply_multiplier(down, tau * bracket)
        rho[j] = (1.0 + zj) * up.values - zj * (down.values - h)
        # d/dz[(1+z) e^{tau z <D>} eta] = up + (1+z) tau<D> up
        # d/dz[-z e^{-(1+z) tau <D>} eta + z h] = -down + z tau<D> down + h
        drho[j] = up.values + (1.0 + zj) * d_up.values - down.values + zj * d_down.values + h

    gxr = np.vstack(
        [
            np.fft.ifft(1j * grid.wavenumbers * np.fft.fft(rho[j])).real
            for j in range(m)
        ]
    )
    smap = StraightenedMap("paper", grid, z, rho, drho, gxr, h, tau=tau)
    smap.check_validity()
    return smap


# ---------------------------------------------------------------------------
# elliptic coefficients

@dataclasses.dataclass(frozen=True)
class EllipticCoefficients:
    """alpha, beta, gamma fields and the per-node coefficient matrix entries.

    The matrix A has rows [d(rho)/dz, -grad_x rho; -grad_x rho,
    (1+|grad_x rho|^2)/d(rho)/dz], symmetric with det A = 1 identically.
    """

    map: StraightenedMap
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    @property
    def a_entries(self):
        """(A_xx, A_xz, A_zz) per node."""
        drho = self.map.drho_dz
        gxr = self.map.grad_x_rho
        return drho, -gxr, (1.0 + gxr**2) / drho

    def det_a(self) -> np.ndarray:
        axx, axz, azz = self.a_entries
        return axx * azz - axz**2


def _dz_nonuniform(field: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Second-order first derivative in z on a nonuniform grid (centered inside,
    one-sided 3-point at the ends)."""
    m = z.shape[0]
    out = np.empty_like(field)
    hm = z[1:-1] - z[:-2]
    hp = z[2:] - z[1:-1]
    w_m = (-hp / (hm * (hm + hp)))[:, None]
    w_0 = ((hp - hm) / (hm * hp))[:, None]
    w_p = (hm / (hp * (hm + hp)))[:, None]
    out[1:-1] = w_m * field[:-2] + w_0 * field[1:-1] + w_p * field[2:]
    h0, h1 = z[1] - z[0], z[2] - z[1]
    out[0] = (
        -(2 * h0 + h1) / (h0 * (h0 + h1)) * field[0]
        + (h0 + h1) / (h0 * h1) * field[1]
        - h0 / (h1 * (h0 + h1)) * field[2]
    )
    g0, g1 = z[-1] - z[-2], z[-2] - z[-3]
    out[-1] = (
        (2 * g0 + g1) / (g0 * (g0 + g1)) * field[-1]
        - (g0 + g1) / (g0 * g1) * field[-2]
        + g0 / (g1 * (g0 + g1)) * field[-3]
    )
    return out


def coefficients_from_map(smap: StraightenedMap) -> EllipticCoefficients:
    """Expanded coefficients alpha, beta, gamma of the straightened equation.

    x derivatives are spectral; the z derivative of d(rho)/dz uses
    second-order differences on the z grid.
    """
    drho = smap.drho_dz
    gxr = smap.grad_x_rho
    denom = 1.0 + gxr**2
    alpha = drho**2 / denom
    beta = -2.0 * drho * gxr / denom

    k = smap.grid.wavenumbers
    lap_rho = np.fft.ifft(-(k**2) * np.fft.fft(smap.rho, axis=1), axis=1).real
    dx_drho = np.fft.ifft(1j * k * np.fft.fft(drho, axis=1), axis=1).real
    d2rho = _dz_nonuniform(drho, smap.z_grid)
    gamma = (d2rho + alpha * lap_rho + beta * dx_drho) / drho
    return EllipticCoefficients(smap, alpha, beta, gamma)


def export_map_csv(smap: StraightenedMap, path) -> None:
    """Write the map as CSV rows (x, z, rho) for plotting."""
    x = smap.grid.x
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,z,rho\n")
        for j, zj in enumerate(smap.z_grid):
            for i in range(smap.grid.n):
                fh.write(f"{x[i]:.17g},{zj:.17g},{smap.rho[j, i]:.17g}\n")
