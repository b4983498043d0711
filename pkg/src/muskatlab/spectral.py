"""Periodic spectral substrate: grids, transforms, multipliers, norms, dyadic blocks.

A :class:`SpectralFunction` is the house representation for every surface
field (the interface elevation, Dirichlet data, the derived fields B and V).
Coefficients follow the Fourier-series convention

    u(x) = sum_k  c_k exp(i k x),      c_k = fft(values) / n,

with wavenumbers in the numpy fft layout scaled by 2*pi/period.  Everything
is immutable after construction; operations return new objects and are safe
to call concurrently.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclasses.dataclass(frozen=True)
class TorusGrid:
    """Uniform collocation grid on a torus of the given period.

    ``n`` must be a power of two, at least 8.  ``wavenumbers`` are the
    physical frequencies {0, 1, ..., n/2-1, -n/2, ..., -1} * (2*pi/period).
    """

    n: int
    period: float = TWO_PI

    def __post_init__(self):
        n = self.n
        if n < 8 or n & (n - 1) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        if not (self.period > 0.0 and np.isfinite(self.period)):
            raise ValueError(f"period must be positive and finite, got {self.period}")
        object.__setattr__(self, "_x", _readonly(np.arange(n) * (self.period / n)))
        object.__setattr__(
            self,
            "_k",
            _readonly(np.fft.fftfreq(n, d=self.period / (TWO_PI * n))),
        )

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def wavenumbers(self) -> np.ndarray:
        return self._k

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in fft layout."""
        return np.rint(self._k * self.period / TWO_PI).astype(np.int64)

    @property
    def k_max(self) -> float:
        """Largest represented frequency magnitude, (n/2) * 2*pi/period."""
        return (self.n // 2) * TWO_PI / self.period

    @property
    def dx(self) -> float:
        return self.period / self.n


@dataclasses.dataclass(frozen=True)
class SpectralFunction:
    """Real periodic function with cached Fourier coefficients.

    Also serves as the interface state: samples plus coefficients of eta,
    with the mean available as ``mean`` and the band limit implied by the
    grid and the dealiasing rule in force.
    """

    grid: TorusGrid
    values: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, float)))
        object.__setattr__(
            self, "coefficients", _readonly(np.asarray(self.coefficients, complex))
        )
        if self.values.shape != (self.grid.n,):
            raise ValueError("values shape does not match grid")
        if self.coefficients.shape != (self.grid.n,):
            raise ValueError("coefficients shape does not match grid")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_values(cls, grid: TorusGrid, values) -> "SpectralFunction":
        values = np.asarray(values, dtype=float)
        return cls(grid, values, np.fft.fft(values) / grid.n)

    @classmethod
    def from_coefficients(cls, grid: TorusGrid, coefficients) -> "SpectralFunction":
        c = np.asarray(coefficients, dtype=complex)
        values = np.fft.ifft(c * grid.n).real
        return cls(grid, values, c)

    @classmethod
    def from_callable(cls, grid: TorusGrid, fn: Callable) -> "SpectralFunction":
        return cls.from_values(grid, fn(grid.x))

    @classmethod
    def zero(cls, grid: TorusGrid) -> "SpectralFunction":
        return cls(grid, np.zeros(grid.n), np.zeros(grid.n, dtype=complex))

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "SpectralFunction":
        """Real cosine profile sum_k a_k cos(k x * 2*pi/period) from {k: a_k}.

        Built in coefficient space so unused modes are exactly zero.
        """
        c = np.zeros(grid.n, dtype=complex)
        for k, a in modes.items():
            k = int(k)
            if abs(k) > grid.n // 2 - 1:
                raise ValueError(f"mode {k} not representable on n={grid.n}")
            if k == 0:
                c[0] += a
            else:
                c[k % grid.n] += a / 2.0
                c[-k % grid.n] += a / 2.0
        return cls.from_coefficients(grid, c)

    # -- basic queries ------------------------------------------------------
    @property
    def mean(self) -> float:
        return float(self.coefficients[0].real)

    def roundtrip_error(self) -> float:
        """Relative defect between values and the transform of coefficients."""
        back = np.fft.ifft(self.coefficients * self.grid.n).real
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return float(np.max(np.abs(back - self.values))) / scale

    # -- arithmetic ---------------------------------------------------------
    def _like(self, values, coefficients) -> "SpectralFunction":
        return SpectralFunction(self.grid, values, coefficients)

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        return self._like(self.values + other.values, self.coefficients + other.coefficients)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        return self._like(self.values - other.values, self.coefficients - other.coefficients)

    def __mul__(self, scalar: float) -> "SpectralFunction":
        return self._like(self.values * scalar, self.coefficients * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralFunction":
        return self._like(-self.values, -self.coefficients)


def apply_multiplier(u: SpectralFunction, m) -> SpectralFunction:
    """Apply the Fourier multiplier m(k) to u.

    ``m`` is a callable of the physical wavenumber or an array aligned with
    ``u.grid.wavenumbers``.  The mean mode is multiplied by m(0).  Non-finite
    multiplier values are rejected.
    """
    k = u.grid.wavenumbers
    mk = np.asarray(m(k) if callable(m) else m, dtype=complex)
    if mk.shape != k.shape:
        raise ValueError("multiplier array must match the wavenumber layout")
    if not np.all(np.isfinite(mk.view(float))):
        raise ValueError("multiplier takes a non-finite value on the grid")
    return SpectralFunction.from_coefficients(u.grid, u.coefficients * mk)


def derivative(u: SpectralFunction, order: int = 1) -> SpectralFunction:
    return apply_multiplier(u, lambda k: (1j * k) ** order)


def sobolev_norm(u: SpectralFunction, s: float) -> float:
    """Discrete H^s norm, (period * sum_k (1+k^2)^s |c_k|^2)^(1/2).

    The weight uses the physical wavenumber; with s=0 this matches the
    unnormalized integral of u^2 over one period (so ||cos||_{L^2} = sqrt(pi)
    on the default torus).
    """
    k = u.grid.wavenumbers
    w = (1.0 + k * k) ** s
    return float(np.sqrt(u.grid.period * np.sum(w * np.abs(u.coefficients) ** 2)))


def l2_inner(u: SpectralFunction, v: SpectralFunction) -> float:
    """Unnormalized L^2 pairing over one period."""
    return float(u.grid.period * np.real(np.vdot(u.coefficients, v.coefficients)))


def l2_norm(u: SpectralFunction) -> float:
    return sobolev_norm(u, 0.0)


def lp_project(u: SpectralFunction, j: int) -> SpectralFunction:
    """Dyadic (Littlewood-Paley) block: keep 2^j <= |k| < 2^(j+1); j = -1 keeps |k| < 1."""
    if j < -1:
        raise ValueError("block index must be >= -1")
    k = np.abs(u.grid.wavenumbers)
    if j == -1:
        mask = k < 1.0
    else:
        mask = (k >= 2.0**j) & (k < 2.0 ** (j + 1))
    return SpectralFunction.from_coefficients(u.grid, np.where(mask, u.coefficients, 0.0))


def lp_block_range(grid: TorusGrid) -> range:
    """Block indices j = -1 .. floor(log2(k_max)) covering every mode."""
    return range(-1, int(np.floor(np.log2(grid.k_max))) + 1)


def dealias(u: SpectralFunction, rule: float = 2.0 / 3.0) -> SpectralFunction:
    """Zero every coefficient with |k| > rule * k_max."""
    if not 0.0 < rule <= 1.0:
        raise ValueError("dealiasing rule must lie in (0, 1]")
    if rule == 1.0:
        return u
    k = np.abs(u.grid.wavenumbers)
    keep = k <= rule * u.grid.k_max
    return SpectralFunction.from_coefficients(u.grid, np.where(keep, u.coefficients, 0.0))


def multiply(u: SpectralFunction, v: SpectralFunction, rule: float = 2.0 / 3.0) -> SpectralFunction:
    """Pointwise product, dealiased with the given rule (default 2/3)."""
    w = SpectralFunction.from_values(u.grid, u.values * v.values)
    return dealias(w, rule)


def scale_state(u: SpectralFunction, lam: int, drop_tol: float = 0.0) -> SpectralFunction:
    """The rescaling u_lam(x) = u(lam x)/lam on the same torus (integer lam).

    Mode k of u lands on mode lam*k.  Modes pushed past the grid raise an
    error unless their coefficient is below ``drop_tol`` times the largest
    one, in which case they are dropped.
    """
    if lam < 1:
        raise ValueError("scaling factor must be a positive integer")
    n = u.grid.n
    modes = u.grid.modes
    cmax = float(np.max(np.abs(u.coefficients)))
    c = np.zeros(n, dtype=complex)
    for idx in range(n):
        ck = u.coefficients[idx]
        if abs(ck) == 0.0:
            continue
        k2 = modes[idx] * lam
        if abs(k2) > n // 2 - 1:
            if abs(ck) <= drop_tol * cmax:
                continue
            raise ValueError(f"scaled mode {k2} not representable on n={n}")
        c[k2 % n] += ck / lam
    return SpectralFunction.from_coefficients(u.grid, c)


def export_spectrum_csv(u: SpectralFunction, path) -> None:
    """Write the spectrum as CSV rows (k, re, im), sorted by mode number."""
    modes = u.grid.modes
    order = np.argsort(modes)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,re,im\n")
        for idx in order:
            c = u.coefficients[idx]
            fh.write(f"{modes[idx]},{c.real:.17g},{c.imag:.17g}\n")


def random_band_limited(
    grid: TorusGrid, rng: np.random.Generator, k_band: int, amplitude: float = 1.0
) -> SpectralFunction:
    """Random real function supported on modes 1..k_band with ~unit-size coefficients."""
    c = np.zeros(grid.n, dtype=complex)
    for k in range(1, k_band + 1):
        z = rng.normal() + 1j * rng.normal()
        c[k] = amplitude * z / 2.0
        c[-k % grid.n] = np.conj(c[k])
    return SpectralFunction.from_coefficients(grid, c)
