"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``MUSKATLAB_BACKEND`` (``"numba"`` or ``"numpy"``, default ``"numba"``).
If numba is unavailable the numpy path is used silently.  Both
implementations of every kernel are importable for benchmarking
(``benchmarks/bench_kernels.py``).
"""

import math
import os

import numpy as np

_requested = os.environ.get("MUSKATLAB_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"MUSKATLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

_HAVE_NUMBA = False
if _requested == "numba":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# smooth cutoff ramps
#
# S(t) is the standard C-infinity step: 0 for t<=0, 1 for t>=1.
def _smooth_step_scalar(t):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


def smooth_step(t):
    """Vectorized C^inf ramp: 0 for t<=0, 1 for t>=1, smooth between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def psi_lowcut(xi, lo=0.2, hi=0.25):
    """High-pass cutoff: 0 for |xi|<=lo, 1 for |xi|>=hi (defaults 1/5, 1/4)."""
    return smooth_step((np.abs(xi) - lo) / (hi - lo))


def chi_pair(theta, xi, eps1=0.1, eps2=0.2):
    """Frequency-pair cutoff: 1 for |theta|<=eps1|xi|, 0 for |theta|>=eps2|xi|."""
    theta = np.asarray(theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    axi = np.abs(xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(axi > 0.0, np.abs(theta) / np.where(axi > 0, axi, 1.0), np.inf)
    return 1.0 - smooth_step((ratio - eps1) / (eps2 - eps1))


# ---------------------------------------------------------------------------
# kernel 1: batched tridiagonal solve (Thomas algorithm)
#
# One independent symmetric-positive system per Fourier mode; used by the
# flat-geometry preconditioner on every CG iteration.  Arrays are laid out
# (n_systems, m): dl is the subdiagonal (dl[:,0] unused), du the
# superdiagonal (du[:,-1] unused), rhs may be complex.
def tridiag_solve_many_numpy(dl, d, du, rhs):
    n_sys, m = d.shape
    c = np.empty((n_sys, m - 1), dtype=d.dtype)
    y = np.empty(rhs.shape, dtype=rhs.dtype)
    c[:, 0] = du[:, 0] / d[:, 0]
    y[:, 0] = rhs[:, 0] / d[:, 0]
    for j in range(1, m):
        denom = d[:, j] - dl[:, j] * c[:, j - 1]
        if j < m - 1:
            c[:, j] = du[:, j] / denom
        y[:, j] = (rhs[:, j] - dl[:, j] * y[:, j - 1]) / denom
    for j in range(m - 2, -1, -1):
        y[:, j] -= c[:, j] * y[:, j + 1]
    return y


if _HAVE_NUMBA:

    @njit(cache=True)
    def _tridiag_solve_many_nb(dl, d, du, rhs, out):
        n_sys, m = d.shape
        for s in range(n_sys):
            c = np.empty(m - 1, dtype=d.dtype)
            c[0] = du[s, 0] / d[s, 0]
            out[s, 0] = rhs[s, 0] / d[s, 0]
            for j in range(1, m):
                denom = d[s, j] - dl[s, j] * c[j - 1]
                if j < m - 1:
                    c[j] = du[s, j] / denom
                out[s, j] = (rhs[s, j] - dl[s, j] * out[s, j - 1]) / denom
            for j in range(m - 2, -1, -1):
                out[s, j] -= c[j] * out[s, j + 1]

    def tridiag_solve_many_numba(dl, d, du, rhs):
        out = np.empty(rhs.shape, dtype=rhs.dtype)
        _tridiag_solve_many_nb(
            np.ascontiguousarray(dl),
            np.ascontiguousarray(d),
            np.ascontiguousarray(du),
            np.ascontiguousarray(rhs),
            out,
        )
        return out

else:
    tridiag_solve_many_numba = None


# ---------------------------------------------------------------------------
# kernel 2: paradifferential quantization matrix
#
# K[k, m] = chi(k - m, xi_m) * ahat[(k - m) mod n, m] * psi(xi_m)
# acting on Fourier coefficients; ahat is the DFT in x of the symbol at each
# input frequency xi_m.  Modes use the fft layout; entries with an
# unrepresentable transfer frequency |k - m| > n/2 - 1 are zero (the chi
# support makes them vanish anyway for band-limited inputs).
def paradiff_matrix_numpy(ahat, modes, scale, lo, hi, eps1, eps2):
    n = modes.shape[0]
    th = modes[:, None] - modes[None, :]
    xi = scale * modes[None, :].astype(float)
    valid = np.abs(th) <= n // 2 - 1
    chi = chi_pair(scale * th, xi, eps1, eps2)
    psi = psi_lowcut(xi, lo, hi)
    gathered = ahat[th % n, np.arange(n)[None, :]]
    return np.where(valid, chi * psi * gathered, 0.0).astype(np.complex128)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _paradiff_matrix_nb(ahat, modes, scale, lo, hi, eps1, eps2, out):
        n = modes.shape[0]
        half = n // 2 - 1
        for mi in range(n):
            xi = scale * modes[mi]
            axi = abs(xi)
            # psi ramp
            t = (axi - lo) / (hi - lo)
            if t <= 0.0:
                continue
            elif t >= 1.0:
                psi = 1.0
            else:
                ea = math.exp(-1.0 / t)
                eb = math.exp(-1.0 / (1.0 - t))
                psi = ea / (ea + eb)
            for ki in range(n):
                th = modes[ki] - modes[mi]
                if abs(th) > half:
                    continue
                r = (abs(scale * th) / axi - eps1) / (eps2 - eps1)
                if r >= 1.0:
                    continue
                elif r <= 0.0:
                    chi = 1.0
                else:
                    ea = math.exp(-1.0 / r)
                    eb = math.exp(-1.0 / (1.0 - r))
                    chi = 1.0 - ea / (ea + eb)
                out[ki, mi] = chi * psi * ahat[th % n, mi]

    def paradiff_matrix_numba(ahat, modes, scale, lo, hi, eps1, eps2):
        out = np.zeros(ahat.shape, dtype=np.complex128)
        _paradiff_matrix_nb(
            np.ascontiguousarray(ahat),
            np.ascontiguousarray(modes),
            float(scale),
            float(lo),
            float(hi),
            float(eps1),
            float(eps2),
            out,
        )
        return out

else:
    paradiff_matrix_numba = None


if BACKEND == "numba":
    tridiag_solve_many = tridiag_solve_many_numba
    paradiff_matrix = paradiff_matrix_numba
else:
    tridiag_solve_many = tridiag_solve_many_numpy
    paradiff_matrix = paradiff_matrix_numpy
