"""Matrix-free Krylov solvers with residual certificates.

Kept in-house (rather than wrapping a library) so every solve reports its
relative-residual history in the format the run manifests and error records
expect, and so the operators can stay plain callables on ndarrays of any
shape.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from .errors import SolverError


@dataclasses.dataclass(frozen=True)
class KrylovResult:
    x: np.ndarray
    iterations: int
    relres: float
    history: tuple


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.vdot(a.ravel(), b.ravel()).real)


def pcg(
    apply_a: Callable,
    b: np.ndarray,
    apply_m: Callable | None = None,
    tol: float = 1e-10,
    maxiter: int = 500,
    x0: np.ndarray | None = None,
) -> KrylovResult:
    """Preconditioned conjugate gradients for a symmetric positive operator."""
    bnorm = np.linalg.norm(b.ravel())
    if bnorm == 0.0:
        return KrylovResult(np.zeros_like(b), 0, 0.0, (0.0,))
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_a(x) if x0 is not None else b.copy()
    z = apply_m(r) if apply_m is not None else r
    p = z.copy()
    rz = _dot(r, z)
    history = [np.linalg.norm(r.ravel()) / bnorm]
    if history[-1] <= tol:
        return KrylovResult(x, 0, history[-1], tuple(history))
    for it in range(1, maxiter + 1):
        ap = apply_a(p)
        alpha = rz / _dot(p, ap)
        x = x + alpha * p
        r = r - alpha * ap
        relres = np.linalg.norm(r.ravel()) / bnorm
        history.append(relres)
        if relres <= tol:
            return KrylovResult(x, it, relres, tuple(history))
        z = apply_m(r) if apply_m is not None else r
        rz_new = _dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG stalled at relative residual {history[-1]:.3e} after {maxiter} iterations",
        residual_history=history,
    )


def bicgstab(
    apply_a: Callable,
    b: np.ndarray,
    apply_m: Callable | None = None,
    tol: float = 1e-10,
    maxiter: int = 500,
) -> KrylovResult:
    """Preconditioned BiCGSTAB for mildly nonsymmetric operators."""
    ident = (lambda v: v) if apply_m is None else apply_m
    bnorm = np.linalg.norm(b.ravel())
    if bnorm == 0.0:
        return KrylovResult(np.zeros_like(b), 0, 0.0, (0.0,))
    x = np.zeros_like(b)
    r = b.copy()
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    history = [1.0]
    for it in range(1, maxiter + 1):
        rho_new = np.vdot(r_hat.ravel(), r.ravel())
        if rho_new == 0.0:
            break
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        phat = ident(p)
        v = apply_a(phat)
        alpha = rho / np.vdot(r_hat.ravel(), v.ravel())
        s = r - alpha * v
        if np.linalg.norm(s.ravel()) / bnorm <= tol:
            x = x + alpha * phat
            history.append(np.linalg.norm(s.ravel()) / bnorm)
            return KrylovResult(x, it, history[-1], tuple(history))
        shat = ident(s)
        t = apply_a(shat)
        omega = np.vdot(t.ravel(), s.ravel()) / np.vdot(t.ravel(), t.ravel())
        x = x + alpha * phat + omega * shat
        r = s - omega * t
        relres = np.linalg.norm(r.ravel()) / bnorm
        history.append(float(relres))
        if relres <= tol:
            return KrylovResult(x, it, float(relres), tuple(history))
    raise SolverError(
        f"BiCGSTAB stalled at relative residual {history[-1]:.3e} after {maxiter} iterations",
        residual_history=history,
    )
