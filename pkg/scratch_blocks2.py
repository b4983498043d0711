import numpy as np

from muskatlab.spectral import TorusGrid, SpectralFunction, l2_norm
from muskatlab.geometry import DomainGeometry, Empty
from muskatlab.paradiff import paralinearize_dn, block_ratios


def rough_interface(grid, s, amplitude, k_hi, rng):
    c = np.zeros(grid.n, dtype=complex)
    for k in range(1, k_hi + 1):
        phase = np.exp(2j * np.pi * rng.random())
        c[k] = 0.5 * amplitude * k ** (-s) * phase
        c[-k % grid.n] = np.conj(c[k])
    return SpectralFunction.from_coefficients(grid, c)


rng = np.random.default_rng(42)
for n, m in ((128, 64), (256, 96)):
    grid = TorusGrid(n)
    eta = rough_interface(grid, 2.5, 0.5, int(n / 3), rng)
    main, resid, out = paralinearize_dn(eta, eta, DomainGeometry(bottom=Empty(), h=0.5), m=m, tol=1e-12)
    rows = block_ratios(resid, out.g)
    print(f"n={n} m={m} |g|={l2_norm(out.g):.3e} max|eta'|={np.max(np.abs(np.gradient(eta.values))):.3f}")
    for j, nr, ng, rj in rows:
        print(f"  j={j}: |P_j r|={nr:.3e} |P_j g|={ng:.3e} r_j={rj:.3g}")
