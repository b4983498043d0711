import numpy as np

from muskatlab.spectral import TorusGrid, SpectralFunction, l2_norm
from muskatlab.geometry import DomainGeometry, Empty
from muskatlab.paradiff import paralinearize_dn, block_ratios

grid = TorusGrid(128)
eta = SpectralFunction.from_modes(grid, {1: 0.2, 2: 0.1, 3: 0.05})
for m, tol in ((64, 1e-10), (128, 1e-12)):
    main, resid, out = paralinearize_dn(eta, eta, DomainGeometry(bottom=Empty(), h=0.5), m=m, tol=tol)
    rows = block_ratios(resid, out.g)
    print(f"m={m} tol={tol}  |g|={l2_norm(out.g):.3e}")
    for j, nr, ng, rj in rows:
        print(f"  j={j}: |P_j r|={nr:.3e} |P_j g|={ng:.3e} (rel {ng/l2_norm(out.g):.1e}) r_j={rj:.3g}")
