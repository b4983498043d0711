import time

import numpy as np

from muskatlab.spectral import TorusGrid, SpectralFunction, l2_norm
from muskatlab.geometry import DomainGeometry, Empty, FlatDepth
from muskatlab.dn import dn_apply, flat_dn_multiplier

t0 = time.time()
grid = TorusGrid(256)
eta0 = SpectralFunction.zero(grid)

for depth_name, geom, depth in [
    ("H=1", DomainGeometry(bottom=FlatDepth(1.0), h=0.5), 1.0),
    ("inf", DomainGeometry(bottom=Empty(), h=0.5), None),
]:
    print(f"--- depth {depth_name}")
    for m in (32, 64, 128):
        errs = []
        for k in (1, 2, 3, 5, 8):
            f = SpectralFunction.from_modes(grid, {k: 1.0})
            out = dn_apply(eta0, f, geom, m=m)
            target = SpectralFunction.from_coefficients(
                grid, f.coefficients * flat_dn_multiplier(grid.wavenumbers, depth)
            )
            rel = l2_norm(out.g - target) / l2_norm(target)
            errs.append(rel)
            if m == 64:
                print(f"  m={m} k={k}: rel={rel:.3e} iters={out.iterations} res={out.residual:.1e}")
        print(f"  m={m}: max rel={max(errs):.3e}")
print(f"elapsed {time.time()-t0:.1f}s")
