import numpy as np

from muskatlab.spectral import TorusGrid, SpectralFunction, l2_norm
from muskatlab.geometry import DomainGeometry, Empty, FlatDepth
from muskatlab.dn import dn_apply, flat_dn_multiplier

grid = TorusGrid(256)
amps = [1e-2, 1e-3, 1e-4]

for name, geom, depth, modes in [
    ("inf single", DomainGeometry(bottom=Empty(), h=0.5), None, {1: 1.0}),
    ("inf multi", DomainGeometry(bottom=Empty(), h=0.5), None, {1: 1.0, 2: 1.0}),
    ("H=1 single", DomainGeometry(bottom=FlatDepth(1.0), h=0.5), 1.0, {1: 1.0}),
]:
    errs = []
    for a in amps:
        eta = SpectralFunction.from_modes(grid, {k: a * c for k, c in modes.items()})
        out = dn_apply(eta, eta, geom, m=96, tol=1e-12)
        lin = SpectralFunction.from_coefficients(
            grid, eta.coefficients * flat_dn_multiplier(grid.wavenumbers, depth)
        )
        errs.append(l2_norm(out.g - lin))
    slope = np.polyfit(np.log(amps), np.log(errs), 1)[0]
    print(f"{name}: errs={['%.3e' % e for e in errs]} slope={slope:.3f}")
