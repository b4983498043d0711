import time

import numpy as np

from muskatlab.spectral import (
    TorusGrid, SpectralFunction, l2_norm, l2_inner, random_band_limited, sobolev_norm,
)
from muskatlab.geometry import DomainGeometry, Empty, FlatDepth
from muskatlab.dn import dn_apply, DNOperator, flat_dn_multiplier

t0 = time.time()
grid = TorusGrid(256)
geom_inf = DomainGeometry(bottom=Empty(), h=0.5)
geom_fin = DomainGeometry(bottom=FlatDepth(1.0), h=0.5)

# curved interface, f = eta: iterations + max B
for amp in (0.1, 0.3):
    eta = SpectralFunction.from_modes(grid, {1: amp, 2: amp / 2})
    out = dn_apply(eta, eta, geom_inf, m=64)
    print(f"amp={amp}: iters={out.iterations} res={out.residual:.1e} "
          f"maxB={np.max(out.b_field.values):.4f} (Gf,f)={l2_inner(out.g, eta):.4e}")

# quadratic form nonnegativity on random band-limited f
rng = np.random.default_rng(0)
eta = SpectralFunction.from_modes(grid, {1: 0.2, 3: 0.05})
op = DNOperator(eta, geom_fin, m=48)
worst = 0.0
for _ in range(5):
    f = random_band_limited(grid, rng, 20)
    g, _ = op.apply_g(f)
    q = l2_inner(g, f)
    worst = min(worst, q)
    print(f"(Gf,f) = {q:.6e}  (|f|_2={l2_norm(f):.3f})")
print("worst quadratic form:", worst)

# map independence: sigma vs paper map, high-frequency f (supported near surface)
eta = SpectralFunction.from_modes(grid, {1: 0.05})
geom = DomainGeometry(bottom=FlatDepth(2.0), h=0.7)
f = SpectralFunction.from_modes(grid, {12: 1.0})
for m in (48, 96):
    g_sig = dn_apply(eta, f, geom, m=m, map_kind="sigma").g
    g_pap = dn_apply(eta, f, geom, m=m, map_kind="paper").g
    print(f"m={m}: |sigma-paper| rel = {l2_norm(g_sig - g_pap)/l2_norm(g_sig):.3e}")

# empirical Lipschitz in eta
eta1 = SpectralFunction.from_modes(grid, {1: 0.15, 2: 0.05})
f = SpectralFunction.from_modes(grid, {2: 1.0, 3: 0.5})
for dn_m, n in ((48, 256), (96, 256)):
    deltas = []
    for d in (1e-2, 1e-3):
        eta2 = eta1 + SpectralFunction.from_modes(grid, {1: d, 3: d / 2})
        g1 = dn_apply(eta1, f, geom_fin, m=dn_m).g
        g2 = dn_apply(eta2, f, geom_fin, m=dn_m).g
        num = sobolev_norm(g1 - g2, 0.5)
        den = sobolev_norm(eta1 - eta2, 1.5) * sobolev_norm(f, 1.5)
        deltas.append(num / den)
    print(f"m={dn_m}: Lipschitz C estimates {deltas}")

print(f"elapsed {time.time()-t0:.1f}s")
