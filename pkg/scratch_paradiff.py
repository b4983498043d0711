import numpy as np

from muskatlab.spectral import TorusGrid, SpectralFunction, l2_norm, multiply
from muskatlab.geometry import DomainGeometry, Empty, FlatDepth, build_sigma_map, coefficients_from_map
from muskatlab.paradiff import (
    DEFAULT_CUTOFFS, apply_paradiff, bony_remainder, symbol_from_function,
    symbol_from_multiplier, symbol_lambda, symbols_a_a_upper, paralinearize_dn,
    parabolic_step, block_ratios, paradiff_matrix,
)

grid = TorusGrid(128)
cut = DEFAULT_CUTOFFS

# T_1 = Psi(D): cos(3x) unchanged
u = SpectralFunction.from_modes(grid, {3: 1.0})
one = symbol_from_multiplier(grid, lambda xi: 1.0, 0.0)
t1u = apply_paradiff(one, u, cut)
print("T_1 cos3x err:", l2_norm(t1u - u))

# |xi| multiplier: cos3x -> 3cos3x
absd = symbol_from_multiplier(grid, lambda xi: abs(xi), 1.0)
print("T_|xi| cos3x err:", l2_norm(apply_paradiff(absd, u, cut) - 3.0 * u))

# x-only symbol on a high mode: equals lowpass(a)*u per paraproduct reduction
a = SpectralFunction.from_modes(grid, {1: 0.5, 2: 0.25})
uhi = SpectralFunction.from_modes(grid, {32: 1.0})
t = apply_paradiff(symbol_from_function(a), uhi, cut)
# oracle: sum over theta with chi(theta,32)=..., direct block sum
c_direct = np.zeros(grid.n, dtype=complex)
modes = grid.modes
for ti, th in enumerate(modes):
    if abs(a.coefficients[ti]) == 0.0:
        continue
    for mi, mm in enumerate(modes):
        if abs(uhi.coefficients[mi]) == 0.0:
            continue
        k2 = th + mm
        if abs(k2) > grid.n // 2 - 1:
            continue
        w = cut.chi(float(th), float(mm)) * cut.psi(float(mm))
        c_direct[k2 % grid.n] += w * a.coefficients[ti] * uhi.coefficients[mi]
direct = SpectralFunction.from_coefficients(grid, c_direct)
print("x-symbol vs direct block sum:", l2_norm(t - direct))

# Bony identity + constant symbol
c0 = SpectralFunction.from_values(grid, np.full(grid.n, 2.5))
r = bony_remainder(c0, u, cut)
expect = 2.5 * (u - apply_paradiff(one, u, cut))  # c(Id-Psi(D))u ; here = 0
print("R(c, u) vs c(Id-Psi)u:", l2_norm(r - expect))

au = SpectralFunction.from_modes(grid, {1: 1.0})
r2 = bony_remainder(au, au, cut)
lhs = multiply(au, au)
rhs = apply_paradiff(symbol_from_function(au), au, cut) * 2.0 + r2
print("Bony identity (cos*cos):", l2_norm(lhs - rhs))

hi = SpectralFunction.from_modes(grid, {32: 1.0})
r3 = bony_remainder(a, hi, cut)
print("sep supports remainder rel:", l2_norm(r3) / l2_norm(multiply(a, hi)))

# a, A identities on a curved map slice
eta = SpectralFunction.from_modes(grid, {1: 0.2, 3: 0.07})
geom = DomainGeometry(bottom=FlatDepth(1.0), h=0.4)
coeffs = coefficients_from_map(build_sigma_map(eta, geom, 32))
sa, sA = symbols_a_a_upper(coeffs, 10)
for xi in (1.0, 5.0, -17.0):
    va, vA = sa.eval(xi), sA.eval(xi)
    idsum = va + vA + 1j * coeffs.beta[10] * xi
    idprod = va * vA + coeffs.alpha[10] * xi**2
    drho = coeffs.map.drho_dz[10]
    cex = np.min(coeffs.alpha[10] / drho)
    ok = np.min((-va).real) >= cex * abs(xi) - 1e-12
    print(f"xi={xi}: |a+A+ib xi|={np.max(np.abs(idsum)):.2e} |aA+al xi^2|={np.max(np.abs(idprod)):.2e} Re(-a)>=c|xi|: {ok}")

# lambda
lam = symbol_lambda(eta)
print("lambda(3) =", lam.eval(3.0)[0])

# parabolic step: p=|xi|, w0=cos(kx), interval 1 -> e^{-k}cos(kx)
for k in (1, 4):
    w0 = SpectralFunction.from_modes(grid, {k: 1.0})
    w = parabolic_step(absd, w0, None, (0.0, 1.0), 64)
    target = np.exp(-k) * w0
    print(f"parabolic k={k}: rel err {l2_norm(w - target)/l2_norm(target):.2e}")

# paralinearization flat: residual vs dn accuracy
eta0 = SpectralFunction.zero(grid)
f = SpectralFunction.from_modes(grid, {3: 1.0})
main, resid, out = paralinearize_dn(eta0, f, DomainGeometry(bottom=Empty(), h=0.5), m=48)
print("flat paralin residual:", l2_norm(resid), " dn err:", l2_norm(out.g - 3.0 * f))

# amplitude ladder (multimode, infinite depth)
errs = []
amps = [1e-2, 1e-3, 1e-4]
for aa in amps:
    eta = SpectralFunction.from_modes(grid, {1: aa, 2: aa})
    main, resid, out = paralinearize_dn(eta, eta, DomainGeometry(bottom=Empty(), h=0.5), m=64, tol=1e-12)
    errs.append(l2_norm(resid))
print("paralin slope:", np.polyfit(np.log(amps), np.log(errs), 1)[0], errs)

# block ratios for fixed smooth eta
eta = SpectralFunction.from_modes(grid, {1: 0.2, 2: 0.1, 3: 0.05})
main, resid, out = paralinearize_dn(eta, eta, DomainGeometry(bottom=Empty(), h=0.5), m=64)
rows = block_ratios(resid, out.g)
print("block ratios:", [(j, f"{rj:.3g}") for j, _, _, rj in rows])
