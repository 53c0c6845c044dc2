"""Characteristic roots, the spectral abscissa, and a stability sweep.

Finds the root cluster of the damped closed loop, compares the slowest
root's real part with the decay rate fitted from a time-domain run, and
scans the abscissa over a small (alpha, tau) grid to show where the loop
loses stability.
"""

import numpy as np

from delaycrane import (CharProblem, CraneParams, Grid, InitialData, Regime,
                        SimConfig, TensionProfile, Variant, find_roots,
                        simulate, spectral_abscissa, stability_scan)
from delaycrane.diagnostics import fit_exponential_rate

params = CraneParams(m=1.0, M=1.0, alpha=0.5, beta=1.5, sigma=1.0,
                     tau=0.5, K=1.0)
problem = CharProblem(variant=Variant.GENERAL, params=params)

print("== characteristic roots (default region) ==")
roots = find_roots(problem)
for r in roots:
    tag = "  <- equilibrium mode" if r.lam == 0 else ""
    print(f"lam = {r.lam.real:+.6f} {r.lam.imag:+.6f}j  "
          f"residual = {r.residual:.1e}{tag}")
omega = -spectral_abscissa(roots)
print(f"\nspectral abscissa (lam = 0 excluded): {-omega:.6f}")

print("\n== time-domain cross-check ==")
regime = Regime(Variant.GENERAL)
init = InitialData.from_values(y0=lambda x: np.sin(np.pi * x))
config = SimConfig(grid=Grid(200), regime=regime, t_final=40.0)
result = simulate(init, params, TensionProfile.constant(1.0), config)
fit = fit_exponential_rate(result.times, result.series("dist_eq"))
print(f"fitted decay rate of dist_eq = {fit.rate:.5f} "
      f"(spectral prediction {-omega:.5f}), r^2 = {fit.r_squared:.5f}")

print("\n== stability sweep over (alpha, tau) ==")
scan = stability_scan(problem,
                      ("alpha", np.array([0.5, 1.0, 2.0, 4.0])),
                      ("tau", np.array([0.25, 0.5, 1.0])),
                      region=(-2.0, 2.0, -12.0, 12.0))
header = "alpha\\tau " + "".join(f"{t:>10.2f}" for t in scan.axis2_values)
print(header)
for a, row in zip(scan.axis1_values, scan.abscissa):
    cells = "".join(f"{v:>10.4f}" for v in row)
    print(f"{a:>9.2f} {cells}")
print("(negative = exponentially stable; the loop is damped while "
      "alpha < beta)")
