"""Instability witnesses: delays that defeat any interior damping.

For the loop without boundary-velocity feedback there is a closed-form
choice of delay, load mass, and gain making lam = sigma an exact root of the
characteristic equation, so a mode grows like e^{sigma t} no matter how
strong the damping. A variant of the construction works even with
boundary-velocity feedback, provided the delayed gain clears a margin.
"""

import numpy as np

from delaycrane import (Grid, InfeasibleWitness, Regime, SimConfig,
                        TensionProfile, Variant, instability_witness_beta0,
                        instability_witness_general, mode_initial_data,
                        mode_solution, simulate)
from delaycrane.diagnostics import fit_exponential_rate

print("== witness without boundary-velocity feedback ==")
sigma, m = 1.0, 1.0
params, root = instability_witness_beta0(sigma, m)
print(f"sigma = {sigma}, m = {m} -> tau = {params.tau:.6f}, "
      f"M = {params.M:.6f}, alpha = {params.alpha:.6f}")
print(f"characteristic residual at lam = sigma: {root.residual:.2e}")

regime = Regime(Variant.BETA0, convergent=False)
_, boundary = mode_solution(sigma, params, regime)
print(f"mode boundary-condition residual: {abs(boundary):.2e}")

print("\nsimulating the growing mode...")
init = mode_initial_data(sigma, params, regime)
config = SimConfig(grid=Grid(100), regime=regime, t_final=4.0)
result = simulate(init, params, TensionProfile.constant(1.0), config)
fit = fit_exponential_rate(result.times, result.series("normH"))
print(f"fitted growth rate = {fit.rate:.5f} (target sigma = {sigma}), "
      f"r^2 = {fit.r_squared:.6f}")

print("\n== witness against boundary-velocity feedback ==")
for alpha in (1.0, 4.0):
    out = instability_witness_general(sigma=1.0, m=1.0, alpha=alpha, beta=0.5)
    if isinstance(out, InfeasibleWitness):
        print(f"alpha = {alpha}: infeasible ({out.message})")
    else:
        p, r = out
        print(f"alpha = {alpha}: destabilizing delay tau = {p.tau:.6f}, "
              f"residual = {r.residual:.2e}")
print("\nthe margin alpha >= beta + sqrt(2)(1 + m/M) separates the two cases")
