"""Energy functionals, weighted state norms, and decay-rate estimation.

All spatial integrals use the composite trapezoid rule on the simulation
grid and derivatives use second-order stencils, so the diagnostics carry
the same O(dx^2) accuracy as the solver and the discrete conservation
identity stays clean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CraneParams, Regime, TensionProfile, Variant


class VarpiTooLargeError(ValueError):
    """The weighted quadratic form failed to be positive on a state."""


@dataclass(frozen=True)
class EnergySample:
    """Timestamped diagnostics of one simulated state."""

    t: float
    E0: float
    E1: float
    E_total: float
    normH: float
    conserved: float
    dist_eq: float | None = None


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponent of a log-linear fit v(t) ~ exp(rate * t)."""

    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def grad(y: np.ndarray, dx: float) -> np.ndarray:
    """Second-order y_x: centered inside, one-sided 3-point at the ends."""
    g = np.empty_like(y)
    g[1:-1] = (y[2:] - y[:-2]) / (2.0 * dx)
    g[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dx)
    g[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * dx)
    return g


def _dx_of(y: np.ndarray) -> float:
    return 1.0 / (len(y) - 1)


def energy_E0(state, params: CraneParams, profile: TensionProfile) -> float:
    """Quadratic part of the energy.

    (1/2) [ int (z^2 + a y_x^2 + K tau u^2) dx + m xi^2 + M eta^2 ].
    """
    dx = _dx_of(state.y)
    a = profile.on_nodes(np.linspace(0.0, 1.0, len(state.y)))
    yx = grad(state.y, dx)
    integrand = state.z ** 2 + a * yx ** 2 + params.K * params.tau * state.u ** 2
    integral = np.trapezoid(integrand, dx=dx)
    return 0.5 * float(integral + params.m * state.xi ** 2
                       + params.M * state.eta ** 2)


def conserved_functional(state, params: CraneParams, regime: Regime) -> float:
    """Linear functional whose value is constant along every trajectory.

    int (sigma y + z + alpha tau u) dx + m xi + M eta + g y(0),
    g = beta - alpha (general) or -alpha (beta0).
    """
    dx = _dx_of(state.y)
    integrand = (params.sigma * state.y + state.z
                 + params.alpha * params.tau * state.u)
    integral = np.trapezoid(integrand, dx=dx)
    if regime.variant is Variant.GENERAL:
        g = params.beta - params.alpha
    else:
        g = -params.alpha
    return float(integral + params.m * state.xi + params.M * state.eta
                 + g * state.y[0])


def energy_E1(state, params: CraneParams, regime: Regime) -> float:
    """Rank-one part of the energy: half the squared conserved bracket."""
    b = conserved_functional(state, params, regime)
    return 0.5 * b * b


def energy_total(state, params: CraneParams, profile: TensionProfile,
                 regime: Regime) -> float:
    return energy_E0(state, params, profile) + energy_E1(state, params, regime)


def state_inner_H(state, other, params: CraneParams, profile: TensionProfile,
                  regime: Regime, varpi: float | None = None) -> float:
    """Weighted inner product of two states.

    int (a y_x y~_x + z z~) dx + K tau int u u~ dx + m xi xi~ + M eta eta~
    + varpi * bracket(state) * bracket(other).
    """
    if varpi is None:
        varpi = params.varpi
    dx = _dx_of(state.y)
    a = profile.on_nodes(np.linspace(0.0, 1.0, len(state.y)))
    gx = grad(state.y, dx)
    hx = grad(other.y, dx)
    integrand = a * gx * hx + state.z * other.z \
        + params.K * params.tau * state.u * other.u
    value = np.trapezoid(integrand, dx=dx) \
        + params.m * state.xi * other.xi + params.M * state.eta * other.eta
    bs = conserved_functional(state, params, regime)
    bo = conserved_functional(other, params, regime)
    return float(value + varpi * bs * bo)


def state_norm_H(state, params: CraneParams, profile: TensionProfile,
                 regime: Regime, other=None, varpi: float | None = None) -> float:
    """Weighted norm (or inner product when ``other`` is given)."""
    if other is not None:
        return state_inner_H(state, other, params, profile, regime, varpi)
    q = state_inner_H(state, state, params, profile, regime, varpi)
    if q < 0.0:
        raise VarpiTooLargeError(f"squared norm {q} < 0; reduce varpi")
    return float(np.sqrt(q))


def distance_to_equilibrium(state, zeta: float, params: CraneParams,
                            profile: TensionProfile, regime: Regime,
                            varpi: float | None = None) -> float:
    """Weighted distance between the state and the constant state zeta."""
    from .solver import CraneState  # deferred: solver imports diagnostics

    diff = CraneState(t=state.t, y=state.y - zeta, z=state.z.copy(),
                      u=state.u.copy())
    return state_norm_H(diff, params, profile, regime, varpi=varpi)


def auto_varpi(params: CraneParams, profile: TensionProfile, regime: Regime,
               n: int = 64, probes: int = 64, seed: int = 0) -> float:
    """Largest safe cross-term weight, found by a geometric scan.

    Scans varpi = 1, 1/2, 1/4, ... down to 2^-30 and returns half the first
    value for which the quadratic form stays positive on a randomized probe
    basis of states.  Falls back to 2^-30 if nothing passes.
    """
    from .solver import CraneState

    rng = np.random.default_rng(seed)
    states = []
    for _ in range(probes):
        y = rng.standard_normal(n + 1)
        z = rng.standard_normal(n + 1)
        u = rng.standard_normal(n + 1)
        states.append(CraneState(t=0.0, y=y, z=z, u=u))
    varpi = 1.0
    for _ in range(31):
        ok = True
        for st in states:
            q = state_inner_H(st, st, params, profile, regime, varpi=varpi)
            base = state_inner_H(st, st, params, profile, regime, varpi=0.0)
            if q <= 1e-12 * max(base, 1.0):
                ok = False
                break
        if ok:
            return varpi / 2.0
        varpi /= 2.0
    return 2.0 ** -30


def fit_exponential_rate(ts, vs, window: tuple[float, float] | None = None,
                         tail_fraction: float = 0.5) -> RateFit:
    """Fit ln v = intercept + rate * t over a time window.

    Defaults to the last ``tail_fraction`` of the samples, skipping
    transients.  Requires at least 10 strictly positive samples in the
    window.
    """
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if window is None:
        t_lo = ts[0] + (1.0 - tail_fraction) * (ts[-1] - ts[0])
        window = (t_lo, ts[-1])
    mask = (ts >= window[0]) & (ts <= window[1])
    t = ts[mask]
    v = vs[mask]
    if len(t) < 10:
        raise ValueError(f"need >= 10 samples in window, got {len(t)}")
    if np.any(v <= 0.0):
        raise ValueError("non-positive values in fit window")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    resid = logv - (slope * t + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(rate=float(slope), intercept=float(intercept),
                   r_squared=r2, window=(float(t[0]), float(t[-1])))
