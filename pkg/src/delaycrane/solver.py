"""Method-of-lines solver for the delayed overhead-crane system.

Space: conservative centered second differences for (a y_x)_x with
midpoint-averaged tension, one-sided 4-point boundary gradients, and a
second-order upwind-biased stencil for the delay transport channel
tau u_t + u_x = 0 (inflow u(0, t) = y_t(0, t)).  Every piece is second
order, so the conserved bracket and the sampled energies converge at
O(dx^2).  Time: classical 4-stage Runge-Kutta under a CFL bound combining
the wave speed sqrt(a) and the transport speed 1/tau.

The semigroup is linear, so growing states in the non-convergent regimes
are expected outputs: blow-up is reported as an event, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .model import (CraneParams, DegenerateParametersError, InitialData,
                    Regime, TensionProfile, ZetaFormula, equilibrium_constant)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of N intervals on [0, 1]."""

    N: int

    def __post_init__(self):
        if self.N < 3:
            raise ValueError(f"grid too coarse: N={self.N} < 3")

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)


@dataclass
class CraneState:
    """Discrete state (y, z, u, xi, eta) at time t.

    xi and eta are the boundary velocities and always equal z[0] and z[-1];
    they are exposed as properties so the invariant holds by construction.
    The transport inflow u[0] = xi is re-imposed after every accepted step.
    """

    t: float
    y: np.ndarray
    z: np.ndarray
    u: np.ndarray

    @property
    def xi(self) -> float:
        return float(self.z[0])

    @property
    def eta(self) -> float:
        return float(self.z[-1])

    def copy(self) -> "CraneState":
        return CraneState(t=self.t, y=self.y.copy(), z=self.z.copy(),
                          u=self.u.copy())

    def is_finite(self, threshold: float = 1e12) -> bool:
        for arr in (self.y, self.z, self.u):
            if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > threshold:
                return False
        return True


@dataclass(frozen=True)
class SimConfig:
    grid: Grid
    regime: Regime
    cfl: float = 0.5
    t_final: float = 20.0
    sample_every: int = 20
    tol_conv: float = 1e-3
    force: bool = False
    blowup_threshold: float = 1e12


@dataclass(frozen=True)
class SimEvent:
    kind: str  # "blowup" | "converged" | "hypothesis-violation"
    t: float
    detail: str = ""


@dataclass
class SimResult:
    samples: list[diagnostics.EnergySample]
    final_state: CraneState
    events: list[SimEvent] = field(default_factory=list)
    zeta: float | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)


def time_step(config: SimConfig, params: CraneParams,
              profile: TensionProfile) -> float:
    """CFL bound: wave speed sqrt(max a) and transport speed 1/tau."""
    dx = config.grid.dx
    wave = dx / np.sqrt(profile.max_value)
    transport = params.tau * dx
    return config.cfl * min(wave, transport)


def discretize(init: InitialData, profile: TensionProfile, grid: Grid,
               params: CraneParams | None = None,
               tau: float | None = None) -> CraneState:
    """Sample initial data on the grid: y = y0(x), z = y1(x),
    u = history(-x * tau).  The history map needs the delay; pass either the
    full params or tau."""
    if params is not None:
        tau = params.tau
    if tau is None:
        raise ValueError("discretize needs params or tau for the history map")
    x = grid.nodes
    y = np.asarray(init.y0(x), dtype=float).copy()
    z = np.asarray(init.y1(x), dtype=float).copy()
    u = np.asarray(init.history(-tau * x), dtype=float).copy()
    return CraneState(t=0.0, y=y, z=z, u=u)


def _rhs_arrays(y, z, u, a, a_half, dx, params: CraneParams, beta_eff: float):
    sigma = params.sigma
    dy = z.copy()
    dz = np.empty_like(z)
    dz[1:-1] = (a_half[1:] * (y[2:] - y[1:-1])
                - a_half[:-1] * (y[1:-1] - y[:-2])) / dx ** 2 \
        - sigma * z[1:-1]
    g0 = a[0] * (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) \
        / (6.0 * dx)
    g1 = a[-1] * (11.0 * y[-1] - 18.0 * y[-2] + 9.0 * y[-3] - 2.0 * y[-4]) \
        / (6.0 * dx)
    dxi = (g0 + params.alpha * u[-1] - beta_eff * z[0]) / params.m
    deta = -g1 / params.M
    dz[0] = dxi
    dz[-1] = deta
    du = np.empty_like(u)
    c = 1.0 / (2.0 * dx * params.tau)
    du[2:] = -(3.0 * u[2:] - 4.0 * u[1:-1] + u[:-2]) * c
    du[1] = -(u[2] - u[0]) * c  # centered closure at the first interior node
    du[0] = dxi                 # inflow rides on the platform velocity
    return dy, dz, du


def rhs(state: CraneState, params: CraneParams, profile: TensionProfile,
        regime: Regime) -> CraneState:
    """Time derivative of the state, packaged as a CraneState at the same t."""
    grid = Grid(len(state.y) - 1)
    a = profile.on_nodes(grid.nodes)
    a_half = 0.5 * (a[:-1] + a[1:])
    dy, dz, du = _rhs_arrays(state.y, state.z, state.u, a, a_half, grid.dx,
                             params, params.beta_effective(regime))
    return CraneState(t=state.t, y=dy, z=dz, u=du)


def step(state: CraneState, params: CraneParams, profile: TensionProfile,
         regime: Regime, dt: float) -> CraneState:
    """One classical RK4 step; restores u[0] = xi afterwards."""
    grid = Grid(len(state.y) - 1)
    a = profile.on_nodes(grid.nodes)
    a_half = 0.5 * (a[:-1] + a[1:])
    new = _rk4(state.y, state.z, state.u, a, a_half, grid.dx, params,
               params.beta_effective(regime), dt)
    y, z, u = new
    u[0] = z[0]
    return CraneState(t=state.t + dt, y=y, z=z, u=u)


def _rk4(y, z, u, a, a_half, dx, params, beta_eff, dt):
    k1 = _rhs_arrays(y, z, u, a, a_half, dx, params, beta_eff)
    k2 = _rhs_arrays(y + 0.5 * dt * k1[0], z + 0.5 * dt * k1[1],
                     u + 0.5 * dt * k1[2], a, a_half, dx, params, beta_eff)
    k3 = _rhs_arrays(y + 0.5 * dt * k2[0], z + 0.5 * dt * k2[1],
                     u + 0.5 * dt * k2[2], a, a_half, dx, params, beta_eff)
    k4 = _rhs_arrays(y + dt * k3[0], z + dt * k3[1], u + dt * k3[2],
                     a, a_half, dx, params, beta_eff)
    c = dt / 6.0
    return tuple(v + c * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
                 for v, a1, a2, a3, a4 in zip((y, z, u), k1, k2, k3, k4))


def simulate(init: InitialData, params: CraneParams, profile: TensionProfile,
             config: SimConfig) -> SimResult:
    """Integrate to t_final, sampling diagnostics every ``sample_every`` steps.

    Records a "converged" event at the first sample whose distance to the
    equilibrium constant drops below tol_conv, and a "blowup" event (with
    the last finite state kept as final) if any entry leaves [-1e12, 1e12].
    """
    from .model import validate_params

    events: list[SimEvent] = []
    report = validate_params(params, profile, config.regime)
    if report and not config.force:
        raise ValueError("hypotheses violated (pass force=True to run anyway): "
                         + "; ".join(report))
    for item in report:
        events.append(SimEvent(kind="hypothesis-violation", t=0.0, detail=item))

    try:
        zeta = equilibrium_constant(init, params, config.regime,
                                    ZetaFormula.CONSERVATION,
                                    n=config.grid.N)
    except DegenerateParametersError:
        zeta = None

    state = discretize(init, profile, config.grid, params=params)
    a = profile.on_nodes(config.grid.nodes)
    a_half = 0.5 * (a[:-1] + a[1:])
    dx = config.grid.dx
    beta_eff = params.beta_effective(config.regime)

    dt_max = time_step(config, params, profile)
    n_steps = max(1, int(np.ceil(config.t_final / dt_max - 1e-12)))
    dt = config.t_final / n_steps

    samples = [_diagnose(state, params, profile, config.regime, zeta)]
    converged = False
    y, z, u = state.y, state.z, state.u
    t = 0.0
    for k in range(1, n_steps + 1):
        y, z, u = _rk4(y, z, u, a, a_half, dx, params, beta_eff, dt)
        u[0] = z[0]
        t = k * dt
        if not (np.all(np.isfinite(z)) and np.abs(z).max() <= config.blowup_threshold
                and np.abs(y).max() <= config.blowup_threshold
                and np.abs(u).max() <= config.blowup_threshold):
            events.append(SimEvent(kind="blowup", t=t,
                                   detail=f"state left +-{config.blowup_threshold:g}"))
            break
        state = CraneState(t=t, y=y, z=z, u=u)
        if k % config.sample_every == 0 or k == n_steps:
            s = _diagnose(state, params, profile, config.regime, zeta)
            samples.append(s)
            if (not converged and s.dist_eq is not None
                    and s.dist_eq < config.tol_conv):
                converged = True
                events.append(SimEvent(kind="converged", t=t,
                                       detail=f"dist_eq < {config.tol_conv:g}"))
    return SimResult(samples=samples, final_state=state, events=events,
                     zeta=zeta)


def _diagnose(state: CraneState, params, profile, regime,
              zeta) -> diagnostics.EnergySample:
    e0 = diagnostics.energy_E0(state, params, profile)
    e1 = diagnostics.energy_E1(state, params, regime)
    norm = diagnostics.state_norm_H(state, params, profile, regime)
    cons = diagnostics.conserved_functional(state, params, regime)
    dist = None
    if zeta is not None:
        dist = diagnostics.distance_to_equilibrium(state, zeta, params,
                                                   profile, regime)
    return diagnostics.EnergySample(t=state.t, E0=e0, E1=e1, E_total=e0 + e1,
                                    normH=norm, conserved=cons, dist_eq=dist)


# -- separable-mode solutions (constant tension a = 1) -----------------------

def _mode_coefficients(lam: complex, params: CraneParams, regime: Regime):
    """Return (s, A, B, k1, k2) of the mode f(x) = k1 e^{-sx} + k2 e^{sx}.

    s = sqrt(lam^2 + sigma lam) on the principal branch; (k1, k2) satisfy
    the x = 0 boundary condition exactly, normalized to max(|k1|, |k2|) = 1.
    The degenerate s = 0 case (lam in {0, -sigma}) uses the affine limit
    f(x) = k1 + k2 x.
    """
    lam = complex(lam)
    s = np.sqrt(lam * (lam + params.sigma) + 0j)
    beta_eff = params.beta_effective(regime)
    A = lam * (params.alpha * np.exp(-lam * params.tau)
               - params.m * lam - beta_eff)
    B = params.M * lam * lam
    if abs(s) < 1e-9:
        k1, k2 = 1.0 + 0j, -A  # f = k1 + k2 x; f_x(0) + A f(0) = 0
    else:
        k1, k2 = A + s, s - A  # -s k1 + s k2 + A (k1 + k2) = 0
    scale = max(abs(k1), abs(k2))
    if scale > 0.0:
        k1, k2 = k1 / scale, k2 / scale
    return s, A, B, k1, k2


def mode_solution(lam: complex, params: CraneParams, regime: Regime,
                  grid: Grid | None = None):
    """Construct the separable mode for constant tension a = 1.

    Returns (f, boundary_residual): f sampled on the grid (complex) and the
    value of the x = 1 boundary condition f_x(1) + M lam^2 f(1), which
    vanishes exactly when lam solves the characteristic equation.
    """
    if grid is None:
        grid = Grid(200)
    s, A, B, k1, k2 = _mode_coefficients(lam, params, regime)
    x = grid.nodes
    if abs(s) < 1e-9:
        f = k1 + k2 * x
        residual = k2 + B * (k1 + k2)
    else:
        f = k1 * np.exp(-s * x) + k2 * np.exp(s * x)
        em, ep = np.exp(-s), np.exp(s)
        residual = (-s * k1 * em + s * k2 * ep) + B * (k1 * em + k2 * ep)
    return f, complex(residual)


def mode_initial_data(lam: complex, params: CraneParams,
                      regime: Regime) -> InitialData:
    """Initial data injecting the real part of the mode e^{lam t} f(x).

    y0 = Re f, y1 = Re(lam f), and the velocity history matches
    y_t(0, s) = Re(lam e^{lam s} f(0)) so u starts on the same mode.
    """
    lam = complex(lam)
    s, A, B, k1, k2 = _mode_coefficients(lam, params, regime)

    if abs(s) < 1e-9:
        def f_of(x):
            return k1 + k2 * np.asarray(x, dtype=float)
    else:
        def f_of(x):
            x = np.asarray(x, dtype=float)
            return k1 * np.exp(-s * x) + k2 * np.exp(s * x)

    f0 = complex(f_of(np.array(0.0)))
    return InitialData(
        y0=lambda x: np.real(f_of(x)),
        y1=lambda x: np.real(lam * f_of(x)),
        history=lambda t: np.real(lam * np.exp(lam * np.asarray(t, dtype=float))
                                  * f0),
    )
