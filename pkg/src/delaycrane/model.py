"""Domain types and hypothesis checks for the delayed overhead-crane system.

The plant is a wave equation on [0, 1] for the cable displacement y(x, t),
with a platform of mass m at x = 0 and a load of mass M at x = 1.  The
platform actuation uses the boundary velocity with a delay tau, realized
through the transport variable u(x, t) = y_t(0, t - x*tau), plus an interior
damping term sigma * y_t.  Everything downstream (solver, diagnostics,
spectral analysis) consumes the value types defined here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np


class Variant(Enum):
    """Which closed-loop system: with or without the boundary-velocity gain."""

    GENERAL = "general"  # beta > 0 boundary-velocity feedback present
    BETA0 = "beta0"      # boundary velocity omitted (beta forced to 0)


class ZetaFormula(Enum):
    """How the equilibrium constant is computed from the initial data."""

    PAPER = "paper"
    CONSERVATION = "conservation"


@dataclass(frozen=True)
class Regime:
    variant: Variant
    convergent: bool = True


class DegenerateParametersError(ValueError):
    """A zeta formula's denominator vanishes for these parameters."""


@dataclass(frozen=True)
class CraneParams:
    """Physical constants, feedback gains, and norm weights.

    m, M      platform / load masses
    alpha     delayed-feedback gain (stored as |alpha|, must be > 0)
    beta      boundary-velocity gain (0 in the BETA0 variant)
    sigma     interior damping coefficient
    tau       actuation delay
    K         weight of the delay channel in the energy norm
    varpi     weight of the rank-one cross term in the state norm
    """

    m: float
    M: float
    alpha: float
    beta: float
    sigma: float
    tau: float
    K: float
    varpi: float = 0.01

    def beta_effective(self, regime: Regime) -> float:
        return 0.0 if regime.variant is Variant.BETA0 else self.beta


@dataclass(frozen=True)
class TensionProfile:
    """Cable tension modulus a(x) sampled on a uniform grid over [0, 1].

    Every sample must stay above the positivity floor a0 > 0.
    """

    samples: np.ndarray
    a0: float

    @classmethod
    def constant(cls, value: float, n: int = 2) -> "TensionProfile":
        return cls(samples=np.full(n + 1, float(value)), a0=float(value))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int,
                      a0: float) -> "TensionProfile":
        x = np.linspace(0.0, 1.0, n + 1)
        return cls(samples=np.asarray(fn(x), dtype=float), a0=float(a0))

    def on_nodes(self, nodes: np.ndarray) -> np.ndarray:
        """Resample onto arbitrary nodes in [0, 1] by linear interpolation."""
        own = np.linspace(0.0, 1.0, len(self.samples))
        return np.interp(nodes, own, self.samples)

    @property
    def max_value(self) -> float:
        return float(np.max(self.samples))


@dataclass(frozen=True)
class InitialData:
    """Initial displacement y0(x), velocity y1(x), and velocity history.

    ``history(s)`` gives the boundary velocity y_t(0, s) for s in [-tau, 0];
    the transport channel starts from u(x, 0) = history(-x * tau).  The
    platform and load velocities are always derived from y1:
    xi0 = y1(0), eta0 = y1(1).
    """

    y0: Callable[[np.ndarray], np.ndarray]
    y1: Callable[[np.ndarray], np.ndarray]
    history: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def zero(cls) -> "InitialData":
        z = np.zeros_like
        return cls(y0=z, y1=z, history=z)

    @classmethod
    def from_values(cls, y0=None, y1=None, history=None) -> "InitialData":
        """Build from constants and/or callables; missing pieces are zero."""
        def lift(v):
            if v is None:
                return np.zeros_like
            if callable(v):
                return v
            c = float(v)
            return lambda x: np.full_like(np.asarray(x, dtype=float), c)
        return cls(y0=lift(y0), y1=lift(y1), history=lift(history))

    def scaled(self, c: float) -> "InitialData":
        return InitialData(
            y0=lambda x: c * self.y0(x),
            y1=lambda x: c * self.y1(x),
            history=lambda s: c * self.history(s),
        )

    def added(self, other: "InitialData") -> "InitialData":
        return InitialData(
            y0=lambda x: self.y0(x) + other.y0(x),
            y1=lambda x: self.y1(x) + other.y1(x),
            history=lambda s: self.history(s) + other.history(s),
        )


# Names used in validation reports; tests and the CLI match on these.
HYP_TENSION = "(1.3) violated: tension must satisfy a(x) >= a0 > 0"
HYP_POSITIVE = "positivity violated: m, M, sigma, tau must be > 0"
HYP_ALPHA = "gain violated: alpha must be > 0 (store |alpha|)"
HYP_SMA = "(sma) violated: alpha < beta required for convergence"
HYP_UNI = "(uni) violated: alpha < K < 2*beta - alpha required"
HYP_K_BETA0 = "(K) violated: K > alpha required for beta0 convergence"


def validate_params(params: CraneParams, profile: TensionProfile,
                    regime: Regime) -> list[str]:
    """Return the list of violated hypotheses (empty iff all hold).

    Violations are data, not errors: non-convergent parameter sets are
    legitimate inputs (that is how the instability witnesses are run).
    """
    report = []
    s = profile.samples
    if (not np.all(np.isfinite(s))) or profile.a0 <= 0 or np.min(s) < profile.a0:
        report.append(HYP_TENSION)
    if min(params.m, params.M, params.sigma, params.tau) <= 0:
        report.append(HYP_POSITIVE)
    if params.alpha <= 0:
        report.append(HYP_ALPHA)
    if regime.convergent:
        if regime.variant is Variant.GENERAL:
            if not params.alpha < params.beta:
                report.append(HYP_SMA)
            if not (params.alpha < params.K < 2 * params.beta - params.alpha):
                report.append(HYP_UNI)
        else:
            if not params.K > params.alpha:
                report.append(HYP_K_BETA0)
    return report


def initial_bracket(init: InitialData, params: CraneParams, regime: Regime,
                    n: int = 200) -> float:
    """Initial value of the conserved linear functional.

    F0 = int_0^1 (sigma*y0 + y1 + alpha*tau*f(-tau*x)) dx
         + m*xi0 + M*eta0 + g*y0(0),
    with g = beta - alpha (general) or -alpha (beta0), xi0 = y1(0),
    eta0 = y1(1).  Composite trapezoid on n+1 uniform nodes.
    """
    x = np.linspace(0.0, 1.0, n + 1)
    y0v = np.asarray(init.y0(x), dtype=float)
    y1v = np.asarray(init.y1(x), dtype=float)
    fv = np.asarray(init.history(-params.tau * x), dtype=float)
    integrand = params.sigma * y0v + y1v + params.alpha * params.tau * fv
    # trapezoid rule written as (sum - half the ends) / n: summing first and
    # dividing once keeps constant integrands exact, so a stationary state
    # maps to itself bit for bit
    integral = float(np.sum(integrand)
                     - 0.5 * (integrand[0] + integrand[-1])) / n
    if regime.variant is Variant.GENERAL:
        g = params.beta - params.alpha
    else:
        g = -params.alpha
    return integral + params.m * y1v[0] + params.M * y1v[-1] + g * y0v[0]


def equilibrium_constant(init: InitialData, params: CraneParams,
                         regime: Regime,
                         formula: ZetaFormula = ZetaFormula.CONSERVATION,
                         n: int = 200) -> float:
    """Equilibrium displacement zeta the solution settles to.

    Two routes are provided on purpose.  CONSERVATION divides the initial
    value of the conserved functional by the coefficient it picks up on the
    constant limit state, (sigma + beta - alpha) resp. (sigma - alpha);
    a constant initial state then maps to itself, as a stationary solution
    must.  PAPER evaluates the published closed forms literally, whose
    denominators omit sigma; the discrepancy is surfaced by callers rather
    than hidden.
    """
    f0 = initial_bracket(init, params, regime, n=n)
    if regime.variant is Variant.GENERAL:
        if formula is ZetaFormula.PAPER:
            denom = params.beta - params.alpha
        else:
            denom = params.sigma + params.beta - params.alpha
        if abs(denom) < 1e-14:
            raise DegenerateParametersError(
                f"zeta denominator {denom!r} vanishes for general variant")
        return f0 / denom
    if formula is ZetaFormula.PAPER:
        if abs(params.alpha) < 1e-14:
            raise DegenerateParametersError("alpha = 0 in beta0 zeta formula")
        return -f0 / params.alpha
    denom = params.sigma - params.alpha
    if abs(denom) < 1e-14:
        raise DegenerateParametersError("sigma - alpha = 0 in beta0 zeta formula")
    return f0 / denom
