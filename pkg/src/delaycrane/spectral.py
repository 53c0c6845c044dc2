"""Characteristic equation of the constant-tension crane and its roots.

Separable modes e^{lam t} f(x) of the closed-loop system (with a = 1) exist
iff lam solves a transcendental equation.  With s = sqrt(lam^2 + sigma*lam),
A = lam * (alpha e^{-lam tau} - m lam - beta) (beta dropped in the beta0
variant) and B = M lam^2, the equation reads

    F(lam) = (A - s)(B + s) e^s - (A + s)(B - s) e^{-s} = 0.

F flips sign with the square-root branch, so F = s * G(lam) where

    G(lam) = 2 (A B - s^2) sinh(s)/s + 2 (A - B) cosh(s)

is entire in lam (sinh(s)/s and cosh(s) are even in s).  Root finding works
on G: argument-principle winding counts on recursively subdivided rectangles
down to a target cell size, then Newton refinement with a numerically
differenced derivative.  lam = 0 is a root of G for every parameter set
(the constant equilibrium mode); the spurious s = 0 zero of F at
lam = -sigma is not a root of G.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, replace

import numpy as np

from .model import CraneParams, Regime, Variant


@dataclass(frozen=True)
class CharProblem:
    variant: Variant
    params: CraneParams

    @property
    def beta_eff(self) -> float:
        return 0.0 if self.variant is Variant.BETA0 else self.params.beta


@dataclass(frozen=True)
class Root:
    """A located characteristic root.

    ``residual`` is the magnitude of F scaled by the sum of magnitudes of
    its two exponential terms; the raw |F| grows like |lam|^4 e^{Re s} and
    would drown the cancellation that defines a root in rounding noise.
    """

    lam: complex
    residual: float
    converged: bool
    multiplicity: int = 1


class RootSearchError(RuntimeError):
    """Winding-number evaluation failed to stabilize even after perturbing."""


def _coeffs(lam, problem: CharProblem):
    """Return (s, A, B) with s on the principal branch (vectorized)."""
    p = problem.params
    lam = np.asarray(lam, dtype=complex)
    s = np.sqrt(lam * (lam + p.sigma))
    A = lam * (p.alpha * np.exp(-lam * p.tau) - p.m * lam - problem.beta_eff)
    B = p.M * lam * lam
    return s, A, B


def char_residual(lam, problem: CharProblem, branch: int = +1):
    """Raw characteristic value F(lam); ``branch=-1`` flips the square root."""
    s, A, B = _coeffs(lam, problem)
    s = branch * s
    value = (A - s) * (B + s) * np.exp(s) - (A + s) * (B - s) * np.exp(-s)
    if np.ndim(value) == 0:
        return complex(value)
    return value


def residual_scale(lam, problem: CharProblem):
    """Magnitude scale of F's two terms, used to normalize residuals."""
    s, A, B = _coeffs(lam, problem)
    re = np.real(s)
    # products of magnitudes, not magnitudes of products: the scale must not
    # itself cancel at parameter sets where A = s and B = s simultaneously
    scale = ((np.abs(A) + np.abs(s)) * (np.abs(B) + np.abs(s))
             * (np.exp(re) + np.exp(-re)))
    if np.ndim(scale) == 0:
        return float(scale)
    return scale


def verify_residual(lam, problem: CharProblem) -> float:
    """Normalized residual |F| / scale, re-derived from scratch."""
    f = char_residual(lam, problem)
    scale = residual_scale(lam, problem)
    if np.ndim(f) == 0:
        return abs(f) / max(scale, 1e-300)
    return np.abs(f) / np.maximum(scale, 1e-300)


def char_reduced(lam, problem: CharProblem):
    """Entire branch-free function G with the same nonzero roots as F."""
    s, A, B = _coeffs(lam, problem)
    s2 = s * s
    small = np.abs(s) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(small, 1.0 + s2 / 6.0 + s2 * s2 / 120.0,
                         np.sinh(np.where(small, 1.0, s))
                         / np.where(small, 1.0, s))
    value = 2.0 * (A * B - s2) * sinhc + 2.0 * (A - B) * np.cosh(s)
    if np.ndim(value) == 0:
        return complex(value)
    return value


# -- winding numbers ----------------------------------------------------------

def _rect_boundary(rect, pts_per_unit: float = 4.0, min_pts: int = 8):
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1),
               complex(x0, y1)]
    pts = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        n = max(min_pts, int(np.ceil(abs(b - a) * pts_per_unit)))
        seg = a + (b - a) * np.arange(n) / n
        pts.append(seg)
    return np.concatenate(pts)


def winding_number(gfun, rect, max_points: int = 60000) -> int:
    """Winding number of gfun around a rectangle boundary.

    Adaptively bisects boundary intervals until each phase increment is
    unambiguous (< ~1 rad) and the total snaps to an integer within 0.25.
    Raises RootSearchError if a boundary value sits on (or numerically at)
    a root; callers perturb the rectangle and retry.
    """
    P = _rect_boundary(rect)
    V = gfun(P)
    max_dphi = 1.0
    for _ in range(60):
        amax = np.abs(V).max()
        if amax == 0.0 or np.abs(V).min() < 1e-13 * amax:
            raise RootSearchError("boundary passes (numerically) through a root")
        d = np.angle(np.roll(V, -1) / V)
        bad = np.abs(d) > max_dphi
        if not bad.any():
            total = d.sum() / (2.0 * np.pi)
            w = int(np.round(total))
            if abs(total - w) < 0.25:
                return w
            max_dphi *= 0.5
            continue
        idx = np.flatnonzero(bad)
        if len(P) + len(idx) > max_points:
            raise RootSearchError("boundary refinement budget exhausted")
        nxt = np.roll(P, -1)
        mids = 0.5 * (P[idx] + nxt[idx])
        vm = gfun(mids)
        P = np.insert(P, idx + 1, mids)
        V = np.insert(V, idx + 1, vm)
    raise RootSearchError("winding number did not stabilize")


def _winding_robust(gfun, rect, jitter: float) -> int:
    """Winding with retries, growing the rectangle slightly on failure."""
    x0, x1, y0, y1 = rect
    for k in range(6):
        try:
            return winding_number(gfun, (x0, x1, y0, y1))
        except RootSearchError:
            e = jitter * (k + 1)
            x0 -= e * 1.03
            x1 += e * 0.97
            y0 -= e * 1.01
            y1 += e * 0.99
    raise RootSearchError(f"could not stabilize winding on {rect}")


# -- Newton refinement --------------------------------------------------------

def _newton(gfun, lam0: complex, max_iter: int = 60) -> complex:
    lam = complex(lam0)
    for _ in range(max_iter):
        h = 1e-7 * (1.0 + abs(lam))
        g0 = gfun(lam)
        dg = (gfun(lam + h) - gfun(lam - h)) / (2.0 * h)
        if dg == 0:
            break
        step = g0 / dg
        lam -= step
        if abs(step) < 1e-13 * (1.0 + abs(lam)):
            break
    return lam


def find_roots(problem: CharProblem, region=None, root_tol: float = 1e-8,
               cell: float = 0.25) -> list[Root]:
    """Locate characteristic roots in a rectangle of the complex plane.

    ``region`` is (re_lo, re_hi, im_lo, im_hi); the default covers the
    dominant root cluster for desk-scale parameters.  Every returned root
    has been Newton-polished and re-verified against the raw characteristic
    residual; roots come back deduplicated, conjugate-closed, and clipped
    to the requested region.
    """
    sg = max(problem.params.sigma, 0.5)
    if region is None:
        region = (-5.0 * sg, 3.0 * sg, -40.0, 40.0)
    x0, x1, y0, y1 = map(float, region)
    if x1 <= x0 or y1 <= y0:
        return []

    def gfun(z):
        return char_reduced(z, problem)

    found: list[tuple[complex, int]] = []
    # small deterministic offset so roots rarely sit exactly on cut lines
    stack = [(x0, x1, y0, y1)]
    while stack:
        rect = stack.pop()
        rx0, rx1, ry0, ry1 = rect
        size = max(rx1 - rx0, ry1 - ry0)
        try:
            w = _winding_robust(gfun, rect, jitter=0.01 * size + 1e-6)
        except RootSearchError:
            # last resort: treat as containing roots and subdivide anyway
            w = 1 if size > cell else 0
        if w == 0:
            continue
        if size <= cell:
            center = complex(0.5 * (rx0 + rx1), 0.5 * (ry0 + ry1))
            lam = _newton(gfun, center)
            escaped = abs(lam - center) > 2.0 * size
            if w == 1 and not escaped:
                found.append((lam, 1))
                continue
            if size <= 1e-5:
                # unresolved cluster or genuine multiple root
                found.append((center if escaped else lam, max(w, 1)))
                continue
            # keep splitting: several roots (or a root Newton overshoots)
        xm = rx0 + 0.5000731 * (rx1 - rx0)
        ym = ry0 + 0.5000919 * (ry1 - ry0)
        stack.extend([(rx0, xm, ry0, ym), (xm, rx1, ry0, ym),
                      (rx0, xm, ym, ry1), (xm, rx1, ym, ry1)])

    return _finalize(found, problem, region, root_tol, gfun)


def _finalize(found, problem, region, root_tol, gfun) -> list[Root]:
    x0, x1, y0, y1 = region
    margin = 10.0 * root_tol
    roots: list[Root] = []

    def register(lam: complex, mult: int):
        if abs(lam.imag) < 1e-10:
            lam = complex(lam.real, 0.0)
        if abs(lam) < 1e-10:
            lam = 0.0 + 0.0j
        if not (x0 - margin <= lam.real <= x1 + margin
                and y0 - margin <= lam.imag <= y1 + margin):
            return
        for i, r in enumerate(roots):
            if abs(r.lam - lam) < 10.0 * root_tol * (1.0 + abs(lam)):
                if mult > r.multiplicity:
                    roots[i] = replace(r, multiplicity=mult)
                return
        res = verify_residual(lam, problem)
        roots.append(Root(lam=lam, residual=float(res),
                          converged=bool(res < root_tol), multiplicity=mult))

    for lam, mult in found:
        register(lam, mult)
    # conjugate closure (real coefficients)
    for r in list(roots):
        if abs(r.lam.imag) > 1e-10:
            register(_newton(gfun, r.lam.conjugate()), r.multiplicity)
    roots.sort(key=lambda r: (r.lam.real, r.lam.imag))
    return roots


def spectral_abscissa(roots: list[Root], exclude_zero: bool = True,
                      zero_tol: float = 1e-6) -> float:
    """Max real part over converged roots; NaN when the list is empty."""
    vals = [r.lam.real for r in roots
            if r.converged and not (exclude_zero and abs(r.lam) < zero_tol)]
    return max(vals) if vals else float("nan")


# -- closed-form instability witnesses ---------------------------------------

@dataclass(frozen=True)
class InfeasibleWitness:
    """Requested gains admit no positive destabilizing delay."""

    message: str


def instability_witness_beta0(sigma: float, m: float):
    """Parameters without boundary velocity for which lam = sigma is a root.

    tau = sqrt(2), M = sqrt(2)/sigma, alpha = sqrt(2)(1 + m/M) e^{2/M}:
    the growing mode e^{sigma t} f(x) then solves the closed loop exactly,
    whatever the interior damping.
    """
    if sigma <= 0 or m <= 0:
        raise ValueError("sigma and m must be positive")
    M = np.sqrt(2.0) / sigma
    tau = np.sqrt(2.0)
    alpha = np.sqrt(2.0) * (1.0 + m / M) * np.exp(2.0 / M)
    params = CraneParams(m=m, M=M, alpha=alpha, beta=0.0, sigma=sigma,
                         tau=tau, K=alpha)
    problem = CharProblem(variant=Variant.BETA0, params=params)
    res = abs(char_residual(sigma, problem))
    root = Root(lam=complex(sigma), residual=res, converged=res < 1e-10)
    return params, root


def instability_witness_general(sigma: float, m: float, alpha: float,
                                beta: float):
    """Delay making lam = sigma a root despite boundary-velocity feedback.

    With M = sqrt(2)/sigma this needs alpha > beta + sqrt(2)(1 + m/M); the
    destabilizing delay is tau = (M/sqrt(2)) ln(alpha M / ((beta+sqrt(2))M
    + sqrt(2) m)).  Returns InfeasibleWitness (naming the failed
    inequality) when the margin is absent or the delay degenerates to 0.
    """
    if sigma <= 0 or m <= 0 or alpha <= 0:
        raise ValueError("sigma, m, alpha must be positive")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    M = np.sqrt(2.0) / sigma
    margin = beta + np.sqrt(2.0) * (1.0 + m / M)
    if alpha < margin:
        return InfeasibleWitness(
            f"alpha >= beta + sqrt(2)(1 + m/M) violated: "
            f"alpha={alpha:.6g} < {margin:.6g}")
    arg = alpha * M / ((beta + np.sqrt(2.0)) * M + np.sqrt(2.0) * m)
    tau = (M / np.sqrt(2.0)) * np.log(arg)
    if tau <= 0.0:
        return InfeasibleWitness(
            f"constructed delay tau={tau:.6g} is not positive "
            f"(alpha sits on the boundary alpha = beta + sqrt(2)(1 + m/M))")
    params = CraneParams(m=m, M=M, alpha=alpha, beta=beta, sigma=sigma,
                         tau=float(tau), K=alpha)
    problem = CharProblem(variant=Variant.GENERAL, params=params)
    res = abs(char_residual(sigma, problem))
    root = Root(lam=complex(sigma), residual=res, converged=res < 1e-10)
    return params, root


# -- parameter sweeps ---------------------------------------------------------

@dataclass
class ScanResult:
    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    abscissa: np.ndarray  # shape (len(axis1), len(axis2)); NaN = no root found


def stability_scan(problem: CharProblem, axis1: tuple[str, np.ndarray],
                   axis2: tuple[str, np.ndarray], region=None,
                   root_tol: float = 1e-8, cell: float = 0.25) -> ScanResult:
    """Spectral abscissa (lam = 0 excluded) over a 2D parameter grid.

    Cells where no root was found in the region are NaN, distinct from a
    negative abscissa.
    """
    name1, vals1 = axis1
    name2, vals2 = axis2
    vals1 = np.asarray(vals1, dtype=float)
    vals2 = np.asarray(vals2, dtype=float)
    out = np.full((len(vals1), len(vals2)), np.nan)
    for i, v1 in enumerate(vals1):
        for j, v2 in enumerate(vals2):
            p = replace(problem.params, **{name1: float(v1),
                                           name2: float(v2)})
            prob = CharProblem(variant=problem.variant, params=p)
            roots = find_roots(prob, region=region, root_tol=root_tol,
                               cell=cell)
            out[i, j] = spectral_abscissa(roots)
    return ScanResult(axis1_name=name1, axis1_values=vals1,
                      axis2_name=name2, axis2_values=vals2, abscissa=out)
