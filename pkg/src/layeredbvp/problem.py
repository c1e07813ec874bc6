"""Two-parameter boundary value problem: data model, assumptions, regimes.

The problem is ``-eps1 u'' + eps2 b u' + c u = f`` on (0, 1) with homogeneous
Dirichlet conditions.  This module validates the positivity assumptions on
b, c, classifies the relation between ``eps1`` and ``eps2**2`` into the three
layer regimes, computes the characteristic layer strengths ``mu0 <= mu1``,
and provides the weighted H1-type norms used throughout.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AssumptionViolated, QuadratureUnderResolved
from .series import CoefficientFunction, coefficient_from_dict

DEFAULT_THRESHOLDS = (0.1, 10.0)


@dataclass(frozen=True)
class TwoParamProblem:
    eps1: float
    eps2: float
    b: CoefficientFunction
    c: CoefficientFunction
    f: CoefficientFunction

    def __post_init__(self):
        if not (0 < self.eps1 <= 1 and 0 < self.eps2 <= 1):
            raise ValueError("eps1 and eps2 must lie in (0, 1]")

    @property
    def ratio(self):
        """eps1 / eps2**2, the regime-deciding quantity."""
        return self.eps1 / self.eps2**2


@dataclass(frozen=True)
class AssumptionReport:
    beta: float
    gamma: float
    rho: float
    satisfied: bool
    fitted_gamma_b: float
    fitted_gamma_c: float
    fitted_gamma_f: float


@dataclass(frozen=True)
class MuPair:
    mu0: float
    mu1: float
    argmin0: float
    argmin1: float

    def __post_init__(self):
        # the +sqrt branch dominates the -sqrt branch pointwise
        if self.mu0 > self.mu1 * (1 + 1e-12):
            raise ValueError("mu0 must not exceed mu1")


class RegimeLabel(Enum):
    CONVECTION_DIFFUSION = "convection-diffusion"
    CONVECTION_REACTION_DIFFUSION = "convection-reaction-diffusion"
    REACTION_DIFFUSION = "reaction-diffusion"


@dataclass(frozen=True)
class Regime:
    """Classification of (eps1, eps2): which expansion family applies."""

    index: int  # 1, 2 or 3
    label: RegimeLabel
    ratio: float
    convection_diffusion: bool  # additionally flagged when eps2 is O(1)


def _refined_inf(fun, lo=0.0, hi=1.0, grid_points=257, rounds=3):
    """Infimum of a smooth 1-D function by grid search plus local refinement."""
    a, b = lo, hi
    n = max(grid_points, 2)
    best_x, best_v = lo, np.inf
    for _ in range(rounds + 1):
        xs = np.linspace(a, b, n)
        vals = np.asarray(fun(xs), dtype=float)
        k = int(np.argmin(vals))
        if vals[k] < best_v:
            best_v, best_x = float(vals[k]), float(xs[k])
        h = (b - a) / (n - 1)
        a = max(lo, xs[k] - h)
        b = min(hi, xs[k] + h)
        n = 129
    return best_v, best_x


def validate_assumptions(p, grid_points=257, strict=True):
    """Check ``b >= beta > 0``, ``c >= gamma > 0``, ``c - eps2/2 b' >= rho > 0``.

    With ``strict`` (the default) a failed inequality raises
    :class:`AssumptionViolated` naming the inequality and the offending
    location; otherwise a report with ``satisfied=False`` is returned.
    Fitted growth rates of the data derivatives are reported either way.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    db = p.b.derivative()
    beta, x_beta = _refined_inf(p.b, grid_points=grid_points)
    gamma, x_gamma = _refined_inf(p.c, grid_points=grid_points)
    rho, x_rho = _refined_inf(
        lambda x: p.c(x) - 0.5 * p.eps2 * db(x), grid_points=grid_points
    )
    satisfied = beta > 0 and gamma > 0 and rho > 0
    if strict and not satisfied:
        if beta <= 0:
            which, loc, val = "b(x) >= beta > 0", x_beta, beta
        elif gamma <= 0:
            which, loc, val = "c(x) >= gamma > 0", x_gamma, gamma
        else:
            which, loc, val = "c(x) - (eps2/2) b'(x) >= rho > 0", x_rho, rho
        raise AssumptionViolated(
            f"assumption {which} fails near x = {loc:.6g} (value {val:.6g})",
            which=which,
            location=loc,
        )
    return AssumptionReport(
        beta=beta,
        gamma=gamma,
        rho=rho,
        satisfied=satisfied,
        fitted_gamma_b=_fit_growth(p.b),
        fitted_gamma_c=_fit_growth(p.c),
        fitted_gamma_f=_fit_growth(p.f),
    )


def _fit_growth(g, order=10, n_points=21):
    """Geometric growth rate of ``max_x |g^(n)(x)| / n!`` by log-linear fit."""
    xs = np.linspace(0.0, 1.0, n_points)
    a_n = np.zeros(order + 1)
    for x in xs:
        a_n = np.maximum(a_n, np.abs(g.series(float(x), order).coeffs))
    usable = np.nonzero(a_n > 1e-300)[0]
    if usable.size < 3:
        return 0.0
    slope = np.polyfit(usable.astype(float), np.log(a_n[usable]), 1)[0]
    return float(np.exp(slope))


def _mu_objective(p, sign):
    def obj(x):
        bx = p.b(x)
        cx = p.c(x)
        return (sign * p.eps2 * bx + np.sqrt(p.eps2**2 * bx**2 + 4 * p.eps1 * cx)) / (
            2 * p.eps1
        )

    return obj


def _grid_golden_min(obj, n_grid=1025, xtol=1e-10):
    xs = np.linspace(0.0, 1.0, n_grid)
    vals = np.asarray(obj(xs), dtype=float)
    k = int(np.argmin(vals))
    h = 1.0 / (n_grid - 1)
    if 0 < k < n_grid - 1:
        res = minimize_scalar(
            obj, bracket=(xs[k - 1], xs[k], xs[k + 1]), method="golden",
            options={"xtol": xtol},
        )
        x_star = float(np.clip(res.x, 0.0, 1.0))
    else:
        lo = max(0.0, xs[k] - h)
        hi = min(1.0, xs[k] + h)
        res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                              options={"xatol": xtol})
        x_star = float(res.x)
        if obj(xs[k]) <= obj(x_star):
            x_star = float(xs[k])
    return float(obj(x_star)), x_star


def compute_mu(p):
    """Characteristic layer strengths: minima over [0, 1] of the two roots."""
    mu0, x0 = _grid_golden_min(_mu_objective(p, -1.0))
    mu1, x1 = _grid_golden_min(_mu_objective(p, +1.0))
    return MuPair(mu0=mu0, mu1=mu1, argmin0=x0, argmin1=x1)


def classify_regime(eps1, eps2, thresholds=DEFAULT_THRESHOLDS):
    """Dispatch on ``r = eps1 / eps2**2`` with configurable cutoffs."""
    low, high = thresholds
    if not (0 < low < 1 < high):
        raise ValueError("thresholds must satisfy 0 < low < 1 < high")
    r = eps1 / eps2**2
    if r <= low:
        index = 1
        label = RegimeLabel.CONVECTION_REACTION_DIFFUSION
    elif r < high:
        index = 2
        label = RegimeLabel.REACTION_DIFFUSION
    else:
        index = 3
        label = RegimeLabel.REACTION_DIFFUSION
    return Regime(
        index=index, label=label, ratio=r, convection_diffusion=eps2 >= 0.9
    )


def layer_widths(p, regime_index):
    """(left, right) layer width scales for the given expansion family."""
    if regime_index == 1:
        return p.eps2, p.eps1 / p.eps2
    if regime_index == 2:
        return p.eps2, p.eps2
    if regime_index == 3:
        return np.sqrt(p.eps1), np.sqrt(p.eps1)
    raise ValueError(f"regime index must be 1, 2 or 3, got {regime_index}")


def layer_sample_grid(w_left, w_right, n_uniform=67, n_layer=67):
    """Deterministic sample grid: uniform points plus a geometric cluster
    inside each layer.  Used wherever a sup norm stands in for the true one.
    """
    lo_l = min(w_left, 1.0) / 100.0
    lo_r = min(w_right, 1.0) / 100.0
    left = np.geomspace(lo_l, 0.45, n_layer)
    right = 1.0 - np.geomspace(lo_r, 0.45, n_layer)
    grid = np.concatenate([np.linspace(0.0, 1.0, n_uniform), left, right])
    return np.sort(grid)


def quad_breakpoints(w_left, w_right, growth=1.6):
    """Integration cells refined geometrically toward both endpoints.

    0.25 and 0.75 are always cell boundaries: piecewise-expanded functions
    switch expansion centers there, and a cell must not straddle the seam.
    """
    pts = [0.0, 0.25, 0.5, 0.75]
    t = min(w_left / 4.0, 0.05)
    while t < 0.4:
        pts.append(t)
        t *= growth
    right = [1.0]
    t = min(w_right / 4.0, 0.05)
    while t < 0.4:
        right.append(1.0 - t)
        t *= growth
    return np.array(sorted(set(pts + right)))


@dataclass(frozen=True)
class QuadSpec:
    breakpoints: tuple
    order: int = 12

    @classmethod
    def for_problem(cls, p, regime_index=None, extra=(), order=12):
        """Layer-refined integration cells; ``extra`` points (e.g. mesh
        breakpoints of a piecewise integrand) are merged in so no cell
        straddles a derivative kink.
        """
        if regime_index is None:
            regime_index = classify_regime(p.eps1, p.eps2).index
        w_l, w_r = layer_widths(p, regime_index)
        pts = set(quad_breakpoints(w_l, w_r)) | {float(t) for t in extra}
        return cls(breakpoints=tuple(sorted(pts)), order=order)


def _composite_gauss(values_fn, breakpoints, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    bp = np.asarray(breakpoints)
    for a, b in zip(bp[:-1], bp[1:]):
        xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.dot(weights, values_fn(xs))
    return total


def energy_norm(w, p, quad=None, variant="default"):
    """Weighted H1-type norm of ``w`` (a callable ``w(x, deriv)``).

    The default is ``sqrt(eps1 |w|_1^2 + ||w||_0^2)``; ``variant="paper"``
    adds the unweighted H1 seminorm as well, i.e.
    ``sqrt(eps1 |w|_1^2 + ||w||_1^2)``.  Both are reported by the
    verification tooling; neither is silently preferred.
    """
    if variant not in ("default", "paper"):
        raise ValueError("variant must be 'default' or 'paper'")
    if quad is None:
        quad = QuadSpec.for_problem(p)
    bp = np.asarray(quad.breakpoints)

    sup = [0.0]

    def sq(order, split):
        pts = bp
        if split:
            mid = 0.5 * (bp[:-1] + bp[1:])
            pts = np.sort(np.concatenate([bp, mid]))

        def integrand(deriv):
            def fn(x):
                v = np.asarray(w(x, deriv))
                if deriv == 0:
                    sup[0] = max(sup[0], float(np.max(np.abs(v))))
                return v**2

            return fn

        return (
            _composite_gauss(integrand(1), pts, order),
            _composite_gauss(integrand(0), pts, order),
        )

    d1, m1 = sq(quad.order, split=False)
    d2, m2 = sq(quad.order, split=True)

    def combine(i_d, i_0):
        if variant == "paper":
            return p.eps1 * i_d + i_d + i_0
        return p.eps1 * i_d + i_0

    coarse, fine = combine(d1, m1), combine(d2, m2)
    # besides the relative test, allow rounding noise of the point values
    # (magnitude ~eps * sup|w|) propagated through the squared integrand
    noise = 1e-13 * (1.0 + sup[0]) * np.sqrt(max(fine, 0.0))
    if abs(coarse - fine) > 1e-8 * abs(fine) + noise + 1e-28:
        raise QuadratureUnderResolved(
            f"energy norm quadrature disagreement {coarse:.6e} vs {fine:.6e}"
        )
    return float(np.sqrt(max(fine, 0.0)))


def problem_to_dict(p):
    return {
        "eps1": p.eps1,
        "eps2": p.eps2,
        "b": p.b.to_dict(),
        "c": p.c.to_dict(),
        "f": p.f.to_dict(),
    }


def problem_from_dict(d):
    return TwoParamProblem(
        eps1=float(d["eps1"]),
        eps2=float(d["eps2"]),
        b=coefficient_from_dict(d["b"]),
        c=coefficient_from_dict(d["c"]),
        f=coefficient_from_dict(d["f"]),
    )
