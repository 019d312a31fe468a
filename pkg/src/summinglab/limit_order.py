"""Closed-form limit orders, scaling exponents, and log-log fitting.

The limit order of an operator ideal is the infimal exponent governing the
growth of the ideal norm of l_u^n -> l_v^n identities. For the
Gaussian-summing ideal the closed form is piecewise linear on reciprocal
coordinates and convex there for u <= 2, which the convexity checker
exercises. Empirical exponents are least-squares slopes on log-log points;
finite-n data can only ever be reported as consistent with a value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import Exponent, parse_exponent


@dataclass(frozen=True)
class LimitOrderValue:
    ideal: str
    u: Exponent
    v: Exponent
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError("limit orders lie in [0, 1]")


def gaussian_limit_order(u, v) -> LimitOrderValue:
    """Limit order of the Gaussian-summing ideal.

    1/v for u >= 2, max(0, 1/2 + 1/v - 1/u) for u <= 2; the two branches
    agree on the seam u = 2.
    """
    ue, ve = parse_exponent(u), parse_exponent(v)
    if ue.recip <= 0.5:
        value = ve.recip
    else:
        value = max(0.0, 0.5 + ve.recip - ue.recip)
    return LimitOrderValue("gamma", ue, ve, value)


def pi2_limit_order(u, v) -> LimitOrderValue:
    """2-summing limit order on the range v <= 2 where it matches the Gaussian one."""
    ue, ve = parse_exponent(u), parse_exponent(v)
    if ve.recip < 0.5:
        raise ValueError("the 2-summing limit order is only registered for v <= 2")
    base = gaussian_limit_order(ue, ve)
    return LimitOrderValue("pi2", ue, ve, base.value)


def schatten_gaussian_exponent(u, v) -> float:
    """Growth exponent of the Gaussian-summing norm of S_u^n -> S_v^n.

    Implemented directly from its own piecewise display (1/2 + 1/v for
    u >= 2, 1/2 + max(0, 1/2 + 1/v - 1/u) for u <= 2); identically equal to
    1/2 plus the sequence-space limit order, which the tests assert.
    """
    ue, ve = parse_exponent(u), parse_exponent(v)
    if ue.recip <= 0.5:
        return 0.5 + ve.recip
    return 0.5 + max(0.0, 0.5 + ve.recip - ue.recip)


def limit_order_table(ideal: str, u_grid, v_grid) -> np.ndarray:
    """Closed-form limit orders on a grid; rows follow u, columns follow v."""
    ideal = ideal.lower()
    if ideal == "gamma":
        fn = lambda a, b: gaussian_limit_order(a, b).value
    elif ideal == "pi2":
        fn = lambda a, b: pi2_limit_order(a, b).value
    else:
        raise ValueError(f"no closed-form table for ideal {ideal!r}")
    u_list = [parse_exponent(x) for x in u_grid]
    v_list = [parse_exponent(x) for x in v_grid]
    return np.array([[fn(ue, ve) for ve in v_list] for ue in u_list])


# ---------------------------------------------------------------------------
# empirical exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    max_rel_residual: float


def fit_exponent(points) -> ExponentFit:
    """Least-squares slope of log(value) against log(n).

    Needs at least 3 points with distinct n and positive values; reports
    the worst relative deviation of the fitted power law from the data.
    """
    pts = tuple((float(n), float(v)) for n, v in points)
    if len(pts) < 3:
        raise ValueError("exponent fits need at least 3 points")
    ns = np.array([p[0] for p in pts])
    vals = np.array([p[1] for p in pts])
    if len(set(ns.tolist())) != len(ns):
        raise ValueError("sample sizes must be distinct")
    if np.any(vals <= 0) or np.any(ns <= 0):
        raise ValueError("exponent fits need positive sizes and values")
    x = np.log(ns)
    y = np.log(vals)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = np.exp(intercept + slope * x)
    max_rel = float(np.max(np.abs(fitted - vals) / vals))
    return ExponentFit(pts, float(slope), float(intercept), max_rel)


# ---------------------------------------------------------------------------
# convexity of limit orders under exponent interpolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    slack: float
    passed: bool
    lhs: float
    rhs: float
    midpoint: tuple[Exponent, Exponent]


def limit_order_convexity_check(pair0, pair1, theta: float, value0: float,
                                value1: float, value_mid: float,
                                tol: float = 0.0) -> ConvexityReport:
    """Check value_mid <= (1-theta) value0 + theta value1 at interpolated exponents.

    The hypothesis requires all domain exponents at most 2; pairs outside
    that range are rejected. Slack is RHS minus LHS; pass iff >= -tol.
    """
    from .interpolation import interp_exponent

    if not (0.0 < theta < 1.0):
        raise ValueError("theta must lie strictly inside (0, 1)")
    u0, v0 = (parse_exponent(x) for x in pair0)
    u1, v1 = (parse_exponent(x) for x in pair1)
    for ue in (u0, u1):
        if ue.recip < 0.5:
            raise ValueError("convexity hypothesis needs domain exponents u <= 2")
    u_mid = interp_exponent(u0, u1, theta)
    v_mid = interp_exponent(v0, v1, theta)
    rhs = (1.0 - theta) * value0 + theta * value1
    slack = rhs - value_mid
    return ConvexityReport(slack, slack >= -tol, value_mid, rhs, (u_mid, v_mid))
