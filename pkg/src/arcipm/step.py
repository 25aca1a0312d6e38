"""Arc evaluation and the simultaneous centering/step-size selection.

The next iterate is searched along the ellipse

    v(sigma, alpha) = v - vdot*sin(alpha) + (p*sigma + q)*(1 - cos(alpha)),

with alpha in (0, pi/2].  For each slack and dual component there is a
closed-form largest angle that keeps it above a positive floor; a bisection
over sigma maximizes the smallest of those angles, exploiting that each
component limit is monotone in sigma with the sign of its p-coefficient.
A cheap predictor of the updated duality measure decides when pure
affine stepping (sigma = 0) is preferable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kkt import Blocks, Iterate, NewtonDirections

HALF_PI = 0.5 * math.pi

# Slack used when checking candidate components against their floors; the
# closed-form angles are exact only up to roundoff of the trajectory.
FLOOR_SLACK = 1e-10

# Golden-section interval tolerance for the sigma = 0 branch.
GOLDEN_TOLERANCE = 1e-4

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class StepFailureError(RuntimeError):
    """No acceptable step length was found above the angle floor."""


@dataclass(frozen=True)
class StepSelection:
    """Chosen centering weight and angle, with selection diagnostics."""

    sigma: float
    alpha: float
    alpha_tilde: float
    a_u: float
    b_u: float
    backtracks: int


def _one_minus_cos(alpha: float) -> float:
    # stable for small angles
    return 2.0 * math.sin(0.5 * alpha) ** 2


def arc_point(iterate: Iterate, directions: NewtonDirections, sigma: float, alpha: float) -> Blocks:
    """Candidate point on the ellipse at angle alpha."""
    sin_a = math.sin(alpha)
    omc = _one_minus_cos(alpha)
    return Blocks(
        *(
            v - dv * sin_a + (pv * sigma + qv) * omc
            for v, dv, pv, qv in zip(
                iterate.blocks(), directions.vdot, directions.p_dir, directions.q_dir
            )
        )
    )


def update_nu(nu: float, alpha: float) -> float:
    """Shrink the cumulative residual factor by (1 - sin(alpha)).

    At alpha = pi/2 the factor hits zero exactly, which means the linear
    residuals have been wiped out; the run continues with a tiny positive
    floor so the slack floors stay well defined.
    """
    shrunk = nu * (1.0 - math.sin(alpha))
    if shrunk == 0.0:
        warnings.warn(
            "residual factor reached zero (full-angle step); continuing with a tiny floor",
            RuntimeWarning,
            stacklevel=2,
        )
        return float(np.finfo(float).tiny)
    return shrunk


def floors(s, z, nu: float, rho: float):
    """Positive floors (phi, psi) for the slack and dual blocks."""
    phi = min(rho * float(np.min(s)), nu)
    psi = min(rho * float(np.min(z)), nu)
    return phi, psi


def _arcsin(value: float) -> float:
    return math.asin(min(1.0, max(-1.0, value)))


def _arccos(value: float) -> float:
    return math.acos(min(1.0, max(-1.0, value)))


def component_alpha_limit(
    current: float, rate: float, p_coef: float, q_coef: float, floor: float, sigma: float
) -> float:
    """Largest angle keeping one component trajectory above its floor.

    The trajectory is ``current - rate*sin(a) + (p_coef*sigma + q_coef)*
    (1 - cos(a))``; the answer is the largest angle in (0, pi/2] below
    which the trajectory never dips under ``floor``, found by writing the
    sinusoidal part in phase-shifted form and inverting exactly.  A
    component already below its floor returns 0.
    """
    second = p_coef * sigma + q_coef
    margin = current - floor
    if margin < 0.0:
        return 0.0
    if rate == 0.0 and second == 0.0:
        return HALF_PI
    if rate == 0.0:
        # pure cosine trajectory; only a negative curvature term can bind
        if margin + second >= 0.0:
            return HALF_PI
        return _arccos((margin + second) / second)
    if second == 0.0:
        # pure sine trajectory; binds only when the slope exceeds the margin
        if rate <= margin:
            return HALF_PI
        return _arcsin(margin / rate)
    radius = math.hypot(rate, second)
    if rate > 0.0 and second > 0.0:
        if margin + second >= radius:
            return HALF_PI
        phase = _arcsin(second / radius)
        return _arcsin((margin + second) / radius) - phase
    if rate > 0.0:  # second < 0
        if margin + second >= radius:
            return HALF_PI
        phase = _arcsin(-second / radius)
        return min(HALF_PI, _arcsin((margin + second) / radius) + phase)
    if second < 0.0:  # rate < 0
        if margin + second >= 0.0:
            return HALF_PI
        phase = _arcsin(-second / radius)
        return min(HALF_PI, math.pi - _arcsin(-(margin + second) / radius) - phase)
    # rate < 0 and second > 0: the trajectory never decreases below current
    return HALF_PI


def _component_tuples(iterate: Iterate, directions: NewtonDirections, phi: float, psi: float):
    """(current, rate, p_coef, q_coef, floor) for all slack and dual entries."""
    vdot, p_dir, q_dir = directions.vdot, directions.p_dir, directions.q_dir
    entries = []
    for i in range(iterate.p):
        entries.append((iterate.s[i], vdot.s[i], p_dir.s[i], q_dir.s[i], phi))
    for i in range(iterate.p):
        entries.append((iterate.z[i], vdot.z[i], p_dir.z[i], q_dir.z[i], psi))
    return entries


def alpha_tilde(
    iterate: Iterate, directions: NewtonDirections, phi: float, psi: float, sigma: float
) -> float:
    """Positivity limit: the smallest per-component angle over both blocks."""
    entries = _component_tuples(iterate, directions, phi, psi)
    return min(component_alpha_limit(*entry, sigma) for entry in entries)


def mu_coefficients(iterate: Iterate, directions: NewtonDirections, alpha: float):
    """Predictor coefficients (a_u, b_u) of the updated duality measure.

    The predicted product is (a_u*sigma + b_u)/p; it omits the nonnegative
    quadratic term sddot's zddot (1-cos)^2, so the exact value from
    :func:`mu_exact` is what acceptance decisions use.
    """
    sdot, zdot = directions.vdot.s, directions.vdot.z
    ps, pz = directions.p_dir.s, directions.p_dir.z
    qs, qz = directions.q_dir.s, directions.q_dir.z
    p_mu = iterate.p * iterate.mu
    sin_a = math.sin(alpha)
    omc = _one_minus_cos(alpha)
    a_u = p_mu * omc - float(zdot @ ps + sdot @ pz) * sin_a * omc
    b_u = p_mu * (1.0 - sin_a) - (
        float(zdot @ sdot) * omc**2 + float(sdot @ qz + zdot @ qs) * sin_a * omc
    )
    return a_u, b_u


def mu_exact(candidate: Blocks) -> float:
    """Duality measure of a candidate point, computed from its own blocks."""
    return float(candidate.s @ candidate.z) / candidate.s.size


def bisect_sigma(
    iterate: Iterate,
    directions: NewtonDirections,
    phi: float,
    psi: float,
    sigma_min: float,
    sigma_max: float,
    tol: float,
):
    """Bisection for the centering weight maximizing the positivity limit.

    Components whose p-coefficient is positive have limits that grow with
    sigma, negative ones shrink.  When the smallest limit over the
    shrinking group strictly exceeds the smallest over the growing group,
    the bottleneck grows with sigma and the lower bound moves up;
    otherwise (ties included) the upper bound moves down.  Empty groups
    count as an infinite minimum.
    """
    entries = _component_tuples(iterate, directions, phi, psi)
    lower, upper = sigma_min, sigma_max
    sigma = 0.5 * (lower + upper)
    while upper - lower > tol:
        sigma = 0.5 * (lower + upper)
        shrinking = math.inf
        growing = math.inf
        for entry in entries:
            limit = component_alpha_limit(*entry, sigma)
            p_coef = entry[2]
            if p_coef < 0.0:
                shrinking = min(shrinking, limit)
            elif p_coef > 0.0:
                growing = min(growing, limit)
        if shrinking > growing:
            lower = sigma
        else:
            upper = sigma
    return sigma, alpha_tilde(iterate, directions, phi, psi, sigma)


def golden_min_bu(iterate: Iterate, directions: NewtonDirections, alpha_cap: float) -> float:
    """Golden-section minimizer of b_u over [0, alpha_cap]."""
    if alpha_cap <= 0.0:
        return 0.0

    def objective(alpha: float) -> float:
        return mu_coefficients(iterate, directions, alpha)[1]

    lo, hi = 0.0, alpha_cap
    width = hi - lo
    inner_lo = hi - _INV_GOLDEN * width
    inner_hi = lo + _INV_GOLDEN * width
    f_lo, f_hi = objective(inner_lo), objective(inner_hi)
    while hi - lo > GOLDEN_TOLERANCE:
        if f_lo < f_hi:
            hi, inner_hi, f_hi = inner_hi, inner_lo, f_lo
            inner_lo = hi - _INV_GOLDEN * (hi - lo)
            f_lo = objective(inner_lo)
        else:
            lo, inner_lo, f_lo = inner_lo, inner_hi, f_hi
            inner_hi = lo + _INV_GOLDEN * (hi - lo)
            f_hi = objective(inner_hi)
    return 0.5 * (lo + hi)


def _acceptable(candidate: Blocks, mu_new: float, mu_old: float, phi: float, psi: float, theta: float) -> bool:
    if not (np.all(candidate.s > 0.0) and np.all(candidate.z > 0.0) and np.all(candidate.w > 0.0)):
        return False
    if np.min(candidate.s) < phi - FLOOR_SLACK or np.min(candidate.z) < psi - FLOOR_SLACK:
        return False
    if np.min(candidate.s * candidate.z) < theta * mu_new * (1.0 - FLOOR_SLACK):
        return False
    return mu_new < mu_old


def select_step(
    iterate: Iterate,
    directions: NewtonDirections,
    phi: float,
    psi: float,
    config,
) -> StepSelection:
    """Pick (sigma, alpha) and backtrack until every step condition holds.

    When the mixed tangent/centering products make the duality-measure
    predictor increase with sigma, centering is switched off and the angle
    comes from minimizing b_u under the sigma = 0 positivity cap; otherwise
    sigma and its positivity limit come from the bisection.  From that
    limit, alpha shrinks geometrically until the candidate keeps both
    blocks above their floors, stays inside the centrality region, and
    strictly decreases the duality measure.
    """
    vdot, p_dir = directions.vdot, directions.p_dir
    mixed = float(vdot.s @ p_dir.z + vdot.z @ p_dir.s)
    if mixed < 0.0:
        sigma = 0.0
        cap = alpha_tilde(iterate, directions, phi, psi, sigma)
        tilde = golden_min_bu(iterate, directions, cap)
    else:
        sigma, tilde = bisect_sigma(
            iterate, directions, phi, psi, config.sigma_min, config.sigma_max, config.bisect_tol
        )

    alpha = tilde
    backtracks = 0
    while alpha > config.alpha_floor:
        candidate = arc_point(iterate, directions, sigma, alpha)
        mu_new = mu_exact(candidate)
        if _acceptable(candidate, mu_new, iterate.mu, phi, psi, config.theta):
            a_u, b_u = mu_coefficients(iterate, directions, alpha)
            return StepSelection(sigma, alpha, tilde, a_u, b_u, backtracks)
        alpha *= config.backtrack
        backtracks += 1
    raise StepFailureError(
        f"no acceptable angle above {config.alpha_floor:.1e} "
        f"(sigma={sigma:.3f}, positivity limit {tilde:.3e})"
    )
