"""Independent brute-force oracles used by the test suite.

Both oracles deliberately avoid the solver's machinery: the stationarity
check below uses the true gradient (not the model term H x), and the angle
scan walks a dense grid instead of inverting sinusoids, so a shared bug
between implementation and check is impossible.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .autodiff import gradient, hessian
from .program import ConvexProgram

MAX_ENUM_ROWS = 12


def enumerate_kkt(program: ConvexProgram, tol: float = 1e-8) -> list[np.ndarray]:
    """All first-order points of a quadratic program, by active-set enumeration.

    Requires a quadratic objective (constant Hessian) and at most
    ``MAX_ENUM_ROWS`` inequality rows.  Every subset of rows is treated as
    active, the equality-constrained stationarity system is solved with the
    true gradient, and candidates failing primal feasibility, dual sign, or
    the linear solve are dropped.
    """
    n, m, p = program.n, program.m, program.p
    if p > MAX_ENUM_ROWS:
        raise ValueError(f"enumeration oracle handles at most {MAX_ENUM_ROWS} rows, got {p}")
    origin = np.zeros(n)
    quad = hessian(program.objective, origin)
    linear = gradient(program.objective, origin)

    candidates: list[np.ndarray] = []
    for size in range(p + 1):
        for active in itertools.combinations(range(p), size):
            rows = program.a_ineq[list(active)]
            k = len(active)
            system = np.zeros((n + m + k, n + m + k))
            system[:n, :n] = quad
            system[:n, n : n + m] = program.a_eq.T
            system[:n, n + m :] = -rows.T
            system[n : n + m, :n] = program.a_eq
            system[n + m :, :n] = rows
            rhs = np.concatenate([-linear, program.b_eq, program.b_ineq[list(active)]])
            try:
                solution = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(solution)):
                continue
            if np.linalg.norm(system @ solution - rhs) > tol * (1.0 + np.linalg.norm(rhs)):
                continue
            x = solution[:n]
            multipliers = solution[n + m :]
            if np.any(multipliers < -tol):
                continue
            if np.any(program.a_ineq @ x < program.b_ineq - tol):
                continue
            if not any(np.allclose(x, seen, atol=10 * tol) for seen in candidates):
                candidates.append(x)
    return candidates


def scan_alpha(
    current: float,
    rate: float,
    p_coef: float,
    q_coef: float,
    floor: float,
    sigma: float,
    grid_step: float = 1e-4,
) -> float:
    """Grid-scan version of the per-component angle limit.

    Returns the largest grid angle in [0, pi/2] such that the trajectory
    stays at or above ``floor`` on every grid point up to it.
    """
    second = p_coef * sigma + q_coef
    count = int(math.ceil(0.5 * math.pi / grid_step)) + 1
    grid = np.linspace(0.0, 0.5 * math.pi, count)
    trajectory = current - rate * np.sin(grid) + second * (1.0 - np.cos(grid))
    below = trajectory < floor
    if not below.any():
        return float(grid[-1])
    first_bad = int(np.argmax(below))
    if first_bad == 0:
        return 0.0
    return float(grid[first_bad - 1])
