"""Primal-dual residuals, the Newton matrix, and the three direction solves.

One iteration factors the (n+m+3p)-square matrix once with partially
pivoted LU and back-substitutes three right-hand sides: the first-order
tangent, then the two pieces whose combination (p*sigma + q) is the
curvature term of the search arc.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .autodiff import value_gradient_hessian
from .program import ConvexProgram

# Relative pivot size below which the factorization is treated as singular.
PIVOT_TOLERANCE = 1e-12

# Acceptable solve residual, relative to 1 + |rhs|.
SOLVE_TOLERANCE = 1e-8


class SingularKKTError(RuntimeError):
    """The Newton matrix is singular to working precision."""

    def __init__(self, pivot: float, threshold: float):
        super().__init__(
            f"Newton matrix is singular to working precision "
            f"(pivot {pivot:.3e}, threshold {threshold:.3e})"
        )
        self.pivot = pivot
        self.threshold = threshold


class Blocks(NamedTuple):
    """The five stacked blocks (x, y, w, s, z) of a primal-dual point."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    s: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class NewtonDirections:
    """Tangent plus the two curvature solves; curvature(sigma) = p*sigma + q."""

    vdot: Blocks
    p_dir: Blocks
    q_dir: Blocks

    def curvature(self, sigma: float) -> Blocks:
        return Blocks(*(p * sigma + q for p, q in zip(self.p_dir, self.q_dir)))


@dataclass(frozen=True)
class Iterate:
    """A primal-dual point with its cached derivatives and residuals."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    s: np.ndarray
    z: np.ndarray
    hess: np.ndarray
    grad: np.ndarray
    r_c: np.ndarray
    r_e: np.ndarray
    r_i: np.ndarray
    mu: float
    nu: float

    @classmethod
    def at(cls, program: ConvexProgram, x, y, w, s, z, nu: float) -> "Iterate":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        w = np.asarray(w, dtype=float).reshape(-1)
        s = np.asarray(s, dtype=float).reshape(-1)
        z = np.asarray(z, dtype=float).reshape(-1)
        if not (np.all(s > 0.0) and np.all(z > 0.0)):
            raise ValueError("slack and dual vectors must stay strictly positive")
        _, grad, hess = value_gradient_hessian(program.objective, x)
        r_c, r_e, r_i = compute_residuals(program, hess, x, y, w, s)
        return cls(x, y, w, s, z, hess, grad, r_c, r_e, r_i, duality_measure(s, z), nu)

    def blocks(self) -> Blocks:
        return Blocks(self.x, self.y, self.w, self.s, self.z)

    @property
    def p(self) -> int:
        return self.s.size


def compute_residuals(program: ConvexProgram, hess, x, y, w, s):
    """(r_c, r_e, r_i) at a point, using the model term H x in r_c."""
    r_c = hess @ x + program.a_eq.T @ y - program.a_ineq.T @ w
    r_e = program.a_eq @ x - program.b_eq
    r_i = program.a_ineq @ x - s - program.b_ineq
    return r_c, r_e, r_i


def duality_measure(s, z) -> float:
    """mu = s'z / p."""
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    if s.size == 0:
        raise ValueError("duality measure needs at least one slack component")
    return float(s @ z) / s.size


def optimality_residual(iterate: Iterate) -> np.ndarray:
    """Stacked optimality vector (r_c, r_e, r_i, w - z, z*s)."""
    return np.concatenate(
        [
            iterate.r_c,
            iterate.r_e,
            iterate.r_i,
            iterate.w - iterate.z,
            iterate.z * iterate.s,
        ]
    )


def kkt_norm(iterate: Iterate) -> float:
    """Euclidean norm of the stacked optimality vector (the stop test)."""
    return float(np.linalg.norm(optimality_residual(iterate)))


def true_stationarity_norm(program: ConvexProgram, iterate: Iterate) -> float:
    """Norm of grad f + A_eq'y - A_ineq'w, reported as a diagnostic only.

    The stepping residual replaces grad f with H x, so the two vanish
    together only when the objective is an unshifted quadratic.
    """
    vec = iterate.grad + program.a_eq.T @ iterate.y - program.a_ineq.T @ iterate.w
    return float(np.linalg.norm(vec))


def assemble_newton_matrix(hess, a_eq, a_ineq, s, z) -> np.ndarray:
    """Dense Newton matrix over the unknown order (x, y, w, s, z)."""
    hess = np.asarray(hess, dtype=float)
    a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
    a_ineq = np.atleast_2d(np.asarray(a_ineq, dtype=float))
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    n = hess.shape[0]
    m = a_eq.shape[0] if a_eq.size else 0
    p = a_ineq.shape[0]
    size = n + m + 3 * p
    matrix = np.zeros((size, size))
    ox, oy, ow, os_, oz = 0, n, n + m, n + m + p, n + m + 2 * p

    matrix[ox : ox + n, ox : ox + n] = hess
    if m:
        matrix[ox : ox + n, oy : oy + m] = a_eq.T
        matrix[oy : oy + m, ox : ox + n] = a_eq
    matrix[ox : ox + n, ow : ow + p] = -a_ineq.T
    matrix[ow : ow + p, ox : ox + n] = a_ineq
    idx = np.arange(p)
    matrix[ow + idx, os_ + idx] = -1.0
    matrix[os_ + idx, ow + idx] = 1.0
    matrix[os_ + idx, oz + idx] = -1.0
    matrix[oz + idx, os_ + idx] = z
    matrix[oz + idx, oz + idx] = s
    return matrix


def _split(vector: np.ndarray, n: int, m: int, p: int) -> Blocks:
    parts = np.split(vector, [n, n + m, n + m + p, n + m + 2 * p])
    return Blocks(*parts)


def _solve_checked(factor, matrix, rhs):
    sol = lu_solve(factor, rhs)
    residual = rhs - matrix @ sol
    # one refinement pass when the direct solve is not clean enough
    if np.linalg.norm(residual) > SOLVE_TOLERANCE * (1.0 + np.linalg.norm(rhs)):
        sol = sol + lu_solve(factor, residual)
    return sol


def solve_directions(matrix: np.ndarray, iterate: Iterate, mu: float) -> NewtonDirections:
    """Solve the three direction systems off one factorization.

    Raises :class:`SingularKKTError` when a pivot falls below
    ``PIVOT_TOLERANCE`` times the largest matrix entry; no silent
    regularization is applied.
    """
    with warnings.catch_warnings():
        # the pivot check below raises a typed error instead
        warnings.simplefilter("ignore", LinAlgWarning)
        factor = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(factor[0]))
    scale = float(np.abs(matrix).max())
    threshold = PIVOT_TOLERANCE * scale
    smallest = float(pivots.min()) if pivots.size else 0.0
    if scale == 0.0 or smallest < threshold:
        raise SingularKKTError(smallest, threshold)

    n, m, p = iterate.x.size, iterate.y.size, iterate.p
    rhs1 = optimality_residual(iterate)
    vdot = _split(_solve_checked(factor, matrix, rhs1), n, m, p)

    rhs2 = np.zeros(n + m + 3 * p)
    rhs2[n + m + 2 * p :] = mu
    p_dir = _split(_solve_checked(factor, matrix, rhs2), n, m, p)

    rhs3 = np.zeros(n + m + 3 * p)
    rhs3[n + m + 2 * p :] = -2.0 * vdot.z * vdot.s
    q_dir = _split(_solve_checked(factor, matrix, rhs3), n, m, p)

    return NewtonDirections(vdot, p_dir, q_dir)
