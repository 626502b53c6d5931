"""Coupled discrete Riccati equations and related plant functionals.

The pair (S, M) solves

    S = Q + A'(S - M)A
    M = S B (R + B'SB)^{-1} B'S

which is the standard DARE written with the improvement term M kept
explicit.  S gives the optimal quadratic cost structure and tr(Sigma S)
the cost achievable with unconstrained communication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePlant,
    NoConvergence,
    NotPositiveDefinite,
    SingularInnerMatrix,
)

LN2 = math.log(2.0)

# Iterates whose norm passes this are treated as divergent.
_OVERFLOW_NORM = 1e100
_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Fixed point of the coupled Riccati equations for one plant.

    Attributes:
        S, M: solution matrices (n x n).
        gain_K: certainty-equivalence feedback gain (m x n), u = -K x.
        det_M_abs: |det M| (may underflow to 0.0 for large n).
        cost_floor: tr(Sigma S), the rate-unconstrained cost.
        iterations: value-iteration steps performed.
        residual: Frobenius residual of the S-equation at the fix point.
    """

    S: np.ndarray
    M: np.ndarray
    gain_K: np.ndarray
    det_M_abs: float
    cost_floor: float
    iterations: int
    residual: float

    def log_abs_det_M(self) -> float:
        """ln|det M|, overflow-safe (used for |det M|^(1/n))."""
        sign, logdet = np.linalg.slogdet(self.M)
        if sign == 0.0:
            return -math.inf
        return float(logdet)


def _improvement_term(S, B, R):
    """M = S B (R + B'SB)^{-1} B'S, guarding the inner inverse."""
    inner = R + B.T @ S @ B
    inner = 0.5 * (inner + inner.T)
    cond = np.linalg.cond(inner)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularInnerMatrix(
            f"R + B'SB has condition estimate {cond:.3e} (limit {_COND_LIMIT:.0e})"
        )
    W = B.T @ S
    return W.T @ np.linalg.solve(inner, W)


def solve_riccati(plant, rel_tol: float = 1e-9,
                  max_iterations: int = 100_000) -> RiccatiSolution:
    """Solve the coupled Riccati equations by value iteration from S0 = Q.

    Iterates S <- Q + A'(S - M(S))A until the iterate difference falls
    below ``rel_tol * (1 + ||S||_F)``.

    Raises:
        NoConvergence: iteration budget exhausted or the iterate diverged.
        SingularInnerMatrix: R + B'SB is numerically singular.
    """
    A = np.asarray(plant.A, dtype=float)
    B = np.asarray(plant.B, dtype=float)
    Q = np.asarray(plant.Q, dtype=float)
    R = np.asarray(plant.R, dtype=float)

    S = Q.copy()
    iterations = 0
    while True:
        M = _improvement_term(S, B, R)
        S_next = Q + A.T @ (S - M) @ A
        S_next = 0.5 * (S_next + S_next.T)
        iterations += 1
        diff = float(np.linalg.norm(S_next - S))
        norm = float(np.linalg.norm(S_next))
        if not math.isfinite(norm) or norm > _OVERFLOW_NORM:
            raise NoConvergence(
                f"Riccati iterate norm {norm:.3e} after {iterations} iterations"
            )
        S = S_next
        if diff <= rel_tol * (1.0 + norm):
            break
        if iterations >= max_iterations:
            raise NoConvergence(
                f"no Riccati fixed point after {max_iterations} iterations "
                f"(last iterate difference {diff:.3e})"
            )

    M = _improvement_term(S, B, R)
    inner = R + B.T @ S @ B
    gain_K = np.linalg.solve(0.5 * (inner + inner.T), B.T @ S @ A)
    residual = float(np.linalg.norm(S - Q - A.T @ (S - M) @ A))
    sign, logdet = np.linalg.slogdet(M)
    det_M_abs = 0.0 if sign == 0.0 else float(math.exp(logdet))
    cost_floor = float(np.trace(np.asarray(plant.Sigma, dtype=float) @ S))
    return RiccatiSolution(
        S=S,
        M=M,
        gain_K=gain_K,
        det_M_abs=det_M_abs,
        cost_floor=cost_floor,
        iterations=iterations,
        residual=residual,
    )


def intrinsic_entropy(plant) -> float:
    """log2|det A| in bits per cycle, via a pivoted log-magnitude factorization.

    Raises:
        DegeneratePlant: det A vanishes (no finite entropy rate).
    """
    A = np.asarray(plant.A, dtype=float)
    sign, logdet = np.linalg.slogdet(A)
    if sign == 0.0 or not math.isfinite(logdet):
        raise DegeneratePlant("state matrix is singular", field="A")
    return float(logdet / LN2)


def entropy_power_gaussian(Sigma) -> float:
    """Entropy power of a Gaussian with covariance Sigma.

    Uses the prefactor 1/(2*pi) on exp((2/n) h(v)), which for a Gaussian
    evaluates to e * (det Sigma)^(1/n).  Note this is e times the textbook
    entropy power (prefactor 1/(2*pi*e)); the constant scales every loop
    identically and is kept for consistency with the cost model.

    Raises:
        NotPositiveDefinite: Sigma is not symmetric positive definite.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise NotPositiveDefinite("covariance must be square", field="Sigma")
    if not np.allclose(Sigma, Sigma.T, rtol=1e-9, atol=1e-12):
        raise NotPositiveDefinite("covariance must be symmetric", field="Sigma")
    n = Sigma.shape[0]
    eigs = np.linalg.eigvalsh(Sigma)
    if eigs[0] <= 1e-15 * max(1.0, eigs[-1]):
        raise NotPositiveDefinite(
            f"covariance has eigenvalue {eigs[0]:.3e}", field="Sigma"
        )
    logdet = float(np.sum(np.log(eigs)))
    return math.exp(1.0 + logdet / n)
