"""Monte Carlo validation of the rate-unconstrained cost floor.

Simulates x_{t+1} = A x_t + B u_t + v_t under the certainty-equivalence
feedback u_t = -K x_t with ideal command delivery, and compares the
time-average stage cost x'Qx + u'Ru against the predicted floor
tr(Sigma S).  This validates the asymptote of the cost curve only; the
rate-limited regime would need an explicit coding scheme and is out of
scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, UnstableClosedLoop
from .riccati import solve_riccati

_CHUNK = 8192


@dataclass(frozen=True)
class SimReport:
    """Outcome of one closed-loop simulation run."""

    horizon: int
    empirical_cost: float
    predicted_floor: float
    rel_error: float
    seed: int


def _noise_factor(Sigma: np.ndarray) -> np.ndarray | None:
    """Cholesky factor of Sigma; None for exactly zero covariance."""
    if not Sigma.any():
        return None
    try:
        return np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "noise covariance must be positive definite (or exactly zero)",
            field="Sigma") from None


def simulate_ideal(plant, horizon: int, seed: int) -> SimReport:
    """Simulate `horizon` steps from x0 = 0 and average the stage cost.

    Raises:
        UnstableClosedLoop: the certainty-equivalence gain leaves the
            closed loop with spectral radius >= 1.
        NoConvergence, SingularInnerMatrix: propagated from the Riccati
            solve.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    sol = solve_riccati(plant)
    A = np.asarray(plant.A, dtype=float)
    B = np.asarray(plant.B, dtype=float)
    Q = np.asarray(plant.Q, dtype=float)
    R = np.asarray(plant.R, dtype=float)
    K = sol.gain_K
    A_cl = A - B @ K
    radius = float(np.max(np.abs(np.linalg.eigvals(A_cl))))
    if radius >= 1.0:
        raise UnstableClosedLoop(
            f"closed-loop spectral radius {radius:.6g} >= 1")

    # Stage cost with u = -Kx collapses to x' (Q + K'RK) x.
    P_stage = Q + K.T @ R @ K
    factor = _noise_factor(np.asarray(plant.Sigma, dtype=float))
    rng = np.random.default_rng(seed)
    n = A.shape[0]

    total = 0.0
    if n == 1:
        a_cl = float(A_cl[0, 0])
        p_st = float(P_stage[0, 0])
        sig = float(factor[0, 0]) if factor is not None else 0.0
        x = 0.0
        done = 0
        while done < horizon:
            count = min(_CHUNK, horizon - done)
            noise = rng.standard_normal(count) * sig if sig else np.zeros(count)
            for t in range(count):
                total += p_st * x * x
                x = a_cl * x + noise[t]
            done += count
    else:
        x = np.zeros(n)
        done = 0
        while done < horizon:
            count = min(_CHUNK, horizon - done)
            if factor is not None:
                noise = rng.standard_normal((count, n)) @ factor.T
            else:
                noise = np.zeros((count, n))
            for t in range(count):
                total += float(x @ P_stage @ x)
                x = A_cl @ x + noise[t]
            done += count

    empirical = total / horizon
    predicted = sol.cost_floor
    if predicted > 0.0:
        rel = abs(empirical - predicted) / predicted
    else:
        rel = 0.0 if empirical == 0.0 else math.inf
    return SimReport(horizon=horizon, empirical_cost=empirical,
                     predicted_floor=predicted, rel_error=rel, seed=seed)
