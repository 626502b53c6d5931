"""Power allocation methods over a set of control loops.

Three methods are provided:

  * ``solve_exact`` - global optimum of the convex sum-cost problem,
    found by bisecting the budget multiplier and inverting each loop's
    marginal-cost curve.
  * ``solve_closed_form`` - the large-throughput approximation in which
    every loop is comfortably above its stability threshold; requires a
    common cycle time.
  * ``water_filling`` - the classic capacity-oriented baseline.

``brute_force_oracle`` grid-searches the power simplex for small loop
counts, for independent verification.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import (
    InfeasibleStability,
    KTooLarge,
    NegativePowerWarning,
    UnequalCycleTimes,
    ValidationError,
)
from .model import (
    METHOD_BRUTE_FORCE,
    METHOD_CLOSED_FORM,
    METHOD_EXACT,
    METHOD_WATER_FILLING,
    AllocationProblem,
    AllocationResult,
)
from .ratecost import LoopCurve

_BUDGET_RTOL = 1e-9
_MAX_OUTER_ITERATIONS = 200


def _curves(problem: AllocationProblem) -> list[LoopCurve]:
    return [loop.curve() for loop in problem.loops]


def _cost_or_inf(curve: LoopCurve, p: float) -> float:
    if p <= curve.p_min_w:
        return math.inf
    return curve.lqr_cost(p)


def _result(method: str, curves, powers, lam, iterations, p_max_w) -> AllocationResult:
    costs = [_cost_or_inf(c, p) for c, p in zip(curves, powers)]
    return AllocationResult(
        powers_w=tuple(powers),
        lqr_costs=tuple(costs),
        total_cost=math.fsum(costs),
        lam=lam,
        method=method,
        iterations=iterations,
        residual=abs(math.fsum(powers) - p_max_w),
    )


def solve_exact(problem: AllocationProblem) -> AllocationResult:
    """Optimal allocation: equalize marginal costs subject to the budget.

    At the optimum every loop sits at a common multiplier lambda with
    marginal_cost(p_k) = lambda and the budget met with equality.  The
    multiplier is bisected; each candidate allocation comes from
    per-loop ``invert_marginal``.

    Raises:
        InfeasibleStability: the stability minima already exceed the
            budget, so no feasible allocation exists.
    """
    curves = _curves(problem)
    p_max = problem.p_max_w
    p_mins = [c.p_min_w for c in curves]
    if math.fsum(p_mins) >= p_max:
        raise InfeasibleStability(p_max, p_mins)

    def powers_at(lam: float) -> list[float]:
        return [c.invert_marginal(lam) for c in curves]

    # Seed the multiplier from the marginals at an equal split.
    p_eq = p_max / len(curves)
    logs = []
    for c in curves:
        s = c._marginal_at_or_inf(max(p_eq, c.p_min_w * (1.0 + 1e-9)))
        if math.isfinite(s) and s > 0.0:
            logs.append(math.log(s))
    lam = math.exp(sum(logs) / len(logs)) if logs else 1.0

    iterations = 0
    powers = powers_at(lam)
    total = math.fsum(powers)
    if total > p_max:
        lam_lo = lam
        while total > p_max:
            lam_lo = lam
            lam *= 2.0
            powers = powers_at(lam)
            total = math.fsum(powers)
            iterations += 1
            if iterations > 4000:
                break
        lam_hi = lam
    else:
        lam_hi = lam
        while total <= p_max:
            lam_hi = lam
            lam /= 2.0
            if lam <= 0.0:
                break
            powers = powers_at(lam)
            total = math.fsum(powers)
            iterations += 1
            if iterations > 4000:
                break
        lam_lo = lam

    # lam_lo undershoots the budget multiplier (allocates too much),
    # lam_hi overshoots; bisect between them.
    best = (powers, lam, abs(total - p_max))
    for _ in range(_MAX_OUTER_ITERATIONS):
        if abs(total - p_max) <= _BUDGET_RTOL * p_max:
            break
        if lam_hi - lam_lo <= 1e-15 * lam_hi:
            break
        lam = 0.5 * (lam_lo + lam_hi)
        powers = powers_at(lam)
        total = math.fsum(powers)
        iterations += 1
        gap = abs(total - p_max)
        if gap < best[2]:
            best = (powers, lam, gap)
        if total > p_max:
            lam_lo = lam
        else:
            lam_hi = lam

    powers, lam, _ = best
    return _result(METHOD_EXACT, curves, powers, lam, iterations, p_max)


def solve_closed_form(problem: AllocationProblem) -> AllocationResult:
    """Allocation under the ample-throughput approximation.

    With a common cycle time, bandwidth and state dimension, the
    equal-marginal condition admits the weight solution

        w_k = [|det M_k|^(1/n) 2^(2h_k/n) N_k]^(n/(2BT+n)) (sigma2/g_k)^(2BT/(2BT+n))
        p_k = (P_max + sum_j sigma2/g_j) w_k / sum_j w_j - sigma2/g_k

    Powers sum to the budget by construction.  The approximation ignores
    stability thresholds: any non-positive power is reported via
    NegativePowerWarning and the result returned unclamped.

    Raises:
        UnequalCycleTimes: loops disagree on T.
        ValidationError: loops disagree on bandwidth or state dimension.
    """
    curves = _curves(problem)
    cycle_times = {c.loop.plant.T for c in curves}
    if len(cycle_times) != 1:
        raise UnequalCycleTimes(
            f"closed form needs a common cycle time, got {sorted(cycle_times)}")
    dims = {c.n for c in curves}
    bws = {c.loop.channel.bandwidth_hz for c in curves}
    if len(dims) != 1 or len(bws) != 1:
        raise ValidationError(
            "closed form needs a common bandwidth and state dimension",
            field="loops")

    n = curves[0].n
    two_bt = 2.0 * curves[0].bandwidth_time
    q = n / (two_bt + n)
    inv_snr = [1.0 / c.snr_per_watt for c in curves]

    # Weights in log space; numerator_const = n * gamma * N * |det M|^(1/n).
    log_w = [
        q * math.log(c.numerator_const / c.n) + (1.0 - q) * math.log(a)
        for c, a in zip(curves, inv_snr)
    ]
    w_max = max(log_w)
    w = [math.exp(lw - w_max) for lw in log_w]
    w_sum = math.fsum(w)

    pot = problem.p_max_w + math.fsum(inv_snr)
    powers = [pot * wk / w_sum - a for wk, a in zip(w, inv_snr)]
    if any(p <= 0.0 for p in powers):
        warnings.warn(
            "ample-throughput assumption violated: non-positive power "
            f"for loop(s) {[k for k, p in enumerate(powers) if p <= 0.0]}",
            NegativePowerWarning,
            stacklevel=2,
        )

    # Multiplier consistent with the weights: lambda = (sum_k (2BT w~_k) / pot)^(1/q).
    log_lam_q = (
        math.log(math.fsum(math.exp(q * math.log(two_bt) + lw - w_max)
                           for lw in log_w))
        + w_max
        - math.log(pot)
    )
    lam = math.exp(log_lam_q / q)
    return _result(METHOD_CLOSED_FORM, curves, powers, lam, 0, problem.p_max_w)


def water_filling(problem: AllocationProblem) -> AllocationResult:
    """Capacity-oriented baseline p_k = (1/lambda0 - sigma2/g_k)^+.

    The water level is found by the sort-and-check procedure: channels
    sorted by inverse gain, largest active set whose boundary channel
    keeps non-negative power (weak inequality).
    """
    curves = _curves(problem)
    p_max = problem.p_max_w
    inv_snr = np.array([1.0 / c.snr_per_watt for c in curves])
    order = np.argsort(inv_snr, kind="stable")
    a_sorted = inv_snr[order]

    active = len(curves)
    passes = 0
    while active > 1:
        level = (p_max + a_sorted[:active].sum()) / active
        passes += 1
        if level - a_sorted[active - 1] >= 0.0:
            break
        active -= 1
    level = (p_max + a_sorted[:active].sum()) / active

    powers = np.zeros(len(curves))
    powers[order[:active]] = level - a_sorted[:active]
    return _result(METHOD_WATER_FILLING, curves, powers.tolist(),
                   1.0 / level, passes, p_max)


def _cost_grid(curve: LoopCurve, p: np.ndarray) -> np.ndarray:
    """Vectorized cost from the plain curve constants (oracle-side path)."""
    snr = curve.snr_per_watt
    denom = np.power(1.0 + snr * p, curve.exponent) - curve.gamma
    out = np.full(p.shape, np.inf)
    ok = denom > 0.0
    out[ok] = curve.numerator_const / denom[ok] + curve.floor
    return out


def brute_force_oracle(problem: AllocationProblem,
                       grid_points: int = 1000) -> AllocationResult:
    """Grid search over the budget simplex; K <= 3 only.

    Each free coordinate takes ``grid_points`` values between its
    stability minimum and the largest value leaving the other loops
    feasible; the last power is the budget remainder.

    Raises:
        KTooLarge: more than three loops.
        InfeasibleStability: stability minima exceed the budget.
    """
    K = problem.num_loops
    if K > 3:
        raise KTooLarge(f"grid oracle supports at most 3 loops, got {K}")
    curves = _curves(problem)
    p_max = problem.p_max_w
    p_mins = [c.p_min_w for c in curves]
    if math.fsum(p_mins) >= p_max:
        raise InfeasibleStability(p_max, p_mins)
    lo = [pm * (1.0 + 1e-9) if pm > 0.0 else 0.0 for pm in p_mins]

    if K == 1:
        powers = [p_max]
        evaluated = 1
    elif K == 2:
        p1 = np.linspace(lo[0], p_max - lo[1], grid_points)
        p2 = p_max - p1
        total = _cost_grid(curves[0], p1) + _cost_grid(curves[1], p2)
        i = int(np.argmin(total))
        powers = [float(p1[i]), float(p2[i])]
        evaluated = grid_points
    else:
        p1 = np.linspace(lo[0], p_max - lo[1] - lo[2], grid_points)
        p2 = np.linspace(lo[1], p_max - lo[0] - lo[2], grid_points)
        g1, g2 = np.meshgrid(p1, p2, indexing="ij")
        g3 = p_max - g1 - g2
        total = (_cost_grid(curves[0], g1) + _cost_grid(curves[1], g2)
                 + _cost_grid(curves[2], np.maximum(g3, 0.0)))
        total[g3 < lo[2]] = np.inf
        i, j = np.unravel_index(int(np.argmin(total)), total.shape)
        powers = [float(g1[i, j]), float(g2[i, j]), float(g3[i, j])]
        evaluated = grid_points * grid_points

    marginals = [c._marginal_at_or_inf(p) for c, p in zip(curves, powers)]
    finite = [s for s in marginals if math.isfinite(s)]
    lam = math.fsum(finite) / len(finite) if finite else math.inf
    return _result(METHOD_BRUTE_FORCE, curves, powers, lam, evaluated, p_max)


def solve(problem: AllocationProblem, method: str) -> AllocationResult:
    """Dispatch on the method name used in result files and the CLI."""
    if method == METHOD_EXACT:
        return solve_exact(problem)
    if method == METHOD_CLOSED_FORM:
        return solve_closed_form(problem)
    if method == METHOD_WATER_FILLING:
        return water_filling(problem)
    raise ValidationError(f"unknown method {method!r}", field="method")
