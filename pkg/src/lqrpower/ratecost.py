"""Per-loop scalar curves linking transmit power to rate and LQR cost.

For a loop with channel gain g, noise power sigma2, bandwidth B, cycle
time T, state dimension n, entropy rate h and entropy power N, the
predicted cost at power p is

    l(p) = n 2^(2h/n) N |det M|^(1/n) / ((1 + g p / sigma2)^(2BT/n) - 2^(2h/n))
           + tr(Sigma S)

valid above the stability threshold p_min where the per-cycle throughput
exceeds h.  Internally the denominator is evaluated in log space as
gamma * expm1(t) with t = (2 ln2 / n)(rate(p) - h), which stays accurate
arbitrarily close to the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import BelowStabilityThreshold, DegeneratePlant, StabilityUnattainable

LN2 = math.log(2.0)

# Strict feasibility p > p_min is realized as p >= p_min * (1 + REL_MARGIN);
# the offset sits far below every reporting tolerance.
REL_MARGIN = 1e-12

_MAX_RATE_EXPONENT = 1000.0


def min_stabilizing_power(h_bits: float, gain: float, noise_power_w: float,
                          bandwidth_hz: float, cycle_s: float) -> float:
    """Smallest power whose per-cycle throughput reaches h_bits.

    Returns (sigma2/g) * (2^(h/(B T)) - 1); zero for h = 0.

    Raises:
        StabilityUnattainable: h/(B T) exceeds the overflow guard.
    """
    if h_bits == 0.0:
        return 0.0
    x = h_bits / (bandwidth_hz * cycle_s)
    if x > _MAX_RATE_EXPONENT:
        raise StabilityUnattainable(
            f"required throughput exponent {x:.3g} exceeds {_MAX_RATE_EXPONENT:.0f}"
        )
    return (noise_power_w / gain) * math.expm1(x * LN2)


@dataclass(frozen=True)
class LoopCurve:
    """Precomputed constants of one loop's power-to-cost curve.

    Attributes:
        loop: the ControlLoop this curve was built from (None for
            synthetic curves assembled directly in tests).
        n: state dimension.
        h_bits: entropy rate of the plant, bits per cycle.
        exponent: 2 B T / n.
        gamma: 2^(2 h / n).
        numerator_const: n * gamma * N(v) * |det M|^(1/n).
        floor: tr(Sigma S), the cost at unlimited power.
        p_min_w: stability threshold power in watts.
        snr_per_watt: g / sigma2.
        bandwidth_time: B * T, bits per cycle per unit log2-SNR.
    """

    loop: Optional[object]
    n: int
    h_bits: float
    exponent: float
    gamma: float
    numerator_const: float
    floor: float
    p_min_w: float
    snr_per_watt: float
    bandwidth_time: float

    @classmethod
    def from_loop(cls, loop) -> "LoopCurve":
        plant = loop.plant
        chan = loop.channel
        n = plant.A.shape[0]
        h = loop.h_bits
        bt = chan.bandwidth_hz * plant.T
        log_m = loop.derived.log_abs_det_M()
        if not math.isfinite(log_m):
            raise DegeneratePlant(
                "improvement term M is singular; the cost curve is flat", field="M"
            )
        det_m_root = math.exp(log_m / n)
        gamma = math.exp(2.0 * h * LN2 / n)
        num = n * gamma * loop.entropy_power * det_m_root
        return cls(
            loop=loop,
            n=n,
            h_bits=h,
            exponent=2.0 * bt / n,
            gamma=gamma,
            numerator_const=num,
            floor=loop.derived.cost_floor,
            p_min_w=loop.p_min_w,
            snr_per_watt=chan.gain / chan.noise_power_w,
            bandwidth_time=bt,
        )

    # -- curve evaluations ------------------------------------------------

    def rate_per_cycle(self, p: float) -> float:
        """Throughput B T log2(1 + g p / sigma2) in bits per cycle."""
        return self.bandwidth_time * math.log1p(self.snr_per_watt * p) / LN2

    def _pole_gap(self, p: float) -> float:
        # t = (2 ln2 / n)(rate(p) - h); positive iff p is stabilizing.
        return (2.0 / self.n) * (
            self.bandwidth_time * math.log1p(self.snr_per_watt * p)
            - self.h_bits * LN2
        )

    def lqr_cost(self, p: float) -> float:
        """Predicted LQR cost at power p (> p_min).

        Raises:
            BelowStabilityThreshold: p does not stabilize the loop.
        """
        if p <= self.p_min_w:
            raise BelowStabilityThreshold(
                f"power {p:.6g} W is at or below the stability threshold "
                f"{self.p_min_w:.6g} W"
            )
        t = self._pole_gap(p)
        scaled_num = self.numerator_const / self.gamma
        if t > 700.0:
            # expm1 would overflow; the excess is scaled_num * e^-t.
            return self.floor + scaled_num * math.exp(-t)
        denom = math.expm1(t)
        if denom <= 0.0:
            return math.inf
        return scaled_num / denom + self.floor

    def marginal_cost(self, p: float) -> float:
        """Cost reduction per extra watt, -dl/dp, at power p (> p_min)."""
        if p <= self.p_min_w:
            raise BelowStabilityThreshold(
                f"power {p:.6g} W is at or below the stability threshold "
                f"{self.p_min_w:.6g} W"
            )
        return self._marginal_unchecked(p)

    def _marginal_unchecked(self, p: float) -> float:
        t = self._pole_gap(p)
        if t <= 0.0:
            return math.inf
        log_y = math.log1p(self.snr_per_watt * p)
        lead = (
            2.0
            * self.bandwidth_time
            * self.numerator_const
            * self.snr_per_watt
            / (self.n * self.gamma * self.gamma)
        )
        if t > 700.0:
            # expm1(t)^2 ~= e^(2t); evaluate the tail in log space.
            arg = math.log(lead) + (self.exponent - 1.0) * log_y - 2.0 * t
            if math.isnan(arg) or arg <= -745.0:
                return 0.0
            return math.exp(arg)
        em = math.expm1(t)
        return lead * math.exp((self.exponent - 1.0) * log_y) / (em * em)

    def invert_marginal(self, lam: float) -> float:
        """The unique p > p_min with marginal_cost(p) = lam, for lam > 0.

        Brackets from p_min upward (upper bound doubled until the marginal
        drops below lam), then bisects to ~1e-14 relative on p.
        """
        lo = self.p_min_w * (1.0 + REL_MARGIN)
        if self._marginal_at_or_inf(lo) <= lam:
            return lo
        hi = lo + 1.0 / self.snr_per_watt
        grow = 0
        while self._marginal_at_or_inf(hi) > lam:
            hi *= 2.0
            grow += 1
            if grow > 4000 or not math.isfinite(hi):
                return hi
        for _ in range(500):
            if hi - lo <= 1e-14 * hi:
                break
            mid = 0.5 * (lo + hi)
            if self._marginal_at_or_inf(mid) > lam:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _marginal_at_or_inf(self, p: float) -> float:
        if p <= self.p_min_w:
            return math.inf
        return self._marginal_unchecked(p)
