"""Control-oriented transmit power allocation for wireless LQR loops.

A library and CLI that split a transmit power budget across multiple
wireless control loops so that the sum of their predicted LQR costs is
minimized, with a closed-form approximation and the classic
water-filling baseline for comparison.
"""

from .allocator import (
    brute_force_oracle,
    solve,
    solve_closed_form,
    solve_exact,
    water_filling,
)
from .errors import (
    BelowStabilityThreshold,
    DegenerateGeometry,
    DegeneratePlant,
    InfeasibleStability,
    KTooLarge,
    LqrPowerError,
    NegativePowerWarning,
    NoConvergence,
    NotPositiveDefinite,
    SingularInnerMatrix,
    StabilityUnattainable,
    UnequalCycleTimes,
    UnstableClosedLoop,
    ValidationError,
)
from .loopsim import SimReport, simulate_ideal
from .model import (
    AllocationProblem,
    AllocationResult,
    ChannelModel,
    ControlLoop,
    PlantModel,
    ScenarioSpec,
    channel_gain,
    db_to_linear,
    dbm_to_watts,
    dbw_to_watts,
    generate_scenario,
    linear_to_db,
    load_result,
    load_scenario,
    load_spec,
    sample_disk_positions,
    save_result,
    save_scenario,
)
from .ratecost import LoopCurve, min_stabilizing_power
from .riccati import (
    RiccatiSolution,
    entropy_power_gaussian,
    intrinsic_entropy,
    solve_riccati,
)

__version__ = "0.1.0"
