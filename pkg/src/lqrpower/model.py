"""Domain types, unit conversions, scenario generation and file formats.

All stored quantities are strictly SI (watts, hertz, seconds, meters);
decibel values appear only at I/O boundaries.  Types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ratecost, riccati
from .errors import DegenerateGeometry, ValidationError
from .riccati import RiccatiSolution

_SYM_TOL = 1e-9


def db_to_linear(value_db: float) -> float:
    """Convert a dB value to a linear power ratio, 10^(dB/10)."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB."""
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    """Convert a dBm level to watts (dBm is dB referenced to 1 mW)."""
    return db_to_linear(value_dbm - 30.0)


def dbw_to_watts(value_dbw: float) -> float:
    """Convert a dBW level to watts."""
    return db_to_linear(value_dbw)


def channel_gain(distance_m: float, beta0: float) -> float:
    """Free-space path gain beta0 / d^2 at slant distance d.

    Raises:
        DegenerateGeometry: non-positive distance.
    """
    if distance_m <= 0.0:
        raise DegenerateGeometry(
            f"distance must be positive, got {distance_m!r}", field="distance_m"
        )
    return beta0 / (distance_m * distance_m)


def _as_matrix(value, name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not a numeric matrix: {exc}", field=name) from None
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {arr.shape}",
                              field=name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries", field=name)
    arr.setflags(write=False)
    return arr


def _check_symmetric_psd(mat: np.ndarray, name: str, definite: bool = False) -> None:
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if not np.allclose(mat, mat.T, atol=_SYM_TOL * scale):
        raise ValidationError("matrix must be symmetric", field=name)
    eigs = np.linalg.eigvalsh(mat)
    if definite:
        if eigs[0] <= _SYM_TOL * scale:
            raise ValidationError(
                f"matrix must be positive definite (min eigenvalue {eigs[0]:.3e})",
                field=name)
    elif eigs[0] < -_SYM_TOL * scale:
        raise ValidationError(
            f"matrix must be positive semidefinite (min eigenvalue {eigs[0]:.3e})",
            field=name)


@dataclass(frozen=True, eq=False)
class PlantModel:
    """One control object: dynamics, cost weights, noise and cycle time.

    A is n x n, B is n x m, Q/R weight the state/input, Sigma is the
    system-noise covariance and T the cycle duration in seconds.  Q and R
    must be symmetric positive semidefinite, Sigma symmetric positive
    semidefinite (strict definiteness is required only where an entropy
    power is taken).
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    Sigma: np.ndarray
    T: float

    def __post_init__(self):
        for name in ("A", "B", "Q", "R", "Sigma"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValidationError("state matrix must be square", field="A")
        if self.B.shape[0] != n:
            raise ValidationError(
                f"input matrix must have {n} rows, got {self.B.shape[0]}", field="B")
        m = self.B.shape[1]
        if self.Q.shape != (n, n):
            raise ValidationError(f"expected shape {(n, n)}", field="Q")
        if self.R.shape != (m, m):
            raise ValidationError(f"expected shape {(m, m)}", field="R")
        if self.Sigma.shape != (n, n):
            raise ValidationError(f"expected shape {(n, n)}", field="Sigma")
        _check_symmetric_psd(self.Q, "Q")
        _check_symmetric_psd(self.R, "R")
        _check_symmetric_psd(self.Sigma, "Sigma")
        if not (isinstance(self.T, (int, float)) and self.T > 0.0):
            raise ValidationError("cycle time must be positive", field="T")
        object.__setattr__(self, "T", float(self.T))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class ChannelModel:
    """One downlink channel: linear power gain, bandwidth and noise power."""

    gain: float
    bandwidth_hz: float
    noise_power_w: float

    def __post_init__(self):
        for name in ("gain", "bandwidth_hz", "noise_power_w"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)
                    and value > 0.0):
                raise ValidationError(f"must be positive, got {value!r}", field=name)
            object.__setattr__(self, name, float(value))


@dataclass(frozen=True, eq=False)
class ControlLoop:
    """A plant paired with its downlink channel, plus cached derived data.

    The cached values (Riccati solution, entropy rate h_bits, entropy
    power, stability threshold p_min_w) are pure functions of plant and
    channel; ``build`` computes them.
    """

    plant: PlantModel
    channel: ChannelModel
    derived: RiccatiSolution
    h_bits: float
    entropy_power: float
    p_min_w: float

    @classmethod
    def build(cls, plant: PlantModel, channel: ChannelModel) -> "ControlLoop":
        derived = riccati.solve_riccati(plant)
        h_bits = riccati.intrinsic_entropy(plant)
        entropy_power = riccati.entropy_power_gaussian(plant.Sigma)
        p_min_w = ratecost.min_stabilizing_power(
            h_bits, channel.gain, channel.noise_power_w,
            channel.bandwidth_hz, plant.T)
        return cls(plant=plant, channel=channel, derived=derived,
                   h_bits=h_bits, entropy_power=entropy_power, p_min_w=p_min_w)

    def curve(self) -> ratecost.LoopCurve:
        return ratecost.LoopCurve.from_loop(self)


@dataclass(frozen=True, eq=False)
class AllocationProblem:
    """A set of control loops competing for a total power budget."""

    loops: tuple[ControlLoop, ...]
    p_max_w: float

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))
        if len(self.loops) < 1:
            raise ValidationError("at least one loop is required", field="loops")
        if not (isinstance(self.p_max_w, (int, float)) and self.p_max_w > 0.0):
            raise ValidationError("power budget must be positive", field="p_max_w")
        object.__setattr__(self, "p_max_w", float(self.p_max_w))

    @property
    def num_loops(self) -> int:
        return len(self.loops)


@dataclass(frozen=True)
class AllocationResult:
    """Powers and predicted costs returned by an allocation method.

    ``lqr_costs[k]`` is the curve cost at ``powers_w[k]``; powers at or
    below a loop's stability threshold are reported with infinite cost.
    ``residual`` is the absolute budget mismatch |sum(p) - p_max|.
    """

    powers_w: tuple[float, ...]
    lqr_costs: tuple[float, ...]
    total_cost: float
    lam: float
    method: str
    iterations: int
    residual: float

    def __post_init__(self):
        object.__setattr__(self, "powers_w", tuple(float(p) for p in self.powers_w))
        object.__setattr__(self, "lqr_costs", tuple(float(c) for c in self.lqr_costs))

    def to_dict(self) -> dict:
        return {
            "powers_w": list(self.powers_w),
            "lqr_costs": list(self.lqr_costs),
            "total_cost": self.total_cost,
            "lambda": self.lam,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
        }


METHOD_EXACT = "exact"
METHOD_CLOSED_FORM = "closed_form"
METHOD_WATER_FILLING = "water_filling"
METHOD_BRUTE_FORCE = "brute_force"


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of the randomized field layout used by the generator."""

    num_robots: int = 5
    field_radius_m: float = 5000.0
    uav_height_m: float = 1000.0
    beta0_db: float = -60.0
    noise_dbm: float = -110.0
    bandwidth_hz: float = 5000.0
    cycle_s: float = 0.01
    state_dim: int = 100
    h_range_bits: tuple[float, float] = (0.0, 100.0)
    noise_variance: float = 0.01
    seed: int = 1

    def __post_init__(self):
        if self.num_robots < 1:
            raise ValidationError("need at least one robot", field="num_robots")
        for name in ("field_radius_m", "uav_height_m", "bandwidth_hz",
                     "cycle_s", "noise_variance"):
            if not getattr(self, name) > 0.0:
                raise ValidationError("must be positive", field=name)
        if self.state_dim < 1:
            raise ValidationError("must be a positive integer", field="state_dim")
        lo, hi = self.h_range_bits
        if not (0.0 <= lo <= hi):
            raise ValidationError("expected 0 <= lo <= hi", field="h_range_bits")
        object.__setattr__(self, "h_range_bits", (float(lo), float(hi)))

    def to_dict(self) -> dict:
        return {
            "num_robots": self.num_robots,
            "field_radius_m": self.field_radius_m,
            "uav_height_m": self.uav_height_m,
            "beta0_db": self.beta0_db,
            "noise_dbm": self.noise_dbm,
            "bandwidth_hz": self.bandwidth_hz,
            "cycle_s": self.cycle_s,
            "state_dim": self.state_dim,
            "h_range_bits": list(self.h_range_bits),
            "noise_variance": self.noise_variance,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}",
                                  field="scenario spec")
        kwargs = dict(data)
        if "h_range_bits" in kwargs:
            kwargs["h_range_bits"] = tuple(kwargs["h_range_bits"])
        return cls(**kwargs)


def sample_disk_positions(rng: np.random.Generator, radius_m: float,
                          count: int) -> np.ndarray:
    """Uniform positions in a disk, as an array of (x, y) rows.

    Radius is drawn as radius * sqrt(U) so that area, not radius, is
    uniform.
    """
    r = radius_m * np.sqrt(rng.random(count))
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def generate_scenario(spec: ScenarioSpec, p_max_w: float) -> AllocationProblem:
    """Materialize a random scenario: placement, channels and plants.

    Robots are placed uniformly in a disk of ``field_radius_m`` around the
    transmitter, whose altitude sets the slant range.  Each plant gets a
    diagonal state matrix with equal entries 2^(h/n) so its entropy rate
    is exactly the drawn h (drawn uniformly over ``h_range_bits``; the
    range's distribution is a modeling choice), with B = Q = I, R = 0 and
    Sigma = noise_variance * I.  Deterministic for a given seed.
    """
    rng = np.random.default_rng(spec.seed)
    K = spec.num_robots
    n = spec.state_dim

    positions = sample_disk_positions(rng, spec.field_radius_m, K)
    h_values = rng.uniform(spec.h_range_bits[0], spec.h_range_bits[1], K)

    beta0 = db_to_linear(spec.beta0_db)
    noise_w = dbm_to_watts(spec.noise_dbm)
    eye = np.eye(n)

    loops = []
    for k in range(K):
        slant = math.hypot(spec.uav_height_m, float(np.linalg.norm(positions[k])))
        chan = ChannelModel(
            gain=channel_gain(slant, beta0),
            bandwidth_hz=spec.bandwidth_hz,
            noise_power_w=noise_w,
        )
        a_diag = 2.0 ** (float(h_values[k]) / n)
        plant = PlantModel(
            A=a_diag * eye,
            B=eye,
            Q=eye,
            R=np.zeros((n, n)),
            Sigma=spec.noise_variance * eye,
            T=spec.cycle_s,
        )
        loops.append(ControlLoop.build(plant, chan))
    return AllocationProblem(loops=tuple(loops), p_max_w=p_max_w)


# -- scenario / result files ----------------------------------------------


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ValidationError("missing required field", field=f"{context}.{key}")
    return data[key]


def scenario_to_dict(problem: AllocationProblem,
                     spec: Optional[ScenarioSpec] = None) -> dict:
    doc: dict = {"p_max_w": problem.p_max_w}
    if spec is not None:
        doc["generator"] = spec.to_dict()
    doc["loops"] = [
        {
            "plant": {
                "A": loop.plant.A.tolist(),
                "B": loop.plant.B.tolist(),
                "Q": loop.plant.Q.tolist(),
                "R": loop.plant.R.tolist(),
                "Sigma": loop.plant.Sigma.tolist(),
                "T": loop.plant.T,
            },
            "channel": {
                "gain": loop.channel.gain,
                "bandwidth_hz": loop.channel.bandwidth_hz,
                "noise_power_w": loop.channel.noise_power_w,
            },
        }
        for loop in problem.loops
    ]
    return doc


def save_scenario(path, problem: AllocationProblem,
                  spec: Optional[ScenarioSpec] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(problem, spec), fh, indent=1)
        fh.write("\n")


def load_scenario(path) -> AllocationProblem:
    """Load a scenario file, validating schema and type invariants.

    Raises:
        ValidationError: parse failure (with line context) or a missing /
            invalid field (named in the message).
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                field=str(path)) from None
    if not isinstance(data, dict):
        raise ValidationError("top-level value must be an object", field=str(path))
    p_max_w = _require(data, "p_max_w", "scenario")
    raw_loops = _require(data, "loops", "scenario")
    if not isinstance(raw_loops, list) or not raw_loops:
        raise ValidationError("must be a non-empty list", field="scenario.loops")
    loops = []
    for i, entry in enumerate(raw_loops):
        ctx = f"loops[{i}]"
        raw_plant = _require(entry, "plant", ctx)
        raw_chan = _require(entry, "channel", ctx)
        plant = PlantModel(
            A=_require(raw_plant, "A", f"{ctx}.plant"),
            B=_require(raw_plant, "B", f"{ctx}.plant"),
            Q=_require(raw_plant, "Q", f"{ctx}.plant"),
            R=_require(raw_plant, "R", f"{ctx}.plant"),
            Sigma=_require(raw_plant, "Sigma", f"{ctx}.plant"),
            T=_require(raw_plant, "T", f"{ctx}.plant"),
        )
        chan = ChannelModel(
            gain=_require(raw_chan, "gain", f"{ctx}.channel"),
            bandwidth_hz=_require(raw_chan, "bandwidth_hz", f"{ctx}.channel"),
            noise_power_w=_require(raw_chan, "noise_power_w", f"{ctx}.channel"),
        )
        loops.append(ControlLoop.build(plant, chan))
    return AllocationProblem(loops=tuple(loops), p_max_w=p_max_w)


def load_spec(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                field=str(path)) from None
    if not isinstance(data, dict):
        raise ValidationError("spec file must contain an object", field=str(path))
    return ScenarioSpec.from_dict(data)


def save_result(path, result: AllocationResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=1)
        fh.write("\n")


def load_result(path) -> AllocationResult:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                field=str(path)) from None
    for key in ("powers_w", "lqr_costs", "total_cost", "lambda", "method",
                "iterations", "residual"):
        _require(data, key, "result")
    return AllocationResult(
        powers_w=tuple(data["powers_w"]),
        lqr_costs=tuple(data["lqr_costs"]),
        total_cost=data["total_cost"],
        lam=data["lambda"],
        method=data["method"],
        iterations=data["iterations"],
        residual=data["residual"],
    )
