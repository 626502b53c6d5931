import json
import math

import numpy as np
import pytest

from lqrpower import (
    AllocationResult,
    ChannelModel,
    DegenerateGeometry,
    PlantModel,
    ScenarioSpec,
    ValidationError,
    channel_gain,
    db_to_linear,
    dbm_to_watts,
    generate_scenario,
    linear_to_db,
    load_result,
    load_scenario,
    sample_disk_positions,
    save_result,
    save_scenario,
)

from conftest import identity_loop, problem_of


def small_spec(**overrides):
    base = dict(num_robots=3, state_dim=4, seed=11)
    base.update(overrides)
    return ScenarioSpec(**base)


class TestConversions:
    def test_zero_db_is_unity(self):
        assert db_to_linear(0.0) == 1.0

    def test_minus_60_db(self):
        assert db_to_linear(-60.0) == pytest.approx(1e-6, rel=1e-15)

    def test_minus_110_dbm_in_watts(self):
        assert dbm_to_watts(-110.0) == pytest.approx(1e-14, rel=1e-15)

    def test_db_round_trip(self):
        for x in (-97.0, -3.01, 0.0, 12.5, 60.0):
            assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)


class TestChannelGain:
    def test_unit_case(self):
        assert channel_gain(1.0, 1.0) == 1.0

    def test_beneath_transmitter(self):
        assert channel_gain(1000.0, 1e-6) == pytest.approx(1e-12, rel=1e-15)

    def test_edge_of_field_slant_range(self):
        d = math.hypot(1000.0, 5000.0)
        assert channel_gain(d, 1e-6) == pytest.approx(1e-6 / 2.6e7, rel=1e-12)

    @pytest.mark.parametrize("d", [0.0, -5.0])
    def test_degenerate_distance(self, d):
        with pytest.raises(DegenerateGeometry):
            channel_gain(d, 1e-6)


class TestGenerator:
    def test_deterministic_given_seed(self):
        a = generate_scenario(small_spec(), 2.0)
        b = generate_scenario(small_spec(), 2.0)
        for la, lb in zip(a.loops, b.loops):
            assert np.array_equal(la.plant.A, lb.plant.A)
            assert la.channel.gain == lb.channel.gain
            assert la.h_bits == lb.h_bits

    def test_degenerate_h_range_pins_h(self):
        prob = generate_scenario(small_spec(h_range_bits=(5.0, 5.0)), 2.0)
        for loop in prob.loops:
            assert loop.h_bits == pytest.approx(5.0, rel=1e-12)

    def test_h_within_range(self):
        prob = generate_scenario(small_spec(num_robots=8, h_range_bits=(2.0, 9.0)), 2.0)
        for loop in prob.loops:
            assert 2.0 <= loop.h_bits <= 9.0 + 1e-9

    def test_gains_within_geometric_bounds(self):
        spec = small_spec(num_robots=10)
        prob = generate_scenario(spec, 2.0)
        beta0 = db_to_linear(spec.beta0_db)
        g_hi = beta0 / spec.uav_height_m**2
        g_lo = beta0 / (spec.uav_height_m**2 + spec.field_radius_m**2)
        for loop in prob.loops:
            assert g_lo <= loop.channel.gain <= g_hi

    def test_plant_structure(self):
        spec = small_spec()
        prob = generate_scenario(spec, 2.0)
        n = spec.state_dim
        for loop in prob.loops:
            p = loop.plant
            assert np.array_equal(p.B, np.eye(n))
            assert np.array_equal(p.Q, np.eye(n))
            assert np.array_equal(p.R, np.zeros((n, n)))
            assert np.array_equal(p.Sigma, spec.noise_variance * np.eye(n))
            assert p.T == spec.cycle_s
            diag = np.diag(p.A)
            assert np.all(diag == diag[0])
            assert np.array_equal(p.A, np.diag(diag))

    def test_derived_values_match_recomputation(self):
        prob = generate_scenario(small_spec(), 2.0)
        for loop in prob.loops:
            rebuilt = type(loop).build(loop.plant, loop.channel)
            assert rebuilt.h_bits == pytest.approx(loop.h_bits, rel=1e-9)
            assert rebuilt.entropy_power == pytest.approx(loop.entropy_power, rel=1e-9)
            assert rebuilt.p_min_w == pytest.approx(loop.p_min_w, rel=1e-9)

    def test_disk_sampling_mean_squared_radius(self):
        rng = np.random.default_rng(99)
        radius = 5000.0
        pos = sample_disk_positions(rng, radius, 120_000)
        mean_sq = float(np.mean(np.sum(pos**2, axis=1)))
        assert mean_sq == pytest.approx(radius**2 / 2.0, rel=0.02)

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            ScenarioSpec(num_robots=0)
        with pytest.raises(ValidationError):
            ScenarioSpec(h_range_bits=(7.0, 3.0))
        with pytest.raises(ValidationError):
            ScenarioSpec(bandwidth_hz=-1.0)


class TestTypes:
    def test_channel_rejects_nonpositive_fields(self):
        with pytest.raises(ValidationError, match="bandwidth_hz"):
            ChannelModel(gain=1e-12, bandwidth_hz=-5.0, noise_power_w=1e-14)
        with pytest.raises(ValidationError, match="gain"):
            ChannelModel(gain=0.0, bandwidth_hz=5.0, noise_power_w=1e-14)

    def test_plant_shape_checks(self):
        with pytest.raises(ValidationError, match="B"):
            PlantModel(A=np.eye(2), B=np.eye(3), Q=np.eye(2), R=np.eye(3),
                       Sigma=np.eye(2), T=1.0)
        with pytest.raises(ValidationError, match="T"):
            PlantModel(A=np.eye(2), B=np.eye(2), Q=np.eye(2), R=np.eye(2),
                       Sigma=np.eye(2), T=0.0)

    def test_plant_weight_matrices_must_be_psd(self):
        with pytest.raises(ValidationError, match="Q"):
            PlantModel(A=np.eye(2), B=np.eye(2), Q=-np.eye(2), R=np.eye(2),
                       Sigma=np.eye(2), T=1.0)
        with pytest.raises(ValidationError, match="symmetric"):
            PlantModel(A=np.eye(2), B=np.eye(2), Q=[[1.0, 0.5], [0.0, 1.0]],
                       R=np.eye(2), Sigma=np.eye(2), T=1.0)

    def test_problem_needs_loops_and_budget(self):
        loop = identity_loop(2.0)
        with pytest.raises(ValidationError, match="loops"):
            problem_of([], 1.0)
        with pytest.raises(ValidationError, match="p_max_w"):
            problem_of([loop], 0.0)


class TestScenarioFiles:
    def test_round_trip_preserves_everything(self, tmp_path):
        spec = small_spec()
        prob = generate_scenario(spec, 2.0)
        path = tmp_path / "scenario.json"
        save_scenario(path, prob, spec)
        loaded = load_scenario(path)
        assert loaded.p_max_w == prob.p_max_w
        assert loaded.num_loops == prob.num_loops
        for la, lb in zip(prob.loops, loaded.loops):
            for name in ("A", "B", "Q", "R", "Sigma"):
                assert np.array_equal(getattr(la.plant, name),
                                      getattr(lb.plant, name))
            assert la.plant.T == lb.plant.T
            assert la.channel == lb.channel
            assert lb.h_bits == pytest.approx(la.h_bits, rel=1e-12)

    def test_same_seed_gives_identical_bytes(self, tmp_path):
        spec = small_spec()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_scenario(p1, generate_scenario(spec, 2.0), spec)
        save_scenario(p2, generate_scenario(spec, 2.0), spec)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_p_max_is_named(self, tmp_path):
        spec = small_spec()
        path = tmp_path / "scenario.json"
        save_scenario(path, generate_scenario(spec, 2.0), spec)
        doc = json.loads(path.read_text())
        del doc["p_max_w"]
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="p_max_w"):
            load_scenario(path)

    def test_negative_bandwidth_rejected(self, tmp_path):
        spec = small_spec()
        path = tmp_path / "scenario.json"
        save_scenario(path, generate_scenario(spec, 2.0), spec)
        doc = json.loads(path.read_text())
        doc["loops"][0]["channel"]["bandwidth_hz"] = -5000.0
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="bandwidth_hz"):
            load_scenario(path)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "p_max_w": 1.0,\n broken\n}')
        with pytest.raises(ValidationError, match="line 3"):
            load_scenario(path)

    def test_result_round_trip(self, tmp_path):
        result = AllocationResult(
            powers_w=(0.25, 0.75),
            lqr_costs=(1.5, math.inf),
            total_cost=math.inf,
            lam=0.3,
            method="exact",
            iterations=17,
            residual=2.5e-12,
        )
        path = tmp_path / "result.json"
        save_result(path, result)
        loaded = load_result(path)
        assert loaded == result
