import math

import numpy as np
import pytest

from lqrpower import PlantModel, UnstableClosedLoop, simulate_ideal

from conftest import scalar_plant


def memoryless_plant(n, noise_var=0.01):
    """A = 0: the state is just last cycle's noise, cost floor tr(Sigma)."""
    eye = np.eye(n)
    return PlantModel(A=np.zeros((n, n)), B=eye, Q=eye, R=np.zeros((n, n)),
                      Sigma=noise_var * eye, T=0.01)


class TestSimulateIdeal:
    def test_memoryless_plant_reaches_noise_trace(self):
        plant = memoryless_plant(5)
        report = simulate_ideal(plant, horizon=200_000, seed=3)
        assert report.predicted_floor == pytest.approx(0.05, rel=1e-12)
        assert report.empirical_cost == pytest.approx(0.05, rel=0.02)
        assert report.rel_error <= 0.02

    def test_scalar_benchmark_plant(self):
        report = simulate_ideal(scalar_plant(2.0), horizon=300_000, seed=11)
        expected = 2.0 + math.sqrt(5.0)
        assert report.predicted_floor == pytest.approx(expected, rel=1e-9)
        assert report.empirical_cost == pytest.approx(expected, rel=0.02)

    def test_zero_noise_costs_nothing(self):
        plant = PlantModel(A=[[0.5]], B=[[1.0]], Q=[[1.0]], R=[[1.0]],
                           Sigma=[[0.0]], T=1.0)
        report = simulate_ideal(plant, horizon=1000, seed=0)
        assert report.empirical_cost == 0.0
        assert report.rel_error == 0.0

    def test_longer_horizon_tightens_estimate(self):
        plant = memoryless_plant(3)
        short = simulate_ideal(plant, horizon=10, seed=5)
        long = simulate_ideal(plant, horizon=400_000, seed=5)
        assert long.rel_error < short.rel_error

    def test_two_seeds_agree_within_sampling_noise(self):
        # Memoryless plant: stage costs are iid, so the usual 3-sigma
        # band on the mean applies directly.
        plant = memoryless_plant(4)
        horizon = 100_000
        a = simulate_ideal(plant, horizon=horizon, seed=21)
        b = simulate_ideal(plant, horizon=horizon, seed=22)
        n, var = 4, 0.01
        sigma_mean = math.sqrt(2.0 * n) * var / math.sqrt(horizon)
        assert abs(a.empirical_cost - b.empirical_cost) <= 6.0 * sigma_mean

    def test_same_seed_reproduces(self):
        plant = memoryless_plant(2)
        a = simulate_ideal(plant, horizon=5000, seed=9)
        b = simulate_ideal(plant, horizon=5000, seed=9)
        assert a.empirical_cost == b.empirical_cost

    def test_rel_error_definition(self):
        plant = memoryless_plant(2)
        report = simulate_ideal(plant, horizon=20_000, seed=1)
        assert report.rel_error == pytest.approx(
            abs(report.empirical_cost - report.predicted_floor)
            / report.predicted_floor)

    def test_unstabilized_plant_rejected(self):
        # Q = 0 admits the zero Riccati solution, whose gain leaves the
        # unstable mode untouched.
        plant = scalar_plant(2.0, q=0.0)
        with pytest.raises(UnstableClosedLoop):
            simulate_ideal(plant, horizon=100, seed=0)

    def test_five_seed_floor_validation(self):
        for seed in range(5):
            report = simulate_ideal(scalar_plant(1.6), horizon=150_000, seed=seed)
            assert report.rel_error <= 0.02
