import numpy as np
import pytest

from lqrpower import AllocationProblem, ChannelModel, ControlLoop, PlantModel


def scalar_plant(a, b=1.0, q=1.0, r=1.0, sigma=1.0, T=1.0) -> PlantModel:
    return PlantModel(
        A=[[a]], B=[[b]], Q=[[q]], R=[[r]], Sigma=[[sigma]], T=T,
    )


def identity_loop(h_bits, n=2, gain=1e-12, noise_w=1e-14, bw=5000.0,
                  cycle=0.01, noise_var=0.01) -> ControlLoop:
    """Loop in the Q=I, R=0, B=I family: S = M = I and h is exact."""
    eye = np.eye(n)
    plant = PlantModel(
        A=2.0 ** (h_bits / n) * eye,
        B=eye,
        Q=eye,
        R=np.zeros((n, n)),
        Sigma=noise_var * eye,
        T=cycle,
    )
    chan = ChannelModel(gain=gain, bandwidth_hz=bw, noise_power_w=noise_w)
    return ControlLoop.build(plant, chan)


def problem_of(loops, p_max_w) -> AllocationProblem:
    return AllocationProblem(loops=tuple(loops), p_max_w=p_max_w)


def random_loop(rng, n_max=5, h_max=20.0) -> ControlLoop:
    """Random loop with parameters in the regime the cost curve targets."""
    n = int(rng.integers(1, n_max + 1))
    h = float(rng.uniform(0.5, h_max))
    return identity_loop(
        h,
        n=n,
        gain=10.0 ** rng.uniform(-14, -11),
        bw=10.0 ** rng.uniform(2.8, 4.2),
        cycle=10.0 ** rng.uniform(-2.5, -1.5),
        noise_var=10.0 ** rng.uniform(-3, 0),
    )


def balanced_loop(rng) -> ControlLoop:
    """Random loop whose cost exponent 2BT/n stays near one.

    Keeps the excess cost resolvable in float64 at budgets a few times
    the stability minimum, which the allocation tests rely on.
    """
    n = int(rng.integers(2, 5))
    cycle = 0.01
    bw = n * float(rng.uniform(0.5, 3.0)) / (2.0 * cycle)
    bt = bw * cycle
    h = float(rng.uniform(0.3, 2.0)) * bt
    return identity_loop(
        h,
        n=n,
        gain=10.0 ** rng.uniform(-13.5, -11.5),
        bw=bw,
        cycle=cycle,
        noise_var=10.0 ** rng.uniform(-2.5, -0.5),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
