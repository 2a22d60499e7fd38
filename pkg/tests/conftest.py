"""Shared fixtures: cached benchmark runs used across test modules."""
import pytest

from geoatt.dynamics import DisturbanceModel
from geoatt.sim import make_benchmark_scenarios, run


@pytest.fixture(scope="session")
def scenarios():
    return make_benchmark_scenarios()


@pytest.fixture(scope="session")
def kernel_warm(scenarios):
    """Compile/load the jitted inner loop so timed runs measure physics only."""
    import dataclasses

    short = dataclasses.replace(scenarios["multi_constraint_adaptive"], T=0.05)
    run(short)
    return True


@pytest.fixture(scope="session")
def adaptive_log(scenarios, kernel_warm):
    import time

    t0 = time.perf_counter()
    tl = run(scenarios["multi_constraint_adaptive"])
    tl.wall_time_s = time.perf_counter() - t0
    return tl


@pytest.fixture(scope="session")
def smooth_log(scenarios, kernel_warm):
    return run(scenarios["multi_constraint_smooth"])


@pytest.fixture(scope="session")
def time_varying_log(scenarios, kernel_warm):
    return run(scenarios["time_varying"])


@pytest.fixture(scope="session")
def smooth_undisturbed_log(scenarios, kernel_warm):
    """Smooth controller on the benchmark geometry with the disturbance off."""
    import dataclasses

    scen = dataclasses.replace(
        scenarios["multi_constraint_smooth"],
        disturbance=DisturbanceModel(kind="none"),
    )
    return run(scen)
