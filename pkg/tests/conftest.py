import numpy as np
import pytest

from handover_mpc import accel, config, gpr, sim


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger JIT compilation outside any timed section
    accel.warmup()


@pytest.fixture(scope="session")
def nominal_bundle():
    return config.load_scenario("nominal")


def _models_for(bundle):
    X, goals = sim.generate_training_data(bundle.scenario.training, bundle.scenario.seed)
    return gpr.fit_axis_models(X, goals, bundle.gp)


@pytest.fixture(scope="session")
def nominal_models(nominal_bundle):
    return _models_for(nominal_bundle)


@pytest.fixture(scope="session")
def nominal_log(nominal_bundle, nominal_models):
    return sim.run_closed_loop(nominal_bundle, nominal_models)


@pytest.fixture(scope="session")
def pause_log():
    bundle = config.load_scenario("pause")
    return bundle, sim.run_closed_loop(bundle, _models_for(bundle))


@pytest.fixture(scope="session")
def retreat_log():
    bundle = config.load_scenario("retreat")
    return bundle, sim.run_closed_loop(bundle, _models_for(bundle))


@pytest.fixture(scope="session")
def default_chain():
    return config.default_chain()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
