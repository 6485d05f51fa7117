import numpy as np
import pytest

import extvar as ev


@pytest.fixture
def line_lattice():
    return ev.build_lattice((2,))


@pytest.fixture
def grid_lattice():
    return ev.build_lattice((2, 2))


@pytest.fixture
def ext_kernel(line_lattice):
    # nearest-neighbor coupling at half weight
    return ev.table_kernel(line_lattice, {(0,): 1.0, (1,): 0.5, (-1,): 0.5})


@pytest.fixture
def kron_kernel(line_lattice):
    return ev.kronecker_kernel(line_lattice)


@pytest.fixture
def hand_samples():
    return ev.SampleSet(np.array([[0.0], [0.4], [1.0]]))


@pytest.fixture
def hand_config(line_lattice):
    return ev.CentroidConfiguration(line_lattice, np.array([[0.2], [0.8]]))


# -- session-scoped experiment runs shared by the acceptance tests --------

@pytest.fixture(scope="session")
def kron_consistency_report():
    lattice = ev.build_lattice((2,))
    kernel = ev.kronecker_kernel(lattice)
    sampler = ev.UniformSampler(1)
    return ev.consistency_experiment(
        sampler,
        lattice,
        kernel,
        0.0,
        (100_000,),
        ev.FitParams(restarts=10, seed=0),
        1_000_000,
        seed=101,
        reps=5,
        ref_fit_params=ev.FitParams(restarts=5, seed=0),
        workers=4,
    )


@pytest.fixture(scope="session")
def ext_consistency_report():
    lattice = ev.build_lattice((2,))
    kernel = ev.table_kernel(lattice, {(0,): 1.0, (1,): 0.5, (-1,): 0.5})
    sampler = ev.UniformSampler(1)
    return ev.consistency_experiment(
        sampler,
        lattice,
        kernel,
        0.0,
        (100, 1000, 10_000, 100_000),
        ev.FitParams(restarts=10, seed=0),
        1_000_000,
        seed=202,
        reps=5,
        ref_fit_params=ev.FitParams(restarts=5, seed=0),
        workers=4,
    )


@pytest.fixture(scope="session")
def ulln_report():
    lattice = ev.build_lattice((2, 2))
    kernel = ev.gaussian_kernel(lattice, 1.0)
    sampler = ev.UniformSampler(2)
    return ev.ulln_experiment(
        sampler,
        lattice,
        kernel,
        0.2,
        (100, 100_000),
        50,
        1_000_000,
        seed=303,
        reps=5,
        workers=4,
    )
