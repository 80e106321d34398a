import numpy as np
import pytest

from weekahead.synth import SynthConfig, export_dataset, generate_dataset


@pytest.fixture(scope="session")
def default_dataset():
    """(load, dispatch) for the default synthetic year."""
    return generate_dataset(SynthConfig())


@pytest.fixture(scope="session")
def default_load(default_dataset):
    return default_dataset[0]


@pytest.fixture(scope="session")
def default_series(default_dataset):
    load, gens = default_dataset
    return {"total_load": load, **{g.name: g for g in gens}}


@pytest.fixture(scope="session")
def default_csv(tmp_path_factory, default_dataset):
    path = tmp_path_factory.mktemp("data") / "year.csv"
    export_dataset(*default_dataset, path)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spd(rng, n, cond_floor=1e-3):
    A = rng.standard_normal((n, n))
    return A @ A.T + cond_floor * n * np.eye(n)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS, key=int):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
