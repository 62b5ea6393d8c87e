import numpy as np
import pytest

from faircorr import synth
from faircorr.ingest import load_dataset


@pytest.fixture(scope="session")
def german_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "german.csv"
    synth.write_csv(synth.generate("german"), path)
    return path


@pytest.fixture(scope="session")
def german(german_csv):
    return load_dataset(german_csv, "german")


@pytest.fixture(scope="session")
def compas_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "compas.csv"
    synth.write_csv(synth.generate("compas"), path)
    return path


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A 240-row german-shaped table for cheap estimator runs."""
    path = tmp_path_factory.mktemp("data") / "german_small.csv"
    synth.write_csv(synth.generate("german", n=240, seed=9), path)
    return load_dataset(path, "german")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
