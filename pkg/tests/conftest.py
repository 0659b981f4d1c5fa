import numpy as np
import pytest

from cardforge import synthetic
from cardforge.assets import AssetLibrary
from cardforge.catalog import standard_deck
from cardforge.composer import BackgroundSet
from cardforge.config import GeneratorConfig
from cardforge.pipeline import extract_library, generate_dataset


@pytest.fixture(scope="session")
def inputs(tmp_path_factory):
    """Two-frame synthetic sequences for all 52 cards plus six backgrounds."""
    root = tmp_path_factory.mktemp("inputs")
    return synthetic.write_inputs(root, standard_deck(), n_frames=2, n_backgrounds=6, seed=3)


@pytest.fixture(scope="session")
def assets_dir(inputs, tmp_path_factory):
    out = tmp_path_factory.mktemp("assets")
    extract_library(inputs["frames"], inputs["annotations"], out, GeneratorConfig(stride=1))
    return out


@pytest.fixture(scope="session")
def library(assets_dir):
    return AssetLibrary.open(assets_dir)


@pytest.fixture(scope="session")
def backgrounds(inputs):
    return BackgroundSet.from_dir(inputs["backgrounds"])


@pytest.fixture(scope="session")
def small_dataset(assets_dir, inputs, tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset") / "ds"
    cfg = GeneratorConfig(seed=11)
    generate_dataset(assets_dir, inputs["backgrounds"], out, 40, cfg)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
