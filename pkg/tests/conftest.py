import numpy as np
import pytest

import oracles
from vesselseg.dataset_io import save_image


@pytest.fixture(scope="session")
def small_fundus():
    """One quarter-size synthetic fundus with truth; session cached."""
    return oracles.synth_fundus(seed=1, h=292, w=283)


@pytest.fixture(scope="session")
def fundus_dataset(tmp_path_factory):
    """Three quarter-size phantoms laid out as a custom dataset on disk."""
    root = tmp_path_factory.mktemp("fundus_ds")
    (root / "images").mkdir()
    (root / "labels").mkdir()
    truths = {}
    for seed in (1, 2, 3):
        rgb, truth = oracles.synth_fundus(seed=seed, h=292, w=283)
        save_image(root / "images" / f"f{seed}.png", rgb)
        save_image(root / "labels" / f"f{seed}.png", truth.astype(float))
        truths[f"f{seed}"] = truth
    return root, truths


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
