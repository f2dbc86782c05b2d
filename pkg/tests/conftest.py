import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mffusion.datasetgen import AssetCatalog, GenConfig, generate_dataset
from mffusion.sampledata import write_demo_catalog

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    """3 foregrounds x 2 backgrounds desk-scale generated dataset."""
    root = tmp_path_factory.mktemp("desk")
    cat = write_demo_catalog(str(root / "assets"), n_foregrounds=3, n_backgrounds=4, size=128)
    catalog = AssetCatalog(tuple(cat["foregrounds"]), tuple(cat["backgrounds"]))
    cfg = GenConfig(out_size=128, backgrounds_per_fg=2, seed=7)
    out_dir = root / "dataset"
    manifest = generate_dataset(catalog, cfg, str(out_dir))
    return {"catalog": catalog, "cfg": cfg, "out_dir": out_dir, "manifest": manifest}
