import json
import pytest
import numpy as np
from typing import Dict, Any

from src.config import RunConfig, load_config
from src.geometry import DomainShape, build_mesh, build_probe_layout, build_voxel_grid
from src.phantom.dataset import generate_dataset, load_dataset
from src.phantom.sampling import Phantom, Region
from src.scene import Scene


@pytest.fixture(scope="session")
def small_overrides() -> Dict[str, Any]:
    """Coarse settings that keep every stage under a few seconds"""
    return {
        "geometry": {"n_sources": 3, "n_detectors": 12, "grid_nx": 16, "grid_ny": 8},
        "forward": {"mesh_h": 0.5, "element_order": 2},
        "dataset": {"n_samples": 6, "noise_levels": [0.0, 0.05], "seed": 7},
        "training": {
            "batch_size": 4,
            "lr": 1e-3,
            "epochs_data_ae": 2,
            "epochs_signal_ae": 2,
            "epochs_coupled": 2,
            "epochs_denoiser": 2,
            "validation_fraction": 0.2,
        },
        "elastic_net": {"n_alphas": 4, "cv_folds": 2, "max_iter": 2000},
        "bregman": {"outer_iters": 3, "inner_max_iter": 100},
    }


@pytest.fixture(scope="session")
def small_config(small_overrides) -> RunConfig:
    return load_config(None, **small_overrides)


@pytest.fixture(scope="session")
def rectangle() -> DomainShape:
    return DomainShape.rectangle()


@pytest.fixture(scope="session")
def semi_disk() -> DomainShape:
    return DomainShape.semi_disk()


@pytest.fixture(scope="session")
def coarse_mesh(rectangle):
    """P2 rectangle mesh with h = 0.5"""
    return build_mesh(rectangle, 0.5, order=2)


@pytest.fixture(scope="session")
def coarse_p1_mesh(rectangle):
    return build_mesh(rectangle, 0.5, order=1)


@pytest.fixture(scope="session")
def small_layout(rectangle):
    return build_probe_layout(rectangle, n_s=3, n_d=12)


@pytest.fixture(scope="session")
def small_grid(rectangle):
    return build_voxel_grid(rectangle, nx=16, ny=8)


@pytest.fixture(scope="session")
def small_scene(small_config) -> Scene:
    return Scene.from_config(small_config)


@pytest.fixture
def disc_phantom() -> Phantom:
    """One 4x disc of radius 1 cm at the center of the rectangle"""
    return Phantom(0.01, (Region((5.0, 2.5), (1.0, 1.0), 0.0, 4),))


@pytest.fixture(scope="session")
def tiny_dataset_dir(tmp_path_factory, small_config, small_scene):
    out_dir = tmp_path_factory.mktemp("dataset")
    generate_dataset(small_config, out_dir, scene=small_scene)
    return out_dir


@pytest.fixture(scope="session")
def tiny_dataset(tiny_dataset_dir):
    return load_dataset(tiny_dataset_dir)


@pytest.fixture(scope="session")
def tiny_test_dataset_dir(tmp_path_factory, small_config, small_scene):
    out_dir = tmp_path_factory.mktemp("test_dataset")
    generate_dataset(small_config, out_dir, kind="test", scene=small_scene)
    return out_dir


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_config_file(tmp_path_factory, small_overrides):
    """The coarse settings as a TOML run configuration"""
    lines = []
    for section, values in small_overrides.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {json.dumps(value)}" for key, value in values.items())
        lines.append("")
    path = tmp_path_factory.mktemp("config") / "small.toml"
    path.write_text("\n".join(lines), encoding="utf-8")
    return path
