import numpy as np
import pytest
from PIL import Image

from diffae_backend.config import AdapterConfig
from diffae_backend.model import Architecture, new_demo_model, save_checkpoint
from diffae_backend.serve import AdapterService

# demo smoke configuration: shallow terminal keeps the untrained DDIM
# trajectory well conditioned, so reconstruction error stays near the
# 8-bit quantization floor
DEMO_STEPS = 8
DEMO_TERMINAL = 400


@pytest.fixture(scope="session")
def checkpoint_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "demo.pt"
    save_checkpoint(path, new_demo_model(Architecture(), seed=0), "demo-seed0")
    return path


@pytest.fixture(scope="session")
def service(checkpoint_path):
    return AdapterService(
        AdapterConfig(checkpoint_path, steps=DEMO_STEPS, terminal_timestep=DEMO_TERMINAL)
    )


def synthetic_face(path, seed: int = 3, size: int = 32):
    """A smooth synthetic test image standing in for an aligned face crop."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    phases = rng.uniform(0, 2 * np.pi, 3)
    img = np.stack(
        [
            0.5 + 0.5 * np.sin(6 * x + phases[0]),
            0.5 + 0.5 * np.cos(5 * y + phases[1]),
            0.5 + 0.45 * np.sin(4 * (x + y) + phases[2]),
        ],
        axis=-1,
    )
    Image.fromarray(np.round(img * 255).astype(np.uint8)).save(path)
    return path
