"""Job serving: image <-> latent conversion behind the file protocol."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .config import AdapterConfig
from .model import DiffusionAutoencoder, load_checkpoint
from .protocol import (
    ProtocolError,
    mark_done,
    mark_error,
    read_job,
    read_morph_code,
    write_morph_code,
)

BACKEND_NAME = "diffae"


def load_image(path, image_size: int) -> torch.Tensor:
    """PNG (or anything PIL reads) to a (1, 3, S, S) tensor in [-1, 1]."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        if rgb.size != (image_size, image_size):
            rgb = rgb.resize((image_size, image_size), Image.BICUBIC)
        arr = np.asarray(rgb, dtype=np.float32)
    arr = arr / 127.5 - 1.0
    return torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0)


def save_image(path, x: torch.Tensor) -> None:
    arr = x.detach().squeeze(0).permute(1, 2, 0).clamp(-1.0, 1.0).numpy()
    pixels = np.round((arr + 1.0) * 127.5).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PNG")


class AdapterService:
    def __init__(self, config: AdapterConfig):
        self.config = config
        self.model, self.model_version = load_checkpoint(config.checkpoint, config.device)
        if config.image_size is not None and config.image_size != self.model.arch.image_size:
            raise ProtocolError(
                f"configured image size {config.image_size} disagrees with the "
                f"checkpoint's {self.model.arch.image_size}"
            )

    @property
    def semantic_dim(self) -> int:
        return self.model.arch.semantic_dim

    @property
    def stochastic_shape(self) -> tuple[int, int, int]:
        return self.model.arch.stochastic_shape()

    def encode_file(self, image_path, code_path) -> None:
        x0 = load_image(image_path, self.model.arch.image_size).to(self.config.device)
        with torch.no_grad():
            z = self.model.encode_semantic(x0)
            x_t = self.model.encode_stochastic(
                x0, z, self.config.steps, self.config.terminal_timestep
            )
        write_morph_code(
            code_path,
            z.squeeze(0).cpu().numpy(),
            x_t.squeeze(0).cpu().numpy().reshape(-1),
            self.stochastic_shape,
        )

    def decode_file(self, code_path, image_path) -> None:
        semantic, stochastic, shape = read_morph_code(code_path)
        if semantic.size != self.semantic_dim or tuple(shape) != self.stochastic_shape:
            raise ProtocolError(
                f"code dims (semantic {semantic.size}, stochastic {tuple(shape)}) do not "
                f"match the model (semantic {self.semantic_dim}, "
                f"stochastic {self.stochastic_shape})"
            )
        z = torch.from_numpy(semantic.astype(np.float32)).unsqueeze(0).to(self.config.device)
        x_t = (
            torch.from_numpy(stochastic.astype(np.float32).reshape(shape))
            .unsqueeze(0)
            .to(self.config.device)
        )
        with torch.no_grad():
            x0 = self.model.decode(x_t, z, self.config.steps, self.config.terminal_timestep)
        save_image(image_path, x0.cpu())

    def serve_job(self, job_dir) -> int:
        """Process every request of a manifest; request failures become .err
        files and never abort the batch. Returns the number of failures."""
        torch.set_num_threads(1)  # bit-reproducible conv results
        job = read_job(job_dir)
        failures = 0
        for r in job.requests:
            out_path = job.job_dir / r.output_ref
            out_path.parent.mkdir(parents=True, exist_ok=True)
            try:
                if r.op == "encode":
                    self.encode_file(job.job_dir / r.input_ref, out_path)
                else:
                    self.decode_file(job.job_dir / r.input_ref, out_path)
            except Exception as e:
                mark_error(job.job_dir, r.request_id, f"{type(e).__name__}: {e}")
                failures += 1
            else:
                mark_done(job.job_dir, r.request_id)
        return failures
