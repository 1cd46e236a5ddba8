"""Self-contained diffusion autoencoder.

Two encoders and one conditional denoiser: the semantic encoder maps an
image to a compact latent z; the stochastic encoder is the deterministic
DDIM inversion of the image under the denoiser conditioned on z, yielding an
image-shaped latent x_T. Decoding runs the same DDIM trajectory backwards.
Both directions are deterministic given the checkpoint and step count, so a
fixed seed makes whole jobs reproducible.

Checkpoints are self-describing: {"arch": {...}, "state_dict": ..., "version"}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

TRAIN_TIMESTEPS = 1000
BETA_START = 1e-4
BETA_END = 0.02
X0_CLAMP = 3.0  # dynamic-thresholding guard; keeps DDIM inversion bounded


@dataclass(frozen=True)
class Architecture:
    image_size: int = 32
    channels: int = 3
    base_width: int = 32
    semantic_dim: int = 16
    cond_dim: int = 64

    def stochastic_shape(self) -> tuple[int, int, int]:
        return (self.channels, self.image_size, self.image_size)


class SinusoidalTimeEmbedding(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.dim = dim

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        half = self.dim // 2
        freqs = torch.exp(
            -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device)
            / max(half - 1, 1)
        )
        args = t.float()[:, None] * freqs[None, :]
        return torch.cat([args.sin(), args.cos()], dim=-1)


class FilmResBlock(nn.Module):
    """Residual conv block modulated by the time + semantic conditioning."""

    def __init__(self, width: int, cond_dim: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(8, width)
        self.conv1 = nn.Conv2d(width, width, 3, padding=1)
        self.film = nn.Linear(cond_dim, 2 * width)
        self.norm2 = nn.GroupNorm(8, width)
        self.conv2 = nn.Conv2d(width, width, 3, padding=1)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        h = self.conv1(torch.nn.functional.silu(self.norm1(x)))
        scale, shift = self.film(cond).chunk(2, dim=-1)
        h = h * (1.0 + scale[:, :, None, None]) + shift[:, :, None, None]
        h = self.conv2(torch.nn.functional.silu(self.norm2(h)))
        return x + h


class SemanticEncoder(nn.Module):
    def __init__(self, arch: Architecture):
        super().__init__()
        w = arch.base_width
        self.net = nn.Sequential(
            nn.Conv2d(arch.channels, w, 3, stride=2, padding=1),
            nn.GroupNorm(8, w),
            nn.SiLU(),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1),
            nn.GroupNorm(8, 2 * w),
            nn.SiLU(),
            nn.Conv2d(2 * w, 4 * w, 3, stride=2, padding=1),
            nn.GroupNorm(8, 4 * w),
            nn.SiLU(),
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
            nn.Linear(4 * w, arch.semantic_dim),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class ConditionalDenoiser(nn.Module):
    """Predicts the noise component of x_t given t and the semantic latent."""

    def __init__(self, arch: Architecture):
        super().__init__()
        w = arch.base_width
        self.time_embed = nn.Sequential(
            SinusoidalTimeEmbedding(arch.cond_dim),
            nn.Linear(arch.cond_dim, arch.cond_dim),
            nn.SiLU(),
            nn.Linear(arch.cond_dim, arch.cond_dim),
        )
        self.semantic_embed = nn.Sequential(
            nn.Linear(arch.semantic_dim, arch.cond_dim),
            nn.SiLU(),
            nn.Linear(arch.cond_dim, arch.cond_dim),
        )
        self.conv_in = nn.Conv2d(arch.channels, w, 3, padding=1)
        self.blocks = nn.ModuleList([FilmResBlock(w, arch.cond_dim) for _ in range(3)])
        self.norm_out = nn.GroupNorm(8, w)
        self.conv_out = nn.Conv2d(w, arch.channels, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        cond = self.time_embed(t) + self.semantic_embed(z)
        h = self.conv_in(x)
        for block in self.blocks:
            h = block(h, cond)
        return self.conv_out(torch.nn.functional.silu(self.norm_out(h)))


class DiffusionAutoencoder(nn.Module):
    def __init__(self, arch: Architecture):
        super().__init__()
        self.arch = arch
        self.semantic_encoder = SemanticEncoder(arch)
        self.denoiser = ConditionalDenoiser(arch)
        betas = torch.linspace(BETA_START, BETA_END, TRAIN_TIMESTEPS, dtype=torch.float64)
        self.register_buffer("alphas_bar", torch.cumprod(1.0 - betas, dim=0).float())

    def ddim_timesteps(self, steps: int, terminal: int = TRAIN_TIMESTEPS - 1) -> list[int]:
        if steps < 1:
            raise ValueError("steps must be at least 1")
        if not 1 <= terminal < TRAIN_TIMESTEPS:
            raise ValueError(f"terminal timestep must lie in [1, {TRAIN_TIMESTEPS - 1}]")
        grid = torch.linspace(0, terminal, steps + 1).round().long()
        return sorted(set(int(t) for t in grid))

    def encode_semantic(self, x0: torch.Tensor) -> torch.Tensor:
        return self.semantic_encoder(x0)

    def _predict_x0(self, x: torch.Tensor, t: int, z: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        t_tensor = torch.full((x.shape[0],), float(t), device=x.device)
        eps = self.denoiser(x, t_tensor, z)
        a = self.alphas_bar[t]
        x0 = (x - torch.sqrt(1.0 - a) * eps) / torch.sqrt(a)
        return x0.clamp(-X0_CLAMP, X0_CLAMP), eps

    @torch.no_grad()
    def encode_stochastic(
        self, x0: torch.Tensor, z: torch.Tensor, steps: int,
        terminal: int = TRAIN_TIMESTEPS - 1,
    ) -> torch.Tensor:
        """Deterministic DDIM inversion from the image to the terminal latent."""
        seq = self.ddim_timesteps(steps, terminal)
        x = x0
        for t_cur, t_next in zip(seq[:-1], seq[1:]):
            pred_x0, eps = self._predict_x0(x, t_cur, z)
            a_next = self.alphas_bar[t_next]
            x = torch.sqrt(a_next) * pred_x0 + torch.sqrt(1.0 - a_next) * eps
        return x

    @torch.no_grad()
    def decode(
        self, x_t: torch.Tensor, z: torch.Tensor, steps: int,
        terminal: int = TRAIN_TIMESTEPS - 1,
    ) -> torch.Tensor:
        """Deterministic DDIM sampling from the terminal latent back to pixels."""
        seq = self.ddim_timesteps(steps, terminal)
        x = x_t
        for t_cur, t_next in zip(reversed(seq[1:]), reversed(seq[:-1])):
            pred_x0, eps = self._predict_x0(x, t_cur, z)
            a_next = self.alphas_bar[t_next]
            x = torch.sqrt(a_next) * pred_x0 + torch.sqrt(1.0 - a_next) * eps
        return x


def new_demo_model(arch: Architecture, seed: int) -> DiffusionAutoencoder:
    """A reproducible randomly initialised model for smoke and protocol tests.

    The final denoiser conv is shrunk so the untrained noise predictions stay
    small enough for the DDIM inversion to remain well conditioned.
    """
    torch.manual_seed(seed)
    model = DiffusionAutoencoder(arch)
    with torch.no_grad():
        model.denoiser.conv_out.weight.mul_(0.1)
        model.denoiser.conv_out.bias.zero_()
    model.eval()
    return model


def save_checkpoint(path, model: DiffusionAutoencoder, version: str) -> None:
    torch.save(
        {
            "arch": {
                "image_size": model.arch.image_size,
                "channels": model.arch.channels,
                "base_width": model.arch.base_width,
                "semantic_dim": model.arch.semantic_dim,
                "cond_dim": model.arch.cond_dim,
            },
            "state_dict": model.state_dict(),
            "version": version,
        },
        path,
    )


def load_checkpoint(path, device: str = "cpu") -> tuple[DiffusionAutoencoder, str]:
    payload = torch.load(Path(path), map_location=device, weights_only=True)
    for key in ("arch", "state_dict", "version"):
        if key not in payload:
            raise ValueError(f"checkpoint {path} is missing the {key!r} entry")
    arch = Architecture(**payload["arch"])
    model = DiffusionAutoencoder(arch)
    model.load_state_dict(payload["state_dict"])
    model.to(device)
    model.eval()
    return model, str(payload["version"])
