"""Runtime configuration, sourced from flags or DIFFAE_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

ENV_CHECKPOINT = "DIFFAE_CHECKPOINT"
ENV_STEPS = "DIFFAE_STEPS"
ENV_DEVICE = "DIFFAE_DEVICE"
ENV_TERMINAL = "DIFFAE_TERMINAL_TIMESTEP"

DEFAULT_STEPS = 8
DEFAULT_TERMINAL_TIMESTEP = 999  # last index of the training noise schedule


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    """Checkpoint location plus the DDIM trajectory parameters.

    ``steps`` is the number of DDIM segments; ``terminal_timestep`` is the
    training-schedule index at which the stochastic latent is taken (the
    underlying method leaves it as a backend knob). ``image_size`` normally
    comes from the checkpoint; setting it here must agree with the stored
    architecture.
    """

    checkpoint: Path
    device: str = "cpu"
    steps: int = DEFAULT_STEPS
    terminal_timestep: int = DEFAULT_TERMINAL_TIMESTEP
    image_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "checkpoint", Path(self.checkpoint))
        if not self.checkpoint.is_file():
            raise ConfigError(f"checkpoint not found: {self.checkpoint}")
        if self.steps < 1:
            raise ConfigError(f"diffusion step count must be at least 1, got {self.steps}")
        if self.terminal_timestep < 1:
            raise ConfigError(
                f"terminal timestep must be at least 1, got {self.terminal_timestep}"
            )


def from_environment(
    checkpoint: str | None = None,
    steps: int | None = None,
    device: str | None = None,
    terminal_timestep: int | None = None,
) -> AdapterConfig:
    checkpoint = checkpoint or os.environ.get(ENV_CHECKPOINT)
    if not checkpoint:
        raise ConfigError(f"no checkpoint given and {ENV_CHECKPOINT} is not set")
    if steps is None:
        steps = int(os.environ.get(ENV_STEPS, DEFAULT_STEPS))
    if terminal_timestep is None:
        terminal_timestep = int(os.environ.get(ENV_TERMINAL, DEFAULT_TERMINAL_TIMESTEP))
    device = device or os.environ.get(ENV_DEVICE, "cpu")
    return AdapterConfig(
        checkpoint=Path(checkpoint),
        device=device,
        steps=steps,
        terminal_timestep=terminal_timestep,
    )
