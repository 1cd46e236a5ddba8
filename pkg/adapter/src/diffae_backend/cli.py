"""Backend executable entry points: describe, serve, init-demo-checkpoint.

``describe`` and ``serve`` follow the orchestrator's external-backend calling
convention, so a directory containing this executable (or a shim named after
the backend) can go straight onto MORPHLAB_BACKEND_PATH. Configuration comes
from DIFFAE_CHECKPOINT / DIFFAE_STEPS / DIFFAE_DEVICE or from flags.

Exit codes: 0 success (including jobs with request-level errors, which are
reported through per-request .err files), 2 configuration/usage errors,
3 protocol-level failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import ConfigError, from_environment
from .model import Architecture, new_demo_model, save_checkpoint
from .protocol import ProtocolError, descriptor_line
from .serve import BACKEND_NAME, AdapterService


def _service(args) -> AdapterService:
    config = from_environment(
        args.checkpoint, args.steps, args.device, args.terminal_timestep
    )
    return AdapterService(config)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="diffae-backend", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("describe", "serve"):
        p = sub.add_parser(name)
        p.add_argument("--checkpoint", default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--terminal-timestep", type=int, default=None)
        p.add_argument("--device", default=None)
        if name == "serve":
            p.add_argument("--job-dir", required=True)

    init = sub.add_parser("init-demo-checkpoint",
                          help="write a reproducible random-weight checkpoint")
    init.add_argument("--out", required=True)
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--image-size", type=int, default=32)
    init.add_argument("--semantic-dim", type=int, default=16)
    init.add_argument("--base-width", type=int, default=32)

    args = parser.parse_args(argv)
    try:
        if args.command == "describe":
            service = _service(args)
            print(
                descriptor_line(
                    BACKEND_NAME,
                    service.semantic_dim,
                    service.stochastic_shape,
                    f"{__version__}+model.{service.model_version}",
                )
            )
        elif args.command == "serve":
            service = _service(args)
            service.serve_job(args.job_dir)
        else:
            arch = Architecture(
                image_size=args.image_size,
                semantic_dim=args.semantic_dim,
                base_width=args.base_width,
            )
            model = new_demo_model(arch, args.seed)
            save_checkpoint(args.out, model, version=f"demo-seed{args.seed}")
            print(f"wrote demo checkpoint to {args.out}")
    except ConfigError as e:
        print(f"diffae-backend: error: {e}", file=sys.stderr)
        return 2
    except ProtocolError as e:
        print(f"diffae-backend: error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
