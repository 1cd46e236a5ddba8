"""Pluggable encoder/decoder backends and the morph pipeline orchestrator.

The backend boundary is a file-based batch protocol so generators living in a
different runtime can participate: the orchestrator writes a job directory
(manifest plus input files), the backend serves it and reports per-request
completion through atomically renamed done-markers (or one-line error files),
and the orchestrator reads the artifacts back. A deterministic, lossless toy
backend ships in-process so every end-to-end number has a closed-form oracle.
"""

from __future__ import annotations

import math
import os
import shutil
import subprocess
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from . import fileio
from .core import MorphCode, MorphPair
from .errors import (
    BackendFailure,
    DimensionMismatch,
    InvalidParameter,
    MorphlabError,
    NonUnitSubject,
    ParseError,
    SchemaError,
)
from .interp import InterpolationParams, compose_morph_code

MANIFEST_TOKEN = "morphlab-manifest-v1"
MORPHS_TOKEN = "morphlab-morphs-v1"
MANIFEST_NAME = "manifest.tsv"
BACKEND_PATH_ENV = "MORPHLAB_BACKEND_PATH"

ENCODE = "encode"
DECODE = "decode"


@dataclass(frozen=True)
class BackendDescriptor:
    """What a backend advertises: latent dimensions and a version string."""

    name: str
    semantic_dim: int
    stochastic_shape: tuple[int, ...]
    version: str

    def __post_init__(self):
        object.__setattr__(self, "stochastic_shape", tuple(int(n) for n in self.stochastic_shape))
        if self.semantic_dim < 1 or any(n < 1 for n in self.stochastic_shape):
            raise SchemaError("backend latent dimensions must be positive")

    def line(self) -> str:
        shape = "x".join(str(n) for n in self.stochastic_shape)
        return (
            f"name={self.name}\tsemantic_dim={self.semantic_dim}"
            f"\tstochastic_shape={shape}\tversion={self.version}"
        )


def parse_descriptor_line(line: str) -> BackendDescriptor:
    fields = dict(tok.split("=", 1) for tok in line.strip().split("\t") if "=" in tok)
    for key in ("name", "semantic_dim", "stochastic_shape", "version"):
        if key not in fields:
            raise SchemaError(f"backend descriptor is missing the {key!r} field")
    return BackendDescriptor(
        name=fields["name"],
        semantic_dim=int(fields["semantic_dim"]),
        stochastic_shape=tuple(int(n) for n in fields["stochastic_shape"].split("x")),
        version=fields["version"],
    )


@dataclass(frozen=True)
class BackendRequest:
    request_id: str
    op: str
    input_ref: str
    output_ref: str

    def __post_init__(self):
        if self.op not in (ENCODE, DECODE):
            raise SchemaError(f"unknown request op {self.op!r}")


@dataclass(frozen=True)
class BackendJob:
    """One batch of encode/decode requests rooted at a job directory."""

    job_dir: Path
    backend_name: str
    seed: int
    requests: tuple[BackendRequest, ...]

    def __post_init__(self):
        object.__setattr__(self, "job_dir", Path(self.job_dir))
        object.__setattr__(self, "requests", tuple(self.requests))
        if int(self.seed) < 0:
            raise SchemaError("job seed must be a non-negative integer")
        ids = [r.request_id for r in self.requests]
        if len(set(ids)) != len(ids):
            raise SchemaError("request ids within a job must be unique")


def write_manifest(job: BackendJob) -> Path:
    rows = [f"{MANIFEST_TOKEN}\tbackend={job.backend_name}\tseed={job.seed}"]
    for r in job.requests:
        rows.append(f"request\tid={r.request_id}\top={r.op}\tin={r.input_ref}\tout={r.output_ref}")
    path = job.job_dir / MANIFEST_NAME
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def read_manifest(job_dir) -> BackendJob:
    job_dir = Path(job_dir)
    path = job_dir / MANIFEST_NAME
    if not path.is_file():
        raise BackendFailure(f"no {MANIFEST_NAME} in {job_dir}")
    lines = path.read_text(encoding="utf-8").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(path, 1, 1, "empty manifest")
    head = lines[0].split("\t")
    if head[0] != MANIFEST_TOKEN:
        raise ParseError(path, 1, 1, f"expected format token {MANIFEST_TOKEN!r}, got {head[0]!r}")
    header = dict(tok.split("=", 1) for tok in head[1:] if "=" in tok)
    for key in ("backend", "seed"):
        if key not in header:
            raise SchemaError(f"{path}: manifest header is missing the {key!r} field")
    requests = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if fields[0] != "request":
            raise ParseError(path, lineno, 1, f"expected a request record, got {fields[0]!r}")
        rec = dict(tok.split("=", 1) for tok in fields[1:] if "=" in tok)
        for key in ("id", "op", "in", "out"):
            if key not in rec:
                raise SchemaError(f"{path}:{lineno}: request is missing the {key!r} field")
        requests.append(BackendRequest(rec["id"], rec["op"], rec["in"], rec["out"]))
    return BackendJob(job_dir, header["backend"], int(header["seed"]), tuple(requests))


def _status_dir(job_dir: Path) -> Path:
    return Path(job_dir) / "status"


def mark_done(job_dir, request_id: str) -> None:
    status = _status_dir(job_dir)
    status.mkdir(parents=True, exist_ok=True)
    tmp = status / f"{request_id}.done.tmp"
    tmp.write_text("", encoding="utf-8")
    os.replace(tmp, status / f"{request_id}.done")


def mark_error(job_dir, request_id: str, message: str) -> None:
    status = _status_dir(job_dir)
    status.mkdir(parents=True, exist_ok=True)
    tmp = status / f"{request_id}.err.tmp"
    tmp.write_text(message.replace("\n", " ") + "\n", encoding="utf-8")
    os.replace(tmp, status / f"{request_id}.err")


def request_status(job_dir, request_id: str) -> tuple[str, str]:
    """('done'|'error'|'missing', error message if any) for one request."""
    status = _status_dir(job_dir)
    if (status / f"{request_id}.done").is_file():
        return "done", ""
    err = status / f"{request_id}.err"
    if err.is_file():
        return "error", err.read_text(encoding="utf-8").strip()
    return "missing", "backend wrote no completion marker"


class Backend(Protocol):
    def descriptor(self) -> BackendDescriptor: ...

    def serve(self, job_dir) -> None: ...


# -- deterministic toy world ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ToyWorld:
    """A linear, lossless stand-in for a generative autoencoder.

    Identities are unit vectors in R^dim; images are noisy unit-norm samples
    of an identity; encoding rotates an image by a fixed orthonormal mixing
    matrix and splits it into a semantic head and a stochastic tail, so
    decode(encode(x)) == x up to double-precision rounding.
    """

    dim: int = 32
    semantic_dim: int = 8
    noise_scale: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.semantic_dim < self.dim:
            raise SchemaError(
                f"semantic dimension must lie in [1, dim), got {self.semantic_dim} of {self.dim}"
            )
        if self.noise_scale < 0:
            raise SchemaError("noise scale must be non-negative")
        rng = np.random.default_rng(self.seed)
        q, r = np.linalg.qr(rng.standard_normal((self.dim, self.dim)))
        q = q * np.sign(np.diag(r))
        if float(np.abs(q.T @ q - np.eye(self.dim)).max()) > 1e-10:
            raise SchemaError("mixing matrix failed the orthonormality check")
        q.flags.writeable = False
        object.__setattr__(self, "_mixing", q)

    @property
    def mixing(self) -> np.ndarray:
        return self._mixing

    @property
    def stochastic_dim(self) -> int:
        return self.dim - self.semantic_dim


def toy_sample_image(world: ToyWorld, subject_vector, seed: int) -> np.ndarray:
    """A unit-norm noisy observation of a unit-norm identity, deterministic in seed."""
    v = np.asarray(subject_vector, dtype=np.float64)
    if v.shape != (world.dim,):
        raise DimensionMismatch(f"subject vector must have shape ({world.dim},), got {v.shape}")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
        raise NonUnitSubject(f"subject vector norm is {float(np.linalg.norm(v)):.12f}, not 1")
    if world.noise_scale == 0.0:
        return v.copy()
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(world.dim)
    direction /= np.linalg.norm(direction)
    image = v + world.noise_scale * direction
    return image / np.linalg.norm(image)


def toy_encode(world: ToyWorld, image) -> MorphCode:
    x = np.asarray(image, dtype=np.float64)
    if x.shape != (world.dim,):
        raise DimensionMismatch(f"image must have shape ({world.dim},), got {x.shape}")
    rotated = world.mixing.T @ x
    return MorphCode(
        semantic=rotated[: world.semantic_dim],
        stochastic=rotated[world.semantic_dim :],
        stochastic_shape=(world.stochastic_dim,),
    )


def toy_decode(world: ToyWorld, code: MorphCode) -> np.ndarray:
    if code.semantic_dim != world.semantic_dim or code.stochastic_shape != (world.stochastic_dim,):
        raise DimensionMismatch(
            f"code dims (semantic {code.semantic_dim}, stochastic {code.stochastic_shape}) "
            f"do not match backend dims (semantic {world.semantic_dim}, "
            f"stochastic ({world.stochastic_dim},))"
        )
    return world.mixing @ np.concatenate([code.semantic, code.stochastic])


class ToyBackend:
    """In-process backend exposing the toy world through the job protocol."""

    def __init__(self, world: ToyWorld | None = None, version: str = "0.1.0"):
        self.world = world if world is not None else ToyWorld()
        self._version = version

    def descriptor(self) -> BackendDescriptor:
        return BackendDescriptor(
            name="toy",
            semantic_dim=self.world.semantic_dim,
            stochastic_shape=(self.world.stochastic_dim,),
            version=self._version,
        )

    def serve(self, job_dir) -> None:
        job = read_manifest(job_dir)
        for r in job.requests:
            try:
                self._serve_one(job.job_dir, r)
            except MorphlabError as e:
                mark_error(job.job_dir, r.request_id, str(e))
            else:
                mark_done(job.job_dir, r.request_id)

    def _serve_one(self, job_dir: Path, r: BackendRequest) -> None:
        out_path = job_dir / r.output_ref
        out_path.parent.mkdir(parents=True, exist_ok=True)
        if r.op == ENCODE:
            image = fileio.load_vector(job_dir / r.input_ref)
            fileio.save_morph_code(out_path, toy_encode(self.world, image))
        else:
            code = fileio.load_morph_code(job_dir / r.input_ref)
            fileio.save_vector(out_path, toy_decode(self.world, code))


class ExternalBackend:
    """A backend living in another process, driven through its executable."""

    def __init__(self, name: str, executable):
        self.name = name
        self.executable = str(executable)
        self._descriptor: BackendDescriptor | None = None

    def descriptor(self) -> BackendDescriptor:
        if self._descriptor is None:
            proc = subprocess.run(
                [self.executable, "describe"], capture_output=True, text=True
            )
            if proc.returncode != 0:
                raise BackendFailure(
                    f"backend {self.name!r} describe failed: {proc.stderr.strip()}"
                )
            self._descriptor = parse_descriptor_line(proc.stdout.strip().splitlines()[-1])
        return self._descriptor

    def serve(self, job_dir) -> None:
        proc = subprocess.run(
            [self.executable, "serve", "--job-dir", str(job_dir)],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise BackendFailure(
                f"backend {self.name!r} exited with {proc.returncode}: {proc.stderr.strip()}"
            )


def resolve_backend(name: str, env: dict | None = None) -> Backend:
    """Map a backend name to the built-in toy backend or an executable found
    on MORPHLAB_BACKEND_PATH (a PATH-style list of directories)."""
    if name == "toy":
        return ToyBackend()
    environ = os.environ if env is None else env
    direct = Path(name)
    if direct.is_file() and os.access(direct, os.X_OK):
        return ExternalBackend(direct.name, direct)
    search = environ.get(BACKEND_PATH_ENV, "")
    for directory in filter(None, search.split(os.pathsep)):
        candidate = Path(directory) / name
        if candidate.is_file() and os.access(candidate, os.X_OK):
            return ExternalBackend(name, candidate)
    raise InvalidParameter(
        f"unknown backend {name!r}: not built-in and not found on {BACKEND_PATH_ENV}"
    )


# -- pipeline orchestration ----------------------------------------------------


@dataclass(frozen=True)
class MorphResult:
    """Outcome for one pair: composed code and decoded image ref, or an error."""

    morph_id: str
    pair: MorphPair
    code: MorphCode | None = None
    image_ref: str | None = None
    error: str | None = None


def _check_ref(ref: str) -> str:
    if not ref or ref in (".", "..") or "/" in ref or "\\" in ref:
        raise SchemaError(f"image id {ref!r} is not a plain file name")
    return ref


def run_morph_pipeline(
    pairs: Sequence[MorphPair],
    backend: Backend,
    images_dir,
    job_dir,
    seed: int = 0,
    params: InterpolationParams = InterpolationParams(),
    lam_override: float | None = None,
) -> list[MorphResult]:
    """Encode both sources of every pair, compose the latent codes, decode.

    Artifacts land under ``job_dir`` (encode/ and decode/ sub-jobs, composed
    codes, and a morphs.tsv manifest). The run is deterministic given the
    seed and inputs. Per-request failures do not stop the batch: every other
    pair completes, the failures are marked in the manifest, and one
    BackendFailure naming the failed requests (with the partial results
    attached) is raised at the end.
    """
    pairs = tuple(pairs)
    if not pairs:
        raise InvalidParameter("no pairs to morph")
    if lam_override is not None and not 0.0 <= lam_override <= 1.0:
        raise InvalidParameter(f"lambda must lie in [0, 1], got {lam_override}")
    images_dir = Path(images_dir)
    job_dir = Path(job_dir)
    descriptor = backend.descriptor()

    image_ids: list[str] = []
    for p in pairs:
        for ref in (p.source_a, p.source_b):
            _check_ref(ref)
            if ref not in image_ids:
                image_ids.append(ref)

    encode_dir = job_dir / "encode"
    (encode_dir / "inputs").mkdir(parents=True, exist_ok=True)
    (encode_dir / "out").mkdir(parents=True, exist_ok=True)
    for ref in image_ids:
        source = images_dir / ref
        if not source.is_file():
            raise SchemaError(f"source image not found: {source}")
        shutil.copyfile(source, encode_dir / "inputs" / ref)
    encode_requests = {
        ref: BackendRequest(f"enc-{i:04d}", ENCODE, f"inputs/{ref}", f"out/enc-{i:04d}.code")
        for i, ref in enumerate(image_ids)
    }
    write_manifest(BackendJob(encode_dir, descriptor.name, seed, tuple(encode_requests.values())))
    backend.serve(encode_dir)

    codes: dict[str, MorphCode] = {}
    encode_errors: dict[str, str] = {}
    failed_requests: list[str] = []
    for ref, request in encode_requests.items():
        state, message = request_status(encode_dir, request.request_id)
        if state == "done":
            codes[ref] = fileio.load_morph_code(encode_dir / request.output_ref)
        else:
            encode_errors[ref] = f"{request.request_id}: {message}"
            failed_requests.append(request.request_id)

    codes_dir = job_dir / "codes"
    codes_dir.mkdir(parents=True, exist_ok=True)
    results: dict[str, MorphResult] = {}
    composed: list[tuple[str, MorphPair]] = []
    for i, pair in enumerate(pairs):
        morph_id = f"morph-{i:04d}"
        broken = [ref for ref in (pair.source_a, pair.source_b) if ref in encode_errors]
        if broken:
            results[morph_id] = MorphResult(
                morph_id, pair, error="; ".join(encode_errors[ref] for ref in broken)
            )
            continue
        lam = lam_override if lam_override is not None else pair.lam
        try:
            code = compose_morph_code(
                codes[pair.source_a], codes[pair.source_b], replace(params, lam=lam)
            )
        except MorphlabError as e:
            results[morph_id] = MorphResult(morph_id, pair, error=f"compose: {e}")
            failed_requests.append(morph_id)
            continue
        fileio.save_morph_code(codes_dir / f"{morph_id}.code", code)
        results[morph_id] = MorphResult(morph_id, pair, code=code)
        composed.append((morph_id, pair))

    decode_dir = job_dir / "decode"
    (decode_dir / "inputs").mkdir(parents=True, exist_ok=True)
    (decode_dir / "out").mkdir(parents=True, exist_ok=True)
    decode_requests = {}
    for i, (morph_id, _) in enumerate(composed):
        shutil.copyfile(codes_dir / f"{morph_id}.code", decode_dir / "inputs" / f"{morph_id}.code")
        decode_requests[morph_id] = BackendRequest(
            f"dec-{i:04d}", DECODE, f"inputs/{morph_id}.code", f"out/{morph_id}"
        )
    if decode_requests:
        write_manifest(
            BackendJob(decode_dir, descriptor.name, seed, tuple(decode_requests.values()))
        )
        backend.serve(decode_dir)
        for morph_id, request in decode_requests.items():
            state, message = request_status(decode_dir, request.request_id)
            base = results[morph_id]
            if state == "done":
                results[morph_id] = replace(base, image_ref=f"decode/out/{morph_id}")
            else:
                results[morph_id] = replace(base, error=f"{request.request_id}: {message}")
                failed_requests.append(request.request_id)

    ordered = [results[f"morph-{i:04d}"] for i in range(len(pairs))]
    rows = [MORPHS_TOKEN]
    for r in ordered:
        fields = [
            f"morph={r.morph_id}",
            f"a={r.pair.source_a}",
            f"b={r.pair.source_b}",
            f"lambda={fileio.fmt_float(lam_override if lam_override is not None else r.pair.lam)}",
        ]
        if r.error is None:
            fields += [f"ref={r.image_ref}", "status=ok"]
        else:
            fields += ["status=error", f"error={r.error}"]
        rows.append("\t".join(fields))
    (job_dir / "morphs.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    if failed_requests:
        raise BackendFailure(
            f"{len(failed_requests)} request(s) failed: {', '.join(sorted(failed_requests))}",
            request_ids=sorted(failed_requests),
            results=ordered,
        )
    return ordered
