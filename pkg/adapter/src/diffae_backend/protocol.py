"""Wire-format implementation of the morphlab job protocol.

Independent of the orchestrator's code base on purpose: this is the contract
an out-of-process backend has to satisfy. Formats are tab-separated UTF-8
with a version token in the first header field; floats travel as decimals
with 17 significant digits; completion is signalled per request through
atomically renamed ``status/<id>.done`` markers or one-line ``.err`` files.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MANIFEST_TOKEN = "morphlab-manifest-v1"
MORPHCODE_TOKEN = "morphlab-morphcode-v1"
MANIFEST_NAME = "manifest.tsv"


class ProtocolError(Exception):
    pass


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Request:
    request_id: str
    op: str
    input_ref: str
    output_ref: str


@dataclass(frozen=True)
class Job:
    job_dir: Path
    backend_name: str
    seed: int
    requests: tuple[Request, ...]


def read_job(job_dir) -> Job:
    job_dir = Path(job_dir)
    path = job_dir / MANIFEST_NAME
    if not path.is_file():
        raise ProtocolError(f"no {MANIFEST_NAME} in {job_dir}")
    lines = [line for line in path.read_text(encoding="utf-8").split("\n") if line != ""]
    if not lines:
        raise ProtocolError(f"{path}: empty manifest")
    head = lines[0].split("\t")
    if head[0] != MANIFEST_TOKEN:
        raise ProtocolError(f"{path}: expected {MANIFEST_TOKEN!r}, got {head[0]!r}")
    header = dict(tok.split("=", 1) for tok in head[1:] if "=" in tok)
    for key in ("backend", "seed"):
        if key not in header:
            raise ProtocolError(f"{path}: manifest header is missing {key!r}")
    requests = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if fields[0] != "request":
            raise ProtocolError(f"{path}:{lineno}: expected a request record")
        rec = dict(tok.split("=", 1) for tok in fields[1:] if "=" in tok)
        for key in ("id", "op", "in", "out"):
            if key not in rec:
                raise ProtocolError(f"{path}:{lineno}: request is missing {key!r}")
        if rec["op"] not in ("encode", "decode"):
            raise ProtocolError(f"{path}:{lineno}: unknown op {rec['op']!r}")
        requests.append(Request(rec["id"], rec["op"], rec["in"], rec["out"]))
    ids = [r.request_id for r in requests]
    if len(set(ids)) != len(ids):
        raise ProtocolError(f"{path}: duplicate request ids")
    return Job(job_dir, header["backend"], int(header["seed"]), tuple(requests))


def mark_done(job_dir, request_id: str) -> None:
    status = Path(job_dir) / "status"
    status.mkdir(parents=True, exist_ok=True)
    tmp = status / f"{request_id}.done.tmp"
    tmp.write_text("", encoding="utf-8")
    os.replace(tmp, status / f"{request_id}.done")


def mark_error(job_dir, request_id: str, message: str) -> None:
    status = Path(job_dir) / "status"
    status.mkdir(parents=True, exist_ok=True)
    tmp = status / f"{request_id}.err.tmp"
    tmp.write_text(message.replace("\n", " ") + "\n", encoding="utf-8")
    os.replace(tmp, status / f"{request_id}.err")


def write_morph_code(path, semantic: np.ndarray, stochastic: np.ndarray,
                     shape: tuple[int, ...]) -> None:
    semantic = np.asarray(semantic, dtype=np.float64).reshape(-1)
    stochastic = np.asarray(stochastic, dtype=np.float64).reshape(-1)
    if math.prod(shape) != stochastic.size:
        raise ProtocolError(f"shape {shape} inconsistent with {stochastic.size} values")
    shape_token = "x".join(str(n) for n in shape)
    rows = [
        f"{MORPHCODE_TOKEN}\tsemantic_dim={semantic.size}\tstochastic_shape={shape_token}",
        "\t".join(["semantic"] + [fmt_float(v) for v in semantic]),
        "\t".join(["stochastic"] + [fmt_float(v) for v in stochastic]),
    ]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_morph_code(path) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    lines = [line for line in Path(path).read_text(encoding="utf-8").split("\n") if line != ""]
    if not lines:
        raise ProtocolError(f"{path}: empty file")
    head = lines[0].split("\t")
    if head[0] != MORPHCODE_TOKEN:
        raise ProtocolError(f"{path}: expected {MORPHCODE_TOKEN!r}, got {head[0]!r}")
    header = dict(tok.split("=", 1) for tok in head[1:] if "=" in tok)
    for key in ("semantic_dim", "stochastic_shape"):
        if key not in header:
            raise ProtocolError(f"{path}: header is missing {key!r}")
    records = {}
    for line in lines[1:]:
        fields = line.split("\t")
        if fields[0] not in ("semantic", "stochastic") or fields[0] in records:
            raise ProtocolError(f"{path}: unexpected record {fields[0]!r}")
        records[fields[0]] = np.array([float(v) for v in fields[1:]], dtype=np.float64)
    for key in ("semantic", "stochastic"):
        if key not in records:
            raise ProtocolError(f"{path}: missing the {key!r} record")
    shape = tuple(int(n) for n in header["stochastic_shape"].split("x"))
    if records["semantic"].size != int(header["semantic_dim"]):
        raise ProtocolError(f"{path}: semantic length disagrees with header")
    if records["stochastic"].size != math.prod(shape):
        raise ProtocolError(f"{path}: stochastic length disagrees with declared shape")
    return records["semantic"], records["stochastic"], shape


def descriptor_line(name: str, semantic_dim: int, stochastic_shape: tuple[int, ...],
                    version: str) -> str:
    shape_token = "x".join(str(n) for n in stochastic_shape)
    return (
        f"name={name}\tsemantic_dim={semantic_dim}"
        f"\tstochastic_shape={shape_token}\tversion={version}"
    )
