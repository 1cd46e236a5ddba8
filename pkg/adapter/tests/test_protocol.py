"""Wire-format unit tests for the adapter's protocol implementation."""

import numpy as np
import pytest

from diffae_backend.protocol import (
    MANIFEST_NAME,
    ProtocolError,
    descriptor_line,
    mark_done,
    mark_error,
    read_job,
    read_morph_code,
    write_morph_code,
)


def _write_manifest(job_dir, rows):
    (job_dir / MANIFEST_NAME).write_text("\n".join(rows) + "\n", encoding="utf-8")


def test_read_job_roundtrip(tmp_path):
    _write_manifest(
        tmp_path,
        [
            "morphlab-manifest-v1\tbackend=diffae\tseed=7",
            "request\tid=enc-0000\top=encode\tin=inputs/a.png\tout=out/enc-0000.code",
            "request\tid=dec-0000\top=decode\tin=inputs/m.code\tout=out/m",
        ],
    )
    job = read_job(tmp_path)
    assert job.backend_name == "diffae"
    assert job.seed == 7
    assert [r.request_id for r in job.requests] == ["enc-0000", "dec-0000"]
    assert job.requests[0].op == "encode"


@pytest.mark.parametrize(
    "rows",
    [
        ["wrong-token\tbackend=x\tseed=0"],
        ["morphlab-manifest-v1\tbackend=x"],
        ["morphlab-manifest-v1\tbackend=x\tseed=0", "request\tid=a\top=transcode\tin=x\tout=y"],
        ["morphlab-manifest-v1\tbackend=x\tseed=0", "request\tid=a\top=encode\tin=x"],
        [
            "morphlab-manifest-v1\tbackend=x\tseed=0",
            "request\tid=a\top=encode\tin=x\tout=y",
            "request\tid=a\top=encode\tin=p\tout=q",
        ],
    ],
)
def test_read_job_rejects_malformed_manifests(tmp_path, rows):
    _write_manifest(tmp_path, rows)
    with pytest.raises(ProtocolError):
        read_job(tmp_path)


def test_read_job_requires_manifest(tmp_path):
    with pytest.raises(ProtocolError):
        read_job(tmp_path)


def test_morph_code_roundtrip(tmp_path):
    semantic = np.array([0.25, -1.5, 3e-9])
    stochastic = np.arange(12, dtype=np.float64) / 7.0
    path = tmp_path / "c.code"
    write_morph_code(path, semantic, stochastic, (3, 2, 2))
    s, x, shape = read_morph_code(path)
    assert np.array_equal(s, semantic)
    assert np.array_equal(x, stochastic)
    assert shape == (3, 2, 2)


def test_morph_code_shape_consistency(tmp_path):
    with pytest.raises(ProtocolError):
        write_morph_code(tmp_path / "c.code", np.ones(2), np.ones(5), (2, 3))


def test_status_markers(tmp_path):
    mark_done(tmp_path, "enc-0000")
    mark_error(tmp_path, "enc-0001", "boom\nwith newline")
    assert (tmp_path / "status" / "enc-0000.done").is_file()
    message = (tmp_path / "status" / "enc-0001.err").read_text(encoding="utf-8")
    assert message == "boom with newline\n"
    assert not list((tmp_path / "status").glob("*.tmp"))


def test_descriptor_line_fields():
    line = descriptor_line("diffae", 16, (3, 32, 32), "0.1.0")
    fields = dict(tok.split("=", 1) for tok in line.split("\t"))
    assert fields == {
        "name": "diffae",
        "semantic_dim": "16",
        "stochastic_shape": "3x32x32",
        "version": "0.1.0",
    }
