"""File formats: versioned binary containers and provenance-stamped CSVs.

A container is MAGIC + little-endian u32 header length + JSON header +
raw array payloads in header order. The header records the container kind,
format version, free-form metadata and the dtype/shape of every array, so
files are self-describing and refuse to load silently when incompatible.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SPKG"
FORMAT_VERSION = 1


class ContainerError(RuntimeError):
    pass


def write_container(path, kind: str, meta: dict, arrays: dict):
    names = list(arrays.keys())
    specs = []
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        specs.append({"name": name, "dtype": str(arr.dtype), "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = {
        "kind": kind,
        "format_version": FORMAT_VERSION,
        "meta": meta,
        "arrays": specs,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(payload)))
        f.write(payload)
        for blob in blobs:
            f.write(blob)


def read_container(path, expect_kind: str | None = None):
    path = Path(path)
    if not path.exists():
        raise ContainerError(f"no such file: {path}")
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ContainerError(f"{path} is not a spikepeg container")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ContainerError(
                f"unsupported container version {header.get('format_version')}"
            )
        if expect_kind is not None and header.get("kind") != expect_kind:
            raise ContainerError(
                f"expected a {expect_kind!r} container, found {header.get('kind')!r}"
            )
        arrays = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = f.read(count * dtype.itemsize)
            if len(data) != count * dtype.itemsize:
                raise ContainerError(f"truncated payload for array {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(data, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays


def config_hash(obj) -> str:
    """Stable sha256 of a JSON-serializable configuration."""
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows, cfg_hash: str | None = None):
    """CSV with a header row and a config-hash footer comment.

    Floats are written with repr so reruns are byte-identical.
    """
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    if cfg_hash is not None:
        lines.append(f"# config_hash={cfg_hash}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Read back a provenance CSV: (columns, rows-of-strings, cfg_hash)."""
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    cfg = None
    if lines and lines[-1].startswith("# config_hash="):
        cfg = lines[-1].split("=", 1)[1]
        lines = lines[:-1]
    columns = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return columns, rows, cfg
