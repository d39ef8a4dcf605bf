"""Binary container: a JSON manifest followed by named float64 arrays.

Layout::

    b"SVDLIDC\\0"             8-byte magic
    uint32 LE                 format version
    uint64 LE                 manifest length in bytes
    manifest                  UTF-8 JSON (sorted keys)
    payload                   arrays, little-endian float64, C order, back to back

The manifest records, per array, its name, shape, byte offset into the
payload and byte length, plus a SHA-256 digest of the payload and free-form
metadata. Writing the same arrays and metadata always yields the same bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

from .errors import (
    ContainerIntegrityError,
    ModelNotFoundError,
    ShapeMismatchError,
    VersionMismatchError,
)

MAGIC = b"SVDLIDC\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


def write_container(path, arrays: dict, metadata: dict = None) -> None:
    entries, chunks, offset = [], [], 0
    for name, arr in arrays.items():
        a = np.array(arr, dtype="<f8", order="C")
        raw = a.tobytes()
        entries.append({"name": name, "shape": list(a.shape), "offset": offset,
                        "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    manifest = {
        "format_version": FORMAT_VERSION,
        "arrays": entries,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "metadata": metadata or {},
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload)


def read_container(path, kind: str = "model"):
    """Return ``(arrays, metadata)``; raises a distinct error for a missing
    file, a foreign or truncated file, an unknown version, and an array whose
    declared shape disagrees with its stored size."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ModelNotFoundError(f"{kind} not found: {path}")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ContainerIntegrityError(f"{path}: truncated header")
    magic, version, mlen = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ContainerIntegrityError(f"{path}: not an svdlid container")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: unsupported container version {version} "
                                   f"(expected {FORMAT_VERSION})")
    start = _HEADER.size + mlen
    if len(data) < start:
        raise ContainerIntegrityError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[_HEADER.size:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerIntegrityError(f"{path}: unreadable manifest ({exc})") from None
    if manifest.get("format_version") != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: manifest version "
                                   f"{manifest.get('format_version')} is not supported")
    payload = data[start:]
    entries = manifest.get("arrays", [])
    for e in entries:
        count = int(np.prod(e["shape"], dtype=np.int64))
        if count * 8 != e["nbytes"]:
            raise ShapeMismatchError(f"{path}: array {e['name']!r} declares shape "
                                     f"{tuple(e['shape'])} but stores {e['nbytes']} bytes")
    expected = sum(e["nbytes"] for e in entries)
    if len(payload) != expected:
        raise ContainerIntegrityError(f"{path}: payload has {len(payload)} bytes, "
                                      f"manifest declares {expected} (truncated or padded)")
    if hashlib.sha256(payload).hexdigest() != manifest.get("payload_sha256"):
        raise ContainerIntegrityError(f"{path}: payload checksum mismatch")
    arrays = {}
    for e in entries:
        raw = payload[e["offset"]:e["offset"] + e["nbytes"]]
        arrays[e["name"]] = np.frombuffer(raw, dtype="<f8").reshape(e["shape"]).astype(np.float64)
    return arrays, manifest.get("metadata", {})


def save_features(path, feats, **metadata) -> None:
    meta = {"kind": "features", "frame_shift_ms": feats.frame_shift_ms,
            "label": feats.label}
    meta.update(metadata)
    write_container(path, {"frames": feats.frames}, meta)


def load_features(path):
    from .features import FeatureMatrix

    arrays, meta = read_container(path, kind="feature file")
    if "frames" not in arrays:
        raise ContainerIntegrityError(f"{path}: no 'frames' array")
    return FeatureMatrix(arrays["frames"], meta.get("frame_shift_ms", 10.0), meta.get("label"))
