"""Binary file formats: clip containers and checkpoints.

Clip container (``.dedv``): header ``magic 'DEDV', version u32, n_frames
u32, height u32, width u32, channels u32, dtype u8`` (0 = unsigned byte,
1 = 32-bit float), all integers little-endian, followed by frame-major raw
pixel data.

Checkpoints (``.ckpt``) reuse the same header conventions with a parameter
manifest: ``magic 'DEDC', version u32``, a length-prefixed config text
block, a length-prefixed JSON extras block, then ``n_entries u32`` and per
entry ``name_len u16, name, ndim u8, dims u32 * ndim, offset u64``; the
payload is the concatenated raw little-endian 32-bit floats of every entry.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

CLIP_MAGIC = b"DEDV"
CKPT_MAGIC = b"DEDC"
FORMAT_VERSION = 1

_CLIP_HEADER = struct.Struct("<4sIIIIIB")


class ContainerError(ValueError):
    """Malformed or inconsistent container file."""


def write_clip(path, frames: np.ndarray) -> None:
    """Write pre-decoded frames ``(N, H, W, C)`` as uint8 or float32."""
    frames = np.asarray(frames)
    if frames.ndim != 4:
        raise ContainerError(f"frames must be (N, H, W, C), got {frames.shape}")
    if frames.dtype == np.uint8:
        dtype_code, payload = 0, frames.tobytes()
    elif frames.dtype == np.float32:
        dtype_code, payload = 1, frames.astype("<f4").tobytes()
    else:
        raise ContainerError(f"unsupported frame dtype {frames.dtype}")
    n, h, w, c = frames.shape
    header = _CLIP_HEADER.pack(CLIP_MAGIC, FORMAT_VERSION, n, h, w, c, dtype_code)
    Path(path).write_bytes(header + payload)


def read_clip(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _CLIP_HEADER.size:
        raise ContainerError(f"{path}: truncated header")
    magic, version, n, h, w, c, dtype_code = _CLIP_HEADER.unpack_from(raw)
    if magic != CLIP_MAGIC:
        raise ContainerError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ContainerError(f"{path}: unsupported version {version}")
    dtype = {0: np.dtype(np.uint8), 1: np.dtype("<f4")}.get(dtype_code)
    if dtype is None:
        raise ContainerError(f"{path}: unknown dtype code {dtype_code}")
    expected = n * h * w * c * dtype.itemsize
    payload = raw[_CLIP_HEADER.size:]
    if len(payload) != expected:
        raise ContainerError(
            f"{path}: payload length {len(payload)} != expected {expected}")
    arr = np.frombuffer(payload, dtype=dtype).reshape(n, h, w, c)
    return arr.astype(np.float32) if dtype_code == 1 else arr.copy()


def write_checkpoint(path, config_text: str, extra: dict,
                     entries: list[tuple[str, np.ndarray]]) -> None:
    """Write named float arrays plus config text and a JSON extras blob."""
    manifest = bytearray()
    payload = bytearray()
    manifest += struct.pack("<I", len(entries))
    for name, arr in entries:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        nb = name.encode("utf-8")
        manifest += struct.pack("<H", len(nb)) + nb
        manifest += struct.pack("<B", arr.ndim)
        manifest += struct.pack(f"<{arr.ndim}I", *arr.shape)
        manifest += struct.pack("<Q", len(payload))
        payload += arr.tobytes()
    cfg_b = config_text.encode("utf-8")
    extra_b = json.dumps(extra, sort_keys=True).encode("utf-8")
    blob = (struct.pack("<4sI", CKPT_MAGIC, FORMAT_VERSION)
            + struct.pack("<I", len(cfg_b)) + cfg_b
            + struct.pack("<I", len(extra_b)) + extra_b
            + bytes(manifest) + bytes(payload))
    Path(path).write_bytes(blob)


def read_checkpoint(path) -> tuple[str, dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    off = 0

    def take(fmt):
        nonlocal off
        vals = struct.unpack_from(fmt, raw, off)
        off += struct.calcsize(fmt)
        return vals

    magic, version = take("<4sI")
    if magic != CKPT_MAGIC:
        raise ContainerError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ContainerError(f"{path}: unsupported version {version}")
    (cfg_len,) = take("<I")
    config_text = raw[off:off + cfg_len].decode("utf-8")
    off += cfg_len
    (extra_len,) = take("<I")
    extra = json.loads(raw[off:off + extra_len].decode("utf-8"))
    off += extra_len
    (n_entries,) = take("<I")
    manifest = []
    for _ in range(n_entries):
        (name_len,) = take("<H")
        name = raw[off:off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = take("<B")
        shape = take(f"<{ndim}I")
        (data_off,) = take("<Q")
        manifest.append((name, shape, data_off))
    payload_start = off
    entries = {}
    for name, shape, data_off in manifest:
        count = int(np.prod(shape)) if shape else 1
        start = payload_start + data_off
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=start)
        entries[name] = arr.reshape(shape).copy()
    return config_text, extra, entries
