"""Binary encoding shared by model archives and cache entries.

Numeric payloads are raw little-endian 64-bit values (floats as f64, integer
arrays as i64) so round trips are bit-exact.  A payload is a JSON header
describing the entries followed by the concatenated raw buffers; files are
sequences of named blocks: 4-byte name length, name, 8-byte payload length,
payload (lengths little-endian).
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ArchiveError


def encode_array(arr: np.ndarray) -> tuple[dict, bytes]:
    arr = np.asarray(arr)
    if arr.dtype.kind in ("i", "u", "b"):
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        kind = "i64"
    else:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        kind = "f64"
    raw = arr.astype(arr.dtype.newbyteorder("<")).tobytes()
    return {"kind": kind, "shape": list(arr.shape)}, raw


def decode_array(meta: dict, raw: bytes) -> np.ndarray:
    dtype = np.dtype("<i8") if meta["kind"] == "i64" else np.dtype("<f8")
    n = int(np.prod(meta["shape"])) if meta["shape"] else 1
    if len(raw) != n * 8:
        raise ArchiveError("truncated array payload")
    arr = np.frombuffer(raw, dtype=dtype, count=n).astype(
        np.int64 if meta["kind"] == "i64" else np.float64
    )
    return arr.reshape(meta["shape"])


def encode_state(state: dict | None) -> bytes:
    """Encode one element's learned state (or None for an unfitted element)."""
    entries = []
    buffers = []
    if state is None:
        header = {"fitted": False, "entries": []}
    else:
        for key in sorted(state):
            value = state[key]
            if isinstance(value, (np.ndarray, np.floating, np.integer)):
                meta, raw = encode_array(value)
                entries.append({"key": key, **meta})
                buffers.append(raw)
            elif isinstance(value, (bool, int, str)) or value is None:
                entries.append({"key": key, "kind": "json", "value": value})
            elif isinstance(value, float):
                meta, raw = encode_array(np.float64(value))
                entries.append({"key": key, **meta})
                buffers.append(raw)
            else:
                raise TypeError(f"state entry {key!r} has unsupported type {type(value).__name__}")
        header = {"fitted": True, "entries": entries}
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    return len(head).to_bytes(4, "little") + head + b"".join(buffers)


def decode_state(payload: bytes) -> dict | None:
    if len(payload) < 4:
        raise ArchiveError("truncated state payload")
    head_len = int.from_bytes(payload[:4], "little")
    if len(payload) < 4 + head_len:
        raise ArchiveError("truncated state payload")
    try:
        header = json.loads(payload[4 : 4 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"malformed state header: {exc}") from None
    if not header.get("fitted", False):
        return None
    state = {}
    offset = 4 + head_len
    for entry in header["entries"]:
        if entry["kind"] == "json":
            state[entry["key"]] = entry["value"]
            continue
        n = int(np.prod(entry["shape"])) if entry["shape"] else 1
        raw = payload[offset : offset + n * 8]
        state[entry["key"]] = decode_array(entry, raw)
        offset += n * 8
    return state


def encode_blocks(blocks: list[tuple[str, bytes]]) -> bytes:
    out = []
    for name, payload in blocks:
        raw_name = name.encode("utf-8")
        out.append(len(raw_name).to_bytes(4, "little"))
        out.append(raw_name)
        out.append(len(payload).to_bytes(8, "little"))
        out.append(payload)
    return b"".join(out)


def decode_blocks(data: bytes) -> list[tuple[str, bytes]]:
    blocks = []
    offset = 0
    while offset < len(data):
        if offset + 4 > len(data):
            raise ArchiveError("truncated block header")
        name_len = int.from_bytes(data[offset : offset + 4], "little")
        offset += 4
        if offset + name_len + 8 > len(data):
            raise ArchiveError("truncated block name")
        name = data[offset : offset + name_len].decode("utf-8")
        offset += name_len
        payload_len = int.from_bytes(data[offset : offset + 8], "little")
        offset += 8
        if offset + payload_len > len(data):
            raise ArchiveError(f"truncated payload for block {name!r}")
        blocks.append((name, data[offset : offset + payload_len]))
        offset += payload_len
    return blocks
