"""Disk cache for fitted transformer stages.

Keys hash the full upstream node descriptor chain (keyword, configured
parameters, disabled flags, effective seeds), the fingerprint of the incoming
(X, y, extras) stream, and the operation kind, so partially overlapping
hyperparameter configurations share work safely.  Entries are single files
named by hex digest, encoded with the same block scheme as model archives;
corrupt entries are recomputed with a warning.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
from pathlib import Path

from .codec import decode_array, decode_blocks, decode_state, encode_array, encode_blocks, encode_state
from .errors import ArchiveError
from .jsonutil import canonical_json

logger = logging.getLogger("hyperpipe")


def _encode_single_array(arr) -> bytes:
    meta, raw = encode_array(arr)
    head = canonical_json(meta).encode("utf-8")
    return len(head).to_bytes(4, "little") + head + raw


def _decode_single_array(payload: bytes):
    import json

    head_len = int.from_bytes(payload[:4], "little")
    meta = json.loads(payload[4 : 4 + head_len].decode("utf-8"))
    return decode_array(meta, payload[4 + head_len :])


class TransformerCache:
    def __init__(self, folder):
        self.folder = Path(folder)
        self.folder.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self.computed_fits = 0
        self._lock = threading.Lock()  # counters are shared across fold threads

    def key(self, descriptor_chain, input_fingerprint: bytes, op_kind: str) -> str:
        payload = canonical_json(
            {"chain": list(descriptor_chain), "op": op_kind}
        ).encode("utf-8")
        h = hashlib.sha256()
        h.update(payload)
        h.update(input_fingerprint)
        return h.hexdigest()

    def record_fit(self):
        with self._lock:
            self.computed_fits += 1

    def _path(self, key: str) -> Path:
        return self.folder / key

    def load(self, key: str):
        path = self._path(key)
        if not path.exists():
            with self._lock:
                self.misses += 1
            return None
        try:
            blocks = dict(decode_blocks(path.read_bytes()))
            extras = {}
            for name, payload in blocks.items():
                if name.startswith("extras/"):
                    extras[name[len("extras/") :]] = _decode_single_array(payload)
            entry = {
                "state": decode_state(blocks["state"]) or {},
                "x": _decode_single_array(blocks["x"]),
                "y": _decode_single_array(blocks["y"]),
                "extras": extras,
            }
        except (ArchiveError, KeyError, ValueError) as exc:
            logger.warning("cache entry %s is corrupt (%s); recomputing", key, exc)
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return entry

    def store(self, key: str, entry: dict) -> None:
        blocks = [
            ("state", encode_state(entry["state"])),
            ("x", _encode_single_array(entry["x"])),
            ("y", _encode_single_array(entry["y"])),
        ]
        for name in sorted(entry["extras"]):
            blocks.append((f"extras/{name}", _encode_single_array(entry["extras"][name])))
        path = self._path(key)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_bytes(encode_blocks(blocks))
        os.replace(tmp, path)  # atomic under concurrent fold evaluation
