"""Single-file model archives (.photon).

Layout: bytes 0-7 magic "PHOTON01"; bytes 8-11 little-endian u32 manifest
length; the UTF-8 JSON manifest (schema version, pipeline structure, applied
configuration, creation metadata); then one payload block per leaf element in
traversal order carrying its learned state (floats as little-endian f64).
A reloaded archive predicts bit-identically to the pipeline it was saved from.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from .codec import decode_blocks, decode_state, encode_blocks, encode_state
from .errors import ArchiveError, NotFittedError
from .jsonutil import canonical_json
from .pipeline import Pipeline, build_from_structure

MAGIC = b"PHOTON01"
SCHEMA_VERSION = 1
SUFFIX = ".photon"


def save_model(pipeline: Pipeline, path, metadata: dict | None = None) -> Path:
    if not pipeline.fitted:
        raise NotFittedError("cannot archive an unfitted pipeline")
    path = Path(path)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "n_features": pipeline.n_features_in_,
        "structure": pipeline.describe(),
    }
    manifest.update(metadata or {})
    blocks = []
    for node in pipeline.elements():
        elem = node.element
        state = elem.get_state() if elem.fitted_ else None
        blocks.append((node.name, encode_state(state)))
    manifest_raw = canonical_json(manifest).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(manifest_raw).to_bytes(4, "little"))
        fh.write(manifest_raw)
        fh.write(encode_blocks(blocks))
    return path


def read_manifest(path) -> dict:
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:8] != MAGIC:
            raise ArchiveError(f"{path}: not a model archive")
        manifest_len = int.from_bytes(head[8:12], "little")
        manifest_raw = fh.read(manifest_len)
    if len(manifest_raw) != manifest_len:
        raise ArchiveError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(manifest_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"{path}: malformed manifest: {exc}") from None
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ArchiveError(
            f"{path}: archive schema version {version} is not supported "
            f"(this build reads version {SCHEMA_VERSION})"
        )
    return manifest


def load_model(path) -> Pipeline:
    manifest = read_manifest(path)
    data = Path(path).read_bytes()
    manifest_len = int.from_bytes(data[8:12], "little")
    blocks = decode_blocks(data[12 + manifest_len :])

    pipeline = build_from_structure(manifest["structure"])
    states = dict(blocks)
    for node in pipeline.elements():
        if node.name not in states:
            raise ArchiveError(f"{path}: missing payload for element {node.name!r}")
        state = decode_state(states[node.name])
        if state is not None:
            node.element.set_state(state)
    pipeline.fitted = True
    pipeline.n_features_in_ = manifest.get("n_features")
    return pipeline


def model_predict(pipeline: Pipeline, x, extras=None):
    """Predict with a (re)loaded pipeline; alias kept for symmetry with save/load."""
    return pipeline.predict(x, extras=extras)
