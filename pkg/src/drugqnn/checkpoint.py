"""Deterministic checkpoint container.

Layout: a magic line, a 8-byte little-endian length, a JSON header with
sorted keys, then the raw little-endian bytes of every array back to back.
No timestamps or environment data anywhere, so saving the same state twice
produces identical bytes and save -> load -> save round-trips bit-exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import DataError

MAGIC = b"drugqnn-checkpoint-v1\n"


def _estimator_class(model: str):
    from .estimators import ClassicalDrugResponseRegressor, HybridDrugResponseRegressor

    return {"hybrid": HybridDrugResponseRegressor,
            "classical": ClassicalDrugResponseRegressor}[model]


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def save_checkpoint(estimator, path):
    """Serialize a fitted estimator (weights, optimizer state, history)."""
    if not hasattr(estimator, "network_"):
        raise DataError("cannot checkpoint an unfitted estimator")
    net = estimator.network_
    opt = estimator.optimizer_
    arrays = list(net.parameters()) + opt.first_moment + opt.second_moment
    header = {
        "format_version": 1,
        "model": net.head_kind,
        "params": {k: _jsonable(v) for k, v in estimator.get_params().items()},
        "epochs_done": estimator.n_epochs_done_,
        "history": estimator.history_,
        "adam_step": opt.step_count,
        "arrays": [{"shape": list(a.shape), "dtype": str(a.dtype)} for a in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        for a in arrays:
            handle.write(np.ascontiguousarray(a).astype("<f8", copy=False).tobytes())


def load_checkpoint(path):
    """Rebuild the estimator saved by :func:`save_checkpoint`."""
    from .layers import Adam

    path = Path(path)
    raw = path.read_bytes()
    if not raw.startswith(MAGIC):
        raise DataError("not a drugqnn checkpoint", path)
    offset = len(MAGIC)
    (blob_len,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    header = json.loads(raw[offset:offset + blob_len].decode("utf-8"))
    offset += blob_len
    if header.get("format_version") != 1:
        raise DataError(f"unsupported checkpoint version {header.get('format_version')}", path)

    params = {k: tuple(v) if isinstance(v, list) else v
              for k, v in header["params"].items()}
    estimator = _estimator_class(header["model"])(**params)
    # rebuild with the stored seed to recover array shapes, then overwrite
    from .models import ResponseNetwork

    estimator.network_ = ResponseNetwork(
        head_kind=header["model"], seed=estimator.seed, **estimator._network_kwargs())
    estimator.optimizer_ = Adam(estimator.network_.parameters(), lr=estimator.lr)
    estimator.optimizer_.step_count = header["adam_step"]
    arrays = (list(estimator.network_.parameters())
              + estimator.optimizer_.first_moment
              + estimator.optimizer_.second_moment)
    if len(arrays) != len(header["arrays"]):
        raise DataError(
            f"checkpoint holds {len(header['arrays'])} arrays, model needs {len(arrays)}",
            path)
    for spec, target in zip(header["arrays"], arrays):
        shape = tuple(spec["shape"])
        if shape != target.shape:
            raise DataError(f"array shape mismatch: {shape} vs {target.shape}", path)
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        values = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        target[...] = values.reshape(shape)
    if offset != len(raw):
        raise DataError("trailing bytes after checkpoint payload", path)

    estimator.history_ = header["history"]
    estimator.n_epochs_done_ = header["epochs_done"]
    estimator.loss_curve_ = [row["train_mse"] for row in estimator.history_]
    return estimator
