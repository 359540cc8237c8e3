"""Versioned binary container for trained estimators.

Layout (all integers little-endian):

    b"LIFILOCMODEL 1\\n"
    8-byte header length
    header JSON (sorted keys): {"kind", "spec", "transform", "extra",
                                "arrays": [{"name", "dtype", "shape"}, ...]}
    raw array bytes, row-major, concatenated in manifest order

No timestamps and a canonical JSON encoding keep saves byte-reproducible.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataFormatError

MAGIC = b"LIFILOCMODEL 1\n"


def save_container(path: str, kind: str, spec: dict, transform: dict,
                   extra: dict, arrays: dict):
    names = sorted(arrays)
    manifest = [{"name": n, "dtype": str(arrays[n].dtype),
                 "shape": list(arrays[n].shape)} for n in names]
    header = json.dumps(
        {"kind": kind, "spec": spec, "transform": transform, "extra": extra,
         "arrays": manifest},
        sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(header).to_bytes(8, "little"))
        fh.write(header)
        for name in names:
            arr = np.ascontiguousarray(arrays[name])
            fh.write(arr.astype(arr.dtype.newbyteorder("<")).tobytes())


def load_container(path: str):
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise DataFormatError(f"cannot open model {path}: {exc}") from exc
    with fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise DataFormatError(f"{path} is not a lifiloc model file "
                                  "(or has an unsupported version)")
        header_len = int.from_bytes(fh.read(8), "little")
        try:
            header = json.loads(fh.read(header_len).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataFormatError(f"{path}: corrupt model header: {exc}") from exc
        arrays = {}
        for entry in header["arrays"]:
            dtype = np.dtype(entry["dtype"]).newbyteorder("<")
            count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise DataFormatError(f"{path}: truncated tensor {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(
                entry["shape"]).astype(np.dtype(entry["dtype"]))
    return header, arrays
