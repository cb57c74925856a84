"""JSON encoding of observables, channels and apparatuses (schema version 1).

Complex scalars are ``[re, im]`` pairs (plain numbers are accepted as real),
matrices are lists of row lists. Every document carries ``"schema": 1``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .channels import Apparatus, OutputFactor, QuantumChannel, joint_apparatus
from .opcore import Observable

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Input document does not match the schema; the message names the field."""


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m) -> list:
    return [[encode_complex(v) for v in row] for row in np.asarray(m)]


def _scalar(v, path: str) -> complex:
    if isinstance(v, bool):
        raise SchemaError(f"{path}: expected a number or [re, im], got a boolean")
    if isinstance(v, (int, float)):
        z = complex(v)
    elif isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v):
        z = complex(v[0], v[1])
    else:
        raise SchemaError(f"{path}: expected a number or [re, im], got {v!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SchemaError(f"{path}: non-finite value")
    return z


def decode_matrix(rows, path: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise SchemaError(f"{path}: expected a nonempty list of row lists")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"{path}[{i}]: row has {len(row)} entries, expected {width}")
        for j, v in enumerate(row):
            out[i, j] = _scalar(v, f"{path}[{i}][{j}]")
    return out


def _field(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{path or 'document'}: expected a JSON object")
    if key not in doc:
        raise SchemaError(f"{path + '.' if path else ''}{key}: missing required field")
    return doc[key]


def _int(doc: dict, key: str, path: str) -> int:
    v = _field(doc, key, path)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise SchemaError(f"{path + '.' if path else ''}{key}: expected a positive integer, got {v!r}")
    return v


def _labels(v, path: str, d: int):
    if v is None:
        return None
    if not isinstance(v, list) or len(v) != d:
        raise SchemaError(f"{path}: expected a list of {d} labels")
    if len(set(map(json.dumps, v))) != d:
        raise SchemaError(f"{path}: labels must be distinct")
    return tuple(v)


def _check_version(doc) -> None:
    v = _field(doc, "schema", "")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"schema: unsupported version {v!r}, expected {SCHEMA_VERSION}")


# -- observables -------------------------------------------------------------


def observable_to_dict(x: Observable) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "dim": x.dim,
        "eigenvectors": encode_matrix(x.eigenvectors),
        "labels": list(x.labels),
    }


def observable_from_dict(doc: dict, path: str = "") -> Observable:
    d = _int(doc, "dim", path)
    p = f"{path + '.' if path else ''}eigenvectors"
    vecs = decode_matrix(_field(doc, "eigenvectors", path), p)
    if vecs.shape != (d, d):
        raise SchemaError(f"{p}: expected {d} vectors of length {d}, got shape {vecs.shape}")
    labels = _labels(doc.get("labels"), f"{path + '.' if path else ''}labels", d)
    try:
        return Observable(vecs, labels)
    except ValueError as exc:
        raise SchemaError(f"{p}: {exc}") from None


# -- channels ------------------------------------------------------------------


def channel_to_dict(ch: QuantumChannel) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [encode_matrix(k) for k in ch.kraus],
    }


def channel_from_dict(doc: dict, path: str = "") -> QuantumChannel:
    pre = path + "." if path else ""
    din, dout = _int(doc, "dim_in", path), _int(doc, "dim_out", path)
    ks = _field(doc, "kraus", path)
    if not isinstance(ks, list) or not ks:
        raise SchemaError(f"{pre}kraus: expected a nonempty list of matrices")
    kraus = []
    for i, k in enumerate(ks):
        m = decode_matrix(k, f"{pre}kraus[{i}]")
        if m.shape != (dout, din):
            raise SchemaError(f"{pre}kraus[{i}]: shape {m.shape} does not match (dim_out, dim_in) = ({dout}, {din})")
        kraus.append(m)
    try:
        return QuantumChannel(tuple(kraus))
    except ValueError as exc:
        raise SchemaError(f"{pre}kraus: {exc}") from None


# -- apparatuses -------------------------------------------------------------


def apparatus_to_dict(a: Apparatus) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "channel": {k: v for k, v in channel_to_dict(a.channel).items() if k != "schema"},
        "output_factors": [
            {"name": f.name, "dim": f.dim, "kind": f.kind, "labels": None if f.labels is None else list(f.labels)}
            for f in a.output_factors
        ],
    }


def joint_apparatus_to_dict(kraus_xz, x_labels=None, z_labels=None) -> dict:
    doc = {"schema": SCHEMA_VERSION, "kraus_xz": [[encode_matrix(m) for m in row] for row in kraus_xz]}
    if x_labels is not None:
        doc["x_labels"] = list(x_labels)
    if z_labels is not None:
        doc["z_labels"] = list(z_labels)
    return doc


def apparatus_from_dict(doc: dict, path: str = "") -> Apparatus:
    pre = path + "." if path else ""
    if isinstance(doc, dict) and "kraus_xz" in doc:
        rows = doc["kraus_xz"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
            raise SchemaError(f"{pre}kraus_xz: expected a nonempty list of nonempty rows of matrices")
        mats = [[decode_matrix(m, f"{pre}kraus_xz[{i}][{j}]") for j, m in enumerate(r)] for i, r in enumerate(rows)]
        xl = _labels(doc.get("x_labels"), f"{pre}x_labels", len(mats))
        zl = _labels(doc.get("z_labels"), f"{pre}z_labels", len(mats[0]))
        try:
            return joint_apparatus(mats, xl, zl)
        except ValueError as exc:
            raise SchemaError(f"{pre}kraus_xz: {exc}") from None
    ch = channel_from_dict(_field(doc, "channel", path), f"{pre}channel")
    fs = _field(doc, "output_factors", path)
    if not isinstance(fs, list) or not fs:
        raise SchemaError(f"{pre}output_factors: expected a nonempty list")
    factors = []
    for i, f in enumerate(fs):
        p = f"{pre}output_factors[{i}]"
        name = _field(f, "name", p)
        if not isinstance(name, str):
            raise SchemaError(f"{p}.name: expected a string")
        d = _int(f, "dim", p)
        kind = f.get("kind", "quantum")
        try:
            factors.append(OutputFactor(name, d, kind, _labels(f.get("labels"), f"{p}.labels", d)))
        except ValueError as exc:
            raise SchemaError(f"{p}: {exc}") from None
    try:
        return Apparatus(ch, tuple(factors))
    except ValueError as exc:
        raise SchemaError(f"{pre}output_factors: {exc}") from None


# -- files -------------------------------------------------------------------


def read_document(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError(f"{p}: cannot read file ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{p}: expected a JSON object at top level")
    _check_version(doc)
    return doc


def _load(path, decode):
    try:
        return decode(read_document(path))
    except SchemaError as exc:
        msg = str(exc)
        raise SchemaError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def load_observable(path) -> Observable:
    return _load(path, observable_from_dict)


def load_channel(path) -> QuantumChannel:
    return _load(path, channel_from_dict)


def load_apparatus(path) -> Apparatus:
    return _load(path, apparatus_from_dict)


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
