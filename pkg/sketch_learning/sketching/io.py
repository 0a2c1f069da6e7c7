"""
Sketch file formats.

Binary layout (little-endian)::

    magic "CSKL" | u16 version
    map kind u8 | m u32 | d u32 | d_pad u32 | sigma_w f64
    operator kind u8 | operator seed u64 | dither seed u64
    n u64
    privacy mechanism u8 (0 = none) | epsilon f64 | delta f64
    fingerprint 32 bytes (SHA-256)
    2m f64 values, real/imag interleaved (imag = 0 for real maps)
    optional: u32 length + UTF-8 JSON metadata

Only parameters are stored; the operator is regenerated from its seed on
load and the fingerprint is recomputed and checked against the stored digest.
A JSON mirror with the same header fields and a base64 payload is provided
for debugging.
"""

import base64
import json
import struct
from pathlib import Path
from typing import Any, Union

import numpy as np

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import SketchFormatError
from sketch_learning.core.models import (
    MapKind,
    MapParams,
    OperatorKind,
    OperatorParams,
    PrivacyMechanism,
    PrivacyRecord,
)
from sketch_learning.features.feature_map import feature_map_for, fingerprint_digest
from sketch_learning.sketching.sketch import Sketch

logger = SketchLearningLogger.get(__name__)

MAGIC = b"CSKL"
VERSION = 1

_HEADER = struct.Struct("<4sHBIIIdBQQQBdd32s")
_LENGTH = struct.Struct("<I")

_MAP_CODES = {
    MapKind.RFF_COMPLEX: 0,
    MapKind.RFF_QUANTIZED: 1,
    MapKind.QUADRATIC: 2,
    MapKind.OUTER_PRODUCT: 3,
}
_OPERATOR_CODES = {OperatorKind.DENSE: 0, OperatorKind.STRUCTURED: 1}
_NO_OPERATOR = 255
_PRIVACY_CODES = {PrivacyMechanism.LAPLACE: 1, PrivacyMechanism.GAUSSIAN: 2}


def _invert(table: dict[Any, int]) -> dict[int, Any]:
    return {code: key for key, code in table.items()}


_MAP_KINDS = _invert(_MAP_CODES)
_OPERATOR_KINDS = _invert(_OPERATOR_CODES)
_PRIVACY_KINDS = _invert(_PRIVACY_CODES)


# ------------------------------------------------------------------ header


def _header_fields(s: Sketch) -> dict[str, Any]:
    params = s.spec.params
    op = params.operator
    if op is not None and op.is_explicit:
        raise SketchFormatError("sketches over explicit operators can't be serialized; the operator has no seed")
    privacy = s.privacy
    return {
        "map_kind": params.kind.value,
        "m": params.m,
        "d": params.d,
        "d_pad": op.d_pad if op is not None else params.d,
        "sigma_w": op.sigma_w if op is not None else 0.0,
        "operator_kind": op.kind.value if op is not None else None,
        "operator_seed": op.seed if op is not None else 0,
        "dither_seed": params.dither_seed if params.dither_seed is not None else 0,
        "n": s.n,
        "mechanism": privacy.mechanism.value if privacy is not None else None,
        "epsilon": privacy.epsilon if privacy is not None else 0.0,
        "delta": privacy.delta if privacy is not None else 0.0,
    }


def _params_from_fields(fields: dict[str, Any]) -> MapParams:
    kind = MapKind(fields["map_kind"])
    operator = None
    if kind is not MapKind.OUTER_PRODUCT:
        if fields["operator_kind"] is None:
            raise SketchFormatError(f"{kind.value} sketch is missing its operator")
        operator = OperatorParams(
            kind=OperatorKind(fields["operator_kind"]),
            m=fields["m"],
            d=fields["d"],
            sigma_w=fields["sigma_w"],
            seed=fields["operator_seed"],
        )
        if operator.d_pad != fields["d_pad"]:
            raise SketchFormatError(f"header d_pad {fields['d_pad']} != {operator.d_pad}")
    elif fields["m"] != fields["d"] ** 2:
        raise SketchFormatError("outer_product sketch must have m = d²")
    dither_seed = fields["dither_seed"] if kind is MapKind.RFF_QUANTIZED else None
    return MapParams(kind=kind, d=fields["d"], operator=operator, dither_seed=dither_seed)


def _privacy_from_fields(fields: dict[str, Any]) -> PrivacyRecord | None:
    if fields["mechanism"] is None:
        return None
    return PrivacyRecord(
        mechanism=PrivacyMechanism(fields["mechanism"]),
        epsilon=fields["epsilon"],
        delta=fields["delta"],
    )


def _interleave(values: np.ndarray) -> np.ndarray:
    out = np.zeros((values.shape[0], 2), dtype="<f8")
    out[:, 0] = values.real
    if np.iscomplexobj(values):
        out[:, 1] = values.imag
    return out.reshape(-1)


def _assemble(fields: dict[str, Any], digest: bytes, payload: np.ndarray, metadata: dict) -> Sketch:
    try:
        params = _params_from_fields(fields)
        privacy = _privacy_from_fields(fields)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, SketchFormatError):
            raise
        raise SketchFormatError(f"invalid sketch header: {exc}") from exc
    if fingerprint_digest(params) != digest:
        raise SketchFormatError("fingerprint mismatch: header parameters don't hash to the stored digest")
    spec = feature_map_for(params)
    pairs = payload.reshape(-1, 2)
    if spec.is_complex:
        values = np.empty(pairs.shape[0], dtype=np.complex128)
        values.real = pairs[:, 0]
        values.imag = pairs[:, 1]
    else:
        values = pairs[:, 0].copy()
    try:
        return Sketch(values=values, n=fields["n"], spec=spec, privacy=privacy, metadata=metadata)
    except ValueError as exc:
        raise SketchFormatError(f"invalid sketch payload: {exc}") from exc


# ------------------------------------------------------------------ binary


def serialize(s: Sketch) -> bytes:
    """Encode a sketch in the binary format."""
    f = _header_fields(s)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        _MAP_CODES[MapKind(f["map_kind"])],
        f["m"],
        f["d"],
        f["d_pad"],
        f["sigma_w"],
        _OPERATOR_CODES[OperatorKind(f["operator_kind"])] if f["operator_kind"] else _NO_OPERATOR,
        f["operator_seed"],
        f["dither_seed"],
        f["n"],
        _PRIVACY_CODES[PrivacyMechanism(f["mechanism"])] if f["mechanism"] else 0,
        f["epsilon"],
        f["delta"],
        s.spec.digest,
    )
    parts = [header, _interleave(s.values).tobytes()]
    if s.metadata:
        blob = json.dumps(s.metadata, sort_keys=True).encode("utf-8")
        parts += [_LENGTH.pack(len(blob)), blob]
    return b"".join(parts)


def deserialize(data: bytes) -> Sketch:
    """Decode the binary format; raises :class:`SketchFormatError` on any inconsistency."""
    if len(data) < _HEADER.size:
        raise SketchFormatError(f"truncated sketch: {len(data)} bytes, header needs {_HEADER.size}")
    (
        magic,
        version,
        map_code,
        m,
        d,
        d_pad,
        sigma_w,
        op_code,
        op_seed,
        dither_seed,
        n,
        priv_code,
        epsilon,
        delta,
        digest,
    ) = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SketchFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SketchFormatError(f"unsupported sketch format version {version}")
    if map_code not in _MAP_KINDS:
        raise SketchFormatError(f"unknown map kind code {map_code}")
    if op_code != _NO_OPERATOR and op_code not in _OPERATOR_KINDS:
        raise SketchFormatError(f"unknown operator kind code {op_code}")
    if priv_code != 0 and priv_code not in _PRIVACY_KINDS:
        raise SketchFormatError(f"unknown privacy mechanism code {priv_code}")

    offset = _HEADER.size
    payload_size = 16 * m
    if len(data) < offset + payload_size:
        raise SketchFormatError(f"truncated sketch: expected {payload_size} value bytes after header")
    payload = np.frombuffer(data, dtype="<f8", count=2 * m, offset=offset).astype(np.float64)
    offset += payload_size

    metadata: dict[str, Any] = {}
    if offset < len(data):
        if len(data) < offset + _LENGTH.size:
            raise SketchFormatError("truncated metadata length")
        (length,) = _LENGTH.unpack_from(data, offset)
        offset += _LENGTH.size
        if len(data) != offset + length:
            raise SketchFormatError("metadata block length doesn't match the file size")
        try:
            metadata = json.loads(data[offset:].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SketchFormatError(f"unreadable metadata block: {exc}") from exc

    fields = {
        "map_kind": _MAP_KINDS[map_code].value,
        "m": m,
        "d": d,
        "d_pad": d_pad,
        "sigma_w": sigma_w,
        "operator_kind": _OPERATOR_KINDS[op_code].value if op_code != _NO_OPERATOR else None,
        "operator_seed": op_seed,
        "dither_seed": dither_seed,
        "n": n,
        "mechanism": _PRIVACY_KINDS[priv_code].value if priv_code else None,
        "epsilon": epsilon,
        "delta": delta,
    }
    return _assemble(fields, digest, payload, metadata)


def save(s: Sketch, path: Union[str, Path]) -> None:
    Path(path).write_bytes(serialize(s))
    logger.debug("sketch.saved: path=%s n=%d m=%d", path, s.n, s.m)


def load(path: Union[str, Path]) -> Sketch:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SketchFormatError(f"can't read sketch file {path}: {exc}") from exc
    return deserialize(data)


# -------------------------------------------------------------- JSON mirror


def to_json(s: Sketch) -> str:
    """Human-readable mirror: header fields, hex fingerprint, base64 values."""
    doc = _header_fields(s)
    doc["format"] = MAGIC.decode()
    doc["version"] = VERSION
    doc["fingerprint"] = s.fingerprint
    doc["values"] = base64.b64encode(_interleave(s.values).tobytes()).decode("ascii")
    doc["metadata"] = s.metadata
    return json.dumps(doc, indent=2, sort_keys=True)


def from_json(text: str) -> Sketch:
    try:
        doc = json.loads(text)
        if doc.get("format") != MAGIC.decode() or doc.get("version") != VERSION:
            raise SketchFormatError("not a version-1 sketch document")
        digest = bytes.fromhex(doc["fingerprint"])
        raw = base64.b64decode(doc["values"], validate=True)
    except SketchFormatError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise SketchFormatError(f"invalid sketch document: {exc}") from exc
    if len(raw) != 16 * int(doc["m"]):
        raise SketchFormatError("value payload length doesn't match m")
    payload = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return _assemble(doc, digest, payload, doc.get("metadata") or {})
