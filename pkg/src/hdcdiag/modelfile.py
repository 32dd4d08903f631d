"""Binary model bundle: projection + class bank + labels + surrogate weights.

Layout (all little-endian): magic ``HDBG``, u16 format version, then five
length-prefixed sections in fixed order: projection matrix, accumulator
counts, binarized class hypervectors, label names, optional surrogate
weights.
"""

import struct

import numpy as np

from .encoding import ORIGIN_MLP, ORIGIN_RANDOM, ProjectionMatrix
from .errors import ValidationError
from .hdc import ClassBank
from .hypervec import AccumulatorVector, hv_from_bytes, hv_to_bytes
from .mlp import MlpModel

MAGIC = b"HDBG"
VERSION = 1

_ORIGIN_CODE = {ORIGIN_RANDOM: 0, ORIGIN_MLP: 1}
_ORIGIN_NAME = {v: k for k, v in _ORIGIN_CODE.items()}
_ACT_CODE = {"none": 0, "relu": 1}
_ACT_NAME = {v: k for k, v in _ACT_CODE.items()}


def _projection_blob(p: ProjectionMatrix) -> bytes:
    head = struct.pack("<IIB", p.d, p.hyper_d, _ORIGIN_CODE[p.origin])
    return head + np.ascontiguousarray(p.column_bits, dtype="<u8").tobytes()


def _projection_from(blob: bytes) -> ProjectionMatrix:
    d, hyper_d, origin = struct.unpack_from("<IIB", blob, 0)
    words = np.frombuffer(blob, dtype="<u8", offset=9).astype(np.uint64)
    return ProjectionMatrix(d, hyper_d, words.reshape(hyper_d, -1), _ORIGIN_NAME[origin])


def _accumulators_blob(bank: ClassBank) -> bytes:
    counts = np.stack([acc.counts for acc in bank.accumulators])
    head = struct.pack("<II", bank.num_classes, bank.hyper_d)
    return head + counts.astype("<i8").tobytes()


def _accumulators_from(blob: bytes) -> list[AccumulatorVector]:
    L, dim = struct.unpack_from("<II", blob, 0)
    counts = np.frombuffer(blob, dtype="<i8", offset=8).astype(np.int64).reshape(L, dim)
    return [AccumulatorVector(dim, counts[l].copy()) for l in range(L)]


def _binarized_blob(bank: ClassBank) -> bytes:
    out = struct.pack("<I", bank.num_classes)
    for hv in bank.binarized:
        out += hv_to_bytes(hv)
    return out


def _binarized_from(blob: bytes):
    (L,) = struct.unpack_from("<I", blob, 0)
    offset, out = 4, []
    for _ in range(L):
        hv, offset = hv_from_bytes(blob, offset)
        out.append(hv)
    return out


def _names_blob(names: list[str]) -> bytes:
    out = struct.pack("<I", len(names))
    for name in names:
        raw = name.encode("utf-8")
        out += struct.pack("<I", len(raw)) + raw
    return out


def _names_from(blob: bytes) -> list[str]:
    (count,) = struct.unpack_from("<I", blob, 0)
    offset, names = 4, []
    for _ in range(count):
        (n,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        names.append(blob[offset : offset + n].decode("utf-8"))
        offset += n
    return names


def _surrogate_blob(model: MlpModel | None) -> bytes:
    if model is None:
        return struct.pack("<B", 0)
    head = struct.pack(
        "<BIIIBB",
        1, model.d_in, model.d_hidden, model.d_out,
        1 if model.hidden_bias_enabled else 0,
        _ACT_CODE[model.hidden_activation],
    )
    parts = [model.W1, model.b1] if model.b1 is not None else [model.W1]
    parts += [model.W2, model.b2]
    return head + b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in parts)


def _surrogate_from(blob: bytes) -> MlpModel | None:
    (present,) = struct.unpack_from("<B", blob, 0)
    if not present:
        return None
    _, d_in, d_hidden, d_out, bias, act = struct.unpack_from("<BIIIBB", blob, 0)
    floats = np.frombuffer(blob, dtype="<f8", offset=15).astype(np.float64)
    pos = 0

    def take(*shape):
        nonlocal pos
        n = int(np.prod(shape))
        out = floats[pos : pos + n].reshape(shape).copy()
        pos += n
        return out

    W1 = take(d_in, d_hidden)
    b1 = take(d_hidden) if bias else None
    W2 = take(d_hidden, d_out)
    b2 = take(d_out)
    model = MlpModel(W1=W1, W2=W2, b2=b2, b1=b1, hidden_activation=_ACT_NAME[act])
    model.history = {"loaded": True}
    return model


def save_model(path, bank: ClassBank, surrogate: MlpModel | None = None) -> None:
    sections = [
        _projection_blob(bank.projection),
        _accumulators_blob(bank),
        _binarized_blob(bank),
        _names_blob(bank.label_names),
        _surrogate_blob(surrogate),
    ]
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<H", VERSION))
        for blob in sections:
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)


def load_model(path) -> tuple[ClassBank, MlpModel | None]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValidationError(f"not a model file (magic {data[:4]!r})")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise ValidationError(f"unsupported model version {version}")
    offset, sections = 6, []
    for _ in range(5):
        (n,) = struct.unpack_from("<I", data, offset)
        offset += 4
        sections.append(data[offset : offset + n])
        offset += n
    projection = _projection_from(sections[0])
    accumulators = _accumulators_from(sections[1])
    binarized = _binarized_from(sections[2])
    names = _names_from(sections[3])
    surrogate = _surrogate_from(sections[4])
    return ClassBank(projection, names, accumulators, binarized), surrogate
