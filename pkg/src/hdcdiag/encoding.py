"""Projection matrices and the feature -> hypervector encoder.

A projection matrix holds d x hyper_d bipolar entries, stored bit-packed
per output column (bit 1 <-> +1). Encoding a feature vector is the signed
matrix-vector product: raw[j] = sum_i f[i] * entry[i][j], output bit j set
iff raw[j] >= 0. Entries come either from a seeded uniform generator or
from the sign of a trained MLP hidden layer.
"""

import numpy as np

from .errors import ValidationError
from .hypervec import WORD_BITS, Hypervector

ORIGIN_RANDOM = "random"
ORIGIN_MLP = "mlp-learned"


def _pack_columns(bits: np.ndarray) -> np.ndarray:
    """Pack a (d, hyper_d) 0/1 matrix into per-column uint64 words."""
    d, hyper_d = bits.shape
    by = np.packbits(bits.T.astype(np.uint8), axis=1, bitorder="little")
    pad = (-by.shape[1]) % 8
    if pad:
        by = np.pad(by, ((0, 0), (0, pad)))
    words = np.frombuffer(by.tobytes(), dtype="<u8").astype(np.uint64)
    return words.reshape(hyper_d, -1)


def _unpack_columns(column_bits: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`_pack_columns`; returns a (d, hyper_d) 0/1 matrix."""
    raw = np.ascontiguousarray(column_bits, dtype="<u8").tobytes()
    by = np.frombuffer(raw, dtype=np.uint8).reshape(column_bits.shape[0], -1)
    return np.unpackbits(by, axis=1, bitorder="little", count=d).T


class ProjectionMatrix:
    """d x hyper_d bipolar encoder weights, bit-packed per output column."""

    __slots__ = ("d", "hyper_d", "origin", "column_bits", "_signs")

    def __init__(self, d: int, hyper_d: int, column_bits: np.ndarray, origin: str):
        if d < 1 or hyper_d < 1:
            raise ValidationError(f"dimensions must be positive, got d={d}, hyper_d={hyper_d}")
        if origin not in (ORIGIN_RANDOM, ORIGIN_MLP):
            raise ValidationError(f"unknown origin tag {origin!r}")
        words_per_col = (d + WORD_BITS - 1) // WORD_BITS
        column_bits = np.asarray(column_bits, dtype=np.uint64)
        if column_bits.shape != (hyper_d, words_per_col):
            raise ValidationError(
                f"expected column_bits shape {(hyper_d, words_per_col)}, got {column_bits.shape}"
            )
        self.d = d
        self.hyper_d = hyper_d
        self.origin = origin
        self.column_bits = column_bits
        self._signs = None

    @classmethod
    def from_entries(cls, entries: np.ndarray, origin: str) -> "ProjectionMatrix":
        """Build from a dense (d, hyper_d) matrix of -1/+1 entries."""
        entries = np.asarray(entries)
        if entries.ndim != 2:
            raise ValidationError("entries must be a 2-d matrix")
        if not np.isin(entries, (-1, 1)).all():
            raise ValidationError("entries must be bipolar (-1 or +1)")
        d, hyper_d = entries.shape
        return cls(d, hyper_d, _pack_columns(entries > 0), origin)

    @property
    def signs(self) -> np.ndarray:
        """Dense float64 view of the bipolar entries (cached)."""
        if self._signs is None:
            bits = _unpack_columns(self.column_bits, self.d)
            self._signs = bits.astype(np.float64) * 2.0 - 1.0
        return self._signs

    def entries(self) -> np.ndarray:
        """Dense int8 copy of the bipolar entries."""
        return self.signs.astype(np.int8)

    def column(self, j: int) -> Hypervector:
        """Column j as a d-bit hypervector."""
        return Hypervector(self.d, self.column_bits[j].copy())

    def __eq__(self, other):
        if not isinstance(other, ProjectionMatrix):
            return NotImplemented
        return (
            self.d == other.d
            and self.hyper_d == other.hyper_d
            and self.origin == other.origin
            and bool(np.array_equal(self.column_bits, other.column_bits))
        )

    def __repr__(self):
        return f"ProjectionMatrix(d={self.d}, hyper_d={self.hyper_d}, origin={self.origin!r})"


def random_projection(d: int, hyper_d: int, seed: int) -> ProjectionMatrix:
    """Seeded i.i.d. uniform bipolar matrix; same seed gives the same matrix."""
    if d < 1 or hyper_d < 1:
        raise ValidationError(f"dimensions must be positive, got d={d}, hyper_d={hyper_d}")
    rng = np.random.Generator(np.random.PCG64(seed))
    bits = rng.integers(0, 2, size=(d, hyper_d), dtype=np.uint8)
    return ProjectionMatrix(d, hyper_d, _pack_columns(bits), ORIGIN_RANDOM)


def from_mlp_hidden(weights: np.ndarray) -> ProjectionMatrix:
    """Sign-binarize learned hidden-layer weights into a projection matrix.

    sign(0) maps to +1, matching the binarization rule used everywhere else.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2:
        raise ValidationError("weights must be a 2-d matrix")
    if not np.isfinite(weights).all():
        raise ValidationError("weights must be finite")
    d, hyper_d = weights.shape
    return ProjectionMatrix(d, hyper_d, _pack_columns(weights >= 0), ORIGIN_MLP)


def _check_features(p: ProjectionMatrix, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] != p.d:
        raise ValidationError(f"feature length {f.shape} does not match d={p.d}")
    if not np.isfinite(f).all():
        raise ValidationError("feature vector must be finite")
    return f


def encode(p: ProjectionMatrix, f) -> Hypervector:
    """Project a length-d feature vector and binarize: bit j = (f . col_j >= 0).

    Goes through the same matmul as :func:`encode_batch` so single and batch
    encodings agree bit for bit (summation order matters near raw == 0).
    """
    f = _check_features(p, f)
    return Hypervector(p.hyper_d, encode_batch(p, f[np.newaxis, :])[0])


def encode_batch(p: ProjectionMatrix, feats: np.ndarray) -> np.ndarray:
    """Encode n feature rows at once; returns packed bits, shape (n, words).

    Row i equals ``encode(p, feats[i]).words``.
    """
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != p.d:
        raise ValidationError(f"expected feature matrix (n, {p.d}), got {feats.shape}")
    if not np.isfinite(feats).all():
        raise ValidationError("feature matrix must be finite")
    raw = feats @ p.signs
    bits = raw >= 0
    by = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    pad = (-by.shape[1]) % 8
    if pad:
        by = np.pad(by, ((0, 0), (0, pad)))
    words = np.frombuffer(by.tobytes(), dtype="<u8").astype(np.uint64)
    return words.reshape(feats.shape[0], -1)


def batch_row(packed: np.ndarray, i: int, hyper_d: int) -> Hypervector:
    """View row i of an :func:`encode_batch` result as a hypervector."""
    return Hypervector(hyper_d, packed[i].copy())
