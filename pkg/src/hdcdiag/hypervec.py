"""Bit-packed binary hypervectors and the kernels behind cheap HDC inference.

A hypervector of dimension D stores its D logical components in 64-bit
words with little-endian bit order: bit ``i`` of word ``w`` encodes
component ``64*w + i``. Bit 1 maps to bipolar +1 and bit 0 to bipolar -1.
Trailing pad bits in the last word are always zero, so word-wise XOR plus
popcount gives exact Hamming distances.

Class prototypes are bundled in the integer domain (`AccumulatorVector`)
and binarized with sign (ties resolved to +1) for inference.
"""

import struct

import numpy as np

from .errors import ValidationError

WORD_BITS = 64


def _n_words(dim: int) -> int:
    return (dim + WORD_BITS - 1) // WORD_BITS


def _pad_mask(dim: int) -> int:
    """Mask of the valid bits in the last word."""
    used = dim % WORD_BITS
    if used == 0:
        return (1 << WORD_BITS) - 1
    return (1 << used) - 1


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array into uint64 words (little-endian bit order)."""
    raw = np.packbits(bits.astype(np.uint8), bitorder="little").tobytes()
    raw += b"\x00" * (-len(raw) % 8)
    return np.frombuffer(raw, dtype="<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns a uint8 0/1 array of length dim."""
    raw = np.ascontiguousarray(words, dtype="<u8").tobytes()
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little", count=dim)


class Hypervector:
    """A dim-bit binary hypervector packed into uint64 words."""

    __slots__ = ("dim", "words")

    def __init__(self, dim: int, words: np.ndarray):
        if dim < 1:
            raise ValidationError(f"hypervector dim must be positive, got {dim}")
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (_n_words(dim),):
            raise ValidationError(
                f"expected {_n_words(dim)} words for dim={dim}, got shape {words.shape}"
            )
        if int(words[-1]) & ~_pad_mask(dim) & ((1 << WORD_BITS) - 1):
            raise ValidationError("pad bits beyond dim must be zero")
        self.dim = dim
        self.words = words

    def __eq__(self, other):
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.dim, self.words.tobytes()))

    def __repr__(self):
        ones = int(np.bitwise_count(self.words).sum())
        return f"Hypervector(dim={self.dim}, ones={ones})"


class AccumulatorVector:
    """Per-component integer sums of bundled hypervectors (bipolar domain)."""

    __slots__ = ("dim", "counts")

    def __init__(self, dim: int, counts: np.ndarray | None = None):
        if dim < 1:
            raise ValidationError(f"accumulator dim must be positive, got {dim}")
        if counts is None:
            counts = np.zeros(dim, dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (dim,):
                raise ValidationError(f"expected {dim} counts, got shape {counts.shape}")
        self.dim = dim
        self.counts = counts

    def copy(self) -> "AccumulatorVector":
        return AccumulatorVector(self.dim, self.counts.copy())

    def __eq__(self, other):
        if not isinstance(other, AccumulatorVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.counts, other.counts))

    def __repr__(self):
        return f"AccumulatorVector(dim={self.dim})"


def hv_from_bits(bits: np.ndarray) -> Hypervector:
    """Build a hypervector from a 0/1 array."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size < 1:
        raise ValidationError("bits must be a non-empty 1-d array")
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("bits must be 0 or 1")
    return Hypervector(bits.size, pack_bits(bits))


def hv_from_bipolar(values) -> Hypervector:
    """Build a hypervector from a {-1,+1} sequence (+1 -> bit 1)."""
    values = np.asarray(values)
    if values.ndim != 1 or values.size < 1:
        raise ValidationError("values must be a non-empty 1-d sequence")
    if not np.isin(values, (-1, 1)).all():
        raise ValidationError("values must be -1 or +1")
    return Hypervector(values.size, pack_bits(values > 0))


def hv_to_bits(h: Hypervector) -> np.ndarray:
    return unpack_bits(h.words, h.dim)


def hv_to_bipolar(h: Hypervector) -> np.ndarray:
    """Expand to an int8 array of -1/+1 values."""
    return (hv_to_bits(h).astype(np.int8) * 2) - 1


def complement(h: Hypervector) -> Hypervector:
    """Flip every bit (bipolar negation); pad bits stay zero."""
    words = ~h.words
    words[-1] &= np.uint64(_pad_mask(h.dim))
    return Hypervector(h.dim, words)


def hamming(a: Hypervector, b: Hypervector) -> int:
    """Number of differing components, via popcount of word-wise XOR."""
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return int(np.bitwise_count(a.words ^ b.words).sum())


def accumulate(acc: AccumulatorVector, h: Hypervector) -> AccumulatorVector:
    """Add a hypervector's bipolar expansion into the accumulator (in place)."""
    if acc.dim != h.dim:
        raise ValidationError(f"dimension mismatch: {acc.dim} vs {h.dim}")
    acc.counts += hv_to_bipolar(h)
    return acc


def binarize(acc: AccumulatorVector) -> Hypervector:
    """Sign of the counts, with sign(0) = +1 so even bundles stay deterministic."""
    return Hypervector(acc.dim, pack_bits(acc.counts >= 0))


def hv_to_bytes(h: Hypervector) -> bytes:
    """Serialize: 4-byte little-endian dim, then packed words little-endian."""
    return struct.pack("<I", h.dim) + np.ascontiguousarray(h.words, dtype="<u8").tobytes()


def hv_from_bytes(data: bytes, offset: int = 0) -> tuple[Hypervector, int]:
    """Deserialize from :func:`hv_to_bytes` output; returns (hv, next_offset)."""
    if len(data) - offset < 4:
        raise ValidationError("truncated hypervector blob")
    (dim,) = struct.unpack_from("<I", data, offset)
    offset += 4
    nbytes = _n_words(dim) * 8
    if len(data) - offset < nbytes:
        raise ValidationError("truncated hypervector words")
    words = np.frombuffer(data, dtype="<u8", count=_n_words(dim), offset=offset)
    return Hypervector(dim, words.astype(np.uint64)), offset + nbytes
