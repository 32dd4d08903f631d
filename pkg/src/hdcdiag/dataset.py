"""Labeled real-valued feature sets: the train/test unit for classifiers.

Also implements the on-disk feature-set format:

    HDCSET v1 d=<d> n=<n> L=<L> split=<tag>\n
    <comma-separated label names>\n
    n records of (d float32 little-endian features, one uint32 label)
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class LabeledFeatureSet:
    """Feature rows with integer labels; labels index into label_names."""

    features: np.ndarray
    labels: np.ndarray
    label_names: list[str]
    split: str = "train"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValidationError("features must be a non-empty (n, d) matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValidationError("labels must have one entry per feature row")
        if not self.label_names:
            raise ValidationError("label_names must be non-empty")
        if self.labels.min() < 0 or self.labels.max() >= len(self.label_names):
            raise ValidationError("labels must index into label_names")
        if self.split not in ("train", "test"):
            raise ValidationError(f"split must be 'train' or 'test', got {self.split!r}")

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return len(self.label_names)

    def subset(self, indices) -> "LabeledFeatureSet":
        return LabeledFeatureSet(
            self.features[indices], self.labels[indices], list(self.label_names), self.split
        )


def write_feature_set(path, fs: LabeledFeatureSet) -> None:
    header = f"HDCSET v1 d={fs.d} n={fs.n} L={fs.num_classes} split={fs.split}\n"
    names = ",".join(fs.label_names) + "\n"
    feats32 = fs.features.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(names.encode("utf-8"))
        for i in range(fs.n):
            fh.write(feats32[i].tobytes())
            fh.write(struct.pack("<I", int(fs.labels[i])))


def read_feature_set(path) -> LabeledFeatureSet:
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8").strip()
        parts = header.split()
        if len(parts) != 6 or parts[0] != "HDCSET" or parts[1] != "v1":
            raise ValidationError(f"bad feature-set header: {header!r}")
        fields = dict(p.split("=", 1) for p in parts[2:])
        d, n, L = int(fields["d"]), int(fields["n"]), int(fields["L"])
        names = fh.readline().decode("utf-8").strip().split(",")
        if len(names) != L:
            raise ValidationError(f"expected {L} label names, got {len(names)}")
        record = np.dtype([("f", "<f4", (d,)), ("y", "<u4")])
        raw = np.frombuffer(fh.read(record.itemsize * n), dtype=record)
        if raw.shape[0] != n:
            raise ValidationError("truncated feature-set file")
    return LabeledFeatureSet(
        raw["f"].astype(np.float64), raw["y"].astype(np.int64), names, fields["split"]
    )
