"""The HDC classifier: single-pass bundling, Hamming inference, top-k, retraining.

Training sums each class's encoded hypervectors into an integer
accumulator and binarizes with sign. Inference encodes the query with the
same projection and ranks classes by Hamming distance, lowest first, ties
broken toward the lower label index. A perceptron-style retraining
baseline (accumulator updates on misclassified samples, re-binarize per
epoch) models the multi-epoch binary HDC methods the single-pass
classifier is compared against.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledFeatureSet
from .encoding import ProjectionMatrix, encode, encode_batch
from .errors import ValidationError
from .hypervec import AccumulatorVector, Hypervector, binarize


@dataclass
class Prediction:
    """Full class ranking for one query: (label index, distance), ascending."""

    ranking: list[tuple[int, int]]

    @property
    def top1(self) -> int:
        return self.ranking[0][0]

    def top_k(self, k: int) -> list[int]:
        return [label for label, _ in self.ranking[:k]]


class ClassBank:
    """Per-class accumulators plus their binarized inference twins."""

    def __init__(
        self,
        projection: ProjectionMatrix,
        label_names: list[str],
        accumulators: list[AccumulatorVector],
        binarized: list[Hypervector],
    ):
        L = len(label_names)
        if not (len(accumulators) == len(binarized) == L and L >= 1):
            raise ValidationError("need one accumulator and one binarized HV per label")
        hyper_d = projection.hyper_d
        for vec in (*accumulators, *binarized):
            if vec.dim != hyper_d:
                raise ValidationError("all class vectors must have dim hyper_d")
        for acc, hv in zip(accumulators, binarized):
            if binarize(acc) != hv:
                raise ValidationError("binarized bank is stale relative to accumulators")
        self.projection = projection
        self.label_names = list(label_names)
        self.accumulators = accumulators
        self.binarized = binarized
        # Stacked words of the binarized HVs, for vectorized distance sweeps.
        self._class_words = np.stack([hv.words for hv in binarized])

    @property
    def num_classes(self) -> int:
        return len(self.label_names)

    @property
    def hyper_d(self) -> int:
        return self.projection.hyper_d


def _bipolar_rows(packed: np.ndarray, hyper_d: int) -> np.ndarray:
    """Expand packed encodings (n, words) to an int8 bipolar matrix (n, hyper_d)."""
    raw = np.ascontiguousarray(packed, dtype="<u8").tobytes()
    by = np.frombuffer(raw, dtype=np.uint8).reshape(packed.shape[0], -1)
    bits = np.unpackbits(by, axis=1, bitorder="little", count=hyper_d)
    return (bits.astype(np.int8) * 2) - 1


def train_single_pass(proj: ProjectionMatrix, dataset: LabeledFeatureSet) -> ClassBank:
    """Encode every sample and bundle it into its class accumulator, then binarize.

    Pure integer addition per class, so the result is independent of sample
    order.
    """
    if dataset.d != proj.d:
        raise ValidationError(f"dataset d={dataset.d} does not match projection d={proj.d}")
    L = dataset.num_classes
    packed = encode_batch(proj, dataset.features)
    bipolar = _bipolar_rows(packed, proj.hyper_d).astype(np.int64)

    counts = np.zeros((L, proj.hyper_d), dtype=np.int64)
    np.add.at(counts, dataset.labels, bipolar)

    accumulators = [AccumulatorVector(proj.hyper_d, counts[l]) for l in range(L)]
    binarized = [binarize(acc) for acc in accumulators]
    return ClassBank(proj, dataset.label_names, accumulators, binarized)


def _distances(class_words: np.ndarray, packed_queries: np.ndarray) -> np.ndarray:
    """Hamming distances, shape (n_queries, n_classes)."""
    n, L = packed_queries.shape[0], class_words.shape[0]
    out = np.empty((n, L), dtype=np.int64)
    for l in range(L):
        out[:, l] = np.bitwise_count(packed_queries ^ class_words[l]).sum(axis=1)
    return out


def classify(bank: ClassBank, f) -> Prediction:
    """Rank every class by Hamming distance to the encoded query."""
    query = encode(bank.projection, f)
    dists = np.bitwise_count(query.words ^ bank._class_words).sum(axis=1)
    order = np.argsort(dists, kind="stable")  # stable sort = ties to lower label
    return Prediction([(int(l), int(dists[l])) for l in order])


def classify_batch(bank: ClassBank, feats: np.ndarray) -> np.ndarray:
    """Top-1 labels for each feature row."""
    packed = encode_batch(bank.projection, feats)
    dists = _distances(bank._class_words, packed)
    return dists.argmin(axis=1)  # argmin returns the first (lowest) index on ties


def rank_labels(bank: ClassBank, feats: np.ndarray) -> np.ndarray:
    """Full per-query label ranking matrix, shape (n, L)."""
    packed = encode_batch(bank.projection, feats)
    dists = _distances(bank._class_words, packed)
    return np.argsort(dists, axis=1, kind="stable")


def top_k_accuracy(bank: ClassBank, test: LabeledFeatureSet, k: int) -> float:
    """Fraction of test samples whose true label is within the k nearest classes."""
    if not 1 <= k <= bank.num_classes:
        raise ValidationError(f"k must be in [1, {bank.num_classes}], got {k}")
    if test.d != bank.projection.d:
        raise ValidationError("test feature dimension does not match bank")
    ranks = rank_labels(bank, test.features)
    return float((ranks[:, :k] == test.labels[:, None]).any(axis=1).mean())


@dataclass
class RetrainResult:
    bank: "ClassBank"
    val_accuracy: list[float]


def retrain_epochs(
    bank: ClassBank,
    dataset: LabeledFeatureSet,
    epochs: int,
    lr: int = 1,
    val: LabeledFeatureSet | None = None,
) -> RetrainResult:
    """Perceptron-style multi-epoch refinement of the class accumulators.

    Each epoch classifies every sample against the epoch-start binarized
    bank; a misclassified sample (true t, predicted p) adds lr * bipolar
    encoding to accumulator t and subtracts it from accumulator p. The bank
    is re-binarized once per epoch, and validation accuracy is recorded
    after each. The input bank is left untouched.
    """
    if epochs < 1:
        raise ValidationError("epochs must be >= 1")
    if lr < 1 or int(lr) != lr:
        raise ValidationError("lr must be a positive integer")
    if dataset.d != bank.projection.d:
        raise ValidationError("dataset feature dimension does not match bank")
    if dataset.num_classes != bank.num_classes:
        raise ValidationError("dataset classes do not match bank")
    val = val if val is not None else dataset

    packed = encode_batch(bank.projection, dataset.features)
    bipolar = _bipolar_rows(packed, bank.hyper_d).astype(np.int64)
    counts = np.stack([acc.counts for acc in bank.accumulators]).copy()
    class_words = bank._class_words.copy()

    trace = []
    for _ in range(epochs):
        # Inference uses the binarized bank frozen at epoch start, so the
        # whole epoch's predictions can be computed in one sweep.
        preds = _distances(class_words, packed).argmin(axis=1)
        wrong = np.flatnonzero(preds != dataset.labels)
        for i in wrong:
            counts[dataset.labels[i]] += lr * bipolar[i]
            counts[preds[i]] -= lr * bipolar[i]
        accumulators = [AccumulatorVector(bank.hyper_d, counts[l].copy()) for l in range(bank.num_classes)]
        binarized = [binarize(acc) for acc in accumulators]
        new_bank = ClassBank(bank.projection, bank.label_names, accumulators, binarized)
        class_words = new_bank._class_words
        trace.append(top_k_accuracy(new_bank, val, 1))

    return RetrainResult(new_bank, trace)
