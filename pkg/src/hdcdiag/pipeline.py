"""Dataset construction for the corruption classifier.

Flattens corrupted images through the trained surrogate base network,
records an intermediate layer's output as the feature vector, and splits
the result into stratified train/test feature sets. The tap layer is
picked by exhaustive search: train a vanilla HDC classifier on each
candidate's features and keep the layer with the best validation
accuracy.
"""

from dataclasses import dataclass

import numpy as np

from . import hdc
from .corruptions import CidDataset
from .dataset import LabeledFeatureSet, read_feature_set, write_feature_set  # noqa: F401
from .encoding import random_projection
from .errors import ValidationError
from .mlp import MlpModel, hidden_features_batch, logits_batch

TAP_LAYERS = ("hidden", "logits")


@dataclass
class TapReport:
    """Validation accuracy per candidate tap layer, plus the winner."""

    entries: list[tuple[str, float]]
    selected: str


def _derive(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def surrogate_features(model: MlpModel, flat_images: np.ndarray, layer: str) -> np.ndarray:
    """Activations of the requested surrogate layer for flattened images."""
    if layer == "hidden":
        return hidden_features_batch(model, flat_images)
    if layer == "logits":
        return logits_batch(model, flat_images)
    raise ValidationError(f"unknown tap layer {layer!r}; expected one of {TAP_LAYERS}")


def stratified_split(labels: np.ndarray, split_fraction: float, rng: np.random.Generator):
    """Per-class shuffled split; train share rounds to the nearest sample."""
    train_idx, test_idx = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        n_train = int(round(split_fraction * idx.size))
        if idx.size >= 2:
            n_train = min(max(n_train, 1), idx.size - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx))


def build_hdc_datasets(
    base_model: MlpModel,
    cid: CidDataset,
    tap_layer: str,
    split_fraction: float,
    seed: int,
    standardize: bool = False,
) -> tuple[LabeledFeatureSet, LabeledFeatureSet]:
    """Tap the surrogate on every corrupted image and split by corruption label."""
    if base_model.history is None:
        raise ValidationError("surrogate base model must be trained before tapping")
    if not 0.0 < split_fraction < 1.0:
        raise ValidationError(f"split_fraction must be in (0, 1), got {split_fraction}")
    if cid.n < 1:
        raise ValidationError("corrupted image set is empty")

    flat = np.stack([img.flatten() for img in cid.images])
    feats = surrogate_features(base_model, flat, tap_layer)

    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx, test_idx = stratified_split(cid.labels, split_fraction, rng)

    f_train, f_test = feats[train_idx], feats[test_idx]
    if standardize:
        mean = f_train.mean(axis=0)
        std = f_train.std(axis=0)
        std[std == 0.0] = 1.0
        f_train = (f_train - mean) / std
        f_test = (f_test - mean) / std

    names = list(cid.kind_names)
    train = LabeledFeatureSet(f_train, cid.labels[train_idx], names, "train")
    test = LabeledFeatureSet(f_test, cid.labels[test_idx], names, "test")
    return train, test


def tap_layer_search(
    base_model: MlpModel,
    candidate_layers: list[str],
    cid: CidDataset,
    hyper_d: int,
    seed: int,
    split_fraction: float = 0.8,
) -> TapReport:
    """Train a vanilla HDC classifier per candidate layer; keep the best.

    Candidates should be listed shallow to deep; ties go to the first
    (shallowest) best entry.
    """
    if not candidate_layers:
        raise ValidationError("need at least one candidate tap layer")
    entries = []
    for k, layer in enumerate(candidate_layers):
        train, test = build_hdc_datasets(base_model, cid, layer, split_fraction, seed)
        proj = random_projection(train.d, hyper_d, _derive(seed, k))
        bank = hdc.train_single_pass(proj, train)
        entries.append((layer, hdc.top_k_accuracy(bank, test, 1)))
    best = max(range(len(entries)), key=lambda i: entries[i][1])
    return TapReport(entries, entries[best][0])
