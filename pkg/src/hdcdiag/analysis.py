"""Structural similarity between corruption types, and pruning suggestions.

The similarity matrix pairs identical base images corrupted by two
different kinds and averages single-scale SSIM over a seeded sample of
images. Highly similar pairs (off-diagonal above a threshold) mark
corruption kinds a developer can drop from the classification task to
trade coverage for precision.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .corruptions import ID_KIND, KINDS, CorruptionSpec, Image, apply, derive_seed
from .errors import ValidationError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

LUMA = np.array([0.299, 0.587, 0.114])


def _to_gray(img: Image) -> np.ndarray:
    p = img.pixels.astype(np.float64)
    if img.channels == 3:
        return p @ LUMA
    return p[:, :, 0]


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a: Image, b: Image) -> float:
    """Mean local SSIM on [0,1] grayscale, Gaussian-weighted 11x11 windows.

    Uses valid-mode windows only (no padded borders), so constant images
    follow the closed-form degenerate case exactly. Shrinks the window to
    the largest odd size that fits when an image is smaller than 11 pixels.
    """
    if a.pixels.shape != b.pixels.shape:
        raise ValidationError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    x, y = _to_gray(a), _to_gray(b)

    size = min(SSIM_WINDOW, x.shape[0], x.shape[1])
    if size % 2 == 0:
        size -= 1
    window = _gaussian_window(size, SSIM_SIGMA)

    mu_x = convolve2d(x, window, mode="valid")
    mu_y = convolve2d(y, window, mode="valid")
    var_x = convolve2d(x * x, window, mode="valid") - mu_x * mu_x
    var_y = convolve2d(y * y, window, mode="valid") - mu_y * mu_y
    cov = convolve2d(x * y, window, mode="valid") - mu_x * mu_y

    ssim_map = ((2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2)) / (
        (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (var_x + var_y + SSIM_C2)
    )
    return float(np.clip(ssim_map.mean(), -1.0, 1.0))


@dataclass
class SsimMatrix:
    """Symmetric corruption-similarity matrix; label 0 is always "id"."""

    labels: list[str]
    values: np.ndarray
    sample_count: int = 50

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        k = len(self.labels)
        if self.values.shape != (k, k):
            raise ValidationError("values must be square and match labels")
        if not np.allclose(np.diag(self.values), 1.0, atol=1e-6):
            raise ValidationError("diagonal must be 1 within 1e-6")
        if self.values.min() < -1.0 or self.values.max() > 1.0:
            raise ValidationError("values must lie in [-1, 1]")

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


def ssim_matrix(
    base_images: list[Image],
    kinds: list[str],
    severity: int,
    sample_count: int = 50,
    seed: int = 0,
) -> SsimMatrix:
    """Mean pairwise SSIM between corruption kinds over a seeded image sample.

    Entry (i, j) averages ssim(corrupt_i(img), corrupt_j(img)) over the same
    sampled images; the per-(image, kind) corruption seed is shared across
    pairs, so the diagonal is exactly 1 even for stochastic kinds. "id"
    (identity) always sits first in the labels.
    """
    if len(base_images) < sample_count:
        raise ValidationError(
            f"need at least sample_count={sample_count} base images, got {len(base_images)}"
        )
    for kind in kinds:
        if kind != ID_KIND and kind not in KINDS:
            raise ValidationError(f"unsupported corruption kind {kind!r}")
    labels = [ID_KIND] + [k for k in kinds if k != ID_KIND]

    rng = np.random.Generator(np.random.PCG64(seed))
    picks = rng.choice(len(base_images), size=sample_count, replace=False)

    corrupted = []  # corrupted[k][s] = kind k applied to sampled image s
    for k, kind in enumerate(labels):
        specs = [CorruptionSpec(kind, severity, derive_seed(seed, int(i), k)) for i in picks]
        corrupted.append([apply(spec, base_images[int(i)]) for spec, i in zip(specs, picks)])

    n = len(labels)
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            mean = np.mean([ssim(corrupted[i][s], corrupted[j][s]) for s in range(sample_count)])
            values[i, j] = values[j, i] = mean
    return SsimMatrix(labels, values, sample_count)


def suggest_pruned_set(m: SsimMatrix, threshold: float = 0.75) -> list[str]:
    """Greedily drop one member of each over-threshold pair; "id" is never dropped.

    Pairs are visited by descending similarity; the dropped member is the
    one with the higher mean similarity to the kinds still kept (the more
    redundant one).
    """
    n = len(m.labels)
    pairs = [
        (float(m.values[i, j]), i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if m.values[i, j] > threshold
    ]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    kept = set(range(n))
    for _, i, j in pairs:
        if i not in kept or j not in kept:
            continue
        if i == 0:  # "id" stays
            victim = j
        elif j == 0:
            victim = i
        else:
            others_i = [k for k in kept if k != i]
            others_j = [k for k in kept if k != j]
            mean_i = float(np.mean(m.values[i, others_i]))
            mean_j = float(np.mean(m.values[j, others_j]))
            victim = i if mean_i > mean_j else j
        kept.discard(victim)
    return [m.labels[k] for k in sorted(kept)]


def _band(v: float) -> str:
    if v > 0.75:
        return "green"
    if v > 0.5:
        return "yellow"
    return "none"


def matrix_to_csv(m: SsimMatrix, bands: bool = False) -> str:
    """Render as CSV: header row/column of names, two-decimal cells.

    With bands=True each cell carries its color class per the 0.5/0.75
    banding instead of the numeric value.
    """
    lines = ["ssim," + ",".join(m.labels)]
    for i, name in enumerate(m.labels):
        if bands:
            cells = [_band(float(v)) for v in m.values[i]]
        else:
            cells = [f"{v:.2f}" for v in m.values[i]]
        lines.append(name + "," + ",".join(cells))
    return "\n".join(lines) + "\n"
