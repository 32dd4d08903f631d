"""Built-in synthetic image corpus: ten separable pattern classes.

Each class is a parametric texture (stripes, rings, blobs, gradients...)
with per-sample jitter in phase, frequency, amplitude and position plus a
little pixel noise, so a small MLP can learn the class task to high
accuracy while corruption identification on top stays non-trivial.
"""

import numpy as np

from .corruptions import Image
from .errors import ValidationError

NUM_PATTERN_CLASSES = 10


def _grids(size: int):
    axis = np.arange(size) / (size - 1)
    return np.meshgrid(axis, axis, indexing="ij")  # yy, xx in [0,1]


def _pattern(cls: int, size: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = _grids(size)
    phase = rng.uniform(0.0, 1.0)
    freq = rng.uniform(2.4, 3.2)

    if cls == 0:
        return np.sin(2 * np.pi * (freq * yy + phase))
    if cls == 1:
        return np.sin(2 * np.pi * (freq * xx + phase))
    if cls == 2:
        return np.sin(2 * np.pi * (freq * (xx + yy) / np.sqrt(2.0) + phase))
    if cls == 3:
        p2 = rng.uniform(0.0, 1.0)
        return np.sin(2 * np.pi * (freq * xx + phase)) * np.sin(2 * np.pi * (freq * yy + p2))
    if cls == 4:
        cy, cx = rng.uniform(0.4, 0.6, size=2)
        r = np.hypot(yy - cy, xx - cx)
        return np.sin(2 * np.pi * (freq * r + phase))
    if cls == 5:
        cy, cx = rng.uniform(0.3, 0.7, size=2)
        spread = rng.uniform(0.12, 0.2)
        return 2.0 * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * spread**2)) - 1.0
    if cls == 6:
        return 2.0 * (xx + rng.uniform(-0.1, 0.1) * yy) - 1.0
    if cls == 7:
        return 2.0 * (yy + rng.uniform(-0.1, 0.1) * xx) - 1.0
    if cls == 8:
        cy, cx = rng.uniform(0.35, 0.65, size=2)
        width = rng.uniform(0.08, 0.14)
        bar = np.maximum(
            (np.abs(yy - cy) < width).astype(np.float64),
            (np.abs(xx - cx) < width).astype(np.float64),
        )
        return 2.0 * bar - 1.0
    if cls == 9:
        f1, f2 = rng.uniform(0.8, 1.4, size=2)
        p2 = rng.uniform(0.0, 1.0)
        return np.sin(2 * np.pi * (f1 * xx + phase)) * np.cos(2 * np.pi * (f2 * yy + p2))
    raise ValidationError(f"pattern class must be 0..{NUM_PATTERN_CLASSES - 1}, got {cls}")


def generate_corpus(
    count: int,
    seed: int,
    size: int = 16,
    num_classes: int = NUM_PATTERN_CLASSES,
    channels: int = 1,
) -> list[tuple[Image, int]]:
    """Seeded, class-balanced (round-robin) pattern images with labels."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not 1 <= num_classes <= NUM_PATTERN_CLASSES:
        raise ValidationError(f"num_classes must be 1..{NUM_PATTERN_CLASSES}")
    if size < 4:
        raise ValidationError("size must be >= 4")
    if channels not in (1, 3):
        raise ValidationError("channels must be 1 or 3")

    corpus = []
    for i in range(count):
        cls = i % num_classes
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))
        base = _pattern(cls, size, rng)
        amplitude = rng.uniform(0.75, 1.0)
        pixels = 0.5 + 0.45 * amplitude * base
        pixels = pixels + rng.normal(0.0, 0.02, size=pixels.shape)
        pixels = np.clip(pixels, 0.0, 1.0)[:, :, None]
        if channels == 3:
            tint = rng.uniform(0.85, 1.0, size=3)
            pixels = np.clip(pixels * tint[None, None, :], 0.0, 1.0)
        corpus.append((Image(pixels.astype(np.float32)), cls))
    return corpus
