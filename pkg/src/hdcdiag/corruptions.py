"""Deterministic, severity-parameterized image corruptions.

Fifteen corruption kinds spanning the noise / blur / weather-like /
digital families, each with a 5-step severity ladder tuned for small
(16x16 to 32x32) images. Every kind is a pure function of (spec, image):
stochastic kinds draw from a generator seeded by spec.seed, so the same
spec applied twice gives bitwise-identical output. Outputs are always
clamped to [0, 1] with dimensions preserved.
"""

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ValidationError

ID_KIND = "id"

NOISE_SIGMA = [0.04, 0.08, 0.12, 0.18, 0.26]
SHOT_RATE = [60.0, 25.0, 12.0, 5.0, 3.0]
IMPULSE_PROB = [0.01, 0.03, 0.06, 0.1, 0.17]
BLUR_SIGMA = [0.4, 0.6, 0.9, 1.3, 1.8]
DEFOCUS_RADIUS = [1, 2, 3, 4, 5]
MOTION_LENGTH = [3, 5, 7, 9, 11]
ZOOM_MAX = [1.04, 1.08, 1.12, 1.16, 1.21]
CONTRAST_SCALE = [0.75, 0.6, 0.45, 0.3, 0.2]
BRIGHTNESS_DELTA = [0.05, 0.1, 0.15, 0.2, 0.3]
SATURATE_SCALE = [1.3, 1.6, 2.0, 2.5, 3.0]
PIXELATE_BLOCK = [2, 3, 4, 5, 6]
ELASTIC_PX = [0.5, 1.0, 1.5, 2.0, 2.5]
SPATTER_FRAC = [0.01, 0.02, 0.04, 0.06, 0.09]
FOG_WEIGHT = [0.1, 0.2, 0.3, 0.4, 0.5]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass
class Image:
    """Pixels in [0,1], shape (height, width, channels), channels 1 or 3."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.ndim != 3 or self.pixels.shape[2] not in (1, 3):
            raise ValidationError(f"expected (h, w, c) pixels with c in (1, 3), got {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValidationError("image must have positive height and width")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValidationError("pixels must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def flatten(self) -> np.ndarray:
        """Row-major, channel-interleaved float64 vector."""
        return self.pixels.astype(np.float64).reshape(-1)


@dataclass
class CorruptionSpec:
    kind: str
    severity: int
    seed: int

    def __post_init__(self):
        if self.kind != ID_KIND and self.kind not in KINDS:
            raise ValidationError(f"unsupported corruption kind {self.kind!r}")
        if not 1 <= self.severity <= 5:
            raise ValidationError(f"severity must be 1..5, got {self.severity}")


# --- per-kind implementations (float64 in, float64 out, pre-clamp) ---


def _gaussian_noise(p, s, rng):
    return p + rng.normal(0.0, NOISE_SIGMA[s], size=p.shape)


def _shot_noise(p, s, rng):
    lam = SHOT_RATE[s]
    return rng.poisson(p * lam) / lam


def _impulse_noise(p, s, rng):
    flip = rng.random(p.shape) < IMPULSE_PROB[s]
    salt = rng.random(p.shape) < 0.5
    out = p.copy()
    out[flip & salt] = 1.0
    out[flip & ~salt] = 0.0
    return out


def _speckle_noise(p, s, rng):
    return p * (1.0 + rng.normal(0.0, NOISE_SIGMA[s], size=p.shape))


def _per_channel(p, fn):
    return np.stack([fn(p[:, :, c]) for c in range(p.shape[2])], axis=2)


def _gaussian_blur(p, s, rng):
    sigma = BLUR_SIGMA[s]
    radius = int(np.ceil(3.0 * sigma))
    return _per_channel(
        p, lambda ch: ndimage.gaussian_filter(ch, sigma, mode="nearest", radius=radius)
    )


def _disk_kernel(radius: int) -> np.ndarray:
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    kernel = (yy * yy + xx * xx <= radius * radius).astype(np.float64)
    return kernel / kernel.sum()


def _defocus_blur(p, s, rng):
    kernel = _disk_kernel(DEFOCUS_RADIUS[s])
    return _per_channel(p, lambda ch: ndimage.convolve(ch, kernel, mode="nearest"))


def _motion_kernel(length: int, angle: float) -> np.ndarray:
    kernel = np.zeros((length, length))
    center = length // 2
    for t in np.arange(length) - (length - 1) / 2.0:
        x = int(round(center + t * np.cos(angle)))
        y = int(round(center + t * np.sin(angle)))
        kernel[y, x] += 1.0
    return kernel / kernel.sum()


def _motion_blur(p, s, rng):
    angle = rng.uniform(0.0, np.pi)
    kernel = _motion_kernel(MOTION_LENGTH[s], angle)
    return _per_channel(p, lambda ch: ndimage.convolve(ch, kernel, mode="nearest"))


def _zoom_once(p, factor):
    h, w = p.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys = np.clip(np.round(cy + (np.arange(h) - cy) / factor), 0, h - 1).astype(int)
    xs = np.clip(np.round(cx + (np.arange(w) - cx) / factor), 0, w - 1).astype(int)
    return p[np.ix_(ys, xs)]


def _zoom_blur(p, s, rng):
    factors = np.linspace(1.0, ZOOM_MAX[s], 4)
    return np.mean([_zoom_once(p, z) for z in factors], axis=0)


def _contrast(p, s, rng):
    return (p - 0.5) * CONTRAST_SCALE[s] + 0.5


def _brightness(p, s, rng):
    return p + BRIGHTNESS_DELTA[s]


def _saturate(p, s, rng):
    if p.shape[2] != 3:
        raise ValidationError("saturate requires a 3-channel image")
    luma = p @ LUMA_WEIGHTS
    return luma[:, :, None] + (p - luma[:, :, None]) * SATURATE_SCALE[s]


def _pixelate_block(p, block: int):
    h, w = p.shape[:2]
    block = max(1, min(block, h, w))
    out = np.empty_like(p)
    for y0 in range(0, h, block):
        for x0 in range(0, w, block):
            tile = p[y0 : y0 + block, x0 : x0 + block]
            out[y0 : y0 + block, x0 : x0 + block] = tile.mean(axis=(0, 1))
    return out


def _pixelate(p, s, rng):
    return _pixelate_block(p, PIXELATE_BLOCK[s])


def _bilinear_sample(ch, ys, xs):
    h, w = ch.shape
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    fy = np.clip(ys, 0, h - 1) - y0
    fx = np.clip(xs, 0, w - 1) - x0
    top = ch[y0, x0] * (1 - fx) + ch[y0, x1] * fx
    bot = ch[y1, x0] * (1 - fx) + ch[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def _elastic(p, s, rng):
    h, w = p.shape[:2]
    fields = []
    for _ in range(2):
        noise = rng.uniform(-1.0, 1.0, size=(h, w))
        smooth = ndimage.gaussian_filter(noise, 3.0, mode="reflect")
        peak = np.abs(smooth).max()
        fields.append(smooth / peak if peak > 0 else smooth)
    dy, dx = (f * ELASTIC_PX[s] for f in fields)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    return _per_channel(p, lambda ch: _bilinear_sample(ch, yy + dy, xx + dx))


def _spatter(p, s, rng):
    h, w = p.shape[:2]
    target = int(np.ceil(SPATTER_FRAC[s] * h * w))
    mask = np.zeros((h, w), dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    while mask.sum() < target:
        cy, cx = rng.integers(0, h), rng.integers(0, w)
        radius = rng.integers(1, 3)
        mask |= (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    out = p.copy()
    out[mask] = 1.0
    return out


def _fog_like(p, s, rng):
    h, w = p.shape[:2]
    coarse = rng.uniform(0.0, 1.0, size=(4, 4))
    ys = np.linspace(0, 3, h)
    xs = np.linspace(0, 3, w)
    plasma = _bilinear_sample(coarse, *np.meshgrid(ys, xs, indexing="ij"))
    lo, hi = plasma.min(), plasma.max()
    if hi > lo:
        plasma = (plasma - lo) / (hi - lo)
    weight = FOG_WEIGHT[s]
    return (1.0 - weight) * p + weight * plasma[:, :, None]


_KIND_FNS = {
    "gaussian_noise": _gaussian_noise,
    "shot_noise": _shot_noise,
    "impulse_noise": _impulse_noise,
    "speckle_noise": _speckle_noise,
    "gaussian_blur": _gaussian_blur,
    "defocus_blur": _defocus_blur,
    "motion_blur": _motion_blur,
    "zoom_blur": _zoom_blur,
    "contrast": _contrast,
    "brightness": _brightness,
    "saturate": _saturate,
    "pixelate": _pixelate,
    "elastic": _elastic,
    "spatter": _spatter,
    "fog_like": _fog_like,
}

KINDS = list(_KIND_FNS)


def apply(spec: CorruptionSpec, img: Image) -> Image:
    """Apply one corruption; deterministic given (spec, img), output clamped."""
    if spec.kind == ID_KIND:
        return Image(img.pixels.copy())
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    out = _KIND_FNS[spec.kind](img.pixels.astype(np.float64), spec.severity - 1, rng)
    return Image(np.clip(out, 0.0, 1.0).astype(np.float32))


def derive_seed(master_seed: int, image_index: int, kind_index: int) -> int:
    """Stable per-(image, kind) seed so parallel application stays reproducible."""
    ss = np.random.SeedSequence([master_seed, image_index, kind_index])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class CidDataset:
    """Corrupted images labeled by corruption kind (base class labels kept too)."""

    images: list[Image]
    labels: np.ndarray
    kind_names: list[str]
    base_labels: np.ndarray

    @property
    def n(self) -> int:
        return len(self.images)


def build_cid_dataset(
    base: list[tuple[Image, int]],
    kinds: list[str],
    severity: int,
    seed: int,
    include_id: bool = False,
) -> CidDataset:
    """Corrupt every base image once per kind; labels are corruption indices.

    With include_id the untouched originals join as class 0 ("id").
    """
    if not base:
        raise ValidationError("base image list must be non-empty")
    if len(set(kinds)) != len(kinds):
        raise ValidationError("corruption kinds must be distinct")
    for kind in kinds:
        if kind not in KINDS:
            raise ValidationError(f"unsupported corruption kind {kind!r}")

    kind_names = ([ID_KIND] if include_id else []) + list(kinds)
    images, labels, base_labels = [], [], []
    if include_id:
        for img, cls in base:
            images.append(Image(img.pixels.copy()))
            labels.append(0)
            base_labels.append(cls)
    offset = 1 if include_id else 0
    for k, kind in enumerate(kinds):
        for i, (img, cls) in enumerate(base):
            spec = CorruptionSpec(kind, severity, derive_seed(seed, i, k))
            images.append(apply(spec, img))
            labels.append(offset + k)
            base_labels.append(cls)
    return CidDataset(images, np.array(labels), kind_names, np.array(base_labels))


# --- raw image dump: u32 count, then per record u32 w/h/c/label + float32 pixels ---


def write_images(path, images: list[Image], labels) -> None:
    labels = np.asarray(labels, dtype=np.uint32)
    if labels.shape != (len(images),):
        raise ValidationError("need one label per image")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(images)))
        for img, label in zip(images, labels):
            fh.write(struct.pack("<IIII", img.width, img.height, img.channels, int(label)))
            fh.write(img.pixels.astype("<f4").tobytes())


def read_images(path) -> tuple[list[Image], np.ndarray]:
    with open(path, "rb") as fh:
        data = fh.read()
    (count,) = struct.unpack_from("<I", data, 0)
    offset = 4
    images, labels = [], []
    for _ in range(count):
        w, h, c, label = struct.unpack_from("<IIII", data, offset)
        offset += 16
        n = w * h * c
        pixels = np.frombuffer(data, dtype="<f4", count=n, offset=offset).reshape(h, w, c)
        offset += n * 4
        images.append(Image(pixels.copy()))
        labels.append(label)
    return images, np.array(labels)
