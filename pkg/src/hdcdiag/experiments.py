"""Experiment harness: reference scenario assembly and the method zoo.

Everything is keyed off one master seed; each pipeline stage draws from
its own derived seed stream so that changing one stage's configuration
never silently reshuffles another.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from . import analysis, hdc, monitor
from .corruptions import CidDataset, apply, build_cid_dataset, CorruptionSpec, derive_seed, read_images
from .datagen import generate_corpus
from .dataset import LabeledFeatureSet
from .encoding import from_mlp_hidden, random_projection
from .errors import ValidationError
from .mlp import MlpModel, MlpShape, TrainConfig, hidden_weights, logits_batch, train_mlp
from .pipeline import TapReport, build_hdc_datasets, tap_layer_search

METHODS = ("vanilla", "debughd", "retrain", "mlp-ref")

DEFAULT_KINDS = [
    "gaussian_noise",
    "shot_noise",
    "impulse_noise",
    "speckle_noise",
    "gaussian_blur",
    "defocus_blur",
    "contrast",
    "brightness",
    "pixelate",
    "elastic",
]

# seed stream ids
_S_CORPUS, _S_SURROGATE, _S_CID, _S_SPLIT = 0, 1, 2, 3
_S_VANILLA, _S_TEACHER, _S_SWEEP, _S_SSIM, _S_MONITOR, _S_QUERIES = 4, 5, 6, 7, 8, 9


def stream_seed(master_seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([master_seed, stream]).generate_state(1, np.uint64)[0])


@dataclass
class RunConfig:
    """One experiment's knobs; JSON-file fields share these names."""

    master_seed: int = 0
    corpus: str = "patterns"  # builtin generator name, or path to an .imgs dump
    corpus_size: int = 500
    image_size: int = 16
    image_classes: int = 10
    channels: int = 1
    kinds: list[str] = field(default_factory=lambda: list(DEFAULT_KINDS))
    severity: int = 5
    include_id: bool = False
    surrogate_hidden: int = 256
    surrogate_epochs: int = 30
    surrogate_batch_size: int = 128
    surrogate_learning_rate: float = 0.001
    tap_layer: str = "hidden"  # "hidden", "logits", or "auto" (exhaustive search)
    split_fraction: float = 0.8
    standardize: bool = True
    hyper_d: int = 300
    method: str = "debughd"
    mlp_epochs: int = 200
    mlp_batch_size: int = 256
    mlp_learning_rate: float = 0.003
    retrain_epochs: int = 10
    retrain_lr: int = 1
    monitor_window: int = 100
    monitor_calibration: int = 1000
    monitor_id_steps: int = 300
    monitor_cid_steps: int = 300
    ssim_samples: int = 50
    out_dir: str = "out"

    def __post_init__(self):
        if self.hyper_d < 1:
            raise ValidationError("hyper_d must be >= 1")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 1 <= self.severity <= 5:
            raise ValidationError("severity must be 1..5")

    def mlp_train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            epochs=self.mlp_epochs,
            batch_size=self.mlp_batch_size,
            learning_rate=self.mlp_learning_rate,
            seed=seed,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def load_corpus(cfg: RunConfig):
    """Either the builtin pattern generator or a raw .imgs dump on disk."""
    if cfg.corpus == "patterns":
        return generate_corpus(
            cfg.corpus_size,
            stream_seed(cfg.master_seed, _S_CORPUS),
            size=cfg.image_size,
            num_classes=cfg.image_classes,
            channels=cfg.channels,
        )
    images, labels = read_images(cfg.corpus)
    return list(zip(images, [int(l) for l in labels]))


def corpus_feature_set(corpus) -> LabeledFeatureSet:
    flat = np.stack([img.flatten() for img, _ in corpus])
    classes = np.array([cls for _, cls in corpus])
    names = [f"class{i}" for i in range(int(classes.max()) + 1)]
    return LabeledFeatureSet(flat, classes, names, "train")


def train_surrogate(cfg: RunConfig, corpus) -> MlpModel:
    id_set = corpus_feature_set(corpus)
    shape = MlpShape(
        id_set.d, cfg.surrogate_hidden, id_set.num_classes,
        hidden_bias=True, hidden_activation="relu",
    )
    train_cfg = TrainConfig(
        epochs=cfg.surrogate_epochs,
        batch_size=cfg.surrogate_batch_size,
        learning_rate=cfg.surrogate_learning_rate,
        seed=stream_seed(cfg.master_seed, _S_SURROGATE),
    )
    return train_mlp(id_set, shape, train_cfg)


@dataclass
class Scenario:
    corpus: list
    cid: CidDataset
    surrogate: MlpModel
    train: LabeledFeatureSet
    test: LabeledFeatureSet
    tap: TapReport


def build_cid(cfg: RunConfig, corpus) -> CidDataset:
    return build_cid_dataset(
        corpus, cfg.kinds, cfg.severity,
        stream_seed(cfg.master_seed, _S_CID), include_id=cfg.include_id,
    )


def build_scenario(cfg: RunConfig) -> Scenario:
    corpus = load_corpus(cfg)
    surrogate = train_surrogate(cfg, corpus)
    cid = build_cid(cfg, corpus)
    split_seed = stream_seed(cfg.master_seed, _S_SPLIT)
    if cfg.tap_layer == "auto":
        tap = tap_layer_search(
            surrogate, ["hidden", "logits"], cid, cfg.hyper_d, split_seed, cfg.split_fraction
        )
        layer = tap.selected
    else:
        layer = cfg.tap_layer
        tap = TapReport([(layer, float("nan"))], layer)
    train, test = build_hdc_datasets(
        surrogate, cid, layer, cfg.split_fraction, split_seed, standardize=cfg.standardize
    )
    return Scenario(corpus, cid, surrogate, train, test, tap)


@dataclass
class MethodResult:
    method: str
    top1: float
    top2: float
    top3: float
    confusion: np.ndarray
    bank: hdc.ClassBank | None = None
    model: MlpModel | None = None
    retrain_trace: list[float] | None = None


def _confusion(true_labels: np.ndarray, pred_labels: np.ndarray, L: int) -> np.ndarray:
    out = np.zeros((L, L), dtype=np.int64)
    np.add.at(out, (true_labels, pred_labels), 1)
    return out


def _mlp_topk(model: MlpModel, test: LabeledFeatureSet, k: int) -> float:
    ranks = np.argsort(-logits_batch(model, test.features), axis=1, kind="stable")
    return float((ranks[:, :k] == test.labels[:, None]).any(axis=1).mean())


def run_method(cfg: RunConfig, scenario: Scenario, method: str) -> MethodResult:
    """Train one classifier variant on the scenario's feature sets."""
    train, test = scenario.train, scenario.test
    L = train.num_classes
    kmax = min(3, L)

    if method == "mlp-ref":
        shape = MlpShape(train.d, cfg.hyper_d, L, hidden_bias=True, hidden_activation="relu")
        model = train_mlp(
            train, shape, cfg.mlp_train_config(stream_seed(cfg.master_seed, _S_TEACHER)), val=test
        )
        ranks = np.argsort(-logits_batch(model, test.features), axis=1, kind="stable")
        topk = [float((ranks[:, :k] == test.labels[:, None]).any(axis=1).mean()) for k in range(1, kmax + 1)]
        topk += [topk[-1]] * (3 - kmax)
        conf = _confusion(test.labels, ranks[:, 0], L)
        return MethodResult(method, *topk, conf, model=model)

    if method == "vanilla":
        proj = random_projection(train.d, cfg.hyper_d, stream_seed(cfg.master_seed, _S_VANILLA))
        bank = hdc.train_single_pass(proj, train)
        trace = None
    elif method == "debughd":
        teacher_shape = MlpShape(train.d, cfg.hyper_d, L, hidden_bias=False, hidden_activation="none")
        teacher = train_mlp(
            train, teacher_shape, cfg.mlp_train_config(stream_seed(cfg.master_seed, _S_TEACHER))
        )
        bank = hdc.train_single_pass(from_mlp_hidden(hidden_weights(teacher)), train)
        trace = None
    elif method == "retrain":
        proj = random_projection(train.d, cfg.hyper_d, stream_seed(cfg.master_seed, _S_VANILLA))
        bank = hdc.train_single_pass(proj, train)
        result = hdc.retrain_epochs(bank, train, cfg.retrain_epochs, cfg.retrain_lr, val=test)
        bank, trace = result.bank, result.val_accuracy
    else:
        raise ValidationError(f"unknown method {method!r}")

    topk = [hdc.top_k_accuracy(bank, test, k) for k in range(1, kmax + 1)]
    topk += [topk[-1]] * (3 - kmax)
    conf = _confusion(test.labels, hdc.classify_batch(bank, test.features), L)
    return MethodResult(method, *topk, conf, bank=bank, retrain_trace=trace)


def sweep_hyper_d(cfg: RunConfig, dims: list[int], scenario: Scenario | None = None):
    """Vanilla HDC accuracy per hyper-dimension on one fixed scenario."""
    if not dims:
        raise ValidationError("dims must be non-empty")
    scenario = scenario or build_scenario(cfg)
    sweep_seed = stream_seed(cfg.master_seed, _S_SWEEP)
    rows = []
    for i, dim in enumerate(dims):
        proj = random_projection(scenario.train.d, dim, derive_seed(sweep_seed, i, 0))
        bank = hdc.train_single_pass(proj, scenario.train)
        rows.append((dim, hdc.top_k_accuracy(bank, scenario.test, 1)))
    return rows


def ssim_analysis(cfg: RunConfig, corpus=None) -> analysis.SsimMatrix:
    corpus = corpus or load_corpus(cfg)
    images = [img for img, _ in corpus]
    return analysis.ssim_matrix(
        images, ["id"] + list(cfg.kinds), cfg.severity,
        sample_count=cfg.ssim_samples, seed=stream_seed(cfg.master_seed, _S_SSIM),
    )


@dataclass
class MonitorTraceRow:
    step: int
    window_accuracy: float
    triggered: bool
    phase: str


def monitor_simulation(cfg: RunConfig) -> tuple[monitor.MonitorState, list[MonitorTraceRow]]:
    """Calibrate on fresh ID traffic, then stream ID followed by corrupted inputs.

    Correctness bits come from the surrogate's top-1 class predictions, as
    in the deployment story: the monitor sees only right/wrong.
    """
    corpus = load_corpus(cfg)
    surrogate = train_surrogate(cfg, corpus)
    mon_seed = stream_seed(cfg.master_seed, _S_MONITOR)
    rng = np.random.Generator(np.random.PCG64(mon_seed))

    def correctness(images, classes):
        flat = np.stack([img.flatten() for img in images])
        preds = logits_batch(surrogate, flat).argmax(axis=1)
        return (preds == np.asarray(classes)).astype(int)

    def fresh_id(count, tag):
        batch = generate_corpus(
            count, derive_seed(mon_seed, tag, 0),
            size=cfg.image_size, num_classes=cfg.image_classes, channels=cfg.channels,
        )
        order = rng.permutation(count)
        return [batch[i][0] for i in order], [batch[i][1] for i in order]

    calib_imgs, calib_cls = fresh_id(cfg.monitor_calibration, 1)
    state = monitor.calibrate(correctness(calib_imgs, calib_cls), cfg.monitor_window)

    id_imgs, id_cls = fresh_id(cfg.monitor_id_steps, 2)
    cid_imgs, cid_cls = fresh_id(cfg.monitor_cid_steps, 3)
    kind_picks = rng.integers(0, len(cfg.kinds), size=len(cid_imgs))
    cid_imgs = [
        apply(CorruptionSpec(cfg.kinds[k], cfg.severity, derive_seed(mon_seed, 4 + i, int(k))), img)
        for i, (img, k) in enumerate(zip(cid_imgs, kind_picks))
    ]

    bits = np.concatenate([correctness(id_imgs, id_cls), correctness(cid_imgs, cid_cls)])
    phases = ["id"] * len(id_imgs) + ["cid"] * len(cid_imgs)
    trace = []
    for i, (bit, phase) in enumerate(zip(bits, phases)):
        monitor.step(state, int(bit))
        acc = state.window_accuracy
        partial = state.window_sum / len(state.window)
        trace.append(MonitorTraceRow(i, acc if acc is not None else partial, state.triggered, phase))
    return state, trace
