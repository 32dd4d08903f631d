"""A small dependency-free 2-layer MLP with Adam and backprop.

The same network plays three roles: the encoder-teacher whose hidden
weights seed the learned projection matrix (hidden layer with no bias and
no activation, width = hyper_d), a conventional MLP reference classifier,
and the surrogate base network whose hidden layer gets tapped for
features (relu hidden layer).
"""

from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledFeatureSet
from .errors import TrainingDivergedError, ValidationError

ACTIVATIONS = ("none", "relu")


@dataclass
class MlpShape:
    """Architecture description for :func:`train_mlp`."""

    d_in: int
    d_hidden: int
    d_out: int
    hidden_bias: bool = False
    hidden_activation: str = "none"

    def __post_init__(self):
        if min(self.d_in, self.d_hidden, self.d_out) < 1:
            raise ValidationError("all layer sizes must be positive")
        if self.hidden_activation not in ACTIVATIONS:
            raise ValidationError(f"hidden_activation must be one of {ACTIVATIONS}")


def encoder_teacher_shape(d_in: int, hyper_d: int, num_classes: int) -> MlpShape:
    """Hidden layer sized to hyper_d, bias-free and linear, ready for weight export."""
    return MlpShape(d_in, hyper_d, num_classes, hidden_bias=False, hidden_activation="none")


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")


@dataclass(eq=False)
class MlpModel:
    """Weights of a 2-layer network: hidden (optional bias/relu) + softmax head."""

    W1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    b1: np.ndarray | None = None
    hidden_activation: str = "none"
    history: dict = field(default=None, repr=False)

    @property
    def d_in(self) -> int:
        return self.W1.shape[0]

    @property
    def d_hidden(self) -> int:
        return self.W1.shape[1]

    @property
    def d_out(self) -> int:
        return self.W2.shape[1]

    @property
    def hidden_bias_enabled(self) -> bool:
        return self.b1 is not None

    def params(self) -> dict[str, np.ndarray]:
        out = {"W1": self.W1, "W2": self.W2, "b2": self.b2}
        if self.b1 is not None:
            out["b1"] = self.b1
        return out


def init_mlp(shape: MlpShape, rng: np.random.Generator) -> MlpModel:
    """Fan-balanced uniform init for both weight matrices; biases start at zero."""

    def uniform(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return MlpModel(
        W1=uniform(shape.d_in, shape.d_hidden),
        W2=uniform(shape.d_hidden, shape.d_out),
        b2=np.zeros(shape.d_out),
        b1=np.zeros(shape.d_hidden) if shape.hidden_bias else None,
        hidden_activation=shape.hidden_activation,
    )


def _forward(m: MlpModel, X: np.ndarray):
    z1 = X @ m.W1
    if m.b1 is not None:
        z1 = z1 + m.b1
    a1 = np.maximum(z1, 0.0) if m.hidden_activation == "relu" else z1
    logits = a1 @ m.W2 + m.b2
    return z1, a1, logits


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grads(m: MlpModel, X: np.ndarray, y: np.ndarray):
    """Mean softmax cross-entropy over the batch, plus gradients per parameter."""
    n = X.shape[0]
    z1, a1, logits = _forward(m, X)
    probs = _softmax(logits)
    loss = -np.log(probs[np.arange(n), y] + 1e-300).mean()

    g_logits = probs.copy()
    g_logits[np.arange(n), y] -= 1.0
    g_logits /= n

    grads = {
        "W2": a1.T @ g_logits,
        "b2": g_logits.sum(axis=0),
    }
    g_a1 = g_logits @ m.W2.T
    g_z1 = g_a1 * (z1 > 0) if m.hidden_activation == "relu" else g_a1
    grads["W1"] = X.T @ g_z1
    if m.b1 is not None:
        grads["b1"] = g_z1.sum(axis=0)
    return loss, grads


def predict_batch(m: MlpModel, X: np.ndarray) -> np.ndarray:
    _, _, logits = _forward(m, np.asarray(X, dtype=np.float64))
    return logits.argmax(axis=1)


def predict(m: MlpModel, f) -> tuple[int, np.ndarray]:
    """Predicted label (argmax of softmax, first index wins ties) and probabilities."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (m.d_in,):
        raise ValidationError(f"expected feature vector of length {m.d_in}, got {f.shape}")
    _, _, logits = _forward(m, f[np.newaxis, :])
    probs = _softmax(logits)[0]
    return int(np.argmax(probs)), probs


def hidden_features(m: MlpModel, f) -> np.ndarray:
    """Post-activation hidden output for one input; the tap point for feature reuse."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (m.d_in,):
        raise ValidationError(f"expected feature vector of length {m.d_in}, got {f.shape}")
    _, a1, _ = _forward(m, f[np.newaxis, :])
    return a1[0]


def hidden_features_batch(m: MlpModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.d_in:
        raise ValidationError(f"expected (n, {m.d_in}) matrix, got {X.shape}")
    _, a1, _ = _forward(m, X)
    return a1


def logits_batch(m: MlpModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.d_in:
        raise ValidationError(f"expected (n, {m.d_in}) matrix, got {X.shape}")
    _, _, logits = _forward(m, X)
    return logits


def hidden_weights(m: MlpModel) -> np.ndarray:
    """The raw d_in x d_hidden hidden-layer weights (no bias or activation applied)."""
    return m.W1.copy()


def accuracy(m: MlpModel, fs: LabeledFeatureSet) -> float:
    return float((predict_batch(m, fs.features) == fs.labels).mean())


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], lr, beta1, beta2, eps):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / correct1
            v_hat = self.v[k] / correct2
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train_mlp(
    dataset: LabeledFeatureSet,
    arch: MlpShape,
    cfg: TrainConfig,
    val: LabeledFeatureSet | None = None,
) -> MlpModel:
    """Mini-batch Adam on softmax cross-entropy; bitwise deterministic per seed.

    Shuffle order and weight init both come from one generator seeded with
    cfg.seed. Raises TrainingDivergedError on a non-finite loss or parameter.
    """
    if dataset.d != arch.d_in:
        raise ValidationError(f"dataset d={dataset.d} does not match arch d_in={arch.d_in}")
    if dataset.labels.max() >= arch.d_out:
        raise ValidationError("dataset labels exceed arch d_out")

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    model = init_mlp(arch, rng)
    opt = _Adam(model.params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)

    X, y = dataset.features, dataset.labels
    n = X.shape[0]
    epoch_losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(model, X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"loss became non-finite: {loss}")
            opt.step(model.params(), grads)
            batch_losses.append(loss)
        for p in model.params().values():
            if not np.isfinite(p).all():
                raise TrainingDivergedError("parameters became non-finite")
        epoch_losses.append(float(np.mean(batch_losses)))

    model.history = {
        "epoch_losses": epoch_losses,
        "train_accuracy": accuracy(model, dataset),
        "val_accuracy": accuracy(model, val) if val is not None else None,
    }
    return model
