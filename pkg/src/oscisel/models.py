"""Small differentiable models over a flat parameter vector.

Three architectures: multinomial logistic regression, one-hidden-layer ReLU
MLP (both cross-entropy), and quadratic least-squares. Gradients are
closed-form backprop, double precision throughout. Hessian-vector products
use symmetric finite differences of the mean gradient, which is exact (up to
rounding) for the quadratic model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterDomainError, StructuralError
from .rng import PortableRNG

_HVP_DELTA = 1e-5


@dataclass(frozen=True)
class Arch:
    kind: str  # "logistic" | "mlp" | "quadratic"
    d_in: int
    hidden: int = 0
    classes: int = 0

    def __post_init__(self):
        if self.kind not in ("logistic", "mlp", "quadratic"):
            raise ParameterDomainError(f"unknown model kind {self.kind!r}")
        if self.d_in < 1:
            raise ParameterDomainError("d_in must be >= 1")
        if self.kind in ("logistic", "mlp") and self.classes < 2:
            raise ParameterDomainError("classifiers need classes >= 2")
        if self.kind == "mlp" and self.hidden < 1:
            raise ParameterDomainError("mlp needs hidden >= 1")

    @property
    def param_count(self) -> int:
        if self.kind == "logistic":
            return (self.d_in + 1) * self.classes
        if self.kind == "mlp":
            return (self.d_in + 1) * self.hidden + (self.hidden + 1) * self.classes
        return self.d_in


@dataclass(frozen=True)
class ModelState:
    arch: Arch
    theta: np.ndarray  # float64, shape (d,)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.shape != (self.arch.param_count,):
            raise StructuralError(
                f"theta has length {theta.shape}, arch implies "
                f"({self.arch.param_count},)"
            )
        if not np.all(np.isfinite(theta)):
            raise NumericError("theta contains non-finite entries")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class Batch:
    inputs: np.ndarray  # (m, d_in)
    labels: np.ndarray  # int classes or float targets, (m,)
    indices: np.ndarray  # originating dataset indices, (m,)

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


def init_state(arch: Arch, rng: PortableRNG) -> ModelState:
    """Zero init for logistic/quadratic; uniform +-1/sqrt(fan_in) per MLP layer."""
    if arch.kind != "mlp":
        return ModelState(arch, np.zeros(arch.param_count))
    d, h, c = arch.d_in, arch.hidden, arch.classes
    s1 = 1.0 / np.sqrt(d)
    s2 = 1.0 / np.sqrt(h)
    w1 = rng.uniforms(d * h, -s1, s1)
    b1 = rng.uniforms(h, -s1, s1)
    w2 = rng.uniforms(h * c, -s2, s2)
    b2 = rng.uniforms(c, -s2, s2)
    return ModelState(arch, np.concatenate([w1, b1, w2, b2]))


def _check_batch(state: ModelState, batch: Batch) -> None:
    if batch.size == 0:
        raise StructuralError("batch is empty")
    if batch.inputs.ndim != 2 or batch.inputs.shape[1] != state.arch.d_in:
        raise StructuralError(
            f"inputs shape {batch.inputs.shape} incompatible with d_in="
            f"{state.arch.d_in}"
        )
    if batch.labels.shape[0] != batch.size:
        raise StructuralError("labels/inputs row count mismatch")
    if not np.all(np.isfinite(batch.inputs)):
        raise NumericError("batch inputs contain non-finite values")
    if state.arch.kind != "quadratic":
        labels = batch.labels
        if labels.min() < 0 or labels.max() >= state.arch.classes:
            raise StructuralError("class labels out of range")


def _split_logistic(state: ModelState):
    d, c = state.arch.d_in, state.arch.classes
    w = state.theta[: d * c].reshape(d, c)
    b = state.theta[d * c :]
    return w, b


def _split_mlp(state: ModelState):
    d, h, c = state.arch.d_in, state.arch.hidden, state.arch.classes
    t = state.theta
    o = 0
    w1 = t[o : o + d * h].reshape(d, h); o += d * h
    b1 = t[o : o + h]; o += h
    w2 = t[o : o + h * c].reshape(h, c); o += h * c
    b2 = t[o : o + c]
    return w1, b1, w2, b2


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _class_scores(state: ModelState, x: np.ndarray):
    """Logits plus whatever intermediates backprop needs."""
    if state.arch.kind == "logistic":
        w, b = _split_logistic(state)
        return x @ w + b, None
    w1, b1, w2, b2 = _split_mlp(state)
    z1 = x @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    return a1 @ w2 + b2, (z1, a1)


def loss_per_sample(state: ModelState, batch: Batch) -> np.ndarray:
    _check_batch(state, batch)
    if state.arch.kind == "quadratic":
        resid = batch.inputs @ state.theta - batch.labels
        return 0.5 * resid**2
    scores, _ = _class_scores(state, batch.inputs)
    logp = _log_softmax(scores)
    return -logp[np.arange(batch.size), batch.labels]


def mean_loss(state: ModelState, batch: Batch) -> float:
    return float(loss_per_sample(state, batch).mean())


def _dlogits(state: ModelState, batch: Batch):
    """softmax(scores) - onehot, plus forward intermediates."""
    scores, inter = _class_scores(state, batch.inputs)
    logp = _log_softmax(scores)
    g = np.exp(logp)
    g[np.arange(batch.size), batch.labels] -= 1.0
    return g, inter


def mean_gradient(state: ModelState, batch: Batch) -> np.ndarray:
    _check_batch(state, batch)
    x = batch.inputs
    m = batch.size
    if state.arch.kind == "quadratic":
        resid = x @ state.theta - batch.labels
        return (resid @ x) / m
    g, inter = _dlogits(state, batch)
    if state.arch.kind == "logistic":
        return np.concatenate([(x.T @ g / m).ravel(), g.mean(axis=0)])
    _, _, w2, _ = _split_mlp(state)
    z1, a1 = inter
    dz1 = (g @ w2.T) * (z1 > 0)
    return np.concatenate(
        [
            (x.T @ dz1 / m).ravel(),
            dz1.mean(axis=0),
            (a1.T @ g / m).ravel(),
            g.mean(axis=0),
        ]
    )


def per_sample_gradients(state: ModelState, batch: Batch) -> np.ndarray:
    """One gradient row per sample; intended for small d and m."""
    _check_batch(state, batch)
    x = batch.inputs
    m = batch.size
    if state.arch.kind == "quadratic":
        resid = x @ state.theta - batch.labels
        return resid[:, None] * x
    g, inter = _dlogits(state, batch)
    if state.arch.kind == "logistic":
        gw = np.einsum("md,mc->mdc", x, g).reshape(m, -1)
        return np.concatenate([gw, g], axis=1)
    _, _, w2, _ = _split_mlp(state)
    z1, a1 = inter
    dz1 = (g @ w2.T) * (z1 > 0)
    gw1 = np.einsum("md,mh->mdh", x, dz1).reshape(m, -1)
    gw2 = np.einsum("mh,mc->mhc", a1, g).reshape(m, -1)
    return np.concatenate([gw1, dz1, gw2, g], axis=1)


def hessian_vector_product(
    state: ModelState, batch: Batch, v: np.ndarray
) -> np.ndarray:
    """H v of the batch-mean loss, via (g(t+rv) - g(t-rv)) / 2r."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != state.theta.shape:
        raise StructuralError(
            f"v has shape {v.shape}, expected {state.theta.shape}"
        )
    r = _HVP_DELTA / max(float(np.linalg.norm(v)), 1.0)
    g_plus = mean_gradient(ModelState(state.arch, state.theta + r * v), batch)
    g_minus = mean_gradient(ModelState(state.arch, state.theta - r * v), batch)
    return (g_plus - g_minus) / (2.0 * r)


def sgd_step(state: ModelState, g: np.ndarray, eta: float) -> ModelState:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != state.theta.shape:
        raise StructuralError(f"gradient shape {g.shape} != {state.theta.shape}")
    if eta <= 0.0:
        raise ParameterDomainError(f"learning rate must be > 0, got {eta}")
    return ModelState(state.arch, state.theta - eta * g)
