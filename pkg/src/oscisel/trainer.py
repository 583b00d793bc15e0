"""Epoch-level training loop with budgeted data selection.

Each epoch: get the scheduled ratio, pick a subset (random cold start at
epoch 0 for hard mining), shuffle it, run mini-batch SGD, and record the
pre-update forward losses into the loss memory so scoring costs no extra
passes. Everything is driven by labeled sub-streams of the single run seed,
so a fixed config is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .data import (
    Dataset,
    gen_blobs,
    gen_gauss_linear,
    gen_two_moons,
    inject_label_noise,
    load_idx,
    load_osds,
)
from .errors import ConfigError, EmptyDatasetError, ParameterDomainError
from .ledger import BudgetLedger
from .models import Arch, Batch, ModelState, init_state, loss_per_sample, mean_gradient
from .regprobe import estimate_r, full_batch
from .schedule import RatioTrajectory, constant_params, derive_params
from .selection import POLICIES, LossMemory, update_losses
from .rng import PortableRNG, subseed

import numpy as np


@dataclass(frozen=True)
class RunConfig:
    dataset: dict
    model: dict
    epochs: int
    batch_size: int
    learning_rate: float
    target_ratio: float
    margin: float = 0.05
    momentum: float = 0.0
    policy: str = "hard_mining"
    schedule_mode: str = "oscillatory"  # "oscillatory" | "fixed"
    lr_schedule: str = "constant"  # "constant" | "cosine"
    seed: int = 0
    eval_every: int = 1
    probe_every: int = 0  # 0 disables R probing / snapshots

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterDomainError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ParameterDomainError("batch_size must be >= 1")
        if self.learning_rate <= 0.0:
            raise ParameterDomainError("learning_rate must be > 0")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.schedule_mode not in ("oscillatory", "fixed"):
            raise ConfigError(f"unknown schedule_mode {self.schedule_mode!r}")
        if self.lr_schedule not in ("constant", "cosine"):
            raise ConfigError(f"unknown lr_schedule {self.lr_schedule!r}")


@dataclass
class EpochMetrics:
    epoch: int
    p_t: float
    n_selected: int
    cumulative_ratio: float
    train_loss: float
    test_loss: float | None
    test_accuracy: float | None
    R_estimate: float | None = None

    def to_record(self) -> dict:
        return {
            "epoch": self.epoch,
            "p_t": self.p_t,
            "n_selected": self.n_selected,
            "cumulative_ratio": self.cumulative_ratio,
            "train_loss": self.train_loss,
            "test_loss": self.test_loss,
            "test_accuracy": self.test_accuracy,
            "R_estimate": self.R_estimate,
        }


@dataclass
class TrainResult:
    metrics: list
    final_state: ModelState
    ledger: BudgetLedger
    loss_memory: LossMemory
    snapshots: list = field(default_factory=list)  # (epoch, theta at epoch start)


def build_datasets(cfg: RunConfig) -> tuple[Dataset, Dataset]:
    spec = dict(cfg.dataset)
    kind = spec.pop("kind", None)
    seed_train = subseed(cfg.seed, "data.train")
    seed_test = subseed(cfg.seed, "data.test")
    label_noise = spec.pop("label_noise", 0.0)
    if kind == "two_moons":
        train = gen_two_moons(spec["n_train"], spec["noise"], seed_train, "train")
        test = gen_two_moons(spec["n_test"], spec["noise"], seed_test, "test")
    elif kind == "blobs":
        train = gen_blobs(
            spec["classes"], spec["per_class"], spec.get("d_in", 2),
            spec["spread"], seed_train, "train",
        )
        test = gen_blobs(
            spec["classes"], spec.get("test_per_class", spec["per_class"]),
            spec.get("d_in", 2), spec["spread"], seed_test, "test",
        )
    elif kind == "gauss_linear":
        train = gen_gauss_linear(
            spec["n_train"], spec["d_in"], spec.get("noise", 0.0), seed_train, "train"
        )
        test = gen_gauss_linear(
            spec.get("n_test", spec["n_train"]), spec["d_in"],
            spec.get("noise", 0.0), seed_test, "test",
        )
    elif kind == "idx":
        train = load_idx(spec["images"], spec["labels"], spec.get("limit"))
        test = load_idx(spec["test_images"], spec["test_labels"], spec.get("test_limit"))
    elif kind == "osds":
        train = load_osds(spec["train"], "train")
        test = load_osds(spec["test"], "test")
    else:
        raise ConfigError(f"unknown dataset kind {kind!r}")
    if label_noise:
        train = inject_label_noise(train, label_noise, subseed(cfg.seed, "data.noise"))
    return train, test


def build_model(cfg: RunConfig, train: Dataset) -> ModelState:
    spec = dict(cfg.model)
    kind = spec.get("kind")
    if kind == "quadratic":
        arch = Arch(kind="quadratic", d_in=train.d_in)
    elif kind == "logistic":
        arch = Arch(kind="logistic", d_in=train.d_in, classes=train.n_classes)
    elif kind == "mlp":
        arch = Arch(
            kind="mlp", d_in=train.d_in, hidden=spec["hidden"],
            classes=train.n_classes,
        )
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    return init_state(arch, PortableRNG(subseed(cfg.seed, "model_init")))


def make_trajectory(cfg: RunConfig) -> RatioTrajectory:
    if cfg.schedule_mode == "fixed":
        params = constant_params(cfg.target_ratio)
    else:
        params = derive_params(cfg.target_ratio, cfg.margin)
    return RatioTrajectory(params=params, total_epochs=cfg.epochs)


def evaluate(state: ModelState, test: Dataset) -> tuple[float, float | None]:
    """Mean loss and top-1 accuracy (None for regression)."""
    if test.n == 0:
        raise EmptyDatasetError("test set is empty")
    batch = full_batch(test)
    losses = loss_per_sample(state, batch)
    loss = float(losses.mean())
    if not test.is_classification:
        return loss, None
    from .models import _class_scores  # scores needed only for argmax

    scores, _ = _class_scores(state, batch.inputs)
    predictions = scores.argmax(axis=1)
    return loss, float((predictions == test.labels).mean())


def _epoch_lr(cfg: RunConfig, epoch: int) -> float:
    if cfg.lr_schedule == "cosine":
        return cfg.learning_rate * 0.5 * (1.0 + math.cos(math.pi * epoch / cfg.epochs))
    return cfg.learning_rate


def run_training(cfg: RunConfig) -> TrainResult:
    train, test = build_datasets(cfg)
    state = build_model(cfg, train)
    traj = make_trajectory(cfg)
    ledger = BudgetLedger(n=train.n, target_ratio=cfg.target_ratio)
    memory = LossMemory.empty(train.n)
    rng_select = PortableRNG(subseed(cfg.seed, "select"))
    rng_shuffle = PortableRNG(subseed(cfg.seed, "shuffle"))
    policy = POLICIES[cfg.policy]
    random_policy = POLICIES["random"]
    velocity = np.zeros_like(state.theta)
    probe_batch = full_batch(train) if cfg.probe_every > 0 else None

    metrics: list[EpochMetrics] = []
    snapshots = []
    for epoch in range(cfg.epochs):
        p_t = traj.ratio_at(epoch)
        probing = cfg.probe_every > 0 and epoch % cfg.probe_every == 0
        r_estimate = None
        if probing:
            snapshots.append((epoch, state.theta.copy()))
            r_estimate = estimate_r(
                state, probe_batch, p_t, _epoch_lr(cfg, epoch), seed=cfg.seed
            ).value

        # epoch 0 has no recorded losses yet: random cold start
        active = random_policy if epoch == 0 else policy
        subset = active(memory, p_t, epoch, rng_select)

        order = subset.indices.copy()
        rng_shuffle.shuffle(order)
        eta = _epoch_lr(cfg, epoch)
        loss_sum = 0.0
        for start in range(0, order.shape[0], cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = Batch(
                inputs=train.inputs[idx], labels=train.labels[idx], indices=idx
            )
            losses = loss_per_sample(state, batch)  # pre-update forward losses
            memory = update_losses(memory, idx, losses, epoch)
            loss_sum += float(losses.sum())
            g = mean_gradient(state, batch)
            if cfg.momentum > 0.0:
                velocity = cfg.momentum * velocity + g
                g = velocity
            state = ModelState(state.arch, state.theta - eta * g)

        ledger.record_epoch(epoch, subset.size)
        cumulative = ledger.total_passes() / ((epoch + 1) * train.n)
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs - 1:
            test_loss, test_acc = evaluate(state, test)
        else:
            test_loss, test_acc = None, None
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                p_t=p_t,
                n_selected=subset.size,
                cumulative_ratio=cumulative,
                train_loss=loss_sum / subset.size,
                test_loss=test_loss,
                test_accuracy=test_acc,
                R_estimate=r_estimate,
            )
        )
    return TrainResult(
        metrics=metrics,
        final_state=state,
        ledger=ledger,
        loss_memory=memory,
        snapshots=snapshots,
    )
