"""Implicit-regularization probe.

Estimates the subsampling-induced one-step loss penalty
R = eta^2/(2N) * (1-p)/p * Tr(H C), where C is the per-sample gradient
covariance (1/(N-1) normalization, which makes the one-step identity exact
under uniform sampling without replacement), and verifies the second-order
one-step prediction against Monte-Carlo subset draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDatasetError, ParameterDomainError
from .models import (
    Batch,
    ModelState,
    hessian_vector_product,
    mean_gradient,
    mean_loss,
    per_sample_gradients,
)
from .rng import subseed


@dataclass(frozen=True)
class RegEstimate:
    p: float
    trace_hc: float
    lam: float  # (1-p)/p
    value: float  # eta^2/(2N) * lam * trace_hc
    probes: int
    seed: int


def lambda_factor(p: float) -> float:
    """Volumetric modulation (1-p)/p; strictly decreasing on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ParameterDomainError(f"p must be in (0, 1), got {p}")
    return (1.0 - p) / p


def full_batch(dataset) -> Batch:
    return Batch(
        inputs=dataset.inputs,
        labels=dataset.labels,
        indices=np.arange(dataset.n, dtype=np.int64),
    )


def _mean_gradients_multi(arch, thetas: np.ndarray, batch: Batch) -> np.ndarray:
    """Batch-mean gradient at many parameter vectors at once.

    Same arithmetic as models.mean_gradient, vectorized over a (K, d) stack
    of thetas so the per-sample HVP sweep in the trace estimator is not
    dominated by Python call overhead.
    """
    x = batch.inputs
    n = x.shape[0]
    k = thetas.shape[0]
    if arch.kind == "quadratic":
        resid = x @ thetas.T - batch.labels[:, None]  # (n, k)
        return resid.T @ x / n
    onehot_rows = np.arange(n)
    if arch.kind == "logistic":
        d, c = arch.d_in, arch.classes
        w = thetas[:, : d * c].reshape(k, d, c)
        b = thetas[:, d * c :]
        scores = np.matmul(x, w) + b[:, None, :]  # (k, n, c)
        scores -= scores.max(axis=2, keepdims=True)
        g = np.exp(scores)
        g /= g.sum(axis=2, keepdims=True)
        g[:, onehot_rows, batch.labels] -= 1.0
        gw = np.matmul(x.T, g) / n  # (k, d, c)
        return np.concatenate([gw.reshape(k, -1), g.mean(axis=1)], axis=1)
    d, h, c = arch.d_in, arch.hidden, arch.classes
    o = 0
    w1 = thetas[:, o : o + d * h].reshape(k, d, h); o += d * h
    b1 = thetas[:, o : o + h]; o += h
    w2 = thetas[:, o : o + h * c].reshape(k, h, c); o += h * c
    b2 = thetas[:, o:]
    z1 = np.matmul(x, w1) + b1[:, None, :]  # (k, n, h)
    a1 = np.maximum(z1, 0.0)
    scores = np.matmul(a1, w2) + b2[:, None, :]
    scores -= scores.max(axis=2, keepdims=True)
    g = np.exp(scores)
    g /= g.sum(axis=2, keepdims=True)
    g[:, onehot_rows, batch.labels] -= 1.0
    dz1 = np.matmul(g, w2.transpose(0, 2, 1)) * (z1 > 0)
    gw1 = np.matmul(x.T, dz1) / n
    gw2 = np.matmul(a1.transpose(0, 2, 1), g) / n
    return np.concatenate(
        [gw1.reshape(k, -1), dz1.mean(axis=1), gw2.reshape(k, -1), g.mean(axis=1)],
        axis=1,
    )


def gradient_covariance_trace_hc(
    state: ModelState, batch: Batch, chunk: int = 2
) -> float:
    """Tr(H C) via one HVP quadratic form per sample deviation.

    Tr(HC) = 1/(N-1) * sum_i (g_i - gbar)^T H (g_i - gbar), with the
    deviations taken from per-sample gradients over the full dataset. Each
    H (g_i - gbar) uses the symmetric finite difference of the mean gradient;
    the perturbed gradients are evaluated in chunks for speed.
    """
    n = batch.size
    if n < 2:
        raise EmptyDatasetError(f"covariance needs N >= 2, got {n}")
    grads = per_sample_gradients(state, batch)
    dev = grads - grads.mean(axis=0)
    norms = np.maximum(np.linalg.norm(dev, axis=1), 1.0)
    radii = 1e-5 / norms  # matches hessian_vector_product's step rule
    total = 0.0
    for start in range(0, n, chunk):
        block = dev[start : start + chunk]
        r = radii[start : start + chunk, None]
        g_plus = _mean_gradients_multi(state.arch, state.theta + r * block, batch)
        g_minus = _mean_gradients_multi(state.arch, state.theta - r * block, batch)
        hv = (g_plus - g_minus) / (2.0 * r)
        total += float(np.einsum("kd,kd->", block, hv))
    return total / (n - 1)


def estimate_r(
    state: ModelState, batch: Batch, p: float, eta: float, seed: int = 0
) -> RegEstimate:
    if eta <= 0.0:
        raise ParameterDomainError(f"eta must be > 0, got {eta}")
    lam = lambda_factor(p)
    trace_hc = gradient_covariance_trace_hc(state, batch)
    n = batch.size
    return RegEstimate(
        p=p,
        trace_hc=trace_hc,
        lam=lam,
        value=eta**2 / (2.0 * n) * lam * trace_hc,
        probes=n,
        seed=seed,
    )


def verify_one_step_expansion(
    state: ModelState,
    batch: Batch,
    p: float,
    eta: float,
    trials: int,
    seed: int = 0,
) -> dict:
    """Monte-Carlo check of the one-step expected-loss prediction.

    Each trial draws a uniform size-floor(pN) subset, takes one SGD step with
    the subset-mean gradient, and evaluates the full-data loss. The report
    compares the MC mean against
    L - eta*||grad L||^2 + eta^2/2 * grad L^T H grad L + R.
    Trial i owns generator subseed(seed, "trial.i"), so the draws are
    independent of execution order and identical across p values (which makes
    cross-p comparisons paired through nested subset prefixes).
    """
    n = batch.size
    m = math.floor(p * n + 1e-9)
    if not 1 <= m <= n:
        raise ParameterDomainError(f"subset size {m} outside [1, {n}] for p={p}")
    if trials < 1:
        raise ParameterDomainError("trials must be >= 1")

    loss0 = mean_loss(state, batch)
    grad = mean_gradient(state, batch)
    hg = hessian_vector_product(state, batch, grad)
    deterministic = (
        loss0 - eta * float(grad @ grad) + 0.5 * eta**2 * float(grad @ hg)
    )
    if p < 1.0:
        reg = estimate_r(state, batch, p, eta, seed=seed)
        lam, trace_hc, r_term = reg.lam, reg.trace_hc, reg.value
    else:  # full-data limit: deterministic step, no subsampling penalty
        lam, r_term = 0.0, 0.0
        trace_hc = gradient_covariance_trace_hc(state, batch)

    grads = per_sample_gradients(state, batch)
    losses = np.empty(trials)
    for i in range(trials):
        trial_rng = np.random.default_rng(subseed(seed, f"trial.{i}"))
        subset = trial_rng.permutation(n)[:m]
        ghat = grads[subset].mean(axis=0)
        stepped = ModelState(state.arch, state.theta - eta * ghat)
        losses[i] = mean_loss(stepped, batch)

    mc_mean = float(losses.mean())
    mc_se = float(losses.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    prediction = deterministic + r_term
    gap = mc_mean - prediction
    return {
        "p": p,
        "m": m,
        "trials": trials,
        "seed": seed,
        "eta": eta,
        "mc_mean": mc_mean,
        "mc_se": mc_se,
        "deterministic_part": deterministic,
        "r_term": r_term,
        "trace_hc": trace_hc,
        "lambda": lam,
        "prediction": prediction,
        "gap": gap,
        "gap_in_se": gap / mc_se if mc_se > 0.0 else 0.0,
        "trial_losses": losses,
    }


def trace_r_over_training(
    snapshots: list,
    arch,
    batch: Batch,
    ratio_fn,
    eta: float,
    seed: int = 0,
) -> list:
    """R(p_t, theta_t) at each snapshot epoch (theta taken at epoch start).

    snapshots: list of (epoch, theta) pairs as dumped by the trainer;
    ratio_fn maps an epoch to its scheduled ratio.
    """
    if not snapshots:
        raise EmptyDatasetError("no model snapshots available to probe")
    series = []
    for epoch, theta in snapshots:
        state = ModelState(arch, theta)
        p_t = ratio_fn(epoch)
        series.append((epoch, estimate_r(state, batch, p_t, eta, seed=seed)))
    return series
