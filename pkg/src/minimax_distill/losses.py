"""Numeric core for distillation: temperature softmax, CE, KL, and the KD loss.

All functions operate on 1-D float arrays (one example, C classes) and use
natural logarithms. Probabilities are clamped at ``PROB_CLAMP`` before any
log so perfectly confident inputs stay finite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, InputError

PROB_CLAMP = 1e-12
PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class KDHyperparams:
    """Mixing weight and temperature of the composite KD loss.

    ``kd_weight`` interpolates between pure cross-entropy (0) and pure
    KD (1); ``temperature`` smooths both softmax distributions inside
    the KD term.
    """

    kd_weight: float
    temperature: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.kd_weight <= 1.0:
            raise ConfigError(f"kd_weight must be in [0, 1], got {self.kd_weight}")
        if not self.temperature > 0.0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")


def _as_logits(values: np.ndarray | list[float]) -> np.ndarray:
    logits = np.asarray(values, dtype=np.float64)
    if logits.ndim != 1 or logits.shape[0] < 2:
        raise DimensionError(f"logits must be 1-D with >= 2 classes, got shape {logits.shape}")
    if not np.all(np.isfinite(logits)):
        raise InputError("logits contain NaN or infinite entries")
    return logits


def _check_probs(values: np.ndarray | list[float], name: str) -> np.ndarray:
    probs = np.asarray(values, dtype=np.float64)
    if probs.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {probs.shape}")
    if np.any(probs < 0.0) or not np.all(np.isfinite(probs)):
        raise InputError(f"{name} has negative or non-finite entries")
    if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL:
        raise InputError(f"{name} sums to {probs.sum()}, expected 1 +/- {PROB_SUM_TOL}")
    return probs


def softmax_with_temperature(logits: np.ndarray | list[float], temperature: float) -> np.ndarray:
    """Temperature-scaled softmax, stabilized by max subtraction."""
    z = _as_logits(logits)
    if not temperature > 0.0:
        raise ConfigError(f"temperature must be > 0, got {temperature}")
    scaled = z / temperature
    scaled -= scaled.max()
    exp = np.exp(scaled)
    return exp / exp.sum()


def cross_entropy(gold_label: int, probs: np.ndarray | list[float]) -> float:
    """Negative log-probability of the gold class."""
    p = _check_probs(probs, "probs")
    if not 0 <= gold_label < p.shape[0]:
        raise InputError(f"label {gold_label} out of range for {p.shape[0]} classes")
    return float(-np.log(max(float(p[gold_label]), PROB_CLAMP)))


def kl_divergence(p: np.ndarray | list[float], q: np.ndarray | list[float]) -> float:
    """KL(p || q) with 0 * log(0/q) = 0 and q clamped at ``PROB_CLAMP``."""
    pv = _check_probs(p, "p")
    qv = _check_probs(q, "q")
    if pv.shape != qv.shape:
        raise DimensionError(f"length mismatch: {pv.shape[0]} vs {qv.shape[0]}")
    mask = pv > 0.0
    qc = np.maximum(qv[mask], PROB_CLAMP)
    return float(np.sum(pv[mask] * (np.log(pv[mask]) - np.log(qc))))


def kd_loss(
    student_logits: np.ndarray | list[float],
    teacher_logits: np.ndarray | list[float],
    temperature: float,
) -> float:
    """T^2-scaled KL between temperature-softened teacher and student outputs.

    The teacher distribution is the reference (first) argument of the KL.
    """
    zs = _as_logits(student_logits)
    zt = _as_logits(teacher_logits)
    if zs.shape != zt.shape:
        raise DimensionError(f"student/teacher length mismatch: {zs.shape[0]} vs {zt.shape[0]}")
    pt = softmax_with_temperature(zt, temperature)
    ps = softmax_with_temperature(zs, temperature)
    return temperature**2 * kl_divergence(pt, ps)


def augmented_example_loss(
    student_logits: np.ndarray | list[float],
    teacher_logits: np.ndarray | list[float],
    temperature: float,
) -> float:
    """Loss for augmented (unlabelled) examples: the KD term alone."""
    return kd_loss(student_logits, teacher_logits, temperature)


def combined_loss(
    gold_label: int,
    student_logits: np.ndarray | list[float],
    teacher_logits: np.ndarray | list[float],
    hp: KDHyperparams,
) -> float:
    """(1 - w) * CE + w * KD, the training loss for labelled originals."""
    ce = cross_entropy(gold_label, softmax_with_temperature(student_logits, 1.0))
    kd = kd_loss(student_logits, teacher_logits, hp.temperature)
    return (1.0 - hp.kd_weight) * ce + hp.kd_weight * kd


def kd_loss_grad(
    student_logits: np.ndarray | list[float],
    teacher_logits: np.ndarray | list[float],
    temperature: float,
) -> np.ndarray:
    """Gradient of ``kd_loss`` w.r.t. the student logits: T * (p_s - p_t)."""
    ps = softmax_with_temperature(student_logits, temperature)
    pt = softmax_with_temperature(teacher_logits, temperature)
    return temperature * (ps - pt)


def cross_entropy_grad(gold_label: int, student_logits: np.ndarray | list[float]) -> np.ndarray:
    """Gradient of CE(y, softmax(z)) w.r.t. the logits z: p - one_hot(y)."""
    p = softmax_with_temperature(student_logits, 1.0)
    if not 0 <= gold_label < p.shape[0]:
        raise InputError(f"label {gold_label} out of range for {p.shape[0]} classes")
    grad = p.copy()
    grad[gold_label] -= 1.0
    return grad


def combined_loss_grad(
    gold_label: int,
    student_logits: np.ndarray | list[float],
    teacher_logits: np.ndarray | list[float],
    hp: KDHyperparams,
) -> np.ndarray:
    """Gradient of ``combined_loss`` w.r.t. the student logits."""
    ce_grad = cross_entropy_grad(gold_label, student_logits)
    kd_grad = kd_loss_grad(student_logits, teacher_logits, hp.temperature)
    return (1.0 - hp.kd_weight) * ce_grad + hp.kd_weight * kd_grad
