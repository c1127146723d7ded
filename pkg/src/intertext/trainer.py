"""Distillation training for the student encoder.

The objective for a batch of (source, target) sentence pairs with teacher
vectors T(s_j): mean over the batch of

    ||T(s_j) - student(s_j)||^2 + ||T(s_j) - student(t_j)||^2

i.e. the student is pulled toward the teacher's source embedding on both
sides of each pair, which places translations near each other in the shared
space. Gradients are closed-form (the encoder is linear in its parameters),
optimized with AdamW under linear warmup then linear decay to zero, with
per-epoch validation-based model selection.

All gradient and update arithmetic is in 64-bit floats; parameters and
optimizer moments are stored as 32-bit floats.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import evaluation
from .corpus import PairRecord
from .encoder import StudentModel, feature_arrays, pool64, save_model
from .errors import TrainingError
from .rng import MASK64, Xoshiro256StarStar
from .teacher import EmbeddingStore


@dataclass
class TrainingConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 2e-5
    warmup_steps: int = 10000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0
    val_pairs_per_language_pair: int = 1000

    def __post_init__(self):
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise TrainingError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.warmup_steps < 0:
            raise TrainingError(f"warmup_steps must be >= 0, got {self.warmup_steps}")
        if not 0 <= self.seed <= MASK64:
            raise TrainingError("seed must be an unsigned 64-bit integer")


@dataclass
class TrainingBatch:
    """Parallel source/target texts with the source-side teacher vectors."""

    src_texts: list[str]
    tgt_texts: list[str]
    teacher: np.ndarray  # batch x out_dim, float

    def __post_init__(self):
        n = len(self.src_texts)
        if n == 0:
            raise TrainingError("empty batch")
        if len(self.tgt_texts) != n or self.teacher.shape[0] != n:
            raise TrainingError(
                f"batch sides disagree: {n} source texts, "
                f"{len(self.tgt_texts)} target texts, {self.teacher.shape[0]} teacher rows"
            )


@dataclass
class Gradients:
    """Loss gradients; E is sparse — only rows touched by the batch appear."""

    E_rows: np.ndarray   # unique bucket indices, ascending, int64
    E: np.ndarray        # len(E_rows) x hidden_dim, float64
    W: np.ndarray        # out_dim x hidden_dim, float64
    b: np.ndarray        # out_dim, float64


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_acc: dict[str, float]
    checkpoint_path: str | None = None

    def mean_val_acc(self) -> float:
        if not self.val_acc:
            return 0.0
        return sum(self.val_acc.values()) / len(self.val_acc)


@dataclass
class TrainingHistory:
    epochs: list[EpochRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------
# loss and gradients

def distill_loss(teacher_src: np.ndarray, student_src: np.ndarray,
                 student_tgt: np.ndarray) -> float:
    """Batch-mean squared distance of both student sides to the teacher source."""
    if not (teacher_src.shape == student_src.shape == student_tgt.shape):
        raise TrainingError(
            f"shape mismatch: teacher {teacher_src.shape}, "
            f"student src {student_src.shape}, student tgt {student_tgt.shape}"
        )
    if teacher_src.ndim != 2 or teacher_src.shape[0] == 0:
        raise TrainingError(f"expected a non-empty batch matrix, got shape {teacher_src.shape}")
    t = teacher_src.astype(np.float64)
    d_src = t - student_src.astype(np.float64)
    d_tgt = t - student_tgt.astype(np.float64)
    if not (np.isfinite(d_src).all() and np.isfinite(d_tgt).all()):
        raise TrainingError("non-finite values in loss inputs")
    return float((np.sum(d_src * d_src) + np.sum(d_tgt * d_tgt)) / teacher_src.shape[0])


def _forward_backward(
    model: StudentModel,
    feats_src: list[tuple[np.ndarray, np.ndarray]],
    feats_tgt: list[tuple[np.ndarray, np.ndarray]],
    teacher64: np.ndarray,
) -> tuple[float, Gradients]:
    """One fused pass over prefeaturized texts: loss plus exact gradients.

    Chain rule through the affine projection and the count-weighted mean
    pool: with g_z the loss gradient at a text's output, the projection
    receives outer(g_z, h) and each feature row of E receives
    (count / total) * W^T g_z.
    """
    batch = len(feats_src)
    d_h = model.config.hidden_dim
    W64 = model.W.astype(np.float64)
    b64 = model.b.astype(np.float64)

    H_src = np.stack([pool64(model, idx, cnt) for idx, cnt in feats_src])
    H_tgt = np.stack([pool64(model, idx, cnt) for idx, cnt in feats_tgt])
    Z_src = H_src @ W64.T + b64
    Z_tgt = H_tgt @ W64.T + b64

    D_src = Z_src - teacher64
    D_tgt = Z_tgt - teacher64
    loss = float((np.sum(D_src * D_src) + np.sum(D_tgt * D_tgt)) / batch)

    G_src = (2.0 / batch) * D_src
    G_tgt = (2.0 / batch) * D_tgt
    b_grad = G_src.sum(axis=0) + G_tgt.sum(axis=0)
    W_grad = G_src.T @ H_src + G_tgt.T @ H_tgt

    # back through the mean pool, one segment per text side (source first)
    pooled_grads = np.vstack([G_src, G_tgt]) @ W64  # 2*batch x d_h
    idx_parts: list[np.ndarray] = []
    contrib_parts: list[np.ndarray] = []
    for k, (idx, cnt) in enumerate(feats_src + feats_tgt):
        if idx.size == 0:
            continue
        weights = cnt / cnt.sum()
        idx_parts.append(idx)
        contrib_parts.append(weights[:, None] * pooled_grads[k][None, :])
    if idx_parts:
        idx_all = np.concatenate(idx_parts)
        contrib_all = np.vstack(contrib_parts)
        uniq, inverse = np.unique(idx_all, return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        counts = np.bincount(inverse, minlength=len(uniq))
        starts = np.concatenate(([0], np.cumsum(counts[:-1])))
        E_grad = np.add.reduceat(contrib_all[order], starts, axis=0)
    else:
        uniq = np.zeros(0, dtype=np.int64)
        E_grad = np.zeros((0, d_h), dtype=np.float64)
    return loss, Gradients(E_rows=uniq, E=E_grad, W=W_grad, b=b_grad)


def loss_gradients(batch: TrainingBatch, model: StudentModel) -> Gradients:
    """Exact gradients of distill_loss composed with the encoder."""
    if batch.teacher.shape[1] != model.config.out_dim:
        raise TrainingError(
            f"teacher dim {batch.teacher.shape[1]} != model out_dim {model.config.out_dim}"
        )
    feats_src = [feature_arrays(t, model.config) for t in batch.src_texts]
    feats_tgt = [feature_arrays(t, model.config) for t in batch.tgt_texts]
    _, grads = _forward_backward(model, feats_src, feats_tgt,
                                 batch.teacher.astype(np.float64))
    return grads


# ---------------------------------------------------------------------------
# optimizer

def lr_at(step: int, total_steps: int, config: TrainingConfig) -> float:
    """Linear warmup to the peak rate, then linear decay to zero.

    Warmup is exclusive of step numbering: lr = peak * (step+1) / warmup
    during warmup, so the peak is first reached exactly at step ==
    warmup_steps. With warmup_steps == 0 training starts at the full rate.
    """
    if total_steps <= 0:
        raise TrainingError(f"total_steps must be positive, got {total_steps}")
    if step < 0:
        raise TrainingError(f"step must be >= 0, got {step}")
    lr = config.learning_rate
    warmup = config.warmup_steps
    if step < warmup:
        return lr * (step + 1) / warmup
    if total_steps <= warmup:
        return 0.0
    return lr * max(0, total_steps - step) / (total_steps - warmup)


@dataclass
class AdamWState:
    """First/second moment accumulators (float32) and the global step count."""

    step: int
    m_E: np.ndarray
    v_E: np.ndarray
    m_W: np.ndarray
    v_W: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray


def init_opt_state(model: StudentModel) -> AdamWState:
    zeros = lambda arr: np.zeros_like(arr, dtype=np.float32)
    return AdamWState(
        step=0,
        m_E=zeros(model.E), v_E=zeros(model.E),
        m_W=zeros(model.W), v_W=zeros(model.W),
        m_b=zeros(model.b), v_b=zeros(model.b),
    )


def _adamw_block(theta: np.ndarray, m: np.ndarray, v: np.ndarray,
                 grad64: np.ndarray, rows, lr: float, t: int,
                 config: TrainingConfig) -> None:
    """Decoupled-weight-decay Adam on one block (or on `rows` of it), in place.

    Moments are updated in 64-bit from their stored 32-bit values; the step
    uses the unrounded 64-bit moments with bias correction at the global
    step count, then parameters and moments are rounded back to 32-bit.
    """
    sel = slice(None) if rows is None else rows
    m64 = config.adam_beta1 * m[sel].astype(np.float64) + (1 - config.adam_beta1) * grad64
    v64 = config.adam_beta2 * v[sel].astype(np.float64) + (1 - config.adam_beta2) * grad64 * grad64
    m_hat = m64 / (1.0 - config.adam_beta1 ** t)
    v_hat = v64 / (1.0 - config.adam_beta2 ** t)
    theta64 = theta[sel].astype(np.float64)
    theta64 -= lr * (m_hat / (np.sqrt(v_hat) + config.adam_eps)
                     + config.weight_decay * theta[sel].astype(np.float64))
    theta[sel] = theta64.astype(np.float32)
    m[sel] = m64.astype(np.float32)
    v[sel] = v64.astype(np.float32)


def adamw_step(state: AdamWState, model: StudentModel, grads: Gradients,
               lr: float, config: TrainingConfig) -> tuple[StudentModel, AdamWState]:
    """One optimizer step, mutating model and state in place.

    Rows of E absent from the batch gradient are skipped entirely — their
    parameters, moments, and weight decay are all untouched. W and b are
    always updated (and decayed), even at zero gradient.
    """
    for name, grad in (("E", grads.E), ("W", grads.W), ("b", grads.b)):
        if not np.isfinite(grad).all():
            raise TrainingError(f"non-finite gradient in parameter block {name}")
    state.step += 1
    t = state.step
    if grads.E_rows.size:
        _adamw_block(model.E, state.m_E, state.v_E, grads.E, grads.E_rows, lr, t, config)
    _adamw_block(model.W, state.m_W, state.v_W, grads.W, None, lr, t, config)
    _adamw_block(model.b, state.m_b, state.v_b, grads.b, None, lr, t, config)
    return model, state


# ---------------------------------------------------------------------------
# training loop

def _encode_from_features(model: StudentModel,
                          feats: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    W64 = model.W.astype(np.float64)
    b64 = model.b.astype(np.float64)
    pooled = np.stack([pool64(model, idx, cnt) for idx, cnt in feats])
    return (pooled @ W64.T + b64).astype(np.float32)


def _validation_accuracy(model: StudentModel, val_groups) -> dict[str, float]:
    accs: dict[str, float] = {}
    for direction, (feats_src, feats_tgt) in val_groups.items():
        src = _encode_from_features(model, feats_src)
        tgt = _encode_from_features(model, feats_tgt)
        accs[direction] = evaluation.translation_accuracy(src, tgt)
    return accs


def train(
    model: StudentModel,
    train_pairs: list[PairRecord],
    val_pairs: list[PairRecord],
    teacher_store: EmbeddingStore,
    config: TrainingConfig,
    checkpoint_dir: str | None = None,
    history_path: str | None = None,
) -> tuple[StudentModel, TrainingHistory]:
    """Run the full distillation loop; return (best model, history).

    Teacher vectors are looked up by source side only, under the id
    convention "<pair id>:src". Pairs are reshuffled every epoch from one
    seeded PRNG stream. After each epoch, validation translation accuracy
    is computed per direction (capped at val_pairs_per_language_pair pairs
    each); the returned model is the checkpoint with the highest mean
    accuracy across directions, earliest epoch on ties. `model` itself is
    left in its final-epoch state.
    """
    if not train_pairs:
        raise TrainingError("empty training set")
    missing = [p.id for p in train_pairs if f"{p.id}:src" not in teacher_store]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        more = f" (and {len(missing) - 10} more)" if len(missing) > 10 else ""
        raise TrainingError(f"no teacher embedding for pair ids: {shown}{more}")
    if teacher_store.dim != model.config.out_dim:
        raise TrainingError(
            f"teacher dim {teacher_store.dim} != model out_dim {model.config.out_dim}"
        )

    feats_src = [feature_arrays(p.text_src, model.config) for p in train_pairs]
    feats_tgt = [feature_arrays(p.text_tgt, model.config) for p in train_pairs]
    teacher64 = np.stack(
        [teacher_store[f"{p.id}:src"].astype(np.float64) for p in train_pairs]
    )

    val_groups: dict[str, tuple[list, list]] = {}
    for pair in val_pairs:
        direction = f"{pair.lang_src}→{pair.lang_tgt}"
        group = val_groups.setdefault(direction, ([], []))
        if len(group[0]) >= config.val_pairs_per_language_pair:
            continue
        group[0].append(feature_arrays(pair.text_src, model.config))
        group[1].append(feature_arrays(pair.text_tgt, model.config))

    n = len(train_pairs)
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    rng = Xoshiro256StarStar(config.seed)
    state = init_opt_state(model)
    history = TrainingHistory()
    best_model = None
    best_acc = -math.inf
    step = 0

    for epoch in range(config.epochs):
        order = list(range(n))
        rng.shuffle(order)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            members = order[start:start + config.batch_size]
            loss, grads = _forward_backward(
                model,
                [feats_src[i] for i in members],
                [feats_tgt[i] for i in members],
                teacher64[members],
            )
            adamw_step(state, model, grads, lr_at(step, total_steps, config), config)
            loss_sum += loss * len(members)
            step += 1
        val_acc = _validation_accuracy(model, val_groups)
        checkpoint_path = None
        if checkpoint_dir is not None:
            checkpoint_path = os.path.join(checkpoint_dir, f"epoch_{epoch:03d}.smdl")
            save_model(model, checkpoint_path)
        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / n,
            val_acc=val_acc,
            checkpoint_path=checkpoint_path,
        )
        history.epochs.append(record)
        if record.mean_val_acc() > best_acc:
            best_acc = record.mean_val_acc()
            best_model = model.copy()

    if history_path is not None:
        with open(history_path, "w", encoding="utf-8") as fh:
            for record in history.epochs:
                fh.write(json.dumps(
                    {
                        "epoch": record.epoch,
                        "train_loss": record.train_loss,
                        "val_acc": record.val_acc,
                        "checkpoint_path": record.checkpoint_path,
                    },
                    ensure_ascii=False, sort_keys=True,
                ))
                fh.write("\n")
    return best_model, history


def select_best(history: TrainingHistory) -> int:
    """Index of the epoch with the highest mean validation accuracy (ties: earliest)."""
    if not history.epochs:
        raise TrainingError("empty history")
    means = [record.mean_val_acc() for record in history.epochs]
    return int(np.argmax(means))
