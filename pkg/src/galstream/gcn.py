"""Reference two-layer graph convolution classifier with hand-derived gradients.

Everything is dense float64 numpy. Training is full-batch gradient descent,
vectorized across the labeled day-examples (they all share the same
propagation matrix), which keeps a benchmark day's retrain in the
millisecond range at the graph sizes this engine targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import TrainingDivergedError
from .graphs import Graph

MISSING_LABEL = -1

EMBEDDING_MODES = ("model_based", "direct")


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetrically normalized adjacency with self-loops, fixed per dataset."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def node_count(self) -> int:
        return self.matrix.shape[0]


def build_normalized_adjacency(g: Graph) -> NormalizedAdjacency:
    """D^{-1/2} (A + I) D^{-1/2}; isolated nodes keep a unit self-loop."""
    a = g.adjacency_matrix() + np.eye(g.node_count)
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return NormalizedAdjacency(a * inv_sqrt[:, None] * inv_sqrt[None, :])


@dataclass
class GcnParams:
    """Layer weights: w1 maps features to hidden, w2 maps hidden to 2 logits."""

    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self) -> None:
        self.w1 = np.asarray(self.w1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        if self.w1.ndim != 2 or self.w2.ndim != 2 or self.w2.shape[1] != 2:
            raise ValueError("w1 must be (features, hidden) and w2 (hidden, 2)")
        if self.w1.shape[1] != self.w2.shape[0]:
            raise ValueError("hidden dimensions of w1 and w2 disagree")
        if not (np.isfinite(self.w1).all() and np.isfinite(self.w2).all()):
            raise ValueError("parameters must be finite")

    def copy(self) -> "GcnParams":
        return GcnParams(self.w1.copy(), self.w2.copy())


@dataclass(frozen=True)
class ModelOutput:
    probabilities: np.ndarray
    hidden: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    hidden_dim: int = 16
    learning_rate: float = 0.05
    epochs: int = 200


def init_params(seed: int, feature_dim: int, hidden_dim: int) -> GcnParams:
    """Uniform init in +-1/sqrt(fan_in), deterministic per seed."""
    rng = np.random.default_rng(seed)
    b1 = 1.0 / np.sqrt(feature_dim)
    b2 = 1.0 / np.sqrt(hidden_dim)
    return GcnParams(
        rng.uniform(-b1, b1, size=(feature_dim, hidden_dim)),
        rng.uniform(-b2, b2, size=(hidden_dim, 2)),
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: GcnParams, adj: NormalizedAdjacency, x: np.ndarray) -> ModelOutput:
    """hidden = relu(A x w1); probabilities = row-softmax(A hidden w2)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != adj.node_count or x.shape[1] != params.w1.shape[0]:
        raise ValueError(
            f"features must be ({adj.node_count}, {params.w1.shape[0]}), got {x.shape}"
        )
    hidden = np.maximum(adj.matrix @ x @ params.w1, 0.0)
    probs = _softmax_rows(adj.matrix @ hidden @ params.w2)
    return ModelOutput(probabilities=probs, hidden=hidden)


def _one_hot(labels: np.ndarray) -> np.ndarray:
    y = np.zeros((labels.size, 2))
    y[np.arange(labels.size), labels] = 1.0
    return y


def loss_and_gradients(
    params: GcnParams,
    adj: NormalizedAdjacency,
    x: np.ndarray,
    labels: np.ndarray,
    mask: Sequence[int],
) -> tuple[float, GcnParams]:
    """Masked mean cross-entropy and its exact gradients w.r.t. both weight matrices."""
    mask = np.asarray(sorted(mask), dtype=int)
    if mask.size == 0:
        raise ValueError("mask must contain at least one node")
    labels = np.asarray(labels, dtype=int)
    if (labels[mask] == MISSING_LABEL).any():
        raise ValueError("masked nodes must have labels")
    x = np.asarray(x, dtype=float)
    a = adj.matrix

    z1 = a @ x @ params.w1
    h = np.maximum(z1, 0.0)
    p = _softmax_rows(a @ h @ params.w2)

    picked = p[mask, labels[mask]]
    loss = float(-np.log(picked).mean())

    d_z2 = np.zeros_like(p)
    d_z2[mask] = p[mask]
    d_z2[mask, labels[mask]] -= 1.0
    d_z2 /= mask.size

    g_w2 = (a @ h).T @ d_z2
    d_h = a @ d_z2 @ params.w2.T
    d_z1 = d_h * (z1 > 0)
    g_w1 = (a @ x).T @ d_z1
    return loss, GcnParams(g_w1, g_w2)


def train(
    params_init_seed: int,
    adj: NormalizedAdjacency,
    labeled_examples: Iterable[tuple[np.ndarray, np.ndarray, Sequence[int]]],
    hyper: TrainConfig = TrainConfig(),
) -> GcnParams:
    """Full-batch gradient descent, averaging gradients over all day-examples.

    ``labeled_examples`` is a list of (features, labels, mask) triples that
    all share ``adj``. Deterministic given the init seed.
    """
    examples = list(labeled_examples)
    if not examples:
        raise ValueError("need at least one labeled example")
    feature_dim = np.asarray(examples[0][0]).shape[1]
    params = init_params(params_init_seed, feature_dim, hyper.hidden_dim)
    if hyper.epochs == 0:
        return params

    a = adj.matrix
    n = adj.node_count
    e = len(examples)
    # flatten the example axis into the row axis so every epoch is a handful
    # of 2-d GEMMs; row e*n+i is node i of example e
    ax = np.empty((e * n, feature_dim))
    flat_mask = []
    flat_labels = []
    weight = np.zeros(e * n)  # per-row loss weight: 1 / (mask size * examples)
    for i, (x, labels, mask) in enumerate(examples):
        x = np.asarray(x, dtype=float)
        if x.shape != (n, feature_dim):
            raise ValueError(f"example {i}: features must be ({n}, {feature_dim})")
        labels = np.asarray(labels, dtype=int)
        mask = np.asarray(sorted(mask), dtype=int)
        if mask.size == 0:
            raise ValueError(f"example {i}: empty mask")
        if (labels[mask] == MISSING_LABEL).any():
            raise ValueError(f"example {i}: masked nodes must have labels")
        ax[i * n : (i + 1) * n] = a @ x
        flat_mask.append(mask + i * n)
        flat_labels.append(labels[mask])
        weight[mask + i * n] = 1.0 / (mask.size * e)
    rows = np.concatenate(flat_mask)
    row_labels = np.concatenate(flat_labels)
    row_weight = weight[rows]

    def propagate(m2d: np.ndarray) -> np.ndarray:
        # per-example A @ m using one GEMM over the flattened layout
        cols = m2d.shape[1]
        stacked = m2d.reshape(e, n, cols).transpose(1, 0, 2).reshape(n, e * cols)
        return (a @ stacked).reshape(n, e, cols).transpose(1, 0, 2).reshape(e * n, cols)

    for epoch in range(hyper.epochs):
        z1 = ax @ params.w1
        h = np.maximum(z1, 0.0)
        ah = propagate(h)
        p = _softmax_rows(ah @ params.w2)

        picked = p[rows, row_labels]
        loss = float(-(np.log(picked) * row_weight).sum()) if picked.min() > 0 else np.inf
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch)

        d_z2 = np.zeros_like(p)
        d_z2[rows] = p[rows] * row_weight[:, None]
        d_z2[rows, row_labels] -= row_weight
        g_w2 = ah.T @ d_z2
        d_h = propagate(d_z2) @ params.w2.T
        d_z1 = d_h * (z1 > 0)
        g_w1 = ax.T @ d_z1

        params.w1 -= hyper.learning_rate * g_w1
        params.w2 -= hyper.learning_rate * g_w2
    return params


def embed(
    mode: str,
    params: GcnParams | None,
    adj: NormalizedAdjacency,
    x: np.ndarray,
) -> np.ndarray:
    """Node embeddings: the trained hidden layer, or two untrained propagation hops."""
    if mode == "model_based":
        if params is None:
            raise ValueError("model_based embeddings require trained parameters")
        return forward(params, adj, x).hidden
    if mode == "direct":
        x = np.asarray(x, dtype=float)
        return adj.matrix @ (adj.matrix @ x)
    raise ValueError(f"unknown embedding mode {mode!r}; expected one of {EMBEDDING_MODES}")
