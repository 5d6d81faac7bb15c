"""Embedding-sum MLP target with hand-written backprop to the indicators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from catbreak.categorical.instance import EmbeddingTable
from catbreak.classifier.base import CategoricalModel, Objective
from catbreak.errors import CatbreakError

Layer = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class EmbedMlpModel(CategoricalModel):
    """``softmax(W_L relu(... relu(W_1 x + c_1) ...) + c_L)``.

    ``x`` concatenates, per feature, the indicator-weighted sum of that
    feature's value embeddings, so ``x`` is linear in the indicators and has
    ``N * D`` entries.
    """

    table: EmbeddingTable
    layers: tuple[Layer, ...]
    seed: int | None = None
    planted: tuple[int, ...] = ()
    sensitivity: str = ""
    values_per_feature: tuple[int, ...] = field(init=False)
    kind = "embed-mlp"

    def __post_init__(self) -> None:
        if not self.layers:
            raise CatbreakError("SHAPE_MISMATCH", "at least the output layer is required")
        expected_in = self.table.num_features * self.table.dim
        layers = []
        for index, (weight, bias) in enumerate(self.layers):
            weight = np.array(weight, dtype=np.float64)
            bias = np.array(bias, dtype=np.float64)
            if weight.ndim != 2 or bias.shape != (weight.shape[0],):
                raise CatbreakError("SHAPE_MISMATCH", f"layer {index} has inconsistent shapes")
            if weight.shape[1] != expected_in:
                raise CatbreakError(
                    "SHAPE_MISMATCH",
                    f"layer {index} expects {weight.shape[1]} inputs, gets {expected_in}",
                )
            if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
                raise CatbreakError("NON_FINITE", f"layer {index} has non-finite parameters")
            weight.setflags(write=False)
            bias.setflags(write=False)
            layers.append((weight, bias))
            expected_in = weight.shape[0]
        if expected_in < 2:
            raise CatbreakError("SHAPE_MISMATCH", "the output layer needs at least two classes")
        object.__setattr__(self, "layers", tuple(layers))
        object.__setattr__(self, "planted", tuple(int(i) for i in self.planted))
        object.__setattr__(self, "values_per_feature", self.table.values_per_feature)

    @property
    def num_classes(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(weight.shape[0] for weight, _ in self.layers[:-1])

    def _pool(self, indicators: np.ndarray) -> np.ndarray:
        indicators = np.asarray(indicators, dtype=np.float64)
        pooled = np.einsum("bnm,nmd->bnd", indicators, self.table.vectors)
        return pooled.reshape(indicators.shape[0], -1)

    def forward(self, indicators: np.ndarray) -> np.ndarray:
        h = self._pool(indicators)
        for weight, bias in self.layers[:-1]:
            h = np.maximum(h @ weight.T + bias, 0.0)
        weight, bias = self.layers[-1]
        return softmax(h @ weight.T + bias, axis=1)

    def preactivations(self, indicators: np.ndarray) -> list[np.ndarray]:
        """Hidden pre-activations at one point (used to spot ReLU kinks)."""
        h = self._pool(indicators[None])[0]
        out = []
        for weight, bias in self.layers[:-1]:
            a = weight @ h + bias
            out.append(a)
            h = np.maximum(a, 0.0)
        return out

    def objective_grad(
        self, indicators: np.ndarray, label: int, objective: Objective
    ) -> np.ndarray:
        x = self._pool(np.asarray(indicators, dtype=np.float64)[None])[0]
        activations = [x]
        pre = []
        h = x
        for weight, bias in self.layers[:-1]:
            a = weight @ h + bias
            pre.append(a)
            h = np.maximum(a, 0.0)
            activations.append(h)
        weight, bias = self.layers[-1]
        probs = softmax(weight @ h + bias)
        if not np.all(np.isfinite(probs)):
            raise CatbreakError("NON_FINITE", "model produced non-finite confidences")

        w = objective.weights(probs, label)
        # softmax Jacobian applied to w
        delta = probs * (w - w @ probs)
        delta = weight.T @ delta
        for (weight, _), a in zip(reversed(self.layers[:-1]), reversed(pre)):
            delta = weight.T @ (delta * (a > 0.0))

        dx = delta.reshape(self.table.num_features, self.table.dim)
        return np.einsum("nmd,nd->nm", self.table.vectors, dx)
