"""Tiny MLP with hand-written backpropagation.

tanh between layers; the last layer stays linear unless final_tanh is
set (used for the encoder so its output lives in a bounded range).
No autodiff framework: gradients come back from backward() as per-layer
(dW, db) lists so callers can sum contributions from several forward
passes through the same module before updating.
"""

from __future__ import annotations

import numpy as np


class MLP:
    def __init__(self, rng: np.random.Generator, sizes, final_tanh: bool = False):
        if len(sizes) < 2:
            raise ValueError(f"need at least an input and an output size, got {sizes}")
        self.final_tanh = final_tanh
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for n_in, n_out in zip(sizes, sizes[1:]):
            bound = 1.0 / np.sqrt(n_in)
            self.weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.biases.append(np.zeros(n_out))

    def _tanh_at(self, layer: int) -> bool:
        return layer < len(self.weights) - 1 or self.final_tanh

    def forward(self, x):
        """Returns (output, cache); cache is the list of layer activations."""
        acts = [np.asarray(x, dtype=np.float64)]
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ w + b
            acts.append(np.tanh(z) if self._tanh_at(layer) else z)
        return acts[-1], acts

    def backward(self, grad_out, acts):
        """Returns (grad_input, (grads_w, grads_b)) for the cached pass."""
        n_layers = len(self.weights)
        grads_w = [None] * n_layers
        grads_b = [None] * n_layers
        g = np.asarray(grad_out, dtype=np.float64)
        for layer in reversed(range(n_layers)):
            out = acts[layer + 1]
            if self._tanh_at(layer):
                g = g * (1.0 - out * out)
            grads_w[layer] = acts[layer].T @ g
            grads_b[layer] = g.sum(axis=0)
            g = g @ self.weights[layer].T
        return g, (grads_w, grads_b)

    @staticmethod
    def sum_gradients(*grad_sets):
        grads_w = [sum(parts) for parts in zip(*(gw for gw, _ in grad_sets))]
        grads_b = [sum(parts) for parts in zip(*(gb for _, gb in grad_sets))]
        return grads_w, grads_b

    def apply_gradients(self, grads, lr: float) -> None:
        grads_w, grads_b = grads
        for layer in range(len(self.weights)):
            self.weights[layer] -= lr * grads_w[layer]
            self.biases[layer] -= lr * grads_b[layer]

    def snapshot(self) -> tuple[np.ndarray, ...]:
        return tuple(p.copy() for p in (*self.weights, *self.biases))
