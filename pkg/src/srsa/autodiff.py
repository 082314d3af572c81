"""A small reverse-mode tape over numpy arrays.

Only the primitives the agents need are provided. Every op records its
inputs, a forward function and a vector-Jacobian product, so the tape can be
differentiated (``gradient``) and re-executed from its leaves (``replay``).
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit, logsumexp


class Var:
    __slots__ = ("value", "index")

    def __init__(self, value, index):
        self.value = value
        self.index = index

    @property
    def shape(self):
        return self.value.shape


class GradTape:
    def __init__(self):
        self._nodes = []  # (forward, vjp, inputs) or None for leaves
        self._values = []

    def __len__(self):
        return len(self._nodes)

    def leaf(self, value) -> Var:
        var = Var(np.array(value, dtype=float), len(self._nodes))
        self._nodes.append(None)
        self._values.append(var.value)
        return var

    def _record(self, forward, vjp, *inputs) -> Var:
        vals = [x.value if isinstance(x, Var) else x for x in inputs]
        var = Var(forward(*vals), len(self._nodes))
        self._nodes.append((forward, vjp, inputs))
        self._values.append(var.value)
        return var

    # -- primitives ---------------------------------------------------------

    def affine(self, x, W, b):
        """x @ W.T + b over the last axis of ``x``."""
        def fwd(x, W, b):
            return x @ W.T + b

        def vjp(g, out, x, W, b):
            g2 = g.reshape(-1, g.shape[-1])
            x2 = x.reshape(-1, x.shape[-1])
            return g @ W, g2.T @ x2, g2.sum(axis=0)
        return self._record(fwd, vjp, x, W, b)

    def relu(self, x):
        return self._record(lambda x: np.maximum(x, 0.0),
                            lambda g, out, x: (g * (x > 0),), x)

    def sigmoid(self, x):
        return self._record(expit, lambda g, out, x: (g * out * (1.0 - out),), x)

    def log_sigmoid(self, x):
        return self._record(lambda x: -np.logaddexp(0.0, -x),
                            lambda g, out, x: (g * expit(-x),), x)

    def exp(self, x):
        return self._record(np.exp, lambda g, out, x: (g * out,), x)

    def log(self, x):
        return self._record(np.log, lambda g, out, x: (g / x,), x)

    def scale(self, x, c: float):
        return self._record(lambda x: c * x, lambda g, out, x: (c * g,), x)

    def add(self, a, b):
        def vjp(g, out, a, b):
            return _unbroadcast(g, np.shape(a)), _unbroadcast(g, np.shape(b))
        return self._record(lambda a, b: a + b, vjp, a, b)

    def log_normalize(self, x, axis: int):
        """x - logsumexp(x, axis): log of a normalised distribution along ``axis``."""
        def fwd(x):
            return x - logsumexp(x, axis=axis, keepdims=True)

        def vjp(g, out, x):
            return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)
        return self._record(fwd, vjp, x)

    def matmul_left(self, Z, x):
        """Batched Z @ x with constant ``Z`` (the similarity-weighted sum)."""
        def vjp(g, out, Z, x):
            return None, np.swapaxes(Z, -1, -2) @ g
        return self._record(lambda Z, x: Z @ x, vjp, Z, x)

    def take(self, x, index):
        """Advanced-index gather ``x[index]``."""
        def vjp(g, out, x):
            full = np.zeros_like(x)
            np.add.at(full, index, g)
            return (full,)
        return self._record(lambda x: x[index], vjp, x)

    def weighted_sum(self, x, weights):
        w = np.asarray(weights, dtype=float)
        return self._record(lambda x: np.sum(x * w), lambda g, out, x: (g * w,), x)

    # -- evaluation ----------------------------------------------------------

    def gradient(self, output: Var, wrt) -> list:
        """d output / d leaf for each leaf in ``wrt`` (``output`` must be scalar)."""
        if np.size(output.value) != 1:
            raise ValueError("gradient needs a scalar output")
        values = self._values
        grads = [None] * (output.index + 1)
        grads[output.index] = np.ones_like(output.value)
        for i in range(output.index, -1, -1):
            node, g = self._nodes[i], grads[i]
            if node is None or g is None:
                continue
            _, vjp, inputs = node
            in_vals = [values[x.index] if isinstance(x, Var) else x for x in inputs]
            for x, gx in zip(inputs, vjp(g, values[i], *in_vals)):
                if isinstance(x, Var) and gx is not None:
                    grads[x.index] = gx if grads[x.index] is None else grads[x.index] + gx
        return [np.zeros_like(values[v.index]) if grads[v.index] is None else grads[v.index]
                for v in wrt]

    def replay(self, leaf_values: dict | None = None) -> list:
        """Re-run every op from the leaves; ``leaf_values`` maps leaf index to a new value."""
        values = []
        for i, node in enumerate(self._nodes):
            if node is None:
                v = self._values[i] if not leaf_values or i not in leaf_values else np.asarray(leaf_values[i], float)
            else:
                fwd, _, inputs = node
                v = fwd(*[values[x.index] if isinstance(x, Var) else x for x in inputs])
            values.append(v)
        return values


def _unbroadcast(g, shape):
    if g.shape == tuple(shape):
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g
