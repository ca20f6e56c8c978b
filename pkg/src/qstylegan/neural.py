"""Dense networks written directly in numpy: the WGAN critic and the classical generator.

The critic supports the exact second-order pass needed by the gradient
penalty. LeakyReLU is piecewise linear, so with the activation masks frozen
the input gradient is a multilinear function of the weights and can be
differentiated in closed form.
"""
from __future__ import annotations

import csv

import numpy as np

from .errors import ArgumentError, ParseError

LEAKY_SLOPE = 0.2
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def _slope(pre):
    # kink at exactly 0 takes the negative-side slope
    return np.where(pre > 0, 1.0, LEAKY_SLOPE)


def leaky_relu(x):
    return np.maximum(x, LEAKY_SLOPE * x)


class DenseLayer:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator | None = None):
        bound = 1.0 / np.sqrt(n_in)
        if rng is None:
            self.weights = np.zeros((n_out, n_in))
        else:
            self.weights = rng.uniform(-bound, bound, size=(n_out, n_in))
        self.bias = np.zeros(n_out)
        self._x = None

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]

    def parameters(self):
        return [self.weights, self.bias]

    def forward(self, x):
        self._x = x
        return x @ self.weights.T + self.bias

    def backward(self, dy):
        grads = [dy.T @ self._x, dy.sum(axis=0)]
        return dy @ self.weights, grads


class BatchNormLayer:
    def __init__(self, n_features: int, eps: float = BN_EPS, momentum: float = BN_MOMENTUM):
        self.gamma = np.ones(n_features)
        self.beta = np.zeros(n_features)
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)
        self.eps = eps
        self.momentum = momentum
        self._cache = None

    def parameters(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [self.running_mean, self.running_var]

    def forward(self, x, train: bool):
        if train:
            n = x.shape[0]
            if n < 2:
                raise ArgumentError("batch normalization in train mode needs a batch of at least 2")
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + self.eps)
            x_hat = (x - mean) * inv_std
            self._cache = (x_hat, inv_std)
            m = self.momentum
            self.running_mean[...] = (1 - m) * self.running_mean + m * mean
            self.running_var[...] = (1 - m) * self.running_var + m * var * n / (n - 1)
        else:
            x_hat = (x - self.running_mean) / np.sqrt(self.running_var + self.eps)
            self._cache = None
        return self.gamma * x_hat + self.beta

    def backward(self, dy):
        if self._cache is None:
            raise ArgumentError("backward through batch norm requires a train-mode forward pass")
        x_hat, inv_std = self._cache
        grads = [(dy * x_hat).sum(axis=0), dy.sum(axis=0)]
        dx_hat = dy * self.gamma
        dx = inv_std * (dx_hat - dx_hat.mean(axis=0) - x_hat * (dx_hat * x_hat).mean(axis=0))
        return dx, grads


class _Network:
    def parameters(self):
        raise NotImplementedError

    def buffers(self):
        return []

    def set_parameters(self, values) -> None:
        params = self.parameters()
        if len(values) != len(params):
            raise ArgumentError(f"expected {len(params)} tensors, got {len(values)}")
        for p, v in zip(params, values):
            p[...] = v

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())


class MlpDiscriminator(_Network):
    """Critic with dense widths [512, 256, 1] and LeakyReLU(0.2) between layers."""

    HIDDEN = (512, 256)

    def __init__(self, d_latent: int, rng: np.random.Generator | None = None,
                 hidden=HIDDEN):
        widths = (d_latent, *hidden, 1)
        self.d_latent = d_latent
        self.layers = [DenseLayer(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]
        self._pre = None
        self._scores = None

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def _check(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.d_latent:
            raise ArgumentError(f"critic expects {self.d_latent} columns, got {x.shape[1]}")
        return x

    def forward(self, x):
        h = self._check(x)
        pre = []
        for layer in self.layers[:-1]:
            z = layer.forward(h)
            pre.append(z)
            h = leaky_relu(z)
        self._pre = pre
        return self.layers[-1].forward(h)[:, 0]

    def backward(self, dscore):
        """Parameter gradients of ``sum(dscore * D(x))`` for the last ``forward`` batch."""
        dy = np.asarray(dscore, dtype=float)[:, None]
        grads = []
        for i in range(len(self.layers) - 1, -1, -1):
            dy, g = self.layers[i].backward(dy)
            grads = g + grads
            if i > 0:
                dy = dy * _slope(self._pre[i - 1])
        return grads

    def _masked_chain(self, x):
        """Activation slopes, the backward chain ``g_i`` and the input gradient for each row of ``x``.

        The scores of the underlying forward pass are kept in ``self._scores``.
        """
        self._scores = self.forward(x)
        slopes = [_slope(z) for z in self._pre]
        chain = [None] * len(self.layers)
        g = np.broadcast_to(self.layers[-1].weights[0], (x.shape[0], self.layers[-1].n_in))
        for i in range(len(self.layers) - 2, -1, -1):
            g = g * slopes[i]
            chain[i] = g
            g = g @ self.layers[i].weights
        return slopes, chain, g

    def input_gradient(self, x):
        """Rows of d D(x) / d x."""
        x = self._check(x)
        return self._masked_chain(x)[2]

    def scores_and_input_gradient(self, x):
        """``(D(x), d D(x) / d x)`` from a single forward pass."""
        x = self._check(x)
        grad = self._masked_chain(x)[2]
        return self._scores, grad

    def penalty(self, x_hat, lam: float):
        """``lam * mean((||grad_x D(x_hat)||_2 - 1)**2)`` and its exact parameter gradients."""
        x_hat = self._check(x_hat)
        n = x_hat.shape[0]
        slopes, chain, gx = self._masked_chain(x_hat)
        norms = np.sqrt((gx ** 2).sum(axis=1))
        value = lam * np.mean((norms - 1.0) ** 2)
        safe = np.where(norms > 0, norms, 1.0)
        coef = np.where(norms > 0, 2.0 * lam / n * (norms - 1.0) / safe, 0.0)
        c = coef[:, None] * gx  # dP/d(gx)

        # gx = chain[0] @ W_0 ; chain[i] = slopes[i] * (chain[i+1] @ W_{i+1}) ; chain[last] = w_out
        grads = [None] * (2 * len(self.layers))
        upstream = c
        for i in range(len(self.layers) - 1):
            layer = self.layers[i]
            grads[2 * i] = chain[i].T @ upstream
            grads[2 * i + 1] = np.zeros_like(layer.bias)
            upstream = (upstream @ layer.weights.T) * slopes[i]
        last = self.layers[-1]
        grads[-2] = upstream.sum(axis=0)[None, :]
        grads[-1] = np.zeros_like(last.bias)
        return value, grads, norms


class MlpGenerator(_Network):
    """Dense widths [128, 256, 512, 1024, D_l]; batch norm after layers 2-4; noise width D_l."""

    HIDDEN = (128, 256, 512, 1024)
    BATCH_NORM_AFTER = (1, 2, 3)

    def __init__(self, d_latent: int, rng: np.random.Generator | None = None,
                 hidden=HIDDEN, batch_norm_after=BATCH_NORM_AFTER):
        widths = (d_latent, *hidden, d_latent)
        self.d_latent = d_latent
        self.dense = [DenseLayer(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]
        self.norms = {i: BatchNormLayer(widths[i + 1]) for i in batch_norm_after}
        self._pre = None

    def parameters(self):
        out = []
        for i, layer in enumerate(self.dense):
            out += layer.parameters()
            if i in self.norms:
                out += self.norms[i].parameters()
        return out

    def buffers(self):
        return [b for i in sorted(self.norms) for b in self.norms[i].buffers()]

    def set_buffers(self, values):
        for b, v in zip(self.buffers(), values):
            b[...] = v

    def forward(self, noise, train: bool = True):
        h = np.atleast_2d(np.asarray(noise, dtype=float))
        if h.shape[1] != self.d_latent:
            raise ArgumentError(f"generator expects noise width {self.d_latent}, got {h.shape[1]}")
        pre = []
        last = len(self.dense) - 1
        for i, layer in enumerate(self.dense):
            h = layer.forward(h)
            if i in self.norms:
                h = self.norms[i].forward(h, train)
            if i < last:
                pre.append(h)
                h = leaky_relu(h)
        self._pre = pre
        return h

    def backward(self, dout):
        """Parameter gradients of ``sum(dout * G(noise))`` for the last train-mode forward."""
        dy = np.asarray(dout, dtype=float)
        grads = []
        for i in range(len(self.dense) - 1, -1, -1):
            if i < len(self.dense) - 1:
                dy = dy * _slope(self._pre[i])
            g_norm = []
            if i in self.norms:
                dy, g_norm = self.norms[i].backward(dy)
            dy, g = self.dense[i].backward(dy)
            grads = g + g_norm + grads
        return grads

    def draw_noise(self, n_samples: int, rng: np.random.Generator):
        return rng.standard_normal(size=(n_samples, self.d_latent))


# ---------------------------------------------------------------------------
# functional surface


def disc_forward(d: MlpDiscriminator, x):
    return d.forward(x)


def disc_input_gradient(d: MlpDiscriminator, x):
    """Gradient of the scalar critic score w.r.t. a single input row."""
    x = np.asarray(x, dtype=float)
    return d.input_gradient(x[None, :] if x.ndim == 1 else x)[0]


def penalty_param_gradient(d: MlpDiscriminator, x_hat, lam: float = 10.0):
    """(penalty value, parameter gradients in ``d.parameters()`` order)."""
    value, grads, _ = d.penalty(x_hat, lam)
    return value, grads


def gen_forward(g: MlpGenerator, noise, mode: str = "train"):
    mode = mode.lower()
    if mode not in ("train", "eval"):
        raise ArgumentError(f"mode must be 'train' or 'eval', got {mode!r}")
    return g.forward(noise, train=mode == "train")


def param_count(network) -> int:
    return network.param_count()


# ---------------------------------------------------------------------------
# checkpoint


def _shape_token(shape):
    return "x".join(str(s) for s in shape)


def save_network(path, network) -> None:
    """Flat CSV: kind/latent-dim row, shape rows, then one value per line (trainables, then buffers)."""
    kind = "generator" if isinstance(network, MlpGenerator) else "discriminator"
    params = network.parameters()
    buffers = network.buffers()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["network", kind, network.d_latent])
        w.writerow(["shapes"] + [_shape_token(p.shape) for p in params])
        w.writerow(["buffers"] + [_shape_token(b.shape) for b in buffers])
        for t in params + buffers:
            for v in t.ravel():
                w.writerow([repr(float(v))])


def load_network(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or rows[0][0] != "network" or rows[1][0] != "shapes" or rows[2][0] != "buffers":
        raise ParseError("not a network checkpoint", line=1)
    kind, d_latent = rows[0][1], int(rows[0][2])
    if kind == "generator":
        net = MlpGenerator(d_latent)
    elif kind == "discriminator":
        net = MlpDiscriminator(d_latent)
    else:
        raise ParseError(f"unknown network kind {kind!r}", line=1)
    params, buffers = net.parameters(), net.buffers()
    if rows[1][1:] != [_shape_token(p.shape) for p in params]:
        raise ParseError("parameter shapes do not match the network layout", line=2)
    try:
        flat = np.array([float(r[0]) for r in rows[3:]])
    except (ValueError, IndexError):
        raise ParseError("non-numeric checkpoint value") from None
    expected = sum(t.size for t in params + buffers)
    if flat.size != expected:
        raise ParseError(f"expected {expected} values, got {flat.size}")
    pos = 0
    for t in params + buffers:
        t[...] = flat[pos:pos + t.size].reshape(t.shape)
        pos += t.size
    return net
