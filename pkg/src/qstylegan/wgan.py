"""WGAN-GP training over a classical or style-based quantum generator.

Loss orientation:

* critic minimizes ``mean D(real) - mean D(G(xi)) + lambda * mean (||grad D(x_hat)|| - 1)**2``;
* generator minimizes ``mean D(G(xi))``.

The critic therefore scores generated samples high and real samples low, and
the gradient penalty is always driven toward zero.
"""
from __future__ import annotations

import csv
import enum
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels, ansatz, qgrad
from .ansatz import GeneratorConfig, StyleParams
from .errors import ArgumentError, ConfigurationError
from .latent_data import LatentDataset, batches, make_rng
from .neural import MlpDiscriminator, MlpGenerator


class GeneratorKind(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM_SIMPLE = "quantum_simple"
    QUANTUM_BEL = "quantum_bel"


@dataclass
class TrainConfig:
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.9
    lambda_gp: float = 10.0
    n_critic: int = 1
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    generator_kind: GeneratorKind = GeneratorKind.QUANTUM_BEL
    adam_eps: float = 1e-8
    quantum_init_scale: float = 1.0

    def __post_init__(self):
        try:
            self.generator_kind = GeneratorKind(getattr(self.generator_kind, "value", self.generator_kind))
        except ValueError:
            raise ConfigurationError(f"unknown generator kind {self.generator_kind!r}") from None
        for name in ("learning_rate", "lambda_gp", "adam_eps"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name in ("beta1", "beta2"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must lie in (0, 1)")
        if self.n_critic < 1 or self.batch_size < 1:
            raise ConfigurationError("n_critic and batch_size must be >= 1")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator_kind"] = self.generator_kind.value
        return d


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def adam_update(state: AdamState, params, grads, config: TrainConfig):
    """One bias-corrected Adam step. Pure: returns ``(new_params, new_state)``."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ArgumentError("params, grads and Adam moments must have the same length")
    b1, b2 = config.beta1, config.beta2
    t = state.step + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ArgumentError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        new_params.append(p - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(new_m, new_v, t)


class Adam:
    """Stateful wrapper applying ``adam_update`` to a network's parameter tensors."""

    def __init__(self, network, config: TrainConfig):
        self.network = network
        self.config = config
        self.state = AdamState.zeros_like(network.parameters())

    def step(self, grads) -> None:
        # in-place form of adam_update; the two must stay numerically identical
        c = self.config
        st = self.state
        st.step += 1
        corr1 = 1 - c.beta1 ** st.step
        corr2 = 1 - c.beta2 ** st.step
        for p, g, m, v in zip(self.network.parameters(), grads, st.m, st.v):
            _kernels.adam_inplace(p, g, m, v, c.beta1, c.beta2, c.learning_rate, corr1, corr2, c.adam_eps)


# ---------------------------------------------------------------------------
# generators


class QuantumGenerator:
    """Style-based circuit generator with the network-style interface used by training."""

    def __init__(self, config: GeneratorConfig, params: StyleParams):
        params.check(config)
        self.config = config
        self.params = params
        self._noise = None

    @classmethod
    def initialize(cls, config: GeneratorConfig, rng: np.random.Generator, scale: float = 1.0):
        return cls(config, StyleParams.random(config, rng, scale))

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim

    def parameters(self):
        return [self.params.W, self.params.b]

    def set_parameters(self, values) -> None:
        self.params.W[...] = values[0]
        self.params.b[...] = values[1]

    def param_count(self) -> int:
        return self.params.size

    def draw_noise(self, n_samples: int, rng: np.random.Generator):
        return ansatz.draw_noise(self.config, n_samples, rng)

    def forward(self, noise, train: bool = True):
        self._noise = np.atleast_2d(noise)
        return ansatz.apply_output_scale(
            self.config, ansatz.raw_latent(self.config, self.params, self._noise))

    def backward(self, dout):
        dW, db, _ = qgrad.style_vjp(self.config, self.params, self._noise, dout)
        return [dW, db]


def _latent_dim(g) -> int:
    return g.latent_dim if isinstance(g, QuantumGenerator) else g.d_latent


def build_generator(config: TrainConfig, d_latent: int, rng: np.random.Generator,
                    gen_config: GeneratorConfig | None = None):
    if config.generator_kind is GeneratorKind.CLASSICAL:
        return MlpGenerator(d_latent, rng)
    kind = "simple" if config.generator_kind is GeneratorKind.QUANTUM_SIMPLE else "bel"
    if gen_config is None:
        n_qb = d_latent // 2 if d_latent % 2 == 0 else d_latent
        gen_config = GeneratorConfig(kind, n_qb, 2, "dual" if d_latent % 2 == 0 else "single")
    elif gen_config.kind.value != kind:
        raise ConfigurationError(
            f"generator_kind {config.generator_kind.value} disagrees with ansatz {gen_config.kind.value}")
    if gen_config.latent_dim != d_latent:
        raise ConfigurationError(
            f"quantum generator latent dim {gen_config.latent_dim} != dataset dim {d_latent}")
    return QuantumGenerator.initialize(gen_config, rng, config.quantum_init_scale)


def sample(g, n_samples: int, rng: np.random.Generator):
    """Draw samples for evaluation (classical generator in eval mode)."""
    noise = g.draw_noise(n_samples, rng)
    return g.forward(noise, train=False)


# ---------------------------------------------------------------------------
# steps


def interpolate(real_batch, fake_batch, rng: np.random.Generator | None = None, u=None):
    """Per-row ``u * real + (1 - u) * fake`` with ``u ~ Uniform(0, 1)`` unless ``u`` is given."""
    real = np.asarray(real_batch, dtype=float)
    fake = np.asarray(fake_batch, dtype=float)
    if real.shape != fake.shape:
        raise ArgumentError(f"shape mismatch: {real.shape} vs {fake.shape}")
    if u is None:
        u = rng.uniform(0.0, 1.0, size=real.shape[0])
    u = np.broadcast_to(np.asarray(u, dtype=float), (real.shape[0],))[:, None]
    return u * real + (1.0 - u) * fake


def critic_loss_and_grads(d: MlpDiscriminator, real, fake, x_hat, lambda_gp: float):
    """(loss, gradient penalty, parameter gradients) of the critic objective."""
    n = real.shape[0]
    gp, gp_grads, _ = d.penalty(x_hat, lambda_gp)
    scores = d.forward(np.concatenate([real, fake]))
    weights = np.concatenate([np.full(n, 1.0 / n), np.full(fake.shape[0], -1.0 / fake.shape[0])])
    w_grads = d.backward(weights)
    loss = scores[:n].mean() - scores[n:].mean() + gp
    return loss, gp, [a + b for a, b in zip(w_grads, gp_grads)]


def critic_step(d: MlpDiscriminator, g, real_batch, config: TrainConfig, adam: Adam,
                rng: np.random.Generator):
    """One critic update; returns (loss before the update, gradient penalty)."""
    real = np.asarray(real_batch, dtype=float)
    if real.shape[1] != d.d_latent:
        raise ArgumentError(f"real batch width {real.shape[1]} != critic input {d.d_latent}")
    fake = g.forward(g.draw_noise(real.shape[0], rng), train=True)
    x_hat = interpolate(real, fake, rng)
    loss, gp, grads = critic_loss_and_grads(d, real, fake, x_hat, config.lambda_gp)
    adam.step(grads)
    return float(loss), float(gp)


def generator_loss_and_grads(d: MlpDiscriminator, g, noise):
    fake = g.forward(noise, train=True)
    n = fake.shape[0]
    scores, grad = d.scores_and_input_gradient(fake)
    loss = scores.mean()
    dfake = grad / n
    return loss, g.backward(dfake)


def generator_step(d: MlpDiscriminator, g, config: TrainConfig, adam: Adam,
                   rng: np.random.Generator, batch_size: int | None = None):
    """One generator update; returns the loss before the update."""
    noise = g.draw_noise(batch_size or config.batch_size, rng)
    loss, grads = generator_loss_and_grads(d, g, noise)
    adam.step(grads)
    return float(loss)


# ---------------------------------------------------------------------------
# loop


@dataclass
class TrainHistory:
    critic_loss: list = field(default_factory=list)
    gen_loss: list = field(default_factory=list)
    gp_mean: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    critic_updates: int = 0
    generator_updates: int = 0

    def __len__(self) -> int:
        return len(self.critic_loss)

    def to_csv(self, path, include_timing: bool = True) -> None:
        header = ["epoch", "critic_loss", "gen_loss", "gp_mean"] + (["seconds"] if include_timing else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for e in range(len(self)):
                row = [e + 1, repr(self.critic_loss[e]), repr(self.gen_loss[e]), repr(self.gp_mean[e])]
                if include_timing:
                    row.append(f"{self.seconds[e]:.3f}")
                w.writerow(row)


def train(config: TrainConfig, dataset: LatentDataset, gen_config: GeneratorConfig | None = None,
          generator=None, discriminator=None, callback=None):
    """Run the WGAN-GP loop; returns ``(generator, discriminator, history)``.

    Each batch gets ``n_critic`` critic updates followed by one generator
    update; the final partial batch of an epoch is dropped.
    """
    if len(dataset) == 0:
        raise ArgumentError("empty dataset")
    d_latent = dataset.dim
    g = generator if generator is not None else build_generator(
        config, d_latent, make_rng(config.seed, "init/generator"), gen_config)
    d = discriminator if discriminator is not None else MlpDiscriminator(
        d_latent, make_rng(config.seed, "init/discriminator"))
    if _latent_dim(g) != d_latent or d.d_latent != d_latent:
        raise ConfigurationError("generator/critic width does not match the dataset dimension")
    history = TrainHistory()
    if config.epochs == 0:
        return g, d, history

    g_adam, d_adam = Adam(g, config), Adam(d, config)
    noise_rng = make_rng(config.seed, "train/noise")
    shuffle_rng = make_rng(config.seed, "train/shuffle")
    for epoch in range(config.epochs):
        start = time.perf_counter()
        c_losses, g_losses, gps = [], [], []
        for real in batches(dataset, config.batch_size, shuffle=True, rng=shuffle_rng):
            for _ in range(config.n_critic):
                loss, gp = critic_step(d, g, real, config, d_adam, noise_rng)
                c_losses.append(loss)
                gps.append(gp)
                history.critic_updates += 1
            g_losses.append(generator_step(d, g, config, g_adam, noise_rng, real.shape[0]))
            history.generator_updates += 1
        history.critic_loss.append(float(np.mean(c_losses)))
        history.gen_loss.append(float(np.mean(g_losses)))
        history.gp_mean.append(float(np.mean(gps)))
        history.seconds.append(time.perf_counter() - start)
        if callback is not None:
            callback(epoch, g, d, history)
    return g, d, history
