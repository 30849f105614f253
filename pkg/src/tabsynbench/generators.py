"""Trainable generative models over encoded tables.

All three generators follow the sklearn estimator idiom: hyperparameters in
``__init__`` (so ``get_params`` works), ``fit(table)``, then ``sample(n, seed)``.
The GAN and VAE train on the one-hot + min-max encoding; the output head is
sigmoid on continuous blocks and per-block softmax on categorical blocks, so
raw outputs stay non-negative and the regularizer profiles are well defined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .autodiff import Tensor, constant
from .exceptions import InsufficientData, NonFiniteLoss
from .losses import (
    LossConfig,
    composite_generator_loss,
    correlation_loss,
    discriminator_loss,
    generator_adversarial_loss,
    mean_loss,
    vae_composite_loss,
)
from .nn import Adam, Mlp, init_mlp
from .tabular import EncodedMatrix, Table, build_layout, decode, encode

FULL_SCALE = {"batch_size": 16000, "epochs": 3000}  # named preset, not the default


@dataclass
class EpochLog:
    epoch: int
    components: dict[str, float]


def _output_head(raw: Tensor, layout) -> Tensor:
    """Map raw generator output onto the encoding space, block by block."""
    parts = []
    for block in layout:
        chunk = raw.cols(block.offset, block.offset + block.width)
        if block.width > 1:
            parts.append(chunk.softmax_rows())
        else:
            parts.append(chunk.sigmoid())
    return Tensor.hcat(parts)


def _output_head_numpy(raw: np.ndarray, layout) -> np.ndarray:
    out = np.empty_like(raw)
    for block in layout:
        chunk = raw[:, block.offset:block.offset + block.width]
        if block.width > 1:
            e = np.exp(chunk - chunk.max(axis=1, keepdims=True))
            out[:, block.offset:block.offset + block.width] = (
                e / e.sum(axis=1, keepdims=True))
        else:
            out[:, block.offset] = 1.0 / (1.0 + np.exp(-chunk[:, 0]))
    return out


def _check_finite(value: float, epoch: int, what: str) -> None:
    if not np.isfinite(value):
        raise NonFiniteLoss(f"{what} non-finite at epoch {epoch}", epoch=epoch)


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n - batch_size + 1, batch_size):
        yield perm[start:start + batch_size]


class _FittedSampler:
    """Frozen parameter snapshot plus the machinery to draw tables from it."""

    def __init__(self, kind: str, schema, layout, state: dict, seed: int,
                 training_log: list[EpochLog]):
        self.kind = kind
        self.schema = schema
        self.layout = layout
        self.state = state
        self.seed = seed
        self.training_log = training_log

    def sample_encoded(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise ValueError("need n >= 1 samples")
        rng = np.random.default_rng(seed)
        if self.kind == "independent":
            m = sum(b.width for b in self.layout)
            data = np.zeros((n, m))
            for block, spec in zip(self.layout, self.schema.columns):
                marginal = self.state["marginals"][block.column_index]
                if spec.is_categorical:
                    idx = rng.choice(block.width, size=n, p=marginal)
                    data[np.arange(n), block.offset + idx] = 1.0
                else:
                    u = rng.uniform(0.0, 1.0, size=n)
                    data[:, block.offset] = np.quantile(marginal, u)
            return data
        net: Mlp = self.state["net"]
        z = rng.standard_normal((n, self.state["latent_dim"]))
        raw = net.forward_numpy(z)
        return _output_head_numpy(raw, self.layout)

    def sample(self, n: int, seed: int) -> Table:
        data = self.sample_encoded(n, seed)
        return decode(EncodedMatrix(data, self.layout, self.schema))


class _GenerativeEstimator(BaseEstimator):
    """Shared fit/sample surface; subclasses implement ``_fit_encoded``."""

    kind = "base"

    def fit(self, table: Table, y=None):
        self._fitted = self._fit(table)
        return self

    def sample(self, n: int, seed: int) -> Table:
        self._require_fitted()
        return self._fitted.sample(n, seed)

    def sample_encoded(self, n: int, seed: int) -> np.ndarray:
        self._require_fitted()
        return self._fitted.sample_encoded(n, seed)

    @property
    def training_log(self) -> list[EpochLog]:
        self._require_fitted()
        return self._fitted.training_log

    @property
    def schema_(self):
        self._require_fitted()
        return self._fitted.schema

    def _require_fitted(self):
        if not hasattr(self, "_fitted"):
            raise RuntimeError(f"{type(self).__name__} is not fitted")


class GanGenerator(_GenerativeEstimator):
    kind = "gan"

    def __init__(self, latent_dim=32, generator_dims=(64, 64),
                 discriminator_dims=(64, 64), batch_size=128, epochs=300,
                 d_steps_per_g_step=1, alpha=0, beta=0, epsilon=1e-5,
                 non_saturating=False, lr=2e-4, weight_decay=1e-5, seed=0,
                 checkpoint_every=0):
        self.latent_dim = latent_dim
        self.generator_dims = generator_dims
        self.discriminator_dims = discriminator_dims
        self.batch_size = batch_size
        self.epochs = epochs
        self.d_steps_per_g_step = d_steps_per_g_step
        self.alpha = alpha
        self.beta = beta
        self.epsilon = epsilon
        self.non_saturating = non_saturating
        self.lr = lr
        self.weight_decay = weight_decay
        self.seed = seed
        self.checkpoint_every = checkpoint_every

    def _fit(self, table: Table) -> _FittedSampler:
        if self.epochs < 1 or self.batch_size < 2 or self.latent_dim < 1:
            raise ValueError("epochs >= 1, batch_size >= 2, latent_dim >= 1")
        train = encode(table)
        if train.n_rows < self.batch_size:
            raise InsufficientData(
                f"{train.n_rows} rows < batch_size {self.batch_size}")
        m = train.width
        cfg = LossConfig.from_training_matrix(
            train, self.alpha, self.beta, self.epsilon, self.non_saturating)

        gen = init_mlp([self.latent_dim, *self.generator_dims, m],
                       ["relu"] * len(self.generator_dims) + ["identity"],
                       seed=self.seed)
        disc = init_mlp([m, *self.discriminator_dims, 1],
                        ["leaky_relu"] * len(self.discriminator_dims) + ["sigmoid"],
                        seed=self.seed + 1)
        g_opt = Adam(gen.parameters(), lr=self.lr, weight_decay=self.weight_decay)
        d_opt = Adam(disc.parameters(), lr=self.lr, weight_decay=self.weight_decay)

        rng = np.random.default_rng(self.seed)
        log: list[EpochLog] = []
        self.checkpoints_ = []
        for epoch in range(self.epochs):
            sums = {"discriminator": 0.0, "adversarial": 0.0,
                    "correlation": 0.0, "mean": 0.0}
            n_batches = 0
            for idx in _batches(train.n_rows, self.batch_size, rng):
                real = train.data[idx]
                for _ in range(self.d_steps_per_g_step):
                    z = rng.standard_normal((self.batch_size, self.latent_dim))
                    fake_data = _output_head_numpy(gen.forward_numpy(z), train.layout)
                    d_real = disc.forward(constant(real))
                    d_fake = disc.forward(constant(fake_data))
                    d_loss = discriminator_loss(d_real, d_fake)
                    d_opt.zero_grad()
                    d_loss.backward()
                    d_opt.step()

                z = rng.standard_normal((self.batch_size, self.latent_dim))
                fake = _output_head(gen.forward(constant(z)), train.layout)
                d_fake = disc.forward(fake)
                g_loss = composite_generator_loss(d_fake, real, fake, cfg)
                g_opt.zero_grad()
                d_opt.zero_grad()  # generator step must not pollute D moments
                g_loss.backward()
                g_opt.step()

                sums["discriminator"] += float(d_loss.data)
                sums["adversarial"] += float(
                    generator_adversarial_loss(d_fake, cfg.non_saturating).data)
                sums["correlation"] += float(
                    correlation_loss(real, fake, cfg.epsilon).data)
                sums["mean"] += float(mean_loss(fake, cfg).data)
                n_batches += 1

            components = {k: v / n_batches for k, v in sums.items()}
            for name, value in components.items():
                _check_finite(value, epoch, name)
            log.append(EpochLog(epoch, components))
            if self.checkpoint_every and (
                    (epoch + 1) % self.checkpoint_every == 0
                    or epoch == self.epochs - 1):
                self.checkpoints_.append((epoch, gen.snapshot()))

        return _FittedSampler(
            self.kind, table.schema, train.layout,
            {"net": gen, "latent_dim": self.latent_dim}, self.seed, log)

    def sampler_from_snapshot(self, epoch_snapshot) -> _FittedSampler:
        """Sampler for a saved generator checkpoint (for optimal-vs-last)."""
        self._require_fitted()
        _, arrays = epoch_snapshot
        m = sum(b.width for b in self._fitted.layout)
        net = init_mlp([self.latent_dim, *self.generator_dims, m],
                       ["relu"] * len(self.generator_dims) + ["identity"],
                       seed=self.seed)
        net.load_snapshot(arrays)
        return _FittedSampler(self.kind, self._fitted.schema, self._fitted.layout,
                              {"net": net, "latent_dim": self.latent_dim},
                              self.seed, self._fitted.training_log)


class VaeGenerator(_GenerativeEstimator):
    kind = "vae"

    def __init__(self, latent_dim=16, encoder_dims=(64, 64), decoder_dims=(64, 64),
                 batch_size=128, epochs=300, alpha=0, beta=0, epsilon=1e-5,
                 lr=2e-4, weight_decay=1e-5, seed=0, checkpoint_every=0):
        self.latent_dim = latent_dim
        self.encoder_dims = encoder_dims
        self.decoder_dims = decoder_dims
        self.batch_size = batch_size
        self.epochs = epochs
        self.alpha = alpha
        self.beta = beta
        self.epsilon = epsilon
        self.lr = lr
        self.weight_decay = weight_decay
        self.seed = seed
        self.checkpoint_every = checkpoint_every

    def _fit(self, table: Table) -> _FittedSampler:
        if self.epochs < 1 or self.batch_size < 2 or self.latent_dim < 1:
            raise ValueError("epochs >= 1, batch_size >= 2, latent_dim >= 1")
        train = encode(table)
        if train.n_rows < self.batch_size:
            raise InsufficientData(
                f"{train.n_rows} rows < batch_size {self.batch_size}")
        m = train.width
        cfg = LossConfig.from_training_matrix(
            train, self.alpha, self.beta, self.epsilon)

        encoder = init_mlp([m, *self.encoder_dims, 2 * self.latent_dim],
                           ["relu"] * len(self.encoder_dims) + ["identity"],
                           seed=self.seed)
        decoder = init_mlp([self.latent_dim, *self.decoder_dims, m],
                           ["relu"] * len(self.decoder_dims) + ["identity"],
                           seed=self.seed + 1)
        opt = Adam(encoder.parameters() + decoder.parameters(),
                   lr=self.lr, weight_decay=self.weight_decay)

        rng = np.random.default_rng(self.seed)
        log: list[EpochLog] = []
        self.checkpoints_ = []
        for epoch in range(self.epochs):
            sums = {"reconstruction": 0.0, "kld": 0.0,
                    "correlation": 0.0, "mean": 0.0}
            n_batches = 0
            for idx in _batches(train.n_rows, self.batch_size, rng):
                real = train.data[idx]
                stats = encoder.forward(constant(real))
                mu = stats.cols(0, self.latent_dim)
                logvar = stats.cols(self.latent_dim, 2 * self.latent_dim)
                noise = rng.standard_normal((self.batch_size, self.latent_dim))
                z = mu + (logvar * 0.5).exp() * constant(noise)
                recon_raw = decoder.forward(z)
                recon = _output_head(recon_raw, train.layout)
                recon_loss = ((recon - constant(real)) ** 2).mean()
                kld = ((mu ** 2 + logvar.exp() - 1.0 - logvar) * 0.5
                       ).sum(axis=1).mean()

                prior = rng.standard_normal((self.batch_size, self.latent_dim))
                fake = _output_head(decoder.forward(constant(prior)), train.layout)
                loss = vae_composite_loss(recon_loss, kld, real, fake, cfg)
                opt.zero_grad()
                loss.backward()
                opt.step()

                sums["reconstruction"] += float(recon_loss.data)
                sums["kld"] += float(kld.data)
                sums["correlation"] += float(
                    correlation_loss(real, fake, cfg.epsilon).data)
                sums["mean"] += float(mean_loss(fake, cfg).data)
                n_batches += 1

            components = {k: v / n_batches for k, v in sums.items()}
            for name, value in components.items():
                _check_finite(value, epoch, name)
            log.append(EpochLog(epoch, components))
            if self.checkpoint_every and (
                    (epoch + 1) % self.checkpoint_every == 0
                    or epoch == self.epochs - 1):
                self.checkpoints_.append((epoch, decoder.snapshot()))

        return _FittedSampler(
            self.kind, table.schema, train.layout,
            {"net": decoder, "latent_dim": self.latent_dim}, self.seed, log)

    def sampler_from_snapshot(self, epoch_snapshot) -> _FittedSampler:
        self._require_fitted()
        _, arrays = epoch_snapshot
        m = sum(b.width for b in self._fitted.layout)
        net = init_mlp([self.latent_dim, *self.decoder_dims, m],
                       ["relu"] * len(self.decoder_dims) + ["identity"],
                       seed=self.seed + 1)
        net.load_snapshot(arrays)
        return _FittedSampler(self.kind, self._fitted.schema, self._fitted.layout,
                              {"net": net, "latent_dim": self.latent_dim},
                              self.seed, self._fitted.training_log)


class IndependentGenerator(_GenerativeEstimator):
    """Per-column marginal sampler; columns are independent by construction."""

    kind = "independent"

    def __init__(self, seed=0):
        self.seed = seed

    def _fit(self, table: Table) -> _FittedSampler:
        if len(table) == 0:
            raise InsufficientData("empty training table")
        train = encode(table)
        marginals = {}
        for block, spec in zip(train.layout, table.schema.columns):
            if spec.is_categorical:
                counts = train.data[:, block.offset:block.offset + block.width
                                    ].sum(axis=0)
                marginals[block.column_index] = counts / counts.sum()
            else:
                marginals[block.column_index] = np.sort(
                    train.data[:, block.offset].copy())
        log = [EpochLog(0, {"fitted": 1.0})]
        return _FittedSampler(self.kind, table.schema, train.layout,
                              {"marginals": marginals}, self.seed, log)


def serialize_generator(estimator: _GenerativeEstimator) -> str:
    """JSON round trip for a fitted neural generator's sampling state."""
    fitted = estimator._fitted
    doc = {"kind": fitted.kind, "seed": fitted.seed,
           "schema": fitted.schema.to_json()}
    if fitted.kind == "independent":
        doc["marginals"] = {
            str(k): np.asarray(v).tolist()
            for k, v in fitted.state["marginals"].items()}
    else:
        net: Mlp = fitted.state["net"]
        doc["latent_dim"] = fitted.state["latent_dim"]
        doc["dims"] = [net.in_dim] + [w.shape[1] for w, _, _ in net.layers]
        doc["activations"] = [act for _, _, act in net.layers]
        doc["parameters"] = [p.data.tolist() for p in net.parameters()]
    return json.dumps(doc)


def load_generator_sampler(payload: str) -> _FittedSampler:
    doc = json.loads(payload)
    from .tabular import TableSchema
    schema = TableSchema.from_json(doc["schema"])
    layout = build_layout(schema)
    if doc["kind"] == "independent":
        state = {"marginals": {int(k): np.array(v)
                               for k, v in doc["marginals"].items()}}
    else:
        net = init_mlp(doc["dims"], doc["activations"], seed=0)
        net.load_snapshot([np.array(a) for a in doc["parameters"]])
        state = {"net": net, "latent_dim": doc["latent_dim"]}
    return _FittedSampler(doc["kind"], schema, layout, state, doc["seed"], [])
