"""Adversarial, correlation, mean, and composite training losses.

The correlation term is one minus the batch-averaged product of per-feature
z-scores of paired real and generated rows (row i pairs with row i). The mean
term is the L1 distance between the normalized column-sum profile of the full
real training set and that of the current generated batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, constant
from .exceptions import ShapeMismatch
from .tabular import EncodedMatrix

PROB_CLAMP = 1e-7  # discriminator outputs clipped away from {0, 1} before logs
DEFAULT_EPSILON = 1e-5


@dataclass(frozen=True)
class LossConfig:
    """Switches and cached full-training-set statistics for the regularizers."""

    alpha: int
    beta: int
    real_column_sums: np.ndarray
    real_total_sum: float
    real_count: int
    epsilon: float = DEFAULT_EPSILON
    non_saturating: bool = False

    def __post_init__(self):
        if self.alpha not in (0, 1) or self.beta not in (0, 1):
            raise ValueError("alpha and beta are binary switches")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def label(self) -> str:
        return f"c{self.alpha}m{self.beta}"

    @classmethod
    def from_training_matrix(cls, train: EncodedMatrix, alpha: int, beta: int,
                             epsilon: float = DEFAULT_EPSILON,
                             non_saturating: bool = False) -> "LossConfig":
        column_sums = train.data.sum(axis=0)
        return cls(alpha=alpha, beta=beta,
                   real_column_sums=column_sums,
                   real_total_sum=float(column_sums.sum()),
                   real_count=train.n_rows,
                   epsilon=epsilon,
                   non_saturating=non_saturating)


def discriminator_loss(d_real: Tensor, d_fake: Tensor) -> Tensor:
    """Negated value function: -[mean log D(x) + mean log(1 - D(G(z)))]."""
    real_term = d_real.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).log().mean()
    fake_term = (1.0 - d_fake).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).log().mean()
    return -(real_term + fake_term)


def generator_adversarial_loss(d_fake: Tensor, non_saturating: bool = False) -> Tensor:
    if non_saturating:
        return -d_fake.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).log().mean()
    return (1.0 - d_fake).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).log().mean()


def correlation_loss(real_batch: np.ndarray, fake_batch: Tensor,
                     epsilon: float = DEFAULT_EPSILON) -> Tensor:
    """1 - (1/(B*m)) sum of paired z-score products; real batch is constant."""
    if real_batch.shape != fake_batch.shape:
        raise ShapeMismatch(
            f"real {real_batch.shape} vs fake {fake_batch.shape}")
    b, m = real_batch.shape
    mu = real_batch.mean(axis=0)
    sigma = real_batch.std(axis=0)  # population form, divisor B
    z_real = (real_batch - mu) / (sigma + epsilon)

    fake_mu = fake_batch.mean(axis=0, keepdims=True)
    centered = fake_batch - fake_mu
    fake_sigma = (centered * centered).mean(axis=0, keepdims=True).sqrt()
    z_fake = centered / (fake_sigma + epsilon)
    return 1.0 - (constant(z_real) * z_fake).sum() * (1.0 / (b * m))


def mean_loss(fake_batch: Tensor, cfg: LossConfig) -> Tensor:
    """L1 gap between real and generated normalized column-sum profiles."""
    if fake_batch.data.shape[1] != cfg.real_column_sums.shape[0]:
        raise ShapeMismatch("fake batch width != real column sums")
    real_profile = cfg.real_column_sums / cfg.real_total_sum
    fake_sums = fake_batch.sum(axis=0)
    total = fake_batch.sum()
    if abs(float(total.data)) < cfg.epsilon:
        # degenerate normalizer: freeze the denominator at +-epsilon
        sign = 1.0 if float(total.data) >= 0 else -1.0
        total = constant(sign * cfg.epsilon)
    fake_profile = fake_sums / total
    return (constant(real_profile) - fake_profile).abs().sum()


def composite_generator_loss(d_fake: Tensor, real_batch: np.ndarray,
                             fake_batch: Tensor, cfg: LossConfig) -> Tensor:
    loss = generator_adversarial_loss(d_fake, cfg.non_saturating)
    if cfg.alpha:
        loss = loss + correlation_loss(real_batch, fake_batch, cfg.epsilon)
    if cfg.beta:
        loss = loss + mean_loss(fake_batch, cfg)
    return loss


def vae_composite_loss(reconstruction: Tensor, kld: Tensor,
                       real_batch: np.ndarray, fake_batch: Tensor,
                       cfg: LossConfig) -> Tensor:
    loss = reconstruction + kld
    if cfg.alpha:
        loss = loss + correlation_loss(real_batch, fake_batch, cfg.epsilon)
    if cfg.beta:
        loss = loss + mean_loss(fake_batch, cfg)
    return loss
