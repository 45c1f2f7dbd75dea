"""Adversarial training of the colorizer on anchor-frame pairs.

Training data comes from the frames that travel with full chroma: the
luma input is the codec-decoded (lossy) plane, matching exactly what
the decoder-side generator will see, while the chroma target is
pristine. Each step optionally updates the discriminator, then updates
the generator on the weighted mixed objective. Everything is seeded and
single-threaded, so a (config, pairs, seed) triple always reproduces
bit-identical weights.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import codec, losses, network
from . import tensor as T
from .colorspace import Frame, SubsamplingMode
from .errors import ConfigError, DimensionError, NumericError


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-8
    steps: int = 1
    seed: int = 0
    weights: losses.LossWeights = field(default_factory=losses.LossWeights)
    d_steps_per_g_step: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.steps < 0:
            raise ConfigError(f"steps must be nonnegative, got {self.steps}")
        if self.d_steps_per_g_step < 0:
            raise ConfigError("d_steps_per_g_step must be nonnegative")


@dataclass(frozen=True)
class TrainingPair:
    """Decoded luma input and pristine chroma target, both in [-1, 1]."""

    luma: np.ndarray  # (1, 1, H, W)
    chroma: np.ndarray  # (1, 2, H, W)

    def __post_init__(self):
        if self.luma.ndim != 4 or self.chroma.ndim != 4:
            raise DimensionError("training pair arrays must be N×C×H×W")
        if self.luma.shape[2:] != self.chroma.shape[2:]:
            raise DimensionError(
                f"luma {self.luma.shape} and chroma {self.chroma.shape} dims differ"
            )


class AdamState:
    """First/second moment buffers for one parameter list."""

    def __init__(self, tensors):
        self.m = [np.zeros_like(t.data) for t in tensors]
        self.v = [np.zeros_like(t.data) for t in tensors]
        self.t = 0


def adam_step(tensors, state: AdamState, config: TrainConfig) -> None:
    """One bias-corrected Adam update in place; missing grads count as zero."""
    state.t += 1
    b1, b2 = config.beta1, config.beta2
    correct1 = 1.0 - b1**state.t
    correct2 = 1.0 - b2**state.t
    for t, m, v in zip(tensors, state.m, state.v):
        g = t.grad if t.grad is not None else 0.0
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        t.data -= config.learning_rate * (m / correct1) / (
            np.sqrt(v / correct2) + config.epsilon
        )


def build_training_set(frames, gop, qp: int):
    """Anchor-frame pairs: codec-decoded luma inputs, pristine chroma targets."""
    params = codec.CodecParams(qp=qp)
    pairs = []
    for idx in gop.anchors:
        frame: Frame = frames[idx]
        if frame.mode is not SubsamplingMode.S444:
            raise ConfigError("training frames must be 4:4:4")
        w, h = frame.y.width, frame.y.height
        decoded = codec.decode_plane(codec.encode_plane(frame.y.samples, params), (w, h), params)
        luma = network.luma_to_unit(decoded)[None, None]
        chroma = np.stack(
            [
                network.chroma_to_unit(frame.cb.samples),
                network.chroma_to_unit(frame.cr.samples),
            ]
        )[None]
        pairs.append(TrainingPair(luma, chroma))
    return pairs


@dataclass
class StepRecord:
    step: int
    gan: float
    mse: float
    content: float
    color: float
    total: float
    disc: float


def history_to_csv(history) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["step", "L_GAN", "L_MSE", "L_content", "L_color", "L_f", "L_D"])
    for rec in history:
        writer.writerow(
            [rec.step, rec.gan, rec.mse, rec.content, rec.color, rec.total, rec.disc]
        )
    return buf.getvalue()


def _check_finite(value: float, what: str, step: int) -> float:
    if not np.isfinite(value):
        raise NumericError(f"{what} became non-finite at step {step}")
    return value


def _images(luma_t, chroma_t):
    return T.concat([luma_t, chroma_t], axis=1)


def train(
    gen_store: network.WeightStore,
    disc_store: network.WeightStore,
    net_config: network.NetworkConfig,
    pairs,
    config: TrainConfig,
    extractor=None,
):
    """Run the alternating loop; mutates both stores, returns step history.

    Loss components whose weight is zero are skipped entirely (reported
    as 0.0), which also disables the discriminator pass when the
    adversarial weight is zero and d_steps_per_g_step is 0.
    """
    if not pairs:
        raise ConfigError("training needs at least one pair")
    w = config.weights
    if extractor is None and w.content > 0:
        extractor = losses.FeatureExtractor(2, seed=config.seed)

    gen_params = gen_store.tensors()
    disc_params = disc_store.tensors()
    gen_state = AdamState(gen_params)
    disc_state = AdamState(disc_params)
    use_disc = w.gan > 0 or config.d_steps_per_g_step > 0

    history = []
    for step in range(config.steps):
        pair = pairs[step % len(pairs)]
        luma_t = T.Tensor(pair.luma)
        target_t = T.Tensor(pair.chroma)

        gen_out = network.generator_forward(gen_store, net_config, luma_t)

        d_loss_val = 0.0
        if use_disc:
            real = _images(luma_t, target_t)
            fake_detached = _images(luma_t, gen_out.detach())
            for _ in range(config.d_steps_per_g_step):
                d_loss = losses.discriminator_loss(
                    network.discriminator_forward(disc_store, real),
                    network.discriminator_forward(disc_store, fake_detached),
                )
                d_loss_val = _check_finite(d_loss.item(), "discriminator loss", step)
                disc_store.zero_grad()
                T.backward(d_loss)
                adam_step(disc_params, disc_state, config)

        zero = T.Tensor(0.0)
        gan_term = zero
        if w.gan > 0:
            d_fake = network.discriminator_forward(disc_store, _images(luma_t, gen_out))
            gan_term = losses.gan_loss(d_fake)
        mse_term = losses.mse_loss(gen_out, target_t) if w.mse > 0 else zero
        content_term = (
            losses.content_loss(extractor, gen_out, target_t) if w.content > 0 else zero
        )
        color_term = losses.color_loss(gen_out, target_t) if w.color > 0 else zero

        total, _ = losses.mixed_loss(w, gan_term, mse_term, content_term, color_term)
        _check_finite(total.item(), "generator loss", step)
        gen_store.zero_grad()
        T.backward(total)
        adam_step(gen_params, gen_state, config)

        history.append(
            StepRecord(
                step,
                gan_term.item(),
                mse_term.item(),
                content_term.item(),
                color_term.item(),
                total.item(),
                d_loss_val,
            )
        )
    return history
