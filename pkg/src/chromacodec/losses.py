"""Training objectives: adversarial, pixel, feature, and color terms.

The generator objective is a weighted sum

    L = a1·L_gan + a2·L_mse + a3·L_content + a4·L_color

with default weights (1, 100, 1000, 100). The color term filters both
images with unnormalized Gaussian kernels whose amplitudes differ
slightly (0.062 for generated, 0.065 for target), deliberately asking
the generator for slightly brighter output than a plain MSE fit would.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigError, DimensionError
from .network import _rng_for

LOG_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    gan: float = 1.0
    mse: float = 100.0
    content: float = 1000.0
    color: float = 100.0

    def __post_init__(self):
        for name in ("gan", "mse", "content", "color"):
            if getattr(self, name) < 0:
                raise ConfigError(f"loss weight {name} must be nonnegative")


# ablation groups: every group keeps the adversarial and pixel terms
LOSS_GROUPS = {
    "G1": LossWeights(1.0, 100.0, 0.0, 0.0),
    "G2": LossWeights(1.0, 100.0, 0.0, 100.0),
    "G3": LossWeights(1.0, 100.0, 1000.0, 0.0),
    "G4": LossWeights(1.0, 100.0, 1000.0, 100.0),
}


def gan_loss(d_out: T.Tensor) -> T.Tensor:
    """Generator-side adversarial term: mean over patches of -log D."""
    return T.scale(T.mean(T.log_floor(d_out, LOG_EPS)), -1.0)


def discriminator_loss(d_real: T.Tensor, d_fake: T.Tensor) -> T.Tensor:
    """Mean of -log D(real) - log(1 - D(fake))."""
    real_term = T.mean(T.log_floor(d_real, LOG_EPS))
    fake_term = T.mean(T.log_floor(T.scale(d_fake, -1.0) + T.Tensor(1.0), LOG_EPS))
    return T.scale(real_term + fake_term, -1.0)


def mse_loss(gen: T.Tensor, target: T.Tensor) -> T.Tensor:
    """Per-element mean squared difference."""
    if gen.shape != target.shape:
        raise DimensionError(f"mse_loss shapes differ: {gen.shape} vs {target.shape}")
    return T.mean(T.square(gen - target))


@dataclass(frozen=True)
class GaussianKernel:
    """Unnormalized Gaussian tap grid; amplitude is the center value."""

    values: np.ndarray
    theta: float
    sigma: float

    @property
    def size(self) -> int:
        return self.values.shape[0]


def gaussian_kernel(theta: float, sigma: float = 3.0, size: int = 21) -> GaussianKernel:
    """G(k,l) = theta * exp(-k^2/(2*sigma) - l^2/(2*sigma)), centered."""
    if size % 2 == 0 or size < 1:
        raise ConfigError(f"kernel size must be odd and positive, got {size}")
    if theta <= 0 or sigma <= 0:
        raise ConfigError("theta and sigma must be positive")
    half = size // 2
    k = np.arange(-half, half + 1, dtype=np.float64)
    one_d = np.exp(-(k * k) / (2.0 * sigma))
    grid = theta * np.outer(one_d, one_d)
    return GaussianKernel(grid, float(theta), float(sigma))


def _filter_same(x: T.Tensor, kernel: GaussianKernel) -> T.Tensor:
    """Depthwise same-padded filtering with one shared kernel per channel."""
    channels = x.shape[1]
    k = kernel.size
    w = np.zeros((channels, channels, k, k))
    for c in range(channels):
        w[c, c] = kernel.values
    return T.conv2d(x, T.Tensor(w), None, stride=1, padding=k // 2)


def color_loss(
    gen: T.Tensor,
    target: T.Tensor,
    theta_gen: float = 0.062,
    theta_target: float = 0.065,
    sigma: float = 3.0,
    size: int = 21,
) -> T.Tensor:
    """Squared difference of Gaussian-filtered images, mean-normalized."""
    if gen.shape != target.shape:
        raise DimensionError(f"color_loss shapes differ: {gen.shape} vs {target.shape}")
    a = _filter_same(gen, gaussian_kernel(theta_gen, sigma, size))
    b = _filter_same(target, gaussian_kernel(theta_target, sigma, size))
    return T.mean(T.square(a - b))


class FeatureExtractor:
    """Frozen convolutional pyramid used as the content-feature map.

    Four stride-2 3×3 convolutions with ReLU, seeded random weights,
    standing in for a pre-trained deep feature layer. Weights may also
    be supplied explicitly (one (w, b) array pair per layer) to plug in
    imported features instead.
    """

    def __init__(self, in_channels: int, seed: int = 0, widths=(8, 16, 32, 32), layers=None):
        self.layers = []
        if layers is not None:
            for w, b in layers:
                self.layers.append((T.Tensor(w), T.Tensor(b)))
            return
        cin = in_channels
        for i, cout in enumerate(widths):
            rng = _rng_for(seed, f"feat{i}")
            bound = 1.0 / np.sqrt(cin * 9)
            w = rng.uniform(-bound, bound, size=(cout, cin, 3, 3))
            self.layers.append((T.Tensor(w), T.Tensor(np.zeros(cout))))
            cin = cout

    def __call__(self, x: T.Tensor) -> T.Tensor:
        for w, b in self.layers:
            x = T.relu(T.conv2d(x, w, b, stride=2, padding=1))
        return x


def content_loss(extractor, gen: T.Tensor, target: T.Tensor) -> T.Tensor:
    """L1 distance between feature maps, normalized by feature count.

    The target branch is detached: only the generated image receives
    gradient.
    """
    if gen.shape != target.shape:
        raise DimensionError(f"content_loss shapes differ: {gen.shape} vs {target.shape}")
    fg = extractor(gen)
    ft = extractor(target.detach())
    return T.scale(T.l1_norm(fg - ft), 1.0 / fg.size)


def mixed_loss(weights: LossWeights, gan, mse, content, color):
    """Weighted total plus the individual components for logging."""
    parts = {
        "gan": gan,
        "mse": mse,
        "content": content,
        "color": color,
    }
    total = (
        T.scale(gan, weights.gan)
        + T.scale(mse, weights.mse)
        + T.scale(content, weights.content)
        + T.scale(color, weights.color)
    )
    return total, parts
