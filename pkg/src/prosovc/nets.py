"""Generator and discriminator architectures for the feature CycleGANs.

The generator is a 1-D CNN over (channels, frames): an input convolution,
stride-2 downsampling blocks, residual blocks, nearest-neighbour upsampling
blocks that reverse the downsampling, and an output convolution. Every
block gates with a GLU, so convolutions produce twice the working width.
The map is shape-preserving as long as the frame count is divisible by the
total downsampling factor.

The discriminator treats the (channels, frames) matrix as a one-channel 2-D
image: strided conv2d+GLU blocks, then a dense layer and a sigmoid, so its
output lies strictly in (0, 1). Block counts and widths are configuration,
not ground truth; the defaults are desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    Parameter,
    Tensor,
    add,
    conv1d,
    conv2d,
    dense,
    flatten,
    gated_linear_unit,
    instance_norm,
    reshape,
    sigmoid,
    upsample1d,
)

WEIGHT_INIT_STD = 0.02


@dataclass(frozen=True)
class GenConfig:
    channels: int
    width: int = 64
    n_down: int = 2
    n_res: int = 3
    n_up: int = 2
    kernel_size: int = 5
    down_kernel: int = 4
    use_instance_norm: bool = True
    norm_eps: float = 1e-9


@dataclass(frozen=True)
class DiscConfig:
    in_channels: int
    in_frames: int
    width: int = 32
    n_blocks: int = 2
    kernel_size: int = 3
    norm_eps: float = 1e-9


class _Conv1d:
    def __init__(self, rng, name, cin, cout, k, stride=1, pad=0):
        self.w = Parameter(rng.normal(0.0, WEIGHT_INIT_STD, (cout, cin, k)), name + ".w")
        self.b = Parameter(np.zeros(cout), name + ".b")
        self.stride = stride
        self.pad = pad

    def __call__(self, x):
        return conv1d(x, self.w, self.b, self.stride, self.pad)

    def params(self):
        return [self.w, self.b]


class _Conv2d:
    def __init__(self, rng, name, cin, cout, k, stride=1, pad=0):
        self.w = Parameter(rng.normal(0.0, WEIGHT_INIT_STD, (cout, cin, k, k)), name + ".w")
        self.b = Parameter(np.zeros(cout), name + ".b")
        self.stride = stride
        self.pad = pad

    def __call__(self, x):
        return conv2d(x, self.w, self.b, self.stride, self.pad)

    def params(self):
        return [self.w, self.b]


class _Dense:
    def __init__(self, rng, name, n_in, n_out):
        self.w = Parameter(rng.normal(0.0, WEIGHT_INIT_STD, (n_out, n_in)), name + ".w")
        self.b = Parameter(np.zeros(n_out), name + ".b")

    def __call__(self, x):
        return dense(x, self.w, self.b)

    def params(self):
        return [self.w, self.b]


class Generator:
    """Shape-preserving map from (C, T) to (C, T)."""

    def __init__(self, cfg: GenConfig, rng, prefix: str = "g"):
        self.cfg = cfg
        w = cfg.width
        k = cfg.kernel_size
        pad = (k - 1) // 2
        self.conv_in = _Conv1d(rng, prefix + ".in", cfg.channels, 2 * w, k, 1, pad)
        self.down = [
            _Conv1d(rng, "%s.down%d" % (prefix, i), w, 2 * w, cfg.down_kernel, 2,
                    (cfg.down_kernel - 1) // 2)
            for i in range(cfg.n_down)
        ]
        self.res = [
            (
                _Conv1d(rng, "%s.res%d.a" % (prefix, i), w, 2 * w, 3, 1, 1),
                _Conv1d(rng, "%s.res%d.b" % (prefix, i), w, w, 3, 1, 1),
            )
            for i in range(cfg.n_res)
        ]
        self.up = [
            _Conv1d(rng, "%s.up%d" % (prefix, i), w, 2 * w, k, 1, pad)
            for i in range(cfg.n_up)
        ]
        self.conv_out = _Conv1d(rng, prefix + ".out", w, cfg.channels, k, 1, pad)

    @property
    def downsample_factor(self) -> int:
        return 2 ** self.cfg.n_down

    def parameters(self):
        out = list(self.conv_in.params())
        for layer in self.down:
            out += layer.params()
        for a, b in self.res:
            out += a.params() + b.params()
        for layer in self.up:
            out += layer.params()
        return out + self.conv_out.params()

    def _norm(self, h):
        if self.cfg.use_instance_norm:
            return instance_norm(h, self.cfg.norm_eps)
        return h

    def __call__(self, x: Tensor) -> Tensor:
        c, t = x.data.shape
        if c != self.cfg.channels:
            raise ValueError("generator expects %d channels, got %d" % (self.cfg.channels, c))
        if t % self.downsample_factor != 0:
            raise ValueError(
                "frame count %d not divisible by downsample factor %d"
                % (t, self.downsample_factor)
            )
        h = gated_linear_unit(self.conv_in(x))
        for layer in self.down:
            h = gated_linear_unit(self._norm(layer(h)))
        for conv_a, conv_b in self.res:
            r = gated_linear_unit(self._norm(conv_a(h)))
            r = self._norm(conv_b(r))
            h = add(h, r)
        for layer in self.up:
            h = gated_linear_unit(self._norm(layer(upsample1d(h, 2))))
        return self.conv_out(h)


class Discriminator:
    """Map from (C, T) to a single probability in (0, 1)."""

    def __init__(self, cfg: DiscConfig, rng, prefix: str = "d"):
        if cfg.in_frames < 2 ** cfg.n_blocks:
            raise ValueError("input smaller than the discriminator receptive field")
        self.cfg = cfg
        k = cfg.kernel_size
        pad = (k - 1) // 2
        self.blocks = []
        cin, h, t = 1, cfg.in_channels, cfg.in_frames
        for i in range(cfg.n_blocks):
            self.blocks.append(
                _Conv2d(rng, "%s.block%d" % (prefix, i), cin, 2 * cfg.width, k, 2, pad)
            )
            cin = cfg.width
            h = (h + 2 * pad - k) // 2 + 1
            t = (t + 2 * pad - k) // 2 + 1
        self._flat_dim = cfg.width * h * t
        self.head = _Dense(rng, prefix + ".head", self._flat_dim, 1)

    def parameters(self):
        out = []
        for block in self.blocks:
            out += block.params()
        return out + self.head.params()

    def __call__(self, x: Tensor) -> Tensor:
        c, t = x.data.shape
        if c != self.cfg.in_channels or t != self.cfg.in_frames:
            raise ValueError(
                "discriminator expects (%d, %d), got (%d, %d)"
                % (self.cfg.in_channels, self.cfg.in_frames, c, t)
            )
        h = reshape(x, (1, c, t))
        for block in self.blocks:
            h = gated_linear_unit(instance_norm(block(h), self.cfg.norm_eps))
        return sigmoid(self.head(flatten(h)))


def build_generator(cfg: GenConfig, rng, prefix: str = "g") -> Generator:
    return Generator(cfg, rng, prefix)


def build_discriminator(cfg: DiscConfig, rng, prefix: str = "d") -> Discriminator:
    return Discriminator(cfg, rng, prefix)


def parameter_count(model) -> int:
    return sum(p.data.size for p in model.parameters())
