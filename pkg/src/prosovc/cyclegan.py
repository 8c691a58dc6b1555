"""CycleGAN losses, learning-rate schedule, and the per-iteration update.

One ModelPair holds both generators, both discriminators, and their Adam
states for a single feature kind (24-channel spectra or 10-channel prosody
coefficients). Each train_step does one discriminator ascent on the
adversarial objective and then one generator descent on

    adv + lambda_cyc * cycle + lambda_id * identity,

with the identity term active only before `id_cutoff_iters`. The generator
adversarial term defaults to the non-saturating form (minimize
-log D(fake)); set `saturating_adv` for the literal two-sided objective,
which has vanishing gradients early in training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, backward, zero_grads
from .nets import DiscConfig, GenConfig, build_discriminator, build_generator
from .optim import AdamState, DivergenceError, adam_step


@dataclass(frozen=True)
class GanHyper:
    lambda_cyc: float = 10.0
    lambda_id: float = 5.0
    id_cutoff_iters: int = 10_000
    lr_g: float = 2e-4
    lr_d: float = 1e-4
    const_iters: int = 200_000
    decay_iters: int = 200_000
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    crop_frames: int = 128
    total_iters: int = 2000
    prob_clamp: float = 1e-7
    saturating_adv: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("lambda_cyc", "lambda_id", "lr_g", "lr_d", "crop_frames",
                     "const_iters", "decay_iters", "id_cutoff_iters"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)
        if not 0.0 < self.prob_clamp < 0.5:
            raise ValueError("prob_clamp must lie in (0, 0.5)")


@dataclass(frozen=True)
class LossReport:
    iteration: int
    adv_g: float
    adv_d: float
    cyc: float
    id: float
    total_g: float
    total_d: float
    lr_g: float
    lr_d: float

    def require_finite(self):
        for name in ("adv_g", "adv_d", "cyc", "id", "total_g", "total_d"):
            if not math.isfinite(getattr(self, name)):
                raise DivergenceError(
                    "non-finite %s at iteration %d" % (name, self.iteration)
                )
        return self


LOSS_CSV_HEADER = "iter,adv_g,adv_d,cyc,id,total_g,total_d,lr_g,lr_d"


def loss_csv_row(r: LossReport) -> str:
    return "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g" % (
        r.iteration, r.adv_g, r.adv_d, r.cyc, r.id, r.total_g, r.total_d,
        r.lr_g, r.lr_d,
    )


def lr_schedule(iteration: int, h: GanHyper):
    """Constant for const_iters, then linear to zero over decay_iters."""
    if iteration < 0:
        raise ValueError("iteration must be non-negative")
    if iteration < h.const_iters:
        factor = 1.0
    elif iteration >= h.const_iters + h.decay_iters:
        factor = 0.0
    else:
        factor = 1.0 - (iteration - h.const_iters) / h.decay_iters
    return h.lr_g * factor, h.lr_d * factor


def _as_tensors(batch):
    batch = [b if isinstance(b, Tensor) else Tensor(b) for b in batch]
    if not batch:
        raise ValueError("empty batch")
    return batch


def _mean_log(d, batch, clamp_eps):
    terms = [ad.log(ad.clamp(d(u), clamp_eps, 1.0 - clamp_eps)) for u in batch]
    return ad.scale(ad.ssum(ad.concat([ad.flatten(t) for t in terms])), 1.0 / len(terms))


def _mean_log_one_minus(d, batch, clamp_eps):
    terms = [
        ad.log(ad.const_minus(1.0, ad.clamp(d(u), clamp_eps, 1.0 - clamp_eps)))
        for u in batch
    ]
    return ad.scale(ad.ssum(ad.concat([ad.flatten(t) for t in terms])), 1.0 / len(terms))


def adv_loss(d, real_batch, fake_batch, clamp_eps: float = 1e-7) -> Tensor:
    """E[log D(real)] + E[log(1 - D(fake))], means over the batch.

    The discriminator ascends this; probabilities are clamped to
    [clamp_eps, 1 - clamp_eps] so the logs stay finite.
    """
    real_batch = _as_tensors(real_batch)
    fake_batch = _as_tensors(fake_batch)
    return ad.add(
        _mean_log(d, real_batch, clamp_eps),
        _mean_log_one_minus(d, fake_batch, clamp_eps),
    )


def generator_adv_loss(d, fake_batch, clamp_eps: float = 1e-7,
                       saturating: bool = False) -> Tensor:
    """The term the generator descends for one direction."""
    fake_batch = _as_tensors(fake_batch)
    if saturating:
        return _mean_log_one_minus(d, fake_batch, clamp_eps)
    return ad.scale(_mean_log(d, fake_batch, clamp_eps), -1.0)


def _mean_l1_pairs(pairs):
    terms = [ad.l1_mean(ad.sub(a, b)) for a, b in pairs]
    total = terms[0]
    for t in terms[1:]:
        total = ad.add(total, t)
    return ad.scale(total, 1.0 / len(terms))


def cycle_loss(g_xy, g_yx, x_batch, y_batch) -> Tensor:
    """Mean L1 of both round trips: G_yx(G_xy(x))-x and G_xy(G_yx(y))-y."""
    x_batch = _as_tensors(x_batch)
    y_batch = _as_tensors(y_batch)
    fwd = _mean_l1_pairs([(g_yx(g_xy(x)), x) for x in x_batch])
    bwd = _mean_l1_pairs([(g_xy(g_yx(y)), y) for y in y_batch])
    return ad.add(fwd, bwd)


def identity_loss(g_xy, g_yx, x_batch, y_batch) -> Tensor:
    """Each generator fed its own target-domain input should change nothing."""
    x_batch = _as_tensors(x_batch)
    y_batch = _as_tensors(y_batch)
    fwd = _mean_l1_pairs([(g_yx(x), x) for x in x_batch])
    bwd = _mean_l1_pairs([(g_xy(y), y) for y in y_batch])
    return ad.add(fwd, bwd)


def sample_crop(features, crop_frames: int, rng) -> np.ndarray:
    """Uniformly positioned contiguous (C, crop_frames) crop.

    Utterances shorter than the crop are mirror-padded out to crop length;
    an utterance of exactly crop length is returned as-is.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] < 1:
        raise ValueError("features must be a non-empty (C, T) matrix")
    t = features.shape[1]
    if t < crop_frames:
        return np.pad(features, ((0, 0), (0, crop_frames - t)), mode="reflect")
    if t == crop_frames:
        return features
    start = int(rng.integers(0, t - crop_frames + 1))
    return features[:, start : start + crop_frames]


class ModelPair:
    """Both generators, both discriminators, and their optimizer states."""

    def __init__(self, g_xy, g_yx, d_x, d_y, hyper: GanHyper):
        self.g_xy = g_xy
        self.g_yx = g_yx
        self.d_x = d_x
        self.d_y = d_y
        self.hyper = hyper
        self.opt_g = AdamState(lr=hyper.lr_g, beta1=hyper.beta1,
                               beta2=hyper.beta2, eps=hyper.adam_eps)
        self.opt_d = AdamState(lr=hyper.lr_d, beta1=hyper.beta1,
                               beta2=hyper.beta2, eps=hyper.adam_eps)

    @classmethod
    def build(cls, channels: int, hyper: GanHyper, gen_cfg: GenConfig | None = None,
              disc_cfg: DiscConfig | None = None, seed: int | None = None):
        if gen_cfg is None:
            gen_cfg = GenConfig(channels=channels)
        elif gen_cfg.channels != channels:
            gen_cfg = replace(gen_cfg, channels=channels)
        if disc_cfg is None:
            disc_cfg = DiscConfig(in_channels=channels, in_frames=hyper.crop_frames)
        entropy = hyper.seed if seed is None else seed
        if not isinstance(entropy, np.random.SeedSequence):
            entropy = np.random.SeedSequence(entropy)
        streams = entropy.spawn(4)
        return cls(
            g_xy=build_generator(gen_cfg, np.random.default_rng(streams[0]), "gxy"),
            g_yx=build_generator(gen_cfg, np.random.default_rng(streams[1]), "gyx"),
            d_x=build_discriminator(disc_cfg, np.random.default_rng(streams[2]), "dx"),
            d_y=build_discriminator(disc_cfg, np.random.default_rng(streams[3]), "dy"),
            hyper=hyper,
        )

    def generator_params(self):
        return self.g_xy.parameters() + self.g_yx.parameters()

    def discriminator_params(self):
        return self.d_x.parameters() + self.d_y.parameters()

    def all_params(self):
        return self.generator_params() + self.discriminator_params()


def train_step(m: ModelPair, x_crop, y_crop, h: GanHyper, iteration: int) -> LossReport:
    """One discriminator update, then one generator update on single crops."""
    lr_g, lr_d = lr_schedule(iteration, h)
    x = Tensor(np.asarray(x_crop, dtype=np.float64))
    y = Tensor(np.asarray(y_crop, dtype=np.float64))

    # Discriminators ascend the adversarial objective against frozen fakes.
    fake_y = m.g_xy(x).detach()
    fake_x = m.g_yx(y).detach()
    adv_d = ad.add(
        adv_loss(m.d_y, [y], [fake_y], h.prob_clamp),
        adv_loss(m.d_x, [x], [fake_x], h.prob_clamp),
    )
    d_loss = ad.scale(adv_d, -1.0)
    zero_grads(m.all_params())
    backward(d_loss)
    adam_step(m.discriminator_params(), m.opt_d, lr_d)

    # Generators descend adversarial + weighted cycle (+ identity early on).
    fake_y = m.g_xy(x)
    fake_x = m.g_yx(y)
    cyc = ad.add(
        ad.l1_mean(ad.sub(m.g_yx(fake_y), x)),
        ad.l1_mean(ad.sub(m.g_xy(fake_x), y)),
    )
    adv_g = ad.add(
        generator_adv_loss(m.d_y, [fake_y], h.prob_clamp, h.saturating_adv),
        generator_adv_loss(m.d_x, [fake_x], h.prob_clamp, h.saturating_adv),
    )
    total_g = ad.add(adv_g, ad.scale(cyc, h.lambda_cyc))
    id_active = iteration < h.id_cutoff_iters
    if id_active:
        idl = identity_loss(m.g_xy, m.g_yx, [x], [y])
        total_g = ad.add(total_g, ad.scale(idl, h.lambda_id))
        id_value = idl.item()
    else:
        id_value = 0.0
    zero_grads(m.all_params())
    backward(total_g)
    adam_step(m.generator_params(), m.opt_g, lr_g)

    return LossReport(
        iteration=iteration,
        adv_g=adv_g.item(),
        adv_d=adv_d.item(),
        cyc=cyc.item(),
        id=id_value,
        total_g=total_g.item(),
        total_d=d_loss.item(),
        lr_g=lr_g,
        lr_d=lr_d,
    ).require_finite()
