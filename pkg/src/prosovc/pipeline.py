"""End-to-end orchestration: corpus preparation, training the two feature
CycleGANs, run-time conversion, the log-Gaussian baseline, and objective
metrics.

The spectrum pipeline works on per-dimension z-normalized MCEPs; the
prosody pipeline works on per-scale standardized wavelet coefficients of
normalized log-F0. The two pipelines share no state and train separately.
Conversion is frame-synchronous: frame count, voicing mask and the AP
matrix pass through untouched.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import f0 as f0mod
from . import synth
from .cwt import (
    CwtMatrix,
    ScaleStats,
    compute_scale_stats,
    decompose10,
    destandardize_scales,
    recompose10,
    standardize_scales,
)
from .cyclegan import (
    LOSS_CSV_HEADER,
    GanHyper,
    ModelPair,
    loss_csv_row,
    sample_crop,
    train_step,
)
from .checkpoint import load_model_into, save_model
from .features import UtteranceFeatures, load_features, save_features, voicing_mask
from .f0 import AllUnvoicedError, SpeakerF0Stats
from .nets import DiscConfig, GenConfig


@dataclass(frozen=True)
class McepStats:
    """Per-dimension mean/std of MCEPs over a corpus."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        std = np.ascontiguousarray(self.std, dtype=np.float64)
        if mean.ndim != 1 or mean.shape != std.shape:
            raise ValueError("mcep stats must be matching 1-D arrays")
        if (std <= 0).any() or not np.isfinite(std).all() or not np.isfinite(mean).all():
            raise ValueError("mcep stats must be finite with positive std")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class StatsBundle:
    f0: SpeakerF0Stats
    scales: ScaleStats
    mcep: McepStats


@dataclass
class SpeakerCorpus:
    """Utterances plus every statistic the pipelines need, precomputed."""

    utterances: list
    names: list
    f0_stats: SpeakerF0Stats
    scale_stats: ScaleStats
    mcep_stats: McepStats
    norm_mcep: list  # per utterance, (D_mcep, T)
    std_cwt: list  # per utterance, (10, T)
    rejected: list  # (name, reason) for utterances left out of the stats

    @property
    def stats(self) -> StatsBundle:
        return StatsBundle(f0=self.f0_stats, scales=self.scale_stats, mcep=self.mcep_stats)


def prepare_corpus(utterances, names=None) -> SpeakerCorpus:
    """Run the preprocessing chain and pool corpus statistics.

    All-unvoiced utterances cannot enter the F0 chain; they are recorded in
    the reject report rather than silently dropped.
    """
    utterances = list(utterances)
    if not utterances:
        raise ValueError("empty corpus")
    if names is None:
        names = ["utt%03d" % i for i in range(len(utterances))]
    names = list(names)
    if len(names) != len(utterances):
        raise ValueError("got %d names for %d utterances" % (len(names), len(utterances)))

    kept, kept_names, rejected = [], [], []
    logs, masks = [], []
    for name, u in zip(names, utterances):
        mask = voicing_mask(u.f0)
        if not mask.any():
            rejected.append((name, "all frames unvoiced"))
            continue
        kept.append(u)
        kept_names.append(name)
        masks.append(mask)
        logs.append(f0mod.to_log(f0mod.interpolate_unvoiced(u.f0)))
    if not kept:
        raise AllUnvoicedError("every utterance in the corpus is unvoiced")

    f0_stats = f0mod.compute_stats(zip(logs, masks))
    matrices = [
        decompose10(f0mod.normalize(lg, f0_stats), u.frame_period_ms)
        for lg, u in zip(logs, kept)
    ]
    scale_stats = compute_scale_stats(matrices)
    std_cwt = [standardize_scales(m, scale_stats).coeffs.T.copy() for m in matrices]

    pooled_mcep = np.concatenate([u.mcep for u in kept], axis=0)
    std = pooled_mcep.std(axis=0)
    if (std <= 0).any():
        raise ValueError("zero variance in at least one MCEP dimension")
    mcep_stats = McepStats(mean=pooled_mcep.mean(axis=0), std=std)
    norm_mcep = [((u.mcep - mcep_stats.mean) / mcep_stats.std).T.copy() for u in kept]

    return SpeakerCorpus(
        utterances=kept,
        names=kept_names,
        f0_stats=f0_stats,
        scale_stats=scale_stats,
        mcep_stats=mcep_stats,
        norm_mcep=norm_mcep,
        std_cwt=std_cwt,
        rejected=rejected,
    )


def make_synthetic_corpus(spec: synth.SynthSpec, seed: int):
    """Generate and prepare one corpus per speaker; seeded, reproducible."""
    sx, sy = np.random.SeedSequence(seed).spawn(2)
    utts_x = synth.make_utterances(spec.speaker_x, spec, spec.n_utterances,
                                   np.random.default_rng(sx))
    utts_y = synth.make_utterances(spec.speaker_y, spec, spec.n_utterances,
                                   np.random.default_rng(sy))
    return prepare_corpus(utts_x), prepare_corpus(utts_y)


FEATURE_KINDS = ("spectrum", "prosody")


def _training_features(corpus: SpeakerCorpus, kind: str):
    if kind == "spectrum":
        return corpus.norm_mcep
    if kind == "prosody":
        return corpus.std_cwt
    raise ValueError("kind must be one of %s, got %r" % (FEATURE_KINDS, kind))


def train_pipeline(corpus_x: SpeakerCorpus, corpus_y: SpeakerCorpus, kind: str,
                   hyper: GanHyper, gen_cfg: GenConfig | None = None,
                   disc_cfg: DiscConfig | None = None, out_dir=None,
                   log_stride: int = 1, checkpoint_stride: int | None = None,
                   on_report=None) -> ModelPair:
    """Train one CycleGAN on random crops drawn independently per speaker.

    Writes `losses.csv` and `{kind}_*.vcm` checkpoints under `out_dir` when
    given. On divergence the last periodic checkpoint stays on disk and the
    error propagates.
    """
    feats_x = _training_features(corpus_x, kind)
    feats_y = _training_features(corpus_y, kind)
    channels = feats_x[0].shape[0]
    if feats_y[0].shape[0] != channels:
        raise ValueError("speaker feature dimensions disagree")

    model_seed, loop_seed = np.random.SeedSequence(hyper.seed).spawn(2)
    pair = ModelPair.build(channels, hyper, gen_cfg, disc_cfg, seed=model_seed)
    rng = np.random.default_rng(loop_seed)
    if checkpoint_stride is None:
        checkpoint_stride = max(1, hyper.total_iters // 4)

    log_fh = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, "losses.csv")
        fresh = not os.path.exists(log_path) or os.path.getsize(log_path) == 0
        log_fh = open(log_path, "a")
        if fresh:
            log_fh.write(LOSS_CSV_HEADER + "\n")
    try:
        for it in range(hyper.total_iters):
            cx = sample_crop(feats_x[int(rng.integers(len(feats_x)))], hyper.crop_frames, rng)
            cy = sample_crop(feats_y[int(rng.integers(len(feats_y)))], hyper.crop_frames, rng)
            report = train_step(pair, cx, cy, hyper, it)
            if log_fh is not None and it % log_stride == 0:
                log_fh.write(loss_csv_row(report) + "\n")
            if on_report is not None:
                on_report(report)
            if out_dir is not None and (it + 1) % checkpoint_stride == 0:
                save_model_pair(pair, out_dir, kind)
        if out_dir is not None:
            save_model_pair(pair, out_dir, kind)
    finally:
        if log_fh is not None:
            log_fh.close()
    return pair


@dataclass
class ConversionModels:
    spectrum: ModelPair
    prosody: ModelPair
    x_stats: StatsBundle
    y_stats: StatsBundle
    x_label: str = "x"
    y_label: str = "y"


DIRECTIONS = ("x2y", "y2x")


def _pick_direction(models: ConversionModels, direction: str):
    if direction == "x2y":
        return models.spectrum.g_xy, models.prosody.g_xy, models.x_stats, models.y_stats
    if direction == "y2x":
        return models.spectrum.g_yx, models.prosody.g_yx, models.y_stats, models.x_stats
    raise ValueError("direction must be one of %s, got %r" % (DIRECTIONS, direction))


def run_generator(gen, features: np.ndarray) -> np.ndarray:
    """Apply a generator to a (C, T) matrix of any T.

    The frame axis is mirror-padded up to the next multiple of the
    generator's downsampling factor and trimmed back afterwards.
    """
    from .autodiff import Tensor

    c, t = features.shape
    factor = gen.downsample_factor
    pad = (-t) % factor
    if pad:
        features = np.pad(features, ((0, 0), (0, pad)), mode="reflect")
    out = gen(Tensor(features)).data
    return out[:, :t]


def convert_utterance(u: UtteranceFeatures, models: ConversionModels,
                      direction: str) -> UtteranceFeatures:
    """Frame-synchronous conversion of one utterance.

    MCEPs go through the spectrum generator between source-side
    normalization and target-side denormalization. F0 goes through
    interpolation, log, source normalization, the ten-scale decomposition,
    source standardization, the prosody generator, then the inverse chain
    with target statistics. APs are copied from the source verbatim.
    """
    g_sp, g_pr, src, tgt = _pick_direction(models, direction)
    mask = voicing_mask(u.f0)
    if not mask.any():
        raise AllUnvoicedError("cannot convert an all-unvoiced utterance")

    norm = ((u.mcep - src.mcep.mean) / src.mcep.std).T
    conv = run_generator(g_sp, norm).T
    mcep_out = conv * tgt.mcep.std + tgt.mcep.mean

    cont = f0mod.interpolate_unvoiced(u.f0)
    norm_log = f0mod.normalize(f0mod.to_log(cont), src.f0)
    cwtm = standardize_scales(decompose10(norm_log, u.frame_period_ms), src.scales)
    conv_coeffs = run_generator(g_pr, cwtm.coeffs.T).T
    dest = destandardize_scales(
        CwtMatrix(conv_coeffs, u.frame_period_ms), tgt.scales
    )
    logf0 = f0mod.denormalize(recompose10(dest), tgt.f0)
    f0_out = f0mod.reapply_voicing(np.exp(logf0), mask)

    return UtteranceFeatures(
        frame_period_ms=u.frame_period_ms,
        sample_rate_hz=u.sample_rate_hz,
        f0=f0_out,
        mcep=mcep_out,
        ap=u.ap,
    )


def lg_convert_utterance(u: UtteranceFeatures, src: StatsBundle, tgt: StatsBundle,
                         spectrum_gen=None) -> UtteranceFeatures:
    """Baseline conversion: log-Gaussian F0 transform, MCEPs through the
    spectrum generator when given (passthrough in ablation mode), APs copied."""
    mask = voicing_mask(u.f0)
    if not mask.any():
        raise AllUnvoicedError("cannot convert an all-unvoiced utterance")
    if spectrum_gen is not None:
        norm = ((u.mcep - src.mcep.mean) / src.mcep.std).T
        mcep_out = run_generator(spectrum_gen, norm).T * tgt.mcep.std + tgt.mcep.mean
    else:
        mcep_out = u.mcep
    return UtteranceFeatures(
        frame_period_ms=u.frame_period_ms,
        sample_rate_hz=u.sample_rate_hz,
        f0=f0mod.lg_convert(u.f0, src.f0, tgt.f0),
        mcep=mcep_out,
        ap=u.ap,
    )


class MetricsError(ValueError):
    pass


MCD_CONST = 10.0 / math.log(10.0)


def metrics(ref: UtteranceFeatures, hyp: UtteranceFeatures) -> dict:
    """Mel-cepstral distortion (dB), F0 RMSE (Hz) and F0 Pearson correlation.

    F0 statistics use only frames voiced in both utterances; with no such
    frames (or a constant contour) the correlation is undefined and this
    raises MetricsError.
    """
    if ref.n_frames != hyp.n_frames:
        raise MetricsError("frame counts disagree: %d vs %d" % (ref.n_frames, hyp.n_frames))
    if ref.d_mcep != hyp.d_mcep:
        raise MetricsError("MCEP dimensions disagree")
    diff = ref.mcep - hyp.mcep
    mcd = MCD_CONST * float(np.mean(np.sqrt(2.0 * (diff * diff).sum(axis=1))))

    both = (ref.f0 > 0) & (hyp.f0 > 0)
    if both.sum() < 2:
        raise MetricsError("correlation undefined: fewer than two mutually voiced frames")
    a = ref.f0[both]
    b = hyp.f0[both]
    rmse = float(np.sqrt(np.mean((a - b) ** 2)))
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        raise MetricsError("correlation undefined: constant voiced contour")
    corr = float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))
    return {"mcd_db": mcd, "f0_rmse_hz": rmse, "f0_corr": corr}


# ---------------------------------------------------------------------------
# corpus / model directory layout


def _write_channel_stats(path, comment, mean, std, n_voiced=None):
    with open(path, "w") as fh:
        fh.write("# %s\n" % comment)
        if n_voiced is not None:
            fh.write("n_voiced=%d\n" % n_voiced)
        for i, v in enumerate(mean, start=1):
            fh.write("mean_%d=%r\n" % (i, float(v)))
        for i, v in enumerate(std, start=1):
            fh.write("std_%d=%r\n" % (i, float(v)))


def _read_channel_stats(path):
    mean, std = {}, {}
    extra = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key.startswith("mean_"):
                mean[int(key[5:])] = float(value)
            elif key.startswith("std_"):
                std[int(key[4:])] = float(value)
            else:
                extra[key] = value
    n = len(mean)
    if n == 0 or sorted(mean) != list(range(1, n + 1)) or sorted(std) != list(range(1, n + 1)):
        raise ValueError("malformed channel stats file %s" % path)
    return (
        np.array([mean[i] for i in range(1, n + 1)]),
        np.array([std[i] for i in range(1, n + 1)]),
        extra,
    )


def save_corpus(corpus: SpeakerCorpus, dir_path) -> None:
    os.makedirs(dir_path, exist_ok=True)
    for name, u in zip(corpus.names, corpus.utterances):
        save_features(u, os.path.join(dir_path, name + ".vcf"))
    f0mod.save_stats(corpus.f0_stats, os.path.join(dir_path, "stats.txt"))
    _write_channel_stats(
        os.path.join(dir_path, "scale_stats.txt"),
        "per-scale wavelet coefficient statistics",
        corpus.scale_stats.mean,
        corpus.scale_stats.std,
    )
    _write_channel_stats(
        os.path.join(dir_path, "mcep_stats.txt"),
        "per-dimension MCEP statistics",
        corpus.mcep_stats.mean,
        corpus.mcep_stats.std,
    )
    with open(os.path.join(dir_path, "rejects.txt"), "w") as fh:
        fh.write("# utterances excluded from corpus statistics\n")
        for name, reason in corpus.rejected:
            fh.write("%s\t%s\n" % (name, reason))


def load_utterance_dir(dir_path):
    """All .vcf files in a directory, sorted by name."""
    names = sorted(
        fn[:-4] for fn in os.listdir(dir_path) if fn.endswith(".vcf")
    )
    if not names:
        raise FileNotFoundError("no .vcf files under %s" % dir_path)
    utts = [load_features(os.path.join(dir_path, n + ".vcf")) for n in names]
    return utts, names


def load_corpus_dir(dir_path) -> SpeakerCorpus:
    utts, names = load_utterance_dir(dir_path)
    return prepare_corpus(utts, names)


def load_stats_bundle(dir_path) -> StatsBundle:
    f0_stats = f0mod.load_stats(os.path.join(dir_path, "stats.txt"))
    smean, sstd, _ = _read_channel_stats(os.path.join(dir_path, "scale_stats.txt"))
    mmean, mstd, _ = _read_channel_stats(os.path.join(dir_path, "mcep_stats.txt"))
    return StatsBundle(
        f0=f0_stats,
        scales=ScaleStats(mean=smean, std=sstd),
        mcep=McepStats(mean=mmean, std=mstd),
    )


_PAIR_FILES = {"g_xy": "%s_gxy.vcm", "g_yx": "%s_gyx.vcm", "d_x": "%s_dx.vcm", "d_y": "%s_dy.vcm"}


def save_model_pair(pair: ModelPair, dir_path, kind: str) -> None:
    os.makedirs(dir_path, exist_ok=True)
    for attr, pattern in _PAIR_FILES.items():
        save_model(getattr(pair, attr), os.path.join(dir_path, pattern % kind))


def load_model_pair(dir_path, kind: str, channels: int, hyper: GanHyper,
                    gen_cfg: GenConfig | None = None,
                    disc_cfg: DiscConfig | None = None) -> ModelPair:
    pair = ModelPair.build(channels, hyper, gen_cfg, disc_cfg)
    for attr, pattern in _PAIR_FILES.items():
        load_model_into(getattr(pair, attr), os.path.join(dir_path, pattern % kind))
    return pair
