"""Flat key=value configuration covering training, architecture and the
synthetic-data generator.

Unknown keys, duplicate keys and badly typed values are rejected by name.
``render_config`` writes every key in a fixed order, so
parse -> render -> parse is a fixed point.
"""

from __future__ import annotations

from .cyclegan import GanHyper
from .nets import DiscConfig, GenConfig
from .synth import SpeakerSynthSpec, SynthSpec

# key -> default; the default's Python type is the key's type.
DEFAULTS = {
    # CycleGAN training
    "lambda_cyc": 10.0,
    "lambda_id": 5.0,
    "id_cutoff_iters": 10_000,
    "lr_g": 2e-4,
    "lr_d": 1e-4,
    "const_iters": 200_000,
    "decay_iters": 200_000,
    "beta1": 0.5,
    "beta2": 0.999,
    "adam_eps": 1e-8,
    "crop_frames": 128,
    "total_iters": 2000,
    "prob_clamp": 1e-7,
    "saturating_adv": False,
    "seed": 0,
    "log_stride": 1,
    "checkpoint_stride": 500,
    # generator / discriminator architecture
    "gen_width": 64,
    "gen_down_blocks": 2,
    "gen_res_blocks": 3,
    "gen_up_blocks": 2,
    "gen_kernel": 5,
    "disc_width": 32,
    "disc_blocks": 2,
    "disc_kernel": 3,
    # synthetic corpus
    "synth_utterances": 40,
    "synth_eval_utterances": 12,
    "synth_frames_min": 400,
    "synth_frames_max": 800,
    "synth_d_mcep": 24,
    "synth_d_ap": 1,
    "frame_period_ms": 5.0,
    "sample_rate_hz": 16000,
    "synth_noise_rel": 0.15,
    "synth_mcep_noise": 0.25,
    "x_logf0_mean": 4.70,
    "x_logf0_std": 0.16,
    "x_mcep_shift": -0.5,
    "x_voiced_run": 40.0,
    "x_unvoiced_run": 10.0,
    "y_logf0_mean": 5.20,
    "y_logf0_std": 0.18,
    "y_mcep_shift": 0.5,
    "y_voiced_run": 40.0,
    "y_unvoiced_run": 10.0,
}

_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


class ConfigError(ValueError):
    pass


class Config:
    """Typed view over DEFAULTS with per-key overrides."""

    def __init__(self, values=None):
        self._values = dict(DEFAULTS)
        if values:
            for key, value in values.items():
                if key not in DEFAULTS:
                    raise ConfigError("unknown config key %r" % key)
                self._values[key] = value

    def __getattr__(self, key):
        try:
            return self._values[key]
        except KeyError:
            raise AttributeError(key) from None

    def __getitem__(self, key):
        return self._values[key]

    def __eq__(self, other):
        return isinstance(other, Config) and self._values == other._values

    def replace(self, **kwargs) -> "Config":
        merged = dict(self._values)
        for key, value in kwargs.items():
            if key not in DEFAULTS:
                raise ConfigError("unknown config key %r" % key)
            merged[key] = value
        return Config(merged)


def _convert(key, text):
    default = DEFAULTS[key]
    text = text.strip()
    if isinstance(default, bool):
        try:
            return _BOOL_WORDS[text.lower()]
        except KeyError:
            raise ConfigError("key %r expects a boolean, got %r" % (key, text)) from None
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError("key %r expects an integer, got %r" % (key, text)) from None
    try:
        return float(text)
    except ValueError:
        raise ConfigError("key %r expects a number, got %r" % (key, text)) from None


def parse_config(text: str) -> Config:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key=value, got %r" % (lineno, raw))
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError("line %d: unknown config key %r" % (lineno, key))
        if key in values:
            raise ConfigError("line %d: duplicate config key %r" % (lineno, key))
        values[key] = _convert(key, value)
    return Config(values)


def render_config(cfg: Config) -> str:
    lines = []
    for key, default in DEFAULTS.items():
        value = cfg[key]
        if isinstance(default, bool):
            text = "true" if value else "false"
        elif isinstance(default, int):
            text = "%d" % value
        else:
            text = repr(float(value))
        lines.append("%s=%s" % (key, text))
    return "\n".join(lines) + "\n"


def load_config(path) -> Config:
    with open(path) as fh:
        return parse_config(fh.read())


def save_config(cfg: Config, path) -> None:
    with open(path, "w") as fh:
        fh.write(render_config(cfg))


# ---------------------------------------------------------------------------
# typed views


def gan_hyper(cfg: Config) -> GanHyper:
    return GanHyper(
        lambda_cyc=cfg.lambda_cyc,
        lambda_id=cfg.lambda_id,
        id_cutoff_iters=cfg.id_cutoff_iters,
        lr_g=cfg.lr_g,
        lr_d=cfg.lr_d,
        const_iters=cfg.const_iters,
        decay_iters=cfg.decay_iters,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        adam_eps=cfg.adam_eps,
        crop_frames=cfg.crop_frames,
        total_iters=cfg.total_iters,
        prob_clamp=cfg.prob_clamp,
        saturating_adv=cfg.saturating_adv,
        seed=cfg.seed,
    )


def gen_config(cfg: Config, channels: int) -> GenConfig:
    return GenConfig(
        channels=channels,
        width=cfg.gen_width,
        n_down=cfg.gen_down_blocks,
        n_res=cfg.gen_res_blocks,
        n_up=cfg.gen_up_blocks,
        kernel_size=cfg.gen_kernel,
    )


def disc_config(cfg: Config, channels: int) -> DiscConfig:
    return DiscConfig(
        in_channels=channels,
        in_frames=cfg.crop_frames,
        width=cfg.disc_width,
        n_blocks=cfg.disc_blocks,
        kernel_size=cfg.disc_kernel,
    )


def synth_spec(cfg: Config) -> SynthSpec:
    return SynthSpec(
        speaker_x=SpeakerSynthSpec(
            logf0_mean=cfg.x_logf0_mean,
            logf0_std=cfg.x_logf0_std,
            mcep_shift=cfg.x_mcep_shift,
            voiced_run_mean=cfg.x_voiced_run,
            unvoiced_run_mean=cfg.x_unvoiced_run,
        ),
        speaker_y=SpeakerSynthSpec(
            logf0_mean=cfg.y_logf0_mean,
            logf0_std=cfg.y_logf0_std,
            mcep_shift=cfg.y_mcep_shift,
            voiced_run_mean=cfg.y_voiced_run,
            unvoiced_run_mean=cfg.y_unvoiced_run,
        ),
        n_utterances=cfg.synth_utterances,
        frames_min=cfg.synth_frames_min,
        frames_max=cfg.synth_frames_max,
        d_mcep=cfg.synth_d_mcep,
        d_ap=cfg.synth_d_ap,
        frame_period_ms=cfg.frame_period_ms,
        sample_rate_hz=cfg.sample_rate_hz,
        noise_rel=cfg.synth_noise_rel,
        mcep_noise_std=cfg.synth_mcep_noise,
    )
