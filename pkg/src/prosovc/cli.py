"""Batch command surface binding every pipeline stage to files.

One tool, many verbs, mirroring the pipeline one-to-one:

    synth-data   generate seeded synthetic corpora
    prep         corpus statistics (+ optional CWT dumps) for one speaker
    cwt-analyze  utterance -> ten-scale coefficient CSV
    cwt-synth    coefficient CSV -> utterance F0
    train        fit the spectrum and/or prosody CycleGAN
    convert      full conversion of one utterance
    lg-convert   log-Gaussian F0 baseline conversion
    eval         objective metrics between two feature files
    gradcheck    finite-difference audit of the autodiff layer

Every subcommand is a pure function of (inputs, flags, seed); the VC_SEED
environment variable is the fallback seed and flags override it.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import config as cfgmod
from . import f0 as f0mod
from . import pipeline
from .cwt import decompose10, read_cwt_csv, recompose10, write_cwt_csv
from .features import UtteranceFeatures, load_features, save_features, voicing_mask
from .synth import make_utterances


def _load_config(args) -> cfgmod.Config:
    cfg = cfgmod.load_config(args.config) if args.config else cfgmod.Config()
    seed = getattr(args, "seed", None)
    if seed is None:
        env = os.environ.get("VC_SEED")
        if env is not None:
            seed = int(env)
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    return cfg


def _utterance_stats(u) -> f0mod.SpeakerF0Stats:
    cont = f0mod.to_log(f0mod.interpolate_unvoiced(u.f0))
    return f0mod.compute_stats([(cont, voicing_mask(u.f0))])


def _analysis_stats(args, utterance):
    if args.per_utterance_stats:
        return _utterance_stats(utterance)
    if not args.stats:
        raise ValueError("need --stats FILE or --per-utterance-stats")
    return f0mod.load_stats(args.stats)


def cmd_synth_data(args) -> int:
    cfg = _load_config(args)
    spec = cfgmod.synth_spec(cfg)
    cx, cy = pipeline.make_synthetic_corpus(spec, cfg.seed)
    pipeline.save_corpus(cx, os.path.join(args.out, "x"))
    pipeline.save_corpus(cy, os.path.join(args.out, "y"))
    ex, ey = np.random.SeedSequence(cfg.seed).spawn(4)[2:]
    for name, speaker, ss in (("x_eval", spec.speaker_x, ex), ("y_eval", spec.speaker_y, ey)):
        out_dir = os.path.join(args.out, name)
        os.makedirs(out_dir, exist_ok=True)
        utts = make_utterances(speaker, spec, cfg.synth_eval_utterances,
                               np.random.default_rng(ss))
        for i, u in enumerate(utts):
            save_features(u, os.path.join(out_dir, "utt%03d.vcf" % i))
    print("wrote corpora under %s" % args.out)
    return 0


def cmd_prep(args) -> int:
    corpus = pipeline.load_corpus_dir(args.corpus)
    pipeline.save_corpus(corpus, args.corpus)
    if args.dump_cwt:
        for name, u in zip(corpus.names, corpus.utterances):
            cont = f0mod.normalize(
                f0mod.to_log(f0mod.interpolate_unvoiced(u.f0)), corpus.f0_stats
            )
            with open(os.path.join(args.corpus, name + ".cwt.csv"), "w") as fh:
                write_cwt_csv(decompose10(cont, u.frame_period_ms), fh)
    print("prepared %d utterances (%d rejected) in %s"
          % (len(corpus.names), len(corpus.rejected), args.corpus))
    return 0


def cmd_cwt_analyze(args) -> int:
    u = load_features(args.infile)
    stats = _analysis_stats(args, u)
    norm = f0mod.normalize(f0mod.to_log(f0mod.interpolate_unvoiced(u.f0)), stats)
    with open(args.out, "w") as fh:
        write_cwt_csv(decompose10(norm, u.frame_period_ms), fh)
    return 0


def cmd_cwt_synth(args) -> int:
    like = load_features(args.like)
    stats = _analysis_stats(args, like)
    with open(args.cwt) as fh:
        matrix = read_cwt_csv(fh, like.frame_period_ms)
    if matrix.n_frames != like.n_frames:
        raise ValueError("coefficient frames (%d) disagree with --like frames (%d)"
                         % (matrix.n_frames, like.n_frames))
    logf0 = f0mod.denormalize(recompose10(matrix), stats)
    f0_out = f0mod.reapply_voicing(np.exp(logf0), voicing_mask(like.f0))
    out = UtteranceFeatures(
        like.frame_period_ms, like.sample_rate_hz, f0_out, like.mcep, like.ap
    )
    save_features(out, args.out)
    return 0


def _train_one(kind, corpus_x, corpus_y, cfg, out_dir):
    channels = corpus_x.norm_mcep[0].shape[0] if kind == "spectrum" else 10
    pipeline.train_pipeline(
        corpus_x,
        corpus_y,
        kind,
        cfgmod.gan_hyper(cfg),
        cfgmod.gen_config(cfg, channels),
        cfgmod.disc_config(cfg, channels),
        out_dir=out_dir,
        log_stride=cfg.log_stride,
        checkpoint_stride=cfg.checkpoint_stride,
    )


def cmd_train(args) -> int:
    cfg = _load_config(args)
    corpus_x = pipeline.load_corpus_dir(args.x)
    corpus_y = pipeline.load_corpus_dir(args.y)
    os.makedirs(args.out, exist_ok=True)
    cfgmod.save_config(cfg, os.path.join(args.out, "hyper.cfg"))
    kinds = pipeline.FEATURE_KINDS if args.kind == "both" else (args.kind,)
    for kind in kinds:
        _train_one(kind, corpus_x, corpus_y, cfg, args.out)
        print("trained %s pipeline into %s" % (kind, args.out))
    return 0


def _load_conversion_models(models_dir, x_stats, y_stats) -> pipeline.ConversionModels:
    cfg = cfgmod.load_config(os.path.join(models_dir, "hyper.cfg"))
    hyper = cfgmod.gan_hyper(cfg)
    d_mcep = x_stats.mcep.mean.shape[0]
    spectrum = pipeline.load_model_pair(
        models_dir, "spectrum", d_mcep, hyper,
        cfgmod.gen_config(cfg, d_mcep), cfgmod.disc_config(cfg, d_mcep))
    prosody = pipeline.load_model_pair(
        models_dir, "prosody", 10, hyper,
        cfgmod.gen_config(cfg, 10), cfgmod.disc_config(cfg, 10))
    return pipeline.ConversionModels(
        spectrum=spectrum, prosody=prosody, x_stats=x_stats, y_stats=y_stats
    )


def cmd_convert(args) -> int:
    x_stats = pipeline.load_stats_bundle(args.x_corpus)
    y_stats = pipeline.load_stats_bundle(args.y_corpus)
    models = _load_conversion_models(args.models, x_stats, y_stats)
    out = pipeline.convert_utterance(load_features(args.infile), models, args.direction)
    save_features(out, args.out)
    return 0


def cmd_lg_convert(args) -> int:
    x_stats = pipeline.load_stats_bundle(args.x_corpus)
    y_stats = pipeline.load_stats_bundle(args.y_corpus)
    src, tgt = (x_stats, y_stats) if args.direction == "x2y" else (y_stats, x_stats)
    gen = None
    if args.models:
        models = _load_conversion_models(args.models, x_stats, y_stats)
        gen = models.spectrum.g_xy if args.direction == "x2y" else models.spectrum.g_yx
    out = pipeline.lg_convert_utterance(load_features(args.infile), src, tgt, gen)
    save_features(out, args.out)
    return 0


def cmd_eval(args) -> int:
    result = pipeline.metrics(load_features(args.ref), load_features(args.hyp))
    for key in ("mcd_db", "f0_rmse_hz", "f0_corr"):
        print("%s=%.10g" % (key, result[key]))
    return 0


def cmd_gradcheck(args) -> int:
    from .gradcheck import run_gradcheck

    results = run_gradcheck(seeds=tuple(range(args.seeds)), eps=args.eps, tol=args.tol)
    failures = 0
    worst = {}
    for name, seed, err, ok in results:
        worst[name] = max(worst.get(name, 0.0), err)
        if not ok:
            failures += 1
            print("FAIL %s seed=%d rel_err=%.3g" % (name, seed, err))
    for name in sorted(worst):
        print("%s max_rel_err=%.3g" % (name, worst[name]))
    print("%d checks, %d failures" % (len(results), failures))
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prosovc",
        description="Spectrum and prosody conversion between two speakers' feature corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        return p

    p = add("synth-data", cmd_synth_data, "generate seeded synthetic corpora")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="RNG seed (overrides VC_SEED and config)")

    p = add("prep", cmd_prep, "compute speaker statistics for a corpus directory")
    p.add_argument("--corpus", required=True, help="directory of .vcf files")
    p.add_argument("--dump-cwt", action="store_true",
                   help="also dump per-utterance wavelet coefficient CSVs")

    p = add("cwt-analyze", cmd_cwt_analyze, "decompose one utterance's F0 into ten scales")
    p.add_argument("--in", dest="infile", required=True, help="input .vcf file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--stats", help="speaker stats file for normalization")
    p.add_argument("--per-utterance-stats", action="store_true",
                   help="normalize with this utterance's own statistics")

    p = add("cwt-synth", cmd_cwt_synth, "reconstruct F0 from a ten-scale CSV")
    p.add_argument("--cwt", required=True, help="coefficient CSV from cwt-analyze")
    p.add_argument("--like", required=True,
                   help=".vcf supplying voicing, MCEPs and APs for the output")
    p.add_argument("--out", required=True, help="output .vcf path")
    p.add_argument("--stats", help="speaker stats file for denormalization")
    p.add_argument("--per-utterance-stats", action="store_true",
                   help="denormalize with the --like utterance's own statistics")

    p = add("train", cmd_train, "train the feature CycleGANs")
    p.add_argument("--kind", choices=("spectrum", "prosody", "both"), required=True)
    p.add_argument("--x", required=True, help="speaker X corpus directory")
    p.add_argument("--y", required=True, help="speaker Y corpus directory")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="RNG seed (overrides VC_SEED and config)")

    p = add("convert", cmd_convert, "convert one utterance with trained models")
    p.add_argument("--direction", choices=pipeline.DIRECTIONS, required=True)
    p.add_argument("--models", required=True, help="model directory from train")
    p.add_argument("--x-corpus", required=True, help="speaker X corpus directory")
    p.add_argument("--y-corpus", required=True, help="speaker Y corpus directory")
    p.add_argument("--in", dest="infile", required=True, help="input .vcf file")
    p.add_argument("--out", required=True, help="output .vcf path")

    p = add("lg-convert", cmd_lg_convert, "log-Gaussian baseline conversion")
    p.add_argument("--direction", choices=pipeline.DIRECTIONS, required=True)
    p.add_argument("--x-corpus", required=True, help="speaker X corpus directory")
    p.add_argument("--y-corpus", required=True, help="speaker Y corpus directory")
    p.add_argument("--in", dest="infile", required=True, help="input .vcf file")
    p.add_argument("--out", required=True, help="output .vcf path")
    p.add_argument("--models", help="model directory; converts MCEPs with the "
                                    "spectrum generator instead of passing them through")

    p = add("eval", cmd_eval, "objective metrics between two feature files")
    p.add_argument("--ref", required=True, help="reference .vcf")
    p.add_argument("--hyp", required=True, help="hypothesis .vcf")

    p = add("gradcheck", cmd_gradcheck, "finite-difference audit of every op")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds to run")
    p.add_argument("--eps", type=float, default=1e-5, help="finite-difference step")
    p.add_argument("--tol", type=float, default=1e-4, help="max relative error")

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
