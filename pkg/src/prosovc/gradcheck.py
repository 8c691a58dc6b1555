"""Central finite-difference checks for every differentiable operation and
for the two full network objectives.

A check projects the op's output onto a fixed random direction to get a
scalar, differentiates it analytically with backward(), and compares every
input coordinate against (f(x+eps) - f(x-eps)) / (2 eps). The error for a
coordinate is measured relative to max(|analytic|, |numeric|) floored at
1e-3 of the largest gradient magnitude for that input, so negligible
coordinates cannot drown the check in finite-difference noise while every
significant coordinate is held to the plain relative error.

Inputs are nudged away from the kinks of l1/leaky_relu/clamp, where the
derivative genuinely does not exist.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor, backward
from .cyclegan import GanHyper, ModelPair, adv_loss, generator_adv_loss, identity_loss
from .nets import DiscConfig, GenConfig

DEFAULT_EPS = 1e-5
DEFAULT_TOL = 1e-4


def _max_rel_err(analytic, numeric, scale=None):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if scale is None:
        scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0))
    if scale == 0.0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-3 * scale)
    return float((np.abs(analytic - numeric) / denom).max())


def check_function(fn, arrays, eps=DEFAULT_EPS, rng=None):
    """Max relative error between backward() and central differences.

    `fn` maps a list of Tensors to an output Tensor; `arrays` are the input
    values. The output is projected onto a fixed random direction so the
    check exercises the whole Jacobian.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    probe = rng.standard_normal(fn([Tensor(a) for a in arrays]).data.shape)

    def scalar(values):
        out = fn([Tensor(v) for v in values])
        return float((out.data * probe).sum())

    tensors = [Tensor(a.copy()) for a in arrays]
    out = fn(tensors)
    loss = ad.ssum(ad.mul(out, Tensor(probe)))
    backward(loss)

    worst = 0.0
    for which, base in enumerate(arrays):
        analytic = tensors[which].grad
        if analytic is None:
            analytic = np.zeros_like(base)
        numeric = np.zeros_like(base)
        flat = base.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            values = [a.copy() for a in arrays]
            values[which].reshape(-1)[idx] = orig + eps
            hi = scalar(values)
            values[which].reshape(-1)[idx] = orig - eps
            lo = scalar(values)
            numeric.reshape(-1)[idx] = (hi - lo) / (2.0 * eps)
        worst = max(worst, _max_rel_err(analytic, numeric))
    return worst


def _off_kink(x, margin=0.1):
    return x + margin * np.where(x >= 0, 1.0, -1.0)


def op_checks(seed: int):
    """(name, fn, input arrays) for every differentiable op."""
    rng = np.random.default_rng(seed)

    def r(*shape):
        return rng.standard_normal(shape)

    checks = [
        ("add", lambda ts: ad.add(ts[0], ts[1]), [r(3, 4), r(3, 4)]),
        ("sub", lambda ts: ad.sub(ts[0], ts[1]), [r(3, 4), r(3, 4)]),
        ("mul", lambda ts: ad.mul(ts[0], ts[1]), [r(3, 4), r(3, 4)]),
        ("scale", lambda ts: ad.scale(ts[0], 1.7), [r(4, 3)]),
        ("add_const", lambda ts: ad.add_const(ts[0], 0.3), [r(5)]),
        ("const_minus", lambda ts: ad.const_minus(1.0, ts[0]), [r(5)]),
        ("log", lambda ts: ad.log(ts[0]), [np.abs(r(3, 4)) + 0.5]),
        ("sigmoid", lambda ts: ad.sigmoid(ts[0]), [3.0 * r(3, 4)]),
        ("leaky_relu", lambda ts: ad.leaky_relu(ts[0], 0.2), [_off_kink(r(3, 4))]),
        ("clamp", lambda ts: ad.clamp(ts[0], -0.8, 0.8), [2.0 * _off_kink(r(3, 4))]),
        ("mean", lambda ts: ad.mean(ts[0]), [r(3, 4)]),
        ("ssum", lambda ts: ad.ssum(ts[0]), [r(3, 4)]),
        ("l1_mean", lambda ts: ad.l1_mean(ts[0]), [_off_kink(r(3, 4))]),
        ("concat", lambda ts: ad.concat(ts, axis=0), [r(2, 4), r(3, 4)]),
        ("reshape", lambda ts: ad.reshape(ts[0], (4, 3)), [r(3, 4)]),
        ("gated_linear_unit", lambda ts: ad.gated_linear_unit(ts[0]), [r(4, 5)]),
        ("instance_norm_1d", lambda ts: ad.instance_norm(ts[0], 1e-9), [r(3, 7)]),
        ("instance_norm_2d", lambda ts: ad.instance_norm(ts[0], 1e-9), [r(2, 4, 5)]),
        ("upsample1d", lambda ts: ad.upsample1d(ts[0], 2), [r(3, 4)]),
        ("dense", lambda ts: ad.dense(ts[0], ts[1], ts[2]), [r(6), r(4, 6), r(4)]),
        (
            "conv1d_s1",
            lambda ts: ad.conv1d(ts[0], ts[1], ts[2], stride=1, pad=1),
            [r(3, 8), r(4, 3, 3), r(4)],
        ),
        (
            "conv1d_s2",
            lambda ts: ad.conv1d(ts[0], ts[1], ts[2], stride=2, pad=1),
            [r(3, 8), r(4, 3, 4), r(4)],
        ),
        (
            "conv2d_s1",
            lambda ts: ad.conv2d(ts[0], ts[1], ts[2], stride=1, pad=1),
            [r(2, 5, 6), r(3, 2, 3, 3), r(3)],
        ),
        (
            "conv2d_s2",
            lambda ts: ad.conv2d(ts[0], ts[1], ts[2], stride=2, pad=1),
            [r(2, 6, 6), r(3, 2, 3, 3), r(3)],
        ),
    ]
    return checks


def _tiny_pair(seed: int):
    hyper = GanHyper(crop_frames=8, seed=seed)
    gen_cfg = GenConfig(channels=3, width=4, n_down=1, n_res=1, n_up=1)
    disc_cfg = DiscConfig(in_channels=3, in_frames=8, width=4, n_blocks=1)
    return ModelPair.build(3, hyper, gen_cfg, disc_cfg, seed=seed), hyper


def _sampled_param_check(objective, params, seed, eps, n_coords=12):
    """FD over a random sample of parameter coordinates of a full objective.

    Per-coordinate errors are measured against the gradient scale of the
    whole objective: a coordinate the objective provably ignores (for
    example a bias absorbed by instance norm) has a true gradient of zero
    and would otherwise compare pure finite-difference noise to itself.
    """
    rng = np.random.default_rng(seed)
    ad.zero_grads(params)
    backward(objective())
    gscale = max(
        (np.abs(p.grad).max() for p in params if p.grad is not None),
        default=0.0,
    )
    worst = 0.0
    flats = [(p, p.data.reshape(-1)) for p in params if p.data.size > 0]
    for _ in range(n_coords):
        p, flat = flats[int(rng.integers(len(flats)))]
        idx = int(rng.integers(flat.size))
        analytic = 0.0 if p.grad is None else float(p.grad.reshape(-1)[idx])
        orig = flat[idx]
        flat[idx] = orig + eps
        hi = objective().item()
        flat[idx] = orig - eps
        lo = objective().item()
        flat[idx] = orig
        numeric = (hi - lo) / (2.0 * eps)
        worst = max(
            worst, _max_rel_err(np.array([analytic]), np.array([numeric]), gscale)
        )
    return worst


def network_checks(seed: int, eps=DEFAULT_EPS):
    """FD checks of the full generator and discriminator objectives."""
    pair, hyper = _tiny_pair(seed)
    rng = np.random.default_rng(seed + 1)
    x = rng.standard_normal((3, 8))
    y = rng.standard_normal((3, 8))
    xt, yt = Tensor(x), Tensor(y)
    fake_y = pair.g_xy(xt).detach()
    fake_x = pair.g_yx(yt).detach()

    def d_objective():
        return ad.scale(
            ad.add(
                adv_loss(pair.d_y, [yt], [fake_y], hyper.prob_clamp),
                adv_loss(pair.d_x, [xt], [fake_x], hyper.prob_clamp),
            ),
            -1.0,
        )

    def g_objective():
        fy = pair.g_xy(xt)
        fx = pair.g_yx(yt)
        cyc = ad.add(
            ad.l1_mean(ad.sub(pair.g_yx(fy), xt)),
            ad.l1_mean(ad.sub(pair.g_xy(fx), yt)),
        )
        adv = ad.add(
            generator_adv_loss(pair.d_y, [fy], hyper.prob_clamp),
            generator_adv_loss(pair.d_x, [fx], hyper.prob_clamp),
        )
        idl = identity_loss(pair.g_xy, pair.g_yx, [xt], [yt])
        return ad.add(ad.add(adv, ad.scale(cyc, hyper.lambda_cyc)),
                      ad.scale(idl, hyper.lambda_id))

    return [
        ("discriminator_objective",
         _sampled_param_check(d_objective, pair.discriminator_params(), seed, eps)),
        ("generator_objective",
         _sampled_param_check(g_objective, pair.generator_params(), seed, eps)),
    ]


def run_gradcheck(seeds=(0, 1, 2, 3, 4), eps=DEFAULT_EPS, tol=DEFAULT_TOL,
                  include_networks=True):
    """Run all checks over the given seeds; returns (name, seed, err, ok) rows."""
    results = []
    for seed in seeds:
        for name, fn, arrays in op_checks(seed):
            err = check_function(fn, arrays, eps, rng=np.random.default_rng(seed + 99))
            results.append((name, seed, err, err <= tol))
        if include_networks:
            for name, err in network_checks(seed, eps):
                results.append((name, seed, err, err <= tol))
    return results
