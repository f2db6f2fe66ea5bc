"""Spatial network suite: bilinear pooling math, head construction, target
mapping, level-1 training mechanics, and checkpoint round trips."""

import numpy as np
import pytest

from neopain.errors import ContractError, DataError
from neopain.models import (
    SCORE_RANGES,
    BilinearNet,
    BilinearPooling,
    VggStyleNet,
    bilinear_pool,
    build_spatial_net,
    build_vgg_head,
    l2_normalize,
    load_net,
    save_net,
    signed_sqrt,
    spatial_targets,
    train_spatial,
    trunk_output_shape,
    validate_scores,
)
from neopain.seeding import rng_for

from oracles import finite_difference_wrt_array, max_relative_error

TINY_BLOCKS = ((1, 2), (1, 3))  # two convs, two pools: 8x8 input -> (3, 2, 2)


# ------------------------------------------------------------- pooling math

def test_bilinear_pool_outer_product_example():
    # Single location: the pool is exactly the outer product, row-major.
    fx = np.array([[1.0], [2.0]])
    fy = np.array([[3.0], [4.0]])
    assert np.array_equal(bilinear_pool(fx, fy), [3.0, 4.0, 6.0, 8.0])


def test_bilinear_pool_sums_over_locations():
    rng = rng_for(31, "pool")
    fx = rng.normal(size=(3, 4, 5))
    fy = rng.normal(size=(2, 4, 5))
    got = bilinear_pool(fx, fy)
    want = np.zeros((3, 2))
    for i in range(4):
        for j in range(5):
            want += np.outer(fx[:, i, j], fy[:, i, j])
    assert np.allclose(got, want.reshape(-1), atol=1e-12)


def test_bilinear_pool_shape_errors():
    with pytest.raises(ContractError):
        bilinear_pool(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(ContractError):
        bilinear_pool(np.zeros(6), np.zeros(6))


def test_signed_sqrt_is_odd():
    rng = rng_for(32, "ssqrt")
    u = rng.normal(scale=5.0, size=1000)
    assert np.allclose(signed_sqrt(-u), -signed_sqrt(u), atol=1e-12)
    assert np.allclose(signed_sqrt(u) ** 2 * np.sign(u), u, atol=1e-9)
    assert signed_sqrt(np.array(0.0)) == 0.0


def test_l2_normalize_unit_norm():
    rng = rng_for(33, "l2")
    for _ in range(50):
        v = rng.normal(scale=10.0, size=rng.integers(2, 40))
        assert abs(np.linalg.norm(l2_normalize(v)) - 1.0) < 1e-9
    z = l2_normalize(np.zeros(8))
    assert np.array_equal(z, np.zeros(8))  # zero vector passes through


def test_batched_pooling_matches_functional_pipeline():
    rng = rng_for(34, "bp-batch")
    fx = rng.normal(size=(4, 3, 2, 2))
    fy = rng.normal(size=(4, 5, 2, 2))
    z = BilinearPooling().forward(fx, fy)
    assert z.shape == (4, 15)
    for i in range(4):
        want = l2_normalize(signed_sqrt(bilinear_pool(fx[i], fy[i])))
        assert np.allclose(z[i], want, atol=1e-12)


def test_batched_pooling_backward_matches_fd():
    rng = rng_for(35, "bp-grad")
    fx = rng.normal(size=(2, 3, 2, 2)) + 0.5  # keep |u| away from the
    fy = rng.normal(size=(2, 4, 2, 2)) + 0.5  # clipped sqrt gradient region
    w = rng.normal(size=(2, 12))
    pool = BilinearPooling()

    def loss():  # reads fx/fy in place, as the FD helper mutates them
        return float(np.sum(BilinearPooling().forward(fx, fy) * w))

    pool.forward(fx, fy)
    dfx, dfy = pool.backward(w)
    assert max_relative_error(dfx, finite_difference_wrt_array(loss, fx)) < 1e-5
    assert max_relative_error(dfy, finite_difference_wrt_array(loss, fy)) < 1e-5


def test_batched_pooling_contracts():
    pool = BilinearPooling()
    with pytest.raises(ContractError):
        pool.backward(np.zeros((1, 4)))  # backward before forward
    with pytest.raises(ContractError):
        pool.forward(np.zeros((2, 3, 2, 2)), np.zeros((3, 3, 2, 2)))
    with pytest.raises(ContractError):
        pool.forward(np.zeros((3, 2, 2)), np.zeros((3, 2, 2)))  # unbatched


# ------------------------------------------------------------- construction

def test_trunk_output_shape_formula():
    assert trunk_output_shape(32) == (16, 8, 8)
    assert trunk_output_shape(8, TINY_BLOCKS) == (3, 2, 2)


def test_vgg_head_parameter_count():
    d = 24
    net = build_vgg_head(d, variant="vgg")
    want = (d * 512 + 512) + (512 * 512 + 512) + (512 * 1 + 1)
    assert sum(t.numel() for _, t in net.params()) == want
    bi = build_vgg_head(d, variant="bilinear")
    want_bi = (d * 64 + 64) + (64 * 64 + 64) + (64 * 1 + 1)
    assert sum(t.numel() for _, t in bi.params()) == want_bi


def test_vgg_head_validation():
    with pytest.raises(ContractError):
        build_vgg_head(0)
    with pytest.raises(ContractError):
        build_vgg_head(8, variant="resnet")
    with pytest.raises(ContractError):
        build_vgg_head(8, output="tanh")


def test_build_spatial_net_dispatch():
    face = build_spatial_net("face", in_size=8, blocks=TINY_BLOCKS)
    body = build_spatial_net("body", in_size=8, blocks=TINY_BLOCKS)
    sound = build_spatial_net("sound", in_size=8, blocks=TINY_BLOCKS)
    assert isinstance(face, BilinearNet)
    assert isinstance(body, VggStyleNet) and body.output == "linear"
    assert isinstance(sound, VggStyleNet) and sound.output == "sigmoid"
    with pytest.raises(ContractError):
        build_spatial_net("gaze")


def test_forward_shapes_and_output_ranges():
    rng = rng_for(36, "fwd")
    x = rng.uniform(size=(5, 1, 8, 8))
    face = BilinearNet(in_size=8, blocks=TINY_BLOCKS, seed=1)
    body = VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=32, seed=1)
    sound = VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=32,
                        output="sigmoid", seed=1)
    assert face.forward(x).shape == (5, 1)
    assert body.forward(x).shape == (5, 1)
    s = sound.forward(x)
    assert np.all((s > 0) & (s < 1))
    assert face.features(x).shape == (5, 64)
    assert body.features(x).shape == (5, 32)


def test_bilinear_net_full_backward_matches_fd():
    # End-to-end gradient through trunks, pooling, and head for a few
    # parameter tensors of a miniature two-stream net.
    rng = rng_for(37, "net-grad")
    x = rng.uniform(size=(2, 1, 8, 8))
    y = np.array([[0.0], [1.0]])
    net = BilinearNet(in_size=8, blocks=((1, 2),), seed=3)
    net.reset_dropout()

    def loss():
        out = net.forward(x, training=False)
        return float(np.mean((out - y) ** 2))

    out = net.forward(x, training=False)
    net.backward(2.0 * (out - y) / out.size)
    checked = 0
    for name, tensor in net.params():
        if "bias" in name:
            continue
        num = finite_difference_wrt_array(loss, tensor.data)
        assert max_relative_error(tensor.grad, num) < 1e-4, name
        checked += 1
    assert checked >= 4


# ------------------------------------------------------ targets and scores

def test_validate_scores_accepts_scale_values():
    for indicator, (lo, hi) in SCORE_RANGES.items():
        vals = list(range(lo, hi + 1))
        ids = [f"S00_E{i:03d}" for i in range(len(vals))]
        out = validate_scores(indicator, vals, ids)
        assert np.array_equal(out, vals)


def test_validate_scores_rejects_off_scale():
    with pytest.raises(DataError, match="S00_E001"):
        validate_scores("face", [0, 2], ["S00_E000", "S00_E001"])
    with pytest.raises(DataError):
        validate_scores("sound", [1.5], ["S00_E000"])
    with pytest.raises(DataError):
        validate_scores("body", [-1], ["S00_E000"])


def test_spatial_targets_mapping():
    t, loss = spatial_targets("face", np.array([0.0, 1.0]))
    assert loss == "mse" and np.array_equal(t, [0.0, 1.0])
    t, loss = spatial_targets("sound", np.array([0.0, 1.0, 2.0]))
    assert loss == "bce"
    assert np.allclose(t, [0.0, 0.5, 1.0])  # soft targets, score / max


# ----------------------------------------------------------------- training

def _toy_images(rng, n, bright_label):
    """Dark images for label 0, bright for label 1."""
    x = rng.uniform(0.0, 0.3, size=(n, 1, 8, 8))
    x[bright_label] += 0.6
    return x


def test_train_spatial_reduces_loss():
    rng = rng_for(38, "train")
    y = np.array([0.0, 1.0] * 8)
    x = _toy_images(rng, 16, y == 1.0)
    net = VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=16, seed=2)
    result = train_spatial(net, x, y, loss="mse", lr=1e-2,
                           batch_size=4, max_epochs=12, patience=12, seed=0)
    assert result.curve[-1][1] < result.curve[0][1]
    assert result.best_epoch <= result.epochs_run
    preds = net.forward(x, training=False).ravel()
    assert np.mean((preds > 0.5) == (y == 1.0)) >= 0.9


def test_train_spatial_is_deterministic():
    rng = rng_for(39, "train-det")
    y = np.array([0.0, 1.0] * 6)
    x = _toy_images(rng, 12, y == 1.0)

    def run():
        net = VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=16, seed=5)
        res = train_spatial(net, x, y, loss="mse", lr=1e-2,
                            batch_size=4, max_epochs=4, patience=4, seed=7)
        return res.curve, net.forward(x, training=False)

    curve_a, out_a = run()
    curve_b, out_b = run()
    assert curve_a == curve_b
    assert np.array_equal(out_a, out_b)


def test_train_spatial_early_stops():
    rng = rng_for(40, "train-stop")
    # Pure-noise targets: validation loss cannot keep improving.
    x = rng.uniform(size=(12, 1, 8, 8))
    y = rng.uniform(size=12)
    net = VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=8, seed=6)
    result = train_spatial(net, x, y, loss="mse", lr=1e-3, batch_size=4,
                           max_epochs=60, patience=2, min_delta=0.05, seed=1)
    assert result.epochs_run < 60


# -------------------------------------------------------------- checkpoints

def test_save_load_round_trip(tmp_path):
    rng = rng_for(41, "ckpt")
    x = rng.uniform(size=(3, 1, 8, 8))
    for build in (
        lambda: BilinearNet(in_size=8, blocks=TINY_BLOCKS, seed=11),
        lambda: VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=16,
                            output="sigmoid", seed=11),
    ):
        src, dst = build(), build()
        for _, t in dst.params():  # make the nets disagree first
            t.data = t.data + 1.0
        path = tmp_path / "net.ckpt"
        save_net(path, src)
        load_net(path, dst)
        assert np.array_equal(src.forward(x), dst.forward(x))


def test_load_rejects_mismatched_architecture(tmp_path):
    path = tmp_path / "net.ckpt"
    save_net(path, VggStyleNet(in_size=8, blocks=TINY_BLOCKS, head_units=16))
    with pytest.raises(KeyError):
        load_net(path, BilinearNet(in_size=8, blocks=TINY_BLOCKS))
