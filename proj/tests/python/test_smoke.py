"""Smoke tests for the _fasr extension module and the CLI round trip."""

import math
import os
import subprocess

import numpy as np
import pytest

import _fasr


def test_noise_schedule_endpoints():
    sched = _fasr.NoiseSchedule()
    assert sched.sigma(0.0) == pytest.approx(0.001)
    assert sched.sigma(1.0) == pytest.approx(348.0)
    assert sched.sigma(0.5) == pytest.approx(math.sqrt(0.001 * 348.0))
    assert sched.marginal_std(1.0) == pytest.approx(348.0, rel=1e-5)


def test_gaussian_is_deterministic():
    a = _fasr.gaussian(seed=1, stream=2, shape=[4, 4])
    b = _fasr.gaussian(seed=1, stream=2, shape=[4, 4])
    c = _fasr.gaussian(seed=1, stream=3, shape=[4, 4])
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_render_degrade_extract_pipeline():
    img = _fasr.render([0.5] * 8)
    assert img.shape == (32, 32)
    assert img.min() >= 0.0 and img.max() <= 1.0

    lr = _fasr.degrade(img, 4)
    assert lr.shape == (32, 32)

    fx = _fasr.FeatureExtractor(seed=1234)
    f_hr = fx.extract(img)
    f_lr = fx.extract(lr)
    assert np.linalg.norm(f_hr) == pytest.approx(1.0)
    # LR keeps most of the identity signal
    assert float(f_hr @ f_lr) > 0.5


def test_merge_and_metrics():
    merged = _fasr.merge_features([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert merged == pytest.approx([math.sqrt(0.5), math.sqrt(0.5)])

    assert _fasr.verification_auc([0.9, 0.8], [0.1, 0.2]) == 1.0
    sim = np.array([[0.9, 0.1], [0.2, 0.8]])
    assert _fasr.cmc_rank_k(sim, [0, 1], 1) == 1.0
    a = np.full((4, 4), 0.5)
    assert _fasr.psnr(a, a + 0.1) == pytest.approx(20.0)


def test_time_embedding_shape_and_range():
    e = _fasr.time_embedding(0.3, 16, _fasr.NoiseSchedule())
    assert e.shape == (16,)
    assert np.all(np.abs(e) <= 1.0)


def test_cli_train_and_python_sampling(tmp_path):
    cli = os.environ["FASR_CLI"]
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "n_identities = 3\n"
        "n_images_per_identity = 4\n"
        "base_channels = 4\n"
        "levels = 2\n"
        "embed_dim = 8\n"
        "train_steps = 4\n"
        "batch_size = 2\n"
        "sampler_steps = 8\n"
        "seed = 9\n"
    )
    data = tmp_path / "data"
    model = tmp_path / "model"
    subprocess.run([cli, "synth", "--config", cfg, "--out", data], check=True)
    subprocess.run(
        [cli, "train", "--config", cfg, "--dataset", data, "--out", model],
        check=True,
    )

    net = _fasr.load_eval_network(str(model / "model.ckpt"))
    img = _fasr.render([0.4] * 8)
    lr = _fasr.degrade(img, 4)
    fm = _fasr.FeatureExtractor(seed=1234).extract(img)
    sr = _fasr.super_resolve(net, lr, fm, steps=8, seed=1)
    assert sr.shape == (32, 32)
    assert np.all(np.isfinite(sr))
    sr2 = _fasr.super_resolve(net, lr, fm, steps=8, seed=1)
    assert np.array_equal(sr, sr2)
