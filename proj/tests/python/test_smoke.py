"""Smoke tests for the python module: end-to-end wiring, not numerics."""

import json
import math

import numpy as np
import pytest

import mixsum as mx


@pytest.fixture()
def rng():
    return mx.RngStream(20240315, 1)


def test_version_and_exceptions():
    assert mx.__version__
    with pytest.raises(ValueError):
        mx.Kernel.gaussian_uni(0.0, -1.0)


def test_kernels_and_mixture(rng):
    kernel = mx.Kernel.gaussian_uni(0.0, 1.0)
    assert kernel.log_density(np.zeros((1, 1)))[0] == pytest.approx(
        -0.5 * math.log(2.0 * math.pi)
    )
    draw = mx.MixtureDraw(
        np.array([0.5, 0.5]),
        [mx.Kernel.gaussian_uni(-2.0, 1.0), mx.Kernel.gaussian_uni(2.0, 1.0)],
    )
    pts = draw.sample(rng, 256)
    assert pts.shape == (256, 1)
    dens = draw.log_density(pts)
    assert np.isfinite(dens).all()


def test_dataset_roundtrip(tmp_path):
    points = np.arange(12, dtype=float).reshape(6, 2)
    data = mx.Dataset(points, [1, 1, 2, 2, 3, 3])
    path = tmp_path / "data.csv"
    mx.write_dataset_csv(data, path, True)
    back = mx.read_dataset_csv(path, True)
    assert np.allclose(back.points, points)
    assert back.labels == [1, 1, 2, 2, 3, 3]


def test_bundle_roundtrip(tmp_path, rng):
    data = mx.generate_sim_univariate(200, rng)
    cfg = mx.DpmConfig()
    cfg.iterations, cfg.burn_in, cfg.thinning = 240, 40, 10
    result = mx.dpm_gibbs(data, cfg, mx.RngStream(5, 5))
    path = tmp_path / "bundle.jsonl"
    mx.export_bundle(result.bundle, path)
    back = mx.ingest_bundle(path)
    assert back.m == result.bundle.m
    assert back.meta.model == "dpm"


def test_summary_pipeline_objects(rng):
    data = mx.generate_sim_univariate(400, rng)
    cfg = mx.DpmConfig()
    cfg.iterations, cfg.burn_in, cfg.thinning = 400, 100, 10
    bundle = mx.dpm_gibbs(data, cfg, mx.RngStream(6, 1)).bundle
    predictive = mx.predictive_sample(bundle, 600, mx.RngStream(6, 2))
    em = mx.EmConfig()
    em.restarts = 2
    summaries = mx.fit_summary_sequence(predictive, 4, em, mx.RngStream(6, 3))
    table = mx.discrepancy_samples(bundle, summaries, predictive)
    k_star = mx.select_k_star(table, 0.1)
    assert 1 <= k_star <= 4
    warm = summaries[k_star - 1]
    pc = mx.ProjectionConfig()
    pc.h_per_draw, pc.em = 200, em
    sset = mx.project_posterior(bundle, k_star, pc, warm, mx.RngStream(6, 4))
    assert sset.aligned()
    grid = mx.default_grid_univariate(data, 64)
    ribbon = mx.density_ribbon(sset, grid)
    assert (ribbon.lower2_5 <= ribbon.upper97_5 + 1e-12).all()
    report = mx.conditional_posterior_allocate(sset, data)
    assert len(report.labels) == data.n
    assert report.uncertainty.max() <= 1.0 - 1.0 / k_star + 1e-12
    km = mx.kmeans_fit(predictive, k_star, mx.RngStream(6, 5))
    labels = mx.kmeans_assign(km, data)
    assert len(labels) == data.n
    truth = mx.sim_univariate_truth()
    score = mx.hellinger_mc(truth, warm, mx.Dataset(truth.sample(mx.RngStream(6, 6), 800)))
    assert 0.0 <= score.value <= 1.0


def test_run_stage_pipeline(tmp_path):
    config = {
        "seed": 31,
        "output_dir": str(tmp_path / "out"),
        "threads": 1,
        "data": {"generator": "sim-univariate", "n": 120},
        "model": {"dpm": {"iterations": 220, "burn_in": 60, "thinning": 8}},
        "summary": {"k_max": 3, "n_predictive": 300, "em": {"restarts": 2}},
        "projection": {"h_per_draw": 150, "restarts": 1, "grid_points": 32},
        "cluster": {"h_per_draw": 150, "kmeans_restarts": 2},
        "evaluate": {"n_samples": 300},
    }
    mx.run_stage(json.dumps(config), "pipeline")
    out = tmp_path / "out"
    for name in [
        "data.csv",
        "bundle.jsonl",
        "chain.csv",
        "predictive.csv",
        "summaries.jsonl",
        "elbow_raw.csv",
        "elbow.csv",
        "kstar.json",
        "posterior_set.jsonl",
        "ribbon.csv",
        "allocations_conditional.csv",
        "allocations_kmeans.csv",
        "scores.csv",
    ]:
        assert (out / name).exists(), name
    with pytest.raises(ValueError):
        mx.run_stage(json.dumps(config), "not-a-stage")
