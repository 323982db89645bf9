import json
import math

import numpy as np
import pytest

from macrodim.fbm import (
    GridSpec,
    Hurst,
    SamplePath,
    check_self_similarity,
    check_stationary_increments,
    derive_seed,
    fgn_cov,
    generate_increments_batch,
    generate_path,
)


def test_hurst_validation():
    Hurst(0.5)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            Hurst(bad)


def test_grid_spec():
    g = GridSpec(step=0.25, count=8)
    assert g.horizon == 2.0
    assert np.allclose(g.times(), np.arange(9) * 0.25)
    assert g.index_of(1.5) == 6
    with pytest.raises(ValueError):
        g.index_of(1.1)
    with pytest.raises(ValueError):
        GridSpec(step=0.0, count=4)
    with pytest.raises(ValueError):
        GridSpec(step=1.0, count=0)


def test_fgn_cov_brownian_case():
    # H = 1/2: increments independent, variance = step
    h = Hurst(0.5)
    assert fgn_cov(0, h, 0.25) == pytest.approx(0.25)
    for k in (1, 2, 5):
        assert fgn_cov(k, h, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_fgn_cov_lag0_is_variance():
    for H in (0.3, 0.7):
        assert fgn_cov(0, Hurst(H), 0.5) == pytest.approx(0.5 ** (2 * H))


def test_fgn_cov_negative_lag_rejected():
    with pytest.raises(ValueError):
        fgn_cov(-1, Hurst(0.5))


def test_generate_path_shape_and_start():
    grid = GridSpec(step=1.0, count=16)
    p = generate_path(Hurst(0.5), grid, seed=1)
    assert p.values.shape == (17,)
    assert p.values[0] == 0.0


def test_generate_path_deterministic():
    grid = GridSpec(step=0.5, count=64)
    a = generate_path(Hurst(0.7), grid, seed=42)
    b = generate_path(Hurst(0.7), grid, seed=42)
    assert np.array_equal(a.values, b.values)
    c = generate_path(Hurst(0.7), grid, seed=43)
    assert not np.array_equal(a.values, c.values)


def test_batch_matches_single():
    grid = GridSpec(step=0.25, count=32)
    h = Hurst(0.3)
    batch = generate_increments_batch(h, grid, [5, 6, 7])
    for i, seed in enumerate([5, 6, 7]):
        path = generate_path(h, grid, seed)
        assert np.array_equal(np.cumsum(batch[i]), path.values[1:])


def test_save_csv_roundtrip(tmp_path):
    grid = GridSpec(step=1.0, count=16)
    p = generate_path(Hurst(0.5), grid, seed=1)
    f = tmp_path / "path.csv"
    p.save_csv(f)
    lines = f.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,value"
    assert len(lines) == 18
    assert lines[1].split(",")[1] == "0.0"
    meta = json.loads((tmp_path / "path.csv.json").read_text(encoding="utf-8"))
    assert meta["h"] == 0.5 and meta["seed"] == 1 and meta["count"] == 16


def test_sample_path_validation():
    grid = GridSpec(step=1.0, count=2)
    with pytest.raises(ValueError):
        SamplePath(grid=grid, hurst=Hurst(0.5), values=np.array([1.0, 0.0, 0.0]), seed=0)
    with pytest.raises(ValueError):
        SamplePath(grid=grid, hurst=Hurst(0.5), values=np.zeros(5), seed=0)


def test_derive_seed_stable_and_distinct():
    a = derive_seed(0, 1, 2)
    assert a == derive_seed(0, 1, 2)
    assert a != derive_seed(0, 2, 1)
    assert a != derive_seed(1, 1, 2)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_increment_autocovariance(H):
    # sample autocovariance at lags 0..5 within 3 SE of the exact values
    h = Hurst(H)
    grid = GridSpec(step=1.0, count=32)
    incr = generate_increments_batch(h, grid, range(4000))
    for lag in range(6):
        prods = incr[:, : 32 - lag] * incr[:, lag:]
        est = prods.mean()
        se = prods.mean(axis=1).std(ddof=1) / math.sqrt(prods.shape[0])
        assert abs(est - fgn_cov(lag, h)) <= 3 * se, (lag, est, fgn_cov(lag, h))


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_endpoint_variance(H):
    # Var(B_T) = T^{2H}
    h = Hurst(H)
    grid = GridSpec(step=0.5, count=32)
    incr = generate_increments_batch(h, grid, range(6000))
    endpoints = incr.sum(axis=1)
    var = endpoints.var(ddof=1)
    target = grid.horizon ** (2 * H)
    se = target * math.sqrt(2.0 / (len(endpoints) - 1))
    assert abs(var - target) <= 3 * se


def test_self_similarity_check():
    rep = check_self_similarity(Hurst(0.6), GridSpec(step=0.25, count=64),
                                a=2.0, seeds=1500, base_seed=3)
    assert rep.p_value > 0.01
    rep_id = check_self_similarity(Hurst(0.6), GridSpec(step=0.25, count=64),
                                   a=1.0, seeds=100)
    assert rep_id.statistic == 0.0 and rep_id.p_value == 1.0


def test_stationary_increments_check():
    rep = check_stationary_increments(Hurst(0.4), GridSpec(step=0.25, count=64),
                                      shift=4.0, seeds=1500, base_seed=5)
    assert rep.p_value > 0.01


def test_checks_reject_bad_args():
    grid = GridSpec(step=0.25, count=64)
    with pytest.raises(ValueError):
        check_self_similarity(Hurst(0.5), grid, a=-1.0, seeds=100)
    with pytest.raises(ValueError):
        check_stationary_increments(Hurst(0.5), grid, shift=-1.0, seeds=100)
    with pytest.raises(ValueError):
        check_stationary_increments(Hurst(0.5), grid, shift=16.0, seeds=100)
