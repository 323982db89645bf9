"""Acceptance gate: end-to-end statistical and oracle criteria.

Each test prints one `[PASS]`/`[FAIL]` summary line.  The heavy fBm paths
(n_max = 20, step 2^-4) are generated once per session and shared between
the level-set and sojourn criteria.
"""

import itertools
import math
import time

import numpy as np
import pytest

from macrodim.coverdim import (
    DiscreteSet,
    InsufficientDataError,
    estimate_dim,
    nu,
    nu_bruteforce,
    nu_tilde,
    optimal_cover,
)
from macrodim.fbm import (
    GridSpec,
    Hurst,
    derive_seed,
    fgn_cov,
    generate_increments_batch,
    generate_path,
)
from macrodim.occupation import (
    SpaceGrid,
    build_local_time_field,
    expected_L0,
    f_partial,
    mc_mean_L0,
    scaling_check,
    z_stat,
)
from macrodim.pathsets import (
    level_set,
    make_A_alpha,
    make_B_alpha,
    make_lacunary,
    sojourn_set,
)

H_VALUES = (0.3, 0.5, 0.7)
X_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
N_SEEDS = 8
N_MAX = 20
DELTA = 2.0 ** -4


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


# --- criterion 1: cover oracle equivalence -----------------------------------

def _lattice(n: int) -> np.ndarray:
    # 8 evenly spaced lattice points per block (4 in S_2), including endpoints
    lo, hi = 2.0 ** (n - 1), 2.0 ** n
    step = max((hi - lo) / 8.0, 0.5)
    return np.arange(lo, hi - step / 2, step)


def test_criterion_1_cover_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    cases = 0
    for n in range(2, 6):
        lattice = _lattice(n)
        for size in range(1, 7):
            for combo in itertools.combinations(lattice, size):
                s = DiscreteSet(np.array(combo))
                for rho in (0.25, 0.5, 1.0, 2.0):
                    for xi in (0.0, 0.5, 1.0):
                        slow = nu_bruteforce(s, n, rho, xi).value
                        fast = nu_tilde(s, n, rho, xi).value
                        if xi == 0.0:
                            worst = max(worst, abs(nu(s, n, rho).value - slow))
                        cover = optimal_cover(s, n, rho, xi)
                        cost = sum(
                            (iv.diam / 2.0 ** n) ** rho
                            * (abs(math.log2(iv.diam / 2.0 ** n)) ** xi if xi else 1.0)
                            for iv in cover)
                        worst = max(worst, abs(fast - slow), abs(cost - slow))
                        cases += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 60.0
    _report("criterion 1 (cover oracle equivalence)", ok,
            f"{cases} cases, max |diff| = {worst:.2e}, {elapsed:.1f}s")
    assert ok


# --- criterion 2: analytic dimensions ----------------------------------------

def test_criterion_2_analytic_dimensions():
    t0 = time.perf_counter()
    errs = {}
    for alpha in (0.25, 0.5, 0.75):
        errs[f"A_{alpha}"] = abs(
            estimate_dim(make_A_alpha(alpha, 24), 1, 24).value - alpha)
        errs[f"B_{alpha}"] = estimate_dim(make_B_alpha(alpha, 24), 1, 24).value
    errs["lacunary"] = estimate_dim(make_lacunary(24), 1, 24).value
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= 0.05 and elapsed < 120.0
    _report("criterion 2 (analytic dimensions)", ok,
            f"max error {worst:.3f} ({errs}), {elapsed:.1f}s")
    assert ok


# --- criteria 3 and 4: level-set and sojourn dimension -----------------------

@pytest.fixture(scope="session")
def shared_paths():
    grid = GridSpec(step=DELTA, count=int(round(2.0 ** N_MAX / DELTA)))
    t0 = time.perf_counter()
    paths = {}
    for hi, h in enumerate(H_VALUES):
        for s in range(N_SEEDS):
            paths[(h, s)] = generate_path(Hurst(h), grid, derive_seed(0, hi, s))
    return paths, time.perf_counter() - t0


def _dim_or_nan(points: DiscreteSet) -> float:
    try:
        return estimate_dim(points, 1, N_MAX).value
    except InsufficientDataError:
        return math.nan


def _protocol_outcome(estimates: dict, targets: dict):
    """Mean-per-cell and individual tolerances; nan = skipped (low occupancy)."""
    mean_bad, ind_bad, skipped = [], [], 0
    for cell, vals in estimates.items():
        vals = np.asarray(vals, dtype=float)
        skipped += int(np.isnan(vals).sum())
        mean_err = abs(np.nanmean(vals) - targets[cell])
        if mean_err > 0.1:
            mean_bad.append((cell, round(mean_err, 3)))
        for s, v in enumerate(vals):
            if not math.isnan(v) and abs(v - targets[cell]) > 0.2:
                ind_bad.append((cell, s, round(float(v), 2)))
    return mean_bad, ind_bad, skipped


def test_criterion_3_level_set_dimension(shared_paths):
    paths, gen_time = shared_paths
    t0 = time.perf_counter()
    estimates = {}
    targets = {}
    for h in H_VALUES:
        for x in X_GRID:
            cell = (h, x)
            targets[cell] = 1.0 - h
            estimates[cell] = [
                _dim_or_nan(level_set(paths[(h, s)], x)) for s in range(N_SEEDS)
            ]
    elapsed = gen_time + time.perf_counter() - t0
    mean_bad, ind_bad, skipped = _protocol_outcome(estimates, targets)
    ok = not mean_bad and not ind_bad and elapsed < 900.0
    _report("criterion 3 (level-set dimension)", ok,
            f"means off: {mean_bad or 'none'}; individuals off: "
            f"{ind_bad or 'none'}; {skipped} low-occupancy skips; {elapsed:.0f}s")
    assert not mean_bad, f"cell means outside ±0.1: {mean_bad}"
    assert elapsed < 900.0
    assert not ind_bad, f"individual estimates outside ±0.2: {ind_bad}"


def test_criterion_4_sojourn_dimension(shared_paths):
    paths, _ = shared_paths
    t0 = time.perf_counter()
    estimates = {}
    targets = {}
    for h in H_VALUES:
        targets[h] = 1.0 - h
        estimates[h] = [
            _dim_or_nan(sojourn_set(paths[(h, s)], h / 2.0))
            for s in range(N_SEEDS)
        ]
    elapsed = time.perf_counter() - t0
    mean_bad, ind_bad, skipped = _protocol_outcome(estimates, targets)
    ok = not mean_bad and not ind_bad
    _report("criterion 4 (sojourn dimension)", ok,
            f"means off: {mean_bad or 'none'}; individuals off: "
            f"{ind_bad or 'none'}; {skipped} low-occupancy skips; {elapsed:.0f}s")
    assert not mean_bad, f"per-H means outside ±0.1: {mean_bad}"
    assert not ind_bad, f"individual estimates outside ±0.2: {ind_bad}"


# --- criterion 5: local-time expectation -------------------------------------

def test_criterion_5_local_time_expectation():
    t0 = time.perf_counter()
    rel_errs = {}
    for h in H_VALUES:
        hurst = Hurst(h)
        est = mc_mean_L0(hurst, 10_000, base_seed=0)
        ref = expected_L0(hurst)
        rel_errs[h] = abs(est - ref) / ref
    elapsed = time.perf_counter() - t0
    worst = max(rel_errs.values())
    ok = worst <= 0.05 and elapsed < 300.0
    _report("criterion 5 (local-time expectation)", ok,
            f"max rel. error {worst:.3f} ({ {h: round(e, 4) for h, e in rel_errs.items()} }), "
            f"{elapsed:.0f}s")
    assert ok


# --- criterion 6: scaling law ------------------------------------------------

def test_criterion_6_scaling_law():
    t0 = time.perf_counter()
    passes = {(0.5, 0.0, 4): 0, (0.7, 0.5, 3): 0}
    reps = 100
    for rep in range(reps):
        for (h, x, n) in passes:
            rep_seed = rep * 4000
            r = scaling_check(Hurst(h), x, n, 2000, base_seed=rep_seed)
            if r.p_value > 0.01:
                passes[(h, x, n)] += 1
    elapsed = time.perf_counter() - t0
    ok = all(v >= 95 for v in passes.values())
    _report("criterion 6 (scaling law)", ok,
            f"p > 0.01 in {passes} of {reps} repetitions, {elapsed:.0f}s")
    assert ok


# --- criterion 7: invariant suite --------------------------------------------

def test_criterion_7_invariants(tmp_path):
    failures = []
    rng = np.random.default_rng(0)

    for _ in range(300):
        n = int(rng.integers(1, 7))
        lo, hi = 2.0 ** (n - 1), 2.0 ** n
        pts = DiscreteSet.from_values(lo + (hi - lo) * rng.random(int(rng.integers(1, 8))))
        rho = float(rng.uniform(0.05, 1.4))
        xi = float(rng.uniform(0.0, 1.5))
        if nu_tilde(pts, n, rho, xi).value < nu(pts, n, rho).value - 1e-12:
            failures.append("nu_tilde >= nu")
        if nu(pts, n, min(rho + 0.1, 1.5)).value > nu(pts, n, rho).value + 1e-12:
            failures.append("nu monotone in rho")
        wide = DiscreteSet.from_values(np.concatenate([pts.times, [2.0 ** 8]]))
        if nu(wide, n, rho).value != nu(pts, n, rho).value:
            failures.append("nu locality")

    path = generate_path(Hurst(0.5), GridSpec(step=2.0 ** -4, count=2 ** 12), seed=5)
    sg = SpaceGrid(x_min=-40.0, x_max=40.0, bin_width=0.2)
    fld = build_local_time_field(path, 1, 8, sg)
    for n in range(1, 9):
        if abs(fld.row(n).sum() * sg.bin_width - 2.0 ** (n - 1)) > 1e-9:
            failures.append("occupation conservation")
    fvals = [f_partial(fld, N, 0.0).value for N in range(1, 9)]
    if any(b < a - 1e-12 for a, b in zip(fvals, fvals[1:])):
        failures.append("F_N monotone")
    if z_stat(fld, 4, 0.0).value < 0:
        failures.append("Z nonnegative")

    for _ in range(40):
        vals = 1.0 + (2.0 ** 10 - 1.0) * rng.random(30)
        try:
            est = estimate_dim(DiscreteSet.from_values(vals), 1, 10)
        except InsufficientDataError:
            continue
        if not (0.0 <= est.value <= 1.0):
            failures.append("estimate in [0, 1]")

    # determinism: byte-identical artifacts on rerun
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    generate_path(Hurst(0.3), GridSpec(step=0.5, count=128), seed=9).save_csv(a)
    generate_path(Hurst(0.3), GridSpec(step=0.5, count=128), seed=9).save_csv(b)
    if a.read_bytes() != b.read_bytes():
        failures.append("determinism")

    failures = sorted(set(failures))
    _report("criterion 7 (invariant suite)", not failures,
            f"violations: {failures or 'none'}")
    assert not failures


# --- criterion 8: generator validity -----------------------------------------

@pytest.mark.parametrize("H", H_VALUES)
def test_criterion_8_generator_validity(H):
    hurst = Hurst(H)
    grid = GridSpec(step=1.0, count=32)
    incr = generate_increments_batch(hurst, grid, range(10_000))
    bad = []
    for lag in range(6):
        prods = incr[:, : 32 - lag] * incr[:, lag:]
        est = prods.mean()
        se = prods.mean(axis=1).std(ddof=1) / math.sqrt(prods.shape[0])
        if abs(est - fgn_cov(lag, hurst)) > 3 * se:
            bad.append(f"lag {lag}")
    endpoints = incr.sum(axis=1)
    var = endpoints.var(ddof=1)
    target = grid.horizon ** (2 * H)
    se_var = target * math.sqrt(2.0 / (len(endpoints) - 1))
    if abs(var - target) > 3 * se_var:
        bad.append("endpoint variance")
    _report(f"criterion 8 (generator validity, H={H})", not bad,
            f"violations: {bad or 'none'}")
    assert not bad
