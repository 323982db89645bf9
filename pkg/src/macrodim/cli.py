"""Command-line harness: path generation, set extraction, dimension sweeps.

Subcommands: gen-fbm, level-set, sojourn, cover-cost, dim, theorem2, checks.
Every subcommand accepts ``--config <file>`` (JSON) plus flag overrides;
outputs are UTF-8 CSV/JSON under the configured output directory.

Exit codes: 0 success, 2 invalid config, 3 numerical failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import occupation
from .coverdim import (
    DiscreteSet,
    InsufficientDataError,
    default_rho_grid,
    estimate_dim,
    nu,
    nu_profile,
    nu_tilde,
    optimal_cover,
    write_cover_csv,
)
from .fbm import (
    GridSpec,
    Hurst,
    check_self_similarity,
    check_stationary_increments,
    derive_seed,
    generate_path,
)
from .pathsets import level_set, sojourn_set

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4


@dataclass
class ExperimentConfig:
    hurst: list = field(default_factory=lambda: [0.5])
    levels: list = field(default_factory=lambda: [0.0])
    gammas: list = field(default_factory=list)
    n_min: int = 1
    n_max: int = 20
    delta: float = 2.0 ** -4
    seeds: int = 8
    base_seed: int = 0
    rho_min: float = 0.025
    rho_max: float = 1.2
    rho_step: float = 0.025
    tolerance: float = 0.1
    out: str = "results"

    def rho_grid(self) -> np.ndarray:
        if (self.rho_min, self.rho_max, self.rho_step) == (0.025, 1.2, 0.025):
            return default_rho_grid()
        count = int(round((self.rho_max - self.rho_min) / self.rho_step)) + 1
        return np.round(self.rho_min + np.arange(count) * self.rho_step, 12)

    def grid(self) -> GridSpec:
        return GridSpec(step=self.delta, count=int(round(2.0 ** self.n_max / self.delta)))

    def outdir(self) -> Path:
        d = Path(self.out)
        d.mkdir(parents=True, exist_ok=True)
        return d


@dataclass
class ResultRecord:
    experiment: str
    params: dict
    results: dict
    wall_time: float

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, default=_jsonable)

    def save(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serialisable: {type(obj)}")


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys {sorted(unknown)}")
        for key, val in data.items():
            setattr(cfg, key, val)
    # flag overrides
    if getattr(args, "hurst", None) is not None:
        cfg.hurst = [args.hurst]
    if getattr(args, "seed", None) is not None:
        cfg.base_seed = args.seed
    for name in ("n_min", "n_max", "rho_min", "rho_max", "rho_step", "delta", "out"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    for h in list(np.atleast_1d(cfg.hurst)):
        Hurst(float(h))  # validate
    if cfg.seeds < 1:
        raise ValueError(f"seeds must be >= 1, got {cfg.seeds}")
    return cfg


def _path_for(cfg: ExperimentConfig, h_index: int, seed_index: int):
    h = Hurst(float(cfg.hurst[h_index]))
    seed = derive_seed(cfg.base_seed, h_index, seed_index)
    return generate_path(h, cfg.grid(), seed)


def cmd_gen_fbm(cfg: ExperimentConfig) -> int:
    out = cfg.outdir()
    for hi, h in enumerate(cfg.hurst):
        for s in range(cfg.seeds):
            path = _path_for(cfg, hi, s)
            fname = out / f"fbm_h{h}_s{s}.csv"
            path.save_csv(fname)
            print(f"wrote {fname}")
    return EXIT_OK


def cmd_level_set(cfg: ExperimentConfig) -> int:
    out = cfg.outdir()
    for hi, h in enumerate(cfg.hurst):
        for s in range(cfg.seeds):
            path = _path_for(cfg, hi, s)
            for x in cfg.levels:
                pts = level_set(path, float(x))
                fname = out / f"levelset_h{h}_s{s}_x{x}.txt"
                pts.save(fname)
                print(f"wrote {fname} ({len(pts)} points)")
    return EXIT_OK


def cmd_sojourn(cfg: ExperimentConfig) -> int:
    if not cfg.gammas:
        raise ValueError("sojourn requires a nonempty 'gammas' list in the config")
    out = cfg.outdir()
    for hi, h in enumerate(cfg.hurst):
        for s in range(cfg.seeds):
            path = _path_for(cfg, hi, s)
            for g in cfg.gammas:
                pts = sojourn_set(path, float(g))
                fname = out / f"sojourn_h{h}_s{s}_g{g}.txt"
                pts.save(fname)
                print(f"wrote {fname} ({len(pts)} points)")
    return EXIT_OK


def cmd_cover_cost(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    pts = DiscreteSet.load(args.set_file)
    n, rho, xi = args.block, args.rho, args.xi
    cost = nu_tilde(pts, n, rho, xi) if xi else nu(pts, n, rho)
    cover = optimal_cover(pts, n, rho, xi)
    record = {"n": n, "rho": rho, "xi": xi, "value": cost.value,
              "intervals": len(cover)}
    print(json.dumps(record, sort_keys=True))
    if args.out:
        write_cover_csv(args.out, n, cover, rho, xi)
    return EXIT_OK


def cmd_dim(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    pts = DiscreteSet.load(args.set_file)
    grid = cfg.rho_grid()
    est = estimate_dim(pts, cfg.n_min, cfg.n_max, grid)
    out = cfg.outdir()
    n_values = list(range(cfg.n_min, cfg.n_max + 1))
    table = nu_profile(pts, n_values, grid)
    with open(out / "nu_table.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,rho,nu\n")
        for i, n in enumerate(n_values):
            for j, rho in enumerate(grid):
                fh.write(f"{n},{rho},{table[i, j]!r}\n")
    rec = ResultRecord(
        experiment="dim",
        params={"set_file": str(args.set_file), "n_min": cfg.n_min,
                "n_max": cfg.n_max, "rho_grid": grid},
        results={"estimate": est.value, "slopes": est.slopes},
        wall_time=time.perf_counter() - t0,
    )
    rec.save(out / "dim.json")
    print(f"estimate = {est.value:.4f}")
    return EXIT_OK


def cmd_theorem2(cfg: ExperimentConfig) -> int:
    """Level-set dimension sweep: every level of the x-grid on the same paths."""
    t0 = time.perf_counter()
    grid_rho = cfg.rho_grid()
    out = cfg.outdir()
    records, failed = [], False
    for hi, h in enumerate(cfg.hurst):
        target = 1.0 - float(h)
        per_level = {float(x): [] for x in cfg.levels}
        warnings = []
        for s in range(cfg.seeds):
            path = _path_for(cfg, hi, s)
            for x in cfg.levels:
                pts = level_set(path, float(x))
                try:
                    est = estimate_dim(pts, cfg.n_min, cfg.n_max, grid_rho)
                except InsufficientDataError as exc:
                    warnings.append(f"low occupancy: H={h} seed={s} x={x}: {exc}")
                    continue
                per_level[float(x)].append(est.value)
        for x, vals in per_level.items():
            mean = float(np.mean(vals)) if vals else math.nan
            spread = float(np.ptp(vals)) if vals else math.nan
            ok = bool(vals) and abs(mean - target) <= cfg.tolerance
            failed = failed or not ok
            records.append(ResultRecord(
                experiment="theorem2",
                params={"hurst": float(h), "level": x, "seeds": cfg.seeds,
                        "n_min": cfg.n_min, "n_max": cfg.n_max, "delta": cfg.delta},
                results={"mean": mean, "spread": spread, "target": target,
                         "estimates": vals, "passed": ok, "warnings": warnings},
                wall_time=time.perf_counter() - t0,
            ))
    with open(out / "theorem2.json", "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
            print(f"H={rec.params['hurst']} x={rec.params['level']}: "
                  f"mean={rec.results['mean']:.3f} target={rec.results['target']:.3f} "
                  f"{'ok' if rec.results['passed'] else 'FAIL'}")
    return EXIT_CHECK if failed else EXIT_OK


def _random_set(rng: np.random.Generator) -> tuple[DiscreteSet, int]:
    n = int(rng.integers(1, 7))
    lo, hi = 2.0 ** (n - 1), 2.0 ** n
    size = int(rng.integers(1, 9))
    pts = lo + (hi - lo) * rng.random(size)
    if rng.random() < 0.4:  # mix in integer endpoints
        pts[: size // 2 + 1] = np.floor(pts[: size // 2 + 1])
        pts = np.clip(pts, lo, hi - 1e-9)
    return DiscreteSet.from_values(pts), n


def cmd_checks(cfg: ExperimentConfig) -> int:
    out = cfg.outdir()
    records = []

    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=np.uint64(cfg.base_seed)))
    bad = 0
    for _ in range(1000):
        pts, n = _random_set(rng)
        rho = float(rng.uniform(0.05, 1.5))
        xi = float(rng.choice([0.0, 0.5, 1.0]))
        if nu_tilde(pts, n, rho, xi).value < nu(pts, n, rho).value - 1e-12:
            bad += 1
    records.append(ResultRecord(
        experiment="check-nu-tilde-dominates",
        params={"trials": 1000, "base_seed": cfg.base_seed},
        results={"violations": bad, "passed": bad == 0},
        wall_time=time.perf_counter() - t0,
    ))

    for h in cfg.hurst:
        hurst = Hurst(float(h))

        t0 = time.perf_counter()
        est = occupation.mc_mean_L0(hurst, 2000, base_seed=cfg.base_seed)
        ref = occupation.expected_L0(hurst)
        ok = abs(est - ref) <= 0.05 * ref
        records.append(ResultRecord(
            experiment="check-expected-L0",
            params={"hurst": hurst.h, "paths": 2000},
            results={"mc_mean": est, "expected": ref, "passed": ok},
            wall_time=time.perf_counter() - t0,
        ))

        t0 = time.perf_counter()
        rep = occupation.scaling_check(hurst, 0.0, 4, 2000, base_seed=cfg.base_seed)
        records.append(ResultRecord(
            experiment="check-scaling",
            params={"hurst": hurst.h, "x": 0.0, "n": 4, "seeds": 2000},
            results={"statistic": rep.statistic, "p_value": rep.p_value,
                     "passed": rep.passed()},
            wall_time=time.perf_counter() - t0,
        ))

        grid = GridSpec(step=2.0 ** -6, count=2 ** 9)
        t0 = time.perf_counter()
        rep = check_self_similarity(hurst, grid, 4.0, 2000, base_seed=cfg.base_seed)
        records.append(ResultRecord(
            experiment="check-self-similarity",
            params={"hurst": hurst.h, "a": 4.0, "seeds": 2000},
            results={"statistic": rep.statistic, "p_value": rep.p_value,
                     "passed": rep.passed()},
            wall_time=time.perf_counter() - t0,
        ))
        t0 = time.perf_counter()
        rep = check_stationary_increments(hurst, grid, 0.5, 2000,
                                          base_seed=cfg.base_seed)
        records.append(ResultRecord(
            experiment="check-stationary-increments",
            params={"hurst": hurst.h, "shift": 0.5, "seeds": 2000},
            results={"statistic": rep.statistic, "p_value": rep.p_value,
                     "passed": rep.passed()},
            wall_time=time.perf_counter() - t0,
        ))

    failed = False
    with open(out / "checks.json", "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
            ok = rec.results["passed"]
            failed = failed or not ok
            print(f"{rec.experiment} {rec.params}: {'ok' if ok else 'FAIL'}")
    return EXIT_CHECK if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macrodim",
        description="Large-scale dimension experiments on fractional Brownian paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--hurst", type=float, help="override: single Hurst index")
        p.add_argument("--seed", type=int, help="override: base seed")
        p.add_argument("--n-min", dest="n_min", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--delta", type=float, help="path grid spacing")
        p.add_argument("--rho-min", dest="rho_min", type=float)
        p.add_argument("--rho-max", dest="rho_max", type=float)
        p.add_argument("--rho-step", dest="rho_step", type=float)
        p.add_argument("--out", help="output directory (cover-cost: CSV file)")

    for name in ("gen-fbm", "level-set", "sojourn", "theorem2", "checks"):
        common(sub.add_parser(name))

    p = sub.add_parser("cover-cost")
    common(p)
    p.add_argument("--set-file", required=True)
    p.add_argument("--block", type=int, required=True, help="block index n")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--xi", type=float, default=0.0)

    p = sub.add_parser("dim")
    common(p)
    p.add_argument("--set-file", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "gen-fbm":
            return cmd_gen_fbm(cfg)
        if args.command == "level-set":
            return cmd_level_set(cfg)
        if args.command == "sojourn":
            return cmd_sojourn(cfg)
        if args.command == "cover-cost":
            return cmd_cover_cost(cfg, args)
        if args.command == "dim":
            return cmd_dim(cfg, args)
        if args.command == "theorem2":
            return cmd_theorem2(cfg)
        if args.command == "checks":
            return cmd_checks(cfg)
        raise AssertionError(f"unknown command {args.command}")
    except (InsufficientDataError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure: {exc.filename}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
