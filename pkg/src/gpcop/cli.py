"""Command-line interface: build surrogates, evaluate them, run rate studies.

Exit codes: 0 success, 2 configuration error, 3 oracle (solver) error,
4 cube-membership error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, StudyConfig, load_config
from .pde import EllipticityError, PdeOracle, SolverError
from .spaces import CubeDomain, FourierField, MembershipError, WeightSequence
from .surrogate import (
    SurrogateModel,
    build,
    candidate_pool,
    mean_square_error,
    theoretical_t_max,
    worst_case_error,
)
from .univariate import leja_points

EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_MEMBERSHIP = 4


def _domain(cfg: StudyConfig) -> CubeDomain:
    return CubeDomain(cfg.r, cfg.s, WeightSequence(cfg.dim), cfg.n_act)


def _oracle(cfg: StudyConfig) -> PdeOracle:
    basis = cfg.basis()
    return PdeOracle(
        basis,
        cfg.abar_field(basis),
        cfg.source_field(basis),
        solver_modes=cfg.solver_modes,
        cg_tol=cfg.cg_tol,
        a_min=cfg.a_min,
    )


def _pool(cfg: StudyConfig, domain, oracle, pool_size: int):
    return candidate_pool(
        domain,
        oracle.basis,
        pool_size,
        mode=cfg.pool,
        oracle=oracle,
        nodes=leja_points(max(pool_size, 16)),
        kappa=cfg.kappa,
    )


def _build_models(cfg: StudyConfig, out_dir: str):
    """Build one model per budget, sharing the oracle's solve cache."""
    domain = _domain(cfg)
    oracle = _oracle(cfg)
    pool = _pool(cfg, domain, oracle, max(cfg.budgets))
    os.makedirs(out_dir, exist_ok=True)
    models = []
    for N in cfg.budgets:
        model = build(
            domain,
            oracle.basis,
            oracle,
            pool,
            N,
            variant=cfg.variant,
            delta=cfg.delta,
            config_hash=cfg.config_hash,
        )
        path = os.path.join(out_dir, f"model_{N}.txt")
        model.save(path)
        models.append((N, model, path))
    return oracle, models


def cmd_build(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.out_dir or cfg.directory
    oracle, models = _build_models(cfg, out_dir)
    for N, model, path in models:
        print(
            f"budget {N}: realized cost {model.realized_cost}, "
            f"{len(model.output_modes)} outputs, "
            f"largest set {len(model.sets[0]) if model.sets else 0}, "
            f"oracle solves {oracle.solve_count} -> {path}"
        )
    return 0


def cmd_eval(args) -> int:
    model = SurrogateModel.load(args.model)
    a = FourierField.from_csv(model.basis, args.field)
    u = model.evaluate(a)
    out = args.out or (os.path.splitext(args.field)[0] + ".out.csv")
    u.to_csv(out)
    print(f"wrote {out}")
    return 0


def _fit_slope(costs, errors, drop: int) -> float:
    x = np.log(np.asarray(costs, dtype=float)[drop:])
    y = np.log(np.asarray(errors, dtype=float)[drop:])
    return float(np.polyfit(x, y, 1)[0])


def run_study(cfg: StudyConfig):
    """Build every budget, measure errors, and return the study rows.

    Returns (rows, wc_slope, rms_slope, theoretical_rate), where each row is
    (budget, realized cost, wc error, rms error, rms standard error, tail).
    """
    oracle, models = _build_models(cfg, cfg.directory)
    rows = []
    for N, model, _path in models:
        wc = worst_case_error(model, oracle, cfg.n_samples, cfg.seed)
        ms = mean_square_error(model, oracle, cfg.n_samples, cfg.seed)
        rows.append((N, model.realized_cost, wc.value, ms.value, ms.std_error, wc.tail))
    drop = cfg.fit_drop
    wc_slope = _fit_slope([r[1] for r in rows], [r[2] for r in rows], drop)
    rms_slope = _fit_slope([r[1] for r in rows], [r[3] for r in rows], drop)
    rate = min(cfg.s - 1.0, theoretical_t_max(oracle.basis))
    return rows, wc_slope, rms_slope, rate, oracle


def write_rates_csv(path, cfg: StudyConfig, rows, wc_slope, rms_slope, rate, solver_modes):
    with open(path, "w") as fh:
        fh.write(
            "budget,realized_cost,wc_error,rms_error,rms_se,tail,"
            "config_hash,seed,solver_modes\n"
        )
        for N, cost, wc, rms, se, tail in rows:
            fh.write(
                f"{N},{cost},{wc!r},{rms!r},{se!r},{tail!r},"
                f"{cfg.config_hash},{cfg.seed},{solver_modes}\n"
            )
        fh.write(f"# wc_slope,{wc_slope!r}\n")
        fh.write(f"# rms_slope,{rms_slope!r}\n")
        fh.write(f"# theoretical_rate,{-rate!r}\n")


def cmd_study(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.directory = args.out_dir
    if len(cfg.budgets) < 4:
        raise ConfigError(
            f"[surrogate] budgets: a study needs at least 4 budgets, got {len(cfg.budgets)}"
        )
    if cfg.fit_drop > len(cfg.budgets) - 2:
        raise ConfigError(
            f"[error] fit_drop: must leave at least two budgets for the fit, got {cfg.fit_drop}"
        )
    rows, wc_slope, rms_slope, rate, oracle = run_study(cfg)
    os.makedirs(cfg.directory, exist_ok=True)
    path = os.path.join(cfg.directory, "rates.csv")
    write_rates_csv(path, cfg, rows, wc_slope, rms_slope, rate, oracle.solver_modes)
    print(f"wrote {path}")
    print(f"wc slope {wc_slope:.3f}, rms slope {rms_slope:.3f}, theoretical rate {-rate:.3f}")
    return 0


def cmd_leja(args) -> int:
    seq = leja_points(args.n, args.grid_resolution)
    lines = ["k,x"] + [f"{k},{float(x)!r}" for k, x in enumerate(seq.points)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcop",
        description="Sparse-grid polynomial-chaos operator surrogates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and persist one model per budget")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="apply a saved model to a coefficient-field CSV")
    p.add_argument("model")
    p.add_argument("field")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("study", help="run a convergence study and emit rates.csv")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("leja", help="export the first n Leja points")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid-resolution", type=int, default=100_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_leja)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EllipticityError, SolverError) as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except MembershipError as exc:
        print(f"membership error: {exc}", file=sys.stderr)
        return EXIT_MEMBERSHIP
    except (ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
