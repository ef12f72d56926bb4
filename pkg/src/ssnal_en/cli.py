"""Command line interface: ``gen``, ``solve``, ``path``, ``tune`` and ``bench``.

Exit codes: 0 success, 1 usage or I/O error, 2 a solve did not converge.
Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys are option names without the leading dashes); command-line flags take
precedence over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BENCH_COLUMNS, run_bench
from .config import SolverConfig
from .data import PRESETS, Dataset, SimSpec, generate, poly_expand, read_csv, read_libsvm, realized_snr, rho_hat, standardize
from .dual import Problem
from .oracle import OracleConfig, prox_grad_solve
from .penalty import Penalty
from .selection import CRITERIA, build_grid, make_grid, path, select_model
from .solver import solve

logger = logging.getLogger("ssnal_en")

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


def _count(text: str) -> int:
    """Integer that may be written as ``1e4``."""
    val = float(text)
    if val != int(val):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(val)


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _count_list(text: str) -> list[int]:
    return [_count(t) for t in text.split(",") if t.strip()]


def _fmt(v) -> str:
    return format(v, ".17g")


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with option defaults")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--log-level", default="WARNING")


def _add_data(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data source (one of)")
    g.add_argument("--data", help="directory written by `gen`")
    g.add_argument("--libsvm", help="LIBSVM-format file")
    g.add_argument("--csv", dest="csv_file", help="CSV matrix, response in --target-col")
    g.add_argument("--preset", choices=sorted(PRESETS), help="generate on the fly")
    g.add_argument("--target-col", type=int, default=0)
    g.add_argument("--poly", type=int, default=1, help="polynomial expansion degree")
    g.add_argument("--max-columns", type=_count, default=5_000_000)
    g.add_argument("--n", type=_count, help="features for --preset")
    g.add_argument("--m", type=_count, help="observations for --preset")
    g.add_argument("--n0", type=_count)
    g.add_argument("--seed", type=int, default=0)


def _add_solver(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--sigma0", type=float, default=5e-3)
    g.add_argument("--sigma-factor", type=float, default=5.0)
    g.add_argument("--mu", type=float, default=0.2)
    g.add_argument("--max-iter", type=int, default=100, help="outer iterations")
    g.add_argument("--loss-scale", choices=("unit", "per_observation"), default="unit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssnal-en", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--m", type=_count)
    p.add_argument("--n", type=_count)
    p.add_argument("--n0", type=_count)
    p.add_argument("--x-star", type=float, default=5.0)
    p.add_argument("--snr", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--write-csv", action="store_true", help="also write A.csv and b.csv")

    p = sub.add_parser("solve", help="solve one Elastic Net problem")
    _add_common(p)
    _add_data(p)
    _add_solver(p)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--clambda", type=float)
    p.add_argument("--oracle-check", action="store_true",
                   help="also run proximal gradient and report the relative objective gap")

    for name, helptext in (("path", "warm-started regularization path"),
                           ("tune", "paths over several alphas with model selection")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_data(p)
        _add_solver(p)
        p.add_argument("--alpha-list", type=_float_list, default=[0.9, 0.8, 0.6] if name == "tune" else [0.6])
        p.add_argument("--n-lambda", type=_count, default=100)
        p.add_argument("--c-min", type=float, default=0.1)
        p.add_argument("--max-active", type=_count)
        p.add_argument("--cv-folds", type=int, default=10 if name == "tune" else 0)
        p.add_argument("--criteria", default=",".join(CRITERIA) if name == "tune" else "gcv,ebic")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--cold", action="store_true", help="disable warm starts")

    p = sub.add_parser("bench", help="timing table against the proximal-gradient baseline")
    _add_common(p)
    _add_solver(p)
    p.add_argument("--preset", choices=sorted(PRESETS), default="sim1")
    p.add_argument("--n-list", type=_count_list, default=[10_000])
    p.add_argument("--m", type=_count)
    p.add_argument("--n0", type=_count)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--clambda", type=float, help="fixed c_lambda (default 0.5)")
    p.add_argument("--target-r", type=_count, help="search c_lambda on the first replication for this r")
    p.add_argument("--baseline-reps", type=int, help="replications timed for the baseline (default all)")
    p.add_argument("--baseline-max-time", type=float, help="seconds cap per baseline run")
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in values.items():
            if key not in known:
                raise UsageError(f"{args.config}: unknown option {key!r} for {args.command}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = value  # string defaults are run through the option type
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- helpers

def load_dataset(args) -> Dataset:
    sources = [s for s in (args.data, args.libsvm, args.csv_file, args.preset) if s]
    if len(sources) != 1:
        raise UsageError("give exactly one of --data, --libsvm, --csv, --preset")
    if args.data:
        d = Path(args.data)
        A = np.load(d / "A.npy")
        b = np.load(d / "b.npy")
        prov = json.loads((d / "dataset.json").read_text()) if (d / "dataset.json").exists() else {}
        ds = Dataset(A, b, provenance={"source": str(d), **prov.get("provenance", {})})
    elif args.libsvm:
        ds = read_libsvm(args.libsvm)
    elif args.csv_file:
        ds = read_csv(args.csv_file, args.target_col)
    else:
        if args.n is None:
            raise UsageError("--preset needs --n")
        over = {k: v for k, v in (("m", args.m), ("n0", args.n0)) if v is not None}
        ds = generate(SimSpec.preset(args.preset, args.n, seed=args.seed, **over))
        ds.provenance["preset"] = args.preset
    if args.poly > 1:
        A = poly_expand(ds.A, args.poly, max_columns=args.max_columns)
        ds = Dataset(A, ds.b, provenance={**ds.provenance, "poly_degree": args.poly})
    return ds


def solver_config(args) -> SolverConfig:
    return SolverConfig(outer_tol=args.tol, sigma0=args.sigma0, sigma_factor=args.sigma_factor,
                        mu=args.mu, max_outer=args.max_iter, loss_scale=args.loss_scale)


def write_solution(path, prob: Problem, x) -> None:
    """One ``index value`` line per nonzero; 1-based indices into the raw design."""
    nz = np.flatnonzero(x)
    with open(path, "w") as fh:
        for j in nz:
            fh.write(f"{int(prob.columns[j]) + 1} {_fmt(float(x[j]))}\n")


def read_solution(path) -> dict[int, float]:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                k, v = line.split()
                out[int(k)] = float(v)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def append_run_record(out: Path, record: dict) -> None:
    with open(out / "runs.jsonl", "a") as fh:
        fh.write(json.dumps(_jsonable(record), sort_keys=True) + "\n")


def _penalty_from_args(args, prob: Problem) -> Penalty:
    if args.lambda1 is not None or args.lambda2 is not None:
        if args.lambda1 is None or args.lambda2 is None:
            raise UsageError("--lambda1 and --lambda2 go together")
        if args.alpha is not None or args.clambda is not None:
            raise UsageError("use either --lambda1/--lambda2 or --alpha/--clambda")
        return Penalty(args.lambda1, args.lambda2)
    if args.alpha is None or args.clambda is None:
        raise UsageError("give --lambda1 and --lambda2, or --alpha and --clambda")
    return make_grid(prob, args.alpha, [args.clambda]).penalty(0)


# ---------------------------------------------------------------- commands

def cmd_gen(args, out: Path, record: dict) -> int:
    if args.preset:
        if args.n is None:
            raise UsageError("--preset needs --n")
        over = {k: v for k, v in (("m", args.m), ("n0", args.n0)) if v is not None}
        spec = SimSpec.preset(args.preset, args.n, seed=args.seed, x_star=args.x_star, snr=args.snr, **over)
    else:
        if None in (args.m, args.n, args.n0):
            raise UsageError("give --preset or all of --m, --n, --n0")
        spec = SimSpec(args.m, args.n, args.n0, args.x_star, args.snr, args.seed)
    ds = generate(spec)
    np.save(out / "A.npy", np.asfortranarray(ds.A))
    np.save(out / "b.npy", ds.b)
    with open(out / "truth.txt", "w") as fh:
        for j in ds.support:
            fh.write(f"{int(j) + 1} {_fmt(float(ds.x_true[j]))}\n")
    files = ["A.npy", "b.npy", "truth.txt", "dataset.json"]
    if args.write_csv:
        np.savetxt(out / "A.csv", ds.A, delimiter=",", fmt="%.17g")
        np.savetxt(out / "b.csv", ds.b, delimiter=",", fmt="%.17g")
        files += ["A.csv", "b.csv"]
    snr = realized_snr(ds)
    rho = rho_hat(ds)
    prov = dict(ds.provenance, preset=args.preset)
    write_json(out / "dataset.json", {"provenance": prov, "realized_snr": snr, "rho_hat": rho})
    print(f"wrote {ds.A.shape[0]}x{ds.A.shape[1]} dataset to {out}")
    print(f"realized snr = {snr:.6g}")
    print(f"rho_hat      = {rho:.6g}")
    record.update(provenance=prov, outputs=[str(out / f) for f in files])
    return EXIT_OK


def cmd_solve(args, out: Path, record: dict) -> int:
    t0 = time.perf_counter()
    ds = load_dataset(args)
    prob, meta = standardize(ds)
    t_load = time.perf_counter() - t0
    pen = _penalty_from_args(args, prob)
    cfg = solver_config(args)
    sol = solve(prob, pen, cfg)
    summary = {"lambda1": pen.lambda1, "lambda2": pen.lambda2, "m": prob.m, "n": prob.n,
               "coef_scale": "standardized", "active_set": (prob.columns[sol.active_set] + 1).tolist(),
               **sol.summary(), "history": sol.history}
    if args.oracle_check:
        t1 = time.perf_counter()
        ref = prox_grad_solve(prob, pen, OracleConfig(loss_scale=cfg.loss_scale))
        gap = abs(sol.primal_objective - ref.primal_objective) / abs(ref.primal_objective)
        summary["oracle"] = {"objective": ref.primal_objective, "relative_gap": gap,
                             "iterations": ref.outer_iters, "time": time.perf_counter() - t1}
        print(f"oracle relative objective gap = {gap:.3e}")
    write_solution(out / "solution.txt", prob, sol.x)
    write_json(out / "summary.json", summary)
    print(f"r={sol.r} objective={sol.primal_objective:.10g} outer={sol.outer_iters} "
          f"res_kkt3={sol.res_kkt3:.2e} res_kkt1={sol.res_kkt1:.2e} converged={sol.converged}")
    record.update(provenance=ds.provenance, dropped_columns=meta["dropped_columns"],
                  timing={"load": t_load, "solve": sol.wall_time},
                  iterations={"outer": sol.outer_iters, "inner": sol.inner_iters_total},
                  outputs=[str(out / "solution.txt"), str(out / "summary.json")])
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def _criteria(text: str) -> tuple[str, ...]:
    crit = tuple(c.strip() for c in text.split(",") if c.strip())
    bad = set(crit) - set(CRITERIA)
    if bad:
        raise UsageError(f"unknown criteria {sorted(bad)}; choose from {CRITERIA}")
    return crit


def cmd_path(args, out: Path, record: dict) -> int:
    ds = load_dataset(args)
    prob, _ = standardize(ds)
    cfg = solver_config(args)
    crit = _criteria(args.criteria)
    t0 = time.perf_counter()
    if args.command == "tune" or (args.cv_folds and "cv" in crit):
        if args.cold:
            raise UsageError("--cold is only supported by `path`")
        report = select_model(prob, alphas=args.alpha_list, n_lambda=args.n_lambda, c_min=args.c_min,
                              max_active=args.max_active, cv_folds=args.cv_folds or None,
                              criteria=crit, config=cfg, seed=args.seed, threads=args.threads)
    else:
        from .selection import SelectionReport
        report = SelectionReport()
        for alpha in args.alpha_list:
            grid = build_grid(prob, alpha, args.n_lambda, args.c_min, args.max_active)
            report.extend(path(prob, grid, cfg, warm_start=not args.cold))
        report.choose(crit)
    elapsed = time.perf_counter() - t0
    name = args.command
    outputs = [out / f"{name}.csv", out / f"{name}.json"]
    report.to_csv(outputs[0])
    write_json(outputs[1], report.to_dict())
    for c, i in report.chosen.items():
        sol_path = out / f"chosen_{c}.txt"
        write_solution(sol_path, prob, report.solutions[i].x)
        plot_path = out / f"plot_{c}.csv"
        col = "cv_mean" if c == "cv" else c
        with open(plot_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "c_lambda", "r", col])
            for pt in report.points:
                w.writerow([_fmt(pt.alpha), _fmt(pt.c_lambda), pt.r, _fmt(getattr(pt, col))])
        outputs += [sol_path, plot_path]
        pt = report.points[i]
        print(f"{c}: alpha={pt.alpha:g} c_lambda={pt.c_lambda:.4g} r={pt.r}")
    n_bad = sum(not pt.converged for pt in report.points)
    print(f"{len(report)} grid points in {elapsed:.2f}s ({n_bad} not converged)")
    record.update(provenance=ds.provenance, timing={"path": elapsed},
                  iterations={"outer": int(sum(pt.outer_iters for pt in report.points))},
                  outputs=[str(o) for o in outputs])
    return EXIT_OK if n_bad == 0 else EXIT_NOT_CONVERGED


def cmd_bench(args, out: Path, record: dict) -> int:
    cfg = solver_config(args)
    c = args.clambda if args.clambda is not None else (None if args.target_r else 0.5)
    rows = run_bench(args.preset, args.n_list, args.reps, m=args.m, n0=args.n0, c_lambda=c,
                     target_r=args.target_r, seed=args.seed, baseline_reps=args.baseline_reps,
                     baseline_max_time=args.baseline_max_time, config=cfg)
    target = out / "bench.csv"
    with open(target, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in BENCH_COLUMNS})
    for row in rows:
        se = "" if row["ssnal_time_se"] is None else f" +- {row['ssnal_time_se']:.4f}"
        base = ""
        if row["baseline_time_mean"] is not None:
            base = f"  baseline {row['baseline_time_mean']:.3f}s  speedup {row['speedup']:.1f}x"
        print(f"{row['scenario']} n={row['n']}: ssnal {row['ssnal_time_mean']:.4f}s{se} "
              f"({row['outer_iters_mean']:.1f} it, r={row['r_mean']:.1f}){base}")
    record.update(rows=rows, outputs=[str(target)])
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "path": cmd_path, "tune": cmd_path, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    record = {"command": args.command, "argv": list(sys.argv[1:] if argv is None else argv),
              "config": {k: v for k, v in vars(args).items() if k != "command"}}
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[args.command](args, out, record)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
        record["error"] = str(exc)
    record["exit_code"] = code
    record.setdefault("timing", {})["wall"] = time.perf_counter() - t0
    try:
        append_run_record(out, record)
    except OSError as exc:
        print(f"warning: could not write run record: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
