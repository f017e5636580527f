"""Command-line entry points: gen, solve, path, bench.

Exit codes: 0 success, 1 usage or input problems, 2 numerical
non-convergence (iteration caps hit before the criterion cleared).

The SIEVE_THREADS environment variable caps BLAS thread pools (0 or unset
leaves the automatic choice). It takes effect when this module is the
process entry point, before numpy loads.
"""

import os
import sys

_threads_env = os.environ.get("SIEVE_THREADS", "").strip()
if _threads_env.isdigit() and _threads_env != "0":
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads_env)

import argparse
import json
import time
from pathlib import Path

import numpy as np

from .data_io import (
    SyntheticSpec,
    gen_synthetic,
    path_report_dict,
    read_bundle,
    read_groups,
    read_libsvm,
    write_bundle,
    write_report,
)
from .inner import Backend, InnerConfig, solve_reduced
from .model import (
    Criterion,
    ElasticNet,
    ExclusiveLasso,
    GroupPartition,
    IndexSet,
    Lasso,
    LossKind,
    SieveConfig,
    Slope,
    SparseGroupLasso,
)
from .path import (
    LambdaGrid,
    generate_path,
    lambda_grid_log10,
    ssr_screen_lasso,
    warmstart_path,
)
from .model import embed
from .residual import criterion_value, residual
from .sieve import SieveConsistencyError, TerminatedBy, sieve_solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

_CRITERIA = {"kkt": Criterion.RELATIVE_KKT, "rnorm": Criterion.RESIDUAL_NORM}


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # numerical trouble, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_data_args(p):
    p.add_argument("--data", metavar="DIR", help="synthetic bundle directory (from gen)")
    p.add_argument("--libsvm", metavar="FILE", help="libsvm text file")
    p.add_argument("--loss", choices=["ls", "logistic"], default="ls",
                   help="loss for --libsvm input; bundles carry their own")
    p.add_argument("--n-features", type=int, default=None,
                   help="declared feature count for --libsvm (default: max index)")
    p.add_argument("--groups", metavar="FILE",
                   help="groups file for sgl/exlasso (bundles default to their own grouping)")


def _add_reg_args(p):
    p.add_argument("--reg", choices=["lasso", "enet", "sgl", "exlasso", "slope"],
                   default="lasso")
    p.add_argument("--lambda2", type=float, default=None,
                   help="second parameter for enet/sgl; defaults tie it to lambda "
                        "(enet: lambda2 = lambda, sgl: lambda2 = lambda / max group weight)")
    p.add_argument("--slope-weights", metavar="FILE", default=None,
                   help="base weight sequence for slope, one value per line, scaled by "
                        "lambda (default: linear (n-i+1)/n)")


def _add_solver_args(p):
    p.add_argument("--eps", type=float, default=1e-6, help="termination tolerance")
    p.add_argument("--criterion", choices=sorted(_CRITERIA), default="kkt")
    p.add_argument("--kmax", type=int, default=500, help="max indices added per round")
    p.add_argument("--init-k", type=int, default=10,
                   help="initial set holds min(n, init_k * ceil(sqrt(n))) indices")
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--backend", choices=["apg", "proxgrad", "bb"], default="apg")
    p.add_argument("--max-inner-iters", type=int, default=20000)


def _add_output_args(p, out_required):
    p.add_argument("--out", metavar="FILE", required=out_required,
                   help="report file; figures land next to it")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--no-figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sieveopt",
                     description="sparse solvers with adaptive index-set sieving")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic problem bundle")
    g.add_argument("--m", type=int, required=True, help="rows")
    g.add_argument("--g", type=int, required=True, help="feature groups")
    g.add_argument("--p", type=int, required=True, help="features per group")
    g.add_argument("--sparsity", type=float, required=True,
                   help="signal fraction per group; floor(sparsity * p) nonzeros")
    g.add_argument("--loss", choices=["ls", "logistic"], default="ls")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", metavar="DIR", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one regularized problem")
    _add_data_args(s)
    _add_reg_args(s)
    lam_group = s.add_mutually_exclusive_group(required=True)
    lam_group.add_argument("--lambda", dest="lam", type=float,
                           help="absolute regularization strength")
    lam_group.add_argument("--lambda-c", dest="lam_c", type=float,
                           help="strength as a multiple of ||A^T b||_inf")
    _add_solver_args(s)
    s.add_argument("--no-as", action="store_true",
                   help="solve in full dimension (no sieving)")
    _add_output_args(s, out_required=False)
    s.set_defaults(func=cmd_solve)

    p = sub.add_parser("path", help="solve along a lambda grid")
    _add_data_args(p)
    _add_reg_args(p)
    _add_grid_args(p)
    _add_solver_args(p)
    _add_output_args(p, out_required=True)
    p.set_defaults(func=cmd_path)

    b = sub.add_parser("bench", help="compare the sieved path against baselines")
    _add_data_args(b)
    _add_reg_args(b)
    _add_grid_args(b)
    _add_solver_args(b)
    b.add_argument("--baselines", default="warmstart",
                   help="comma-separated subset of {warmstart, ssr}")
    _add_output_args(b, out_required=True)
    b.set_defaults(func=cmd_bench)
    return parser


def _add_grid_args(p):
    p.add_argument("--grid-hi", type=float, default=1e-1,
                   help="largest grid coefficient (times ||A^T b||_inf)")
    p.add_argument("--grid-lo", type=float, default=1e-4, help="smallest grid coefficient")
    p.add_argument("--grid-n", type=int, default=20, help="grid size")
    p.add_argument("--grid-scale", type=float, default=1.0,
                   help="extra multiplier on ||A^T b||_inf")
    p.add_argument("--eps-hat", type=float, default=1e-10,
                   help="active-set threshold |x_j| > eps-hat")


def _load_problem(args):
    if (args.data is None) == (args.libsvm is None):
        raise CliError("exactly one of --data or --libsvm is required")
    if args.data is not None:
        problem, _x_true, meta = read_bundle(args.data)
        return problem, meta
    return read_libsvm(args.libsvm, LossKind(args.loss), args.n_features), None


def _resolve_partition(args, problem, meta):
    if args.groups is not None:
        return read_groups(args.groups, problem.n)
    if meta is not None:
        return GroupPartition.contiguous(int(meta["g"]), int(meta["p"]))
    return None


def _load_slope_base(path, n):
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise CliError(f"{path}:{lineno}: bad weight {line!r}") from None
    if len(values) != n:
        raise CliError(f"{path}: {len(values)} weights for {n} features")
    return np.asarray(values)


def _make_family(args, problem, partition):
    n = problem.n
    if args.reg == "lasso":
        return lambda lam: Lasso(lam, n)
    if args.reg == "enet":
        lam2 = args.lambda2
        return lambda lam: ElasticNet(lam, lam2 if lam2 is not None else lam, n)
    if args.reg in ("sgl", "exlasso") and partition is None:
        raise CliError(f"--reg {args.reg} needs --groups or a bundle with group metadata")
    if args.reg == "sgl":
        weights = np.sqrt(partition.sizes.astype(float))
        w_max = float(weights.max())
        lam2 = args.lambda2
        return lambda lam: SparseGroupLasso(
            lam, lam2 if lam2 is not None else lam / w_max, partition, weights
        )
    if args.reg == "exlasso":
        return lambda lam: ExclusiveLasso(lam, partition)
    if args.slope_weights is not None:
        base = _load_slope_base(args.slope_weights, n)
    else:
        base = np.arange(n, 0, -1) / n
    return lambda lam: Slope(lam * base)


def _lambda_max(problem) -> float:
    value = float(np.max(np.abs(problem.A.T @ problem.b)))
    if value == 0.0:
        raise CliError("A^T b is zero; lambda coefficients have no scale")
    return value


def _config_dict(args) -> dict:
    out = {}
    for key, value in vars(args).items():
        if key == "func":
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _figure_path(out: Path, tag: str) -> Path:
    return out.parent / (out.stem + f"_{tag}.png")


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        m=args.m, g=args.g, p=args.p, sparsity=args.sparsity,
        loss=LossKind(args.loss), seed=args.seed,
    )
    if spec.r < 1:
        raise CliError(
            f"sparsity {args.sparsity} yields 0 nonzeros per group "
            f"(floor({args.sparsity} * {args.p}) = 0)"
        )
    problem, x_true = gen_synthetic(spec)
    out = write_bundle(args.out, spec, problem, x_true)
    print(f"bundle written to {out}")
    print(f"m={problem.m} n={problem.n} loss={spec.loss.value} "
          f"nnz(x_true)={int(np.count_nonzero(x_true))} seed={spec.seed}")
    return EXIT_OK


def _solver_configs(args):
    cfg = SieveConfig(
        epsilon=args.eps,
        criterion=_CRITERIA[args.criterion],
        k_max=args.kmax,
        init_k=args.init_k,
        max_rounds=args.max_rounds,
    )
    inner = InnerConfig(
        backend=Backend(args.backend),
        max_iters=args.max_inner_iters,
        epsilon_outer=args.eps,
    )
    return cfg, inner


def cmd_solve(args) -> int:
    problem, meta = _load_problem(args)
    partition = _resolve_partition(args, problem, meta)
    family = _make_family(args, problem, partition)
    lam = args.lam if args.lam is not None else args.lam_c * _lambda_max(problem)
    if not lam > 0:
        raise CliError("lambda must be positive")
    spec = family(lam)
    cfg, inner = _solver_configs(args)

    t0 = time.perf_counter()
    sieve_report = None
    if args.no_as:
        res = solve_reduced(
            problem, spec, IndexSet.full(problem.n), np.zeros(problem.n), inner
        )
        rep = residual(problem, spec, res.x_support)
        x = res.x_support
        ok = res.converged and criterion_value(rep, cfg.criterion) <= cfg.epsilon
        eta, norm = rep.eta_kkt, rep.norm
        rounds, dims, iters = 0, (problem.n,), res.iterations
    else:
        sieve_report = sieve_solve(problem, spec, cfg, inner)
        x = sieve_report.x
        ok = sieve_report.terminated_by is TerminatedBy.TOLERANCE
        eta, norm = sieve_report.final_eta_kkt, sieve_report.final_residual_norm
        rounds = sieve_report.rounds
        dims = sieve_report.reduced_dims
        iters = sieve_report.inner_iterations
    wall = time.perf_counter() - t0

    nnz = int(np.count_nonzero(x))
    status = "tolerance" if ok else "not_converged"
    print(f"lambda      {lam:.6e}")
    print(f"nnz         {nnz}")
    print(f"eta_kkt     {eta:.3e}")
    print(f"residual    {norm:.3e}")
    print(f"rounds      {rounds}")
    print(f"inner_iters {iters}")
    print(f"status      {status}")

    if args.out is not None:
        out = Path(args.out)
        report = {
            "model": f"{args.reg}_{problem.loss.value}",
            "lambda": [lam],
            "nnz": [nnz],
            "eta_kkt": [eta],
            "rounds": [rounds],
            "avg_reduced_dim": float(np.mean(dims)),
            "max_reduced_dim": int(max(dims)),
            "wall_time_s": [wall],
            "solver": args.backend,
            "criterion": args.criterion,
            "config": _config_dict(args),
        }
        write_report(report, out, args.format)
        print(f"report written to {out}")
        if not args.no_figures and sieve_report is not None:
            from .figures import render_solve_figure

            fig = render_solve_figure(
                sieve_report, cfg.epsilon, cfg.criterion, _figure_path(out, "rounds")
            )
            print(f"figure written to {fig}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def _print_path_table(report):
    print(f"{'lambda':>14} {'nnz':>6} {'rounds':>7} {'eta_kkt':>11} {'time_s':>9}")
    for e in report.entries:
        print(f"{e.lam:>14.6e} {e.nnz:>6d} {e.rounds:>7d} {e.eta_kkt:>11.3e} "
              f"{e.wall_time_s:>9.3f}")
    print(f"total rounds {report.total_rounds}, avg dim {report.avg_reduced_dim:.1f}, "
          f"max dim {report.max_reduced_dim}, time {report.total_wall_time_s:.3f}s")


def cmd_path(args) -> int:
    problem, meta = _load_problem(args)
    partition = _resolve_partition(args, problem, meta)
    family = _make_family(args, problem, partition)
    grid = lambda_grid_log10(problem, args.grid_hi, args.grid_lo, args.grid_n,
                             args.grid_scale)
    cfg, inner = _solver_configs(args)
    report = generate_path(problem, family, grid, cfg, inner, eps_hat=args.eps_hat)
    _print_path_table(report)

    out = Path(args.out)
    rep_dict = path_report_dict(
        report,
        model=f"{args.reg}_{problem.loss.value}",
        solver=args.backend,
        criterion=args.criterion,
        config=_config_dict(args),
    )
    write_report(rep_dict, out, args.format)
    print(f"report written to {out}")
    if not args.no_figures:
        from .figures import render_path_figure

        fig = render_path_figure(report, _figure_path(out, "profile"))
        print(f"figure written to {fig}")
    flagged = any(e.terminated_by is not TerminatedBy.TOLERANCE for e in report.entries)
    return EXIT_NUMERICAL if flagged else EXIT_OK


def _method_row(name, report):
    return {
        "method": name,
        "total_wall_time_s": report.total_wall_time_s,
        "s_rnd": report.total_rounds,
        "avg_d": report.avg_reduced_dim,
        "max_d": report.max_reduced_dim,
        "worst_eta_kkt": max(e.eta_kkt for e in report.entries),
        "flagged": sum(
            1 for e in report.entries if e.terminated_by is not TerminatedBy.TOLERANCE
        ),
    }


def cmd_bench(args) -> int:
    wanted = [tok.strip() for tok in args.baselines.split(",") if tok.strip()]
    unknown = set(wanted) - {"warmstart", "ssr"}
    if unknown:
        raise CliError(f"unknown baselines: {', '.join(sorted(unknown))}")
    problem, meta = _load_problem(args)
    partition = _resolve_partition(args, problem, meta)
    family = _make_family(args, problem, partition)
    grid = lambda_grid_log10(problem, args.grid_hi, args.grid_lo, args.grid_n,
                             args.grid_scale)
    cfg, inner = _solver_configs(args)
    if "ssr" in wanted and (args.reg != "lasso" or problem.loss is not LossKind.LEAST_SQUARES):
        raise CliError("the ssr baseline applies to the least-squares lasso only")

    reports = {"sieve": generate_path(problem, family, grid, cfg, inner,
                                      eps_hat=args.eps_hat)}
    if "warmstart" in wanted:
        reports["warmstart"] = warmstart_path(problem, family, grid, inner,
                                              eps_hat=args.eps_hat)

    ssr_summary = None
    if "ssr" in wanted:
        entries = reports["sieve"].entries
        rows = []
        for prev, cur in zip(entries, entries[1:]):
            x_prev = embed(prev.x_active, prev.active, problem.n)
            keep = ssr_screen_lasso(problem, x_prev, prev.lam, cur.lam)
            dropped_active = int(
                np.setdiff1d(cur.active.indices, keep.indices).size
            )
            rows.append({
                "lambda": cur.lam,
                "kept": len(keep),
                "discarded_but_active": dropped_active,
            })
        ssr_summary = {
            "per_lambda": rows,
            "total_discarded_but_active": sum(r["discarded_but_active"] for r in rows),
        }

    header = f"{'method':<12} {'time_s':>10} {'S.Rnd':>7} {'Avg.D.':>10} {'Max.D.':>8}"
    print(header)
    method_rows = []
    for name, rep in reports.items():
        row = _method_row(name, rep)
        method_rows.append(row)
        print(f"{name:<12} {row['total_wall_time_s']:>10.3f} {row['s_rnd']:>7d} "
              f"{row['avg_d']:>10.1f} {row['max_d']:>8d}")
    if ssr_summary is not None:
        print(f"ssr discarded-but-active total: "
              f"{ssr_summary['total_discarded_but_active']}")

    out = Path(args.out)
    bench = {
        "model": f"{args.reg}_{problem.loss.value}",
        "methods": method_rows,
        "ssr": ssr_summary,
        "config": _config_dict(args),
    }
    if args.format == "json":
        with open(out, "w") as fh:
            json.dump(bench, fh, indent=2)
            fh.write("\n")
    else:
        import csv as _csv

        with open(out, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=list(method_rows[0]))
            writer.writeheader()
            writer.writerows(method_rows)
    print(f"report written to {out}")
    if not args.no_figures:
        from .figures import render_bench_figure

        fig = render_bench_figure(reports, _figure_path(out, "bench"))
        print(f"figure written to {fig}")
    flagged = any(row["flagged"] for row in method_rows)
    return EXIT_NUMERICAL if flagged else EXIT_OK


def main(argv=None) -> int:
    raw = os.environ.get("SIEVE_THREADS")
    if raw is not None and raw.strip():
        if not raw.strip().isdigit():
            print(f"error: SIEVE_THREADS must be a nonnegative integer, got {raw!r}",
                  file=sys.stderr)
            return EXIT_USAGE
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except SieveConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CliError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
