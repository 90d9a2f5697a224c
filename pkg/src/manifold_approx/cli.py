"""Command-line front end: ``python3 -m manifold_approx <command> [options]``.

Commands
--------
verify       Monte-Carlo checks of the geometric inequalities
reach-est    sample-based reach estimate of a shipped manifold
torus-exp    Fourier partial sums of torus test functions, observed vs. bounds
sphere-exp   spherical harmonic approximation of an RP^2-valued field
denoise      smooth an orientation grid CSV and compute lattice curvature
synth-grid   write a synthetic noisy orientation grid CSV

Exit status is 0 on success, 1 for usage or configuration errors and 2 when a
bound is violated.  CSV bodies depend only on the options and the seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import ManifoldApproxError
from .experiments import run_sphere_experiment, run_torus_experiment
from .orientation import (
    OrientationDenoiser,
    SmoothFieldSpec,
    curvature_fd,
    ingest_grid,
    synthesize_grid,
    write_grid,
)
from .reach import (
    check_commutator,
    check_curvature_bound,
    check_dP_deviation,
    check_tangent_lipschitz,
    estimate_reach,
    summarize,
)
from .symmetry import GROUP_NAMES
from .zoo import MODELS, get_model

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2

BOUNDS = ("tangent-lipschitz", "dP-deviation", "commutator", "curvature")
DEFAULT_TRIALS = {"tangent-lipschitz": 2000, "dP-deviation": 500, "commutator": 100000, "curvature": 1000}
DEFAULT_MODELS = ("sphere", "rp2", "circle")
COMMUTATOR_DIMS = tuple(range(2, 10))


class ConfigError(Exception):
    """Invalid option values detected after parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    out: str
    threads: int
    tol: float | None
    options: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _int_list(text: str):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_pair(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected one or two numbers, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) <= 0:
        raise argparse.ArgumentTypeError("spacing needs one or two positive numbers")
    return tuple(vals)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copies must not reset values given before the subcommand
    def default(value):
        return argparse.SUPPRESS if suppress else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    flags.add_argument("--out", default=default("out"), help="output directory (default ./out)")
    flags.add_argument("--threads", type=int, default=default(1), help="worker threads for independent suites")
    flags.add_argument("--tol", type=float, default=default(None), help="override the comparison slack")
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = _Parser(prog="manifold-approx", description=__doc__.split("\n\n")[0], parents=[_global_flags(False)])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="Monte-Carlo checks of the geometric bounds")
    sel = p.add_mutually_exclusive_group(required=True)
    sel.add_argument("--bound", action="append", help=f"one of {', '.join(BOUNDS)} (repeatable)")
    sel.add_argument("--all", action="store_true", help="run every bound")
    p.add_argument("--trials", type=int, default=None, help="trials per model (commutator: total)")
    p.add_argument("--models", default=",".join(DEFAULT_MODELS), help="comma-separated manifolds")

    p = sub.add_parser("reach-est", parents=[common], help="estimate the reach from random samples")
    p.add_argument("--manifold", default="rp2", choices=sorted(MODELS))
    p.add_argument("--samples", type=int, default=5000)

    p = sub.add_parser("torus-exp", parents=[common], help="Fourier partial sums on the circle")
    p.add_argument("--manifold", default="sphere", choices=["sphere", "so3"])
    p.add_argument("--r", type=int, default=2, choices=[2, 3])
    p.add_argument("--n", type=_int_list, default=[4, 8, 16, 32, 64], help="bandwidths, e.g. 4,8,16")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--points", type=int, default=4096, help="evaluation points")
    p.add_argument("--dense", type=int, default=2**14, help="samples used for the coefficients")
    p.add_argument("--bandlimited", action="store_true", help="use the band-limited member of the family")

    p = sub.add_parser("sphere-exp", parents=[common], help="harmonic approximation of an RP^2-valued field")
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--bandlimited", action="store_true")

    p = sub.add_parser("denoise", parents=[common], help="denoise an orientation grid CSV")
    p.add_argument("input", help="grid CSV with header i,j,qw,qx,qy,qz,mask")
    p.add_argument("--symmetry", default="C1", type=str.upper, choices=GROUP_NAMES)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--smoothing", type=float, default=None, help="penalty weight s")
    g.add_argument("--gcv", action="store_true", help="choose s by cross-validation (default)")
    p.add_argument("--spacing", type=_float_pair, default=(1.0, 1.0), help="h or h1,h2")
    p.add_argument("--no-detrend", action="store_true", help="smooth without removing an affine trend")
    p.add_argument("--pad", type=int, default=4, help="width of the odd-reflection extension before smoothing")

    p = sub.add_parser("synth-grid", parents=[common], help="write a synthetic orientation grid")
    p.add_argument("--dims", type=_int_list, default=[64, 64])
    p.add_argument("--noise-deg", type=float, default=2.0)
    p.add_argument("--mask-fraction", type=float, default=0.05)
    p.add_argument("--amplitude-deg", type=float, default=15.0)
    p.add_argument("--symmetry", default="O", type=str.upper, choices=GROUP_NAMES)
    p.add_argument("--spacing", type=_float_pair, default=(1.0, 1.0))
    return parser


# ---------------------------------------------------------------------------
# commands


def _run_bound(bound, model_name, trials, seed, tol):
    kwargs = {} if tol is None else {"slack": tol}
    if bound == "commutator":
        return check_commutator(COMMUTATOR_DIMS, trials, seed, **kwargs)
    model = get_model(model_name)
    fn = {"tangent-lipschitz": check_tangent_lipschitz, "dP-deviation": check_dP_deviation,
          "curvature": check_curvature_bound}[bound]
    return fn(model, trials, seed, **kwargs)


def cmd_verify(args, out: Path) -> int:
    bounds = list(BOUNDS) if args.all else args.bound
    unknown = [b for b in bounds if b not in BOUNDS]
    if unknown:
        raise ConfigError(f"unknown bound {unknown[0]!r}; choose from {', '.join(BOUNDS)}")
    models = [m for m in args.models.split(",") if m]
    for m in models:
        if m not in MODELS:
            raise ConfigError(f"unknown manifold {m!r}")
    if args.trials is not None and args.trials < 1:
        raise ConfigError("--trials must be positive")
    jobs = []
    for b in bounds:
        trials = args.trials or DEFAULT_TRIALS[b]
        for m in ["all"] if b == "commutator" else models:
            jobs.append((b, m, trials))
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(lambda job: _run_bound(job[0], job[1], job[2], args.seed, args.tol), jobs))
    summaries = []
    for (b, m, trials), records in zip(jobs, results):
        summ = summarize(records)
        summ.update(bound=b, model=m, trials=trials, records=len(records))
        kinds = sorted({r.bound for r in records})
        if len(kinds) > 1:
            # e.g. the two forms of the dP deviation bound
            summ["parts"] = {
                k: {key: v for key, v in summarize([r for r in records if r.bound == k]).items() if key != "argmax_inputs"}
                for k in kinds
            }
        summaries.append(summ)
    _write_json(out / "verify.json", summaries)
    _write_csv(
        out / "verify.csv",
        ["bound", "model", "trials", "violations", "max_ratio"],
        [(s["bound"], s["model"], s["trials"], s["violations"], s["max_ratio"]) for s in summaries],
    )
    for s in summaries:
        status = "ok" if s["violations"] == 0 else "VIOLATED"
        print(f"{s['bound']:<18} {s['model']:<7} trials={s['trials']:<7} violations={s['violations']:<4} "
              f"max_ratio={s['max_ratio']:.12f} {status}")
    return EXIT_OK if all(s["violations"] == 0 for s in summaries) else EXIT_VIOLATION


def cmd_reach(args, out: Path) -> int:
    if args.samples < 2:
        raise ConfigError("--samples must be at least 2")
    model = get_model(args.manifold)
    rng = np.random.default_rng(args.seed)
    est = estimate_reach(model, model.sample(args.samples, rng))
    data = {"manifold": args.manifold, "estimate": est.value, "known": model.reach,
            "samples": est.sample_count, "argmin_pair": [p.tolist() for p in est.argmin_pair]}
    _write_json(out / "reach.json", data)
    _write_csv(out / "reach.csv", ["manifold", "samples", "estimate", "known"],
               [(args.manifold, est.sample_count, est.value, model.reach)])
    print(f"reach({args.manifold}) ~ {est.value:.10f} from {est.sample_count} samples")
    return EXIT_OK


def cmd_torus(args, out: Path) -> int:
    if not args.n or min(args.n) < 0:
        raise ConfigError("bandwidths must be nonnegative integers")
    if args.dense < 2 * max(args.n) + 1:
        raise ConfigError(f"--dense must be at least {2 * max(args.n) + 1}")
    if args.points < 1:
        raise ConfigError("--points must be positive")
    exp = run_torus_experiment(args.manifold, args.r, args.n, args.amplitude, args.dense, args.points,
                               seed=args.seed, bandlimited=args.bandlimited)
    vtol = 1e-10 if args.tol is None else args.tol
    dtol = 1e-8 if args.tol is None else args.tol
    rows, violations = [], 0
    for row in exp.rows:
        rep = row.report
        w = rep.within_reach
        v_pt = np.any(rep.value_error[w] > rep.bound_value_pointwise[w] + vtol)
        d_pt = np.any(rep.diff_error[w] > rep.bound_diff[w] + dtol)
        v_th = row.applicable and row.sup_value_error > row.value_rhs + vtol
        d_th = row.applicable and row.sup_diff_error > row.diff_rhs + dtol
        bad = bool(v_pt or d_pt or v_th or d_th)
        violations += bad
        rows.append((row.n, row.sup_linear_value_error, row.sup_value_error, row.linear_value_rhs, row.value_rhs,
                     row.sup_linear_diff_error, row.sup_diff_error, row.diff_rhs, row.within_reach, row.points,
                     row.C1, row.C2, row.eps_n, int(not bad)))
        (out / f"torus_{args.manifold}_r{args.r}_n{row.n}.csv").write_text(rep.to_csv(), encoding="utf-8")
    _write_csv(
        out / f"torus_{args.manifold}_r{args.r}.csv",
        ["n", "sup_linear_value_error", "sup_value_error", "linear_value_rhs", "value_rhs", "sup_linear_diff_error",
         "sup_diff_error", "diff_rhs", "within_reach", "points", "C1", "C2", "eps_n", "ok"],
        rows,
    )
    _write_json(out / f"torus_{args.manifold}_r{args.r}.json",
                {"tau": exp.tau, "sobolev_norm": exp.sobolev_norm, "d": exp.d, "n_min": exp.n_min,
                 "eps_target": exp.eps_target, "rows": [r.as_dict() for r in exp.rows]})
    for r in rows:
        print(f"n={r[0]:<4} value {r[2]:.3e} <= {r[4]:.3e}   diff {r[6]:.3e} <= {r[7]:.3e}   "
              f"within reach {r[8]}/{r[9]}")
    print(f"n_min = {exp.n_min} for eps = {exp.eps_target:g}")
    return EXIT_OK if violations == 0 else EXIT_VIOLATION


def cmd_sphere(args, out: Path) -> int:
    if args.L < 0 or args.points < 1:
        raise ConfigError("--L must be nonnegative and --points positive")
    exp = run_sphere_experiment(args.L, args.seed, args.points, args.bandlimited)
    rep = exp.report
    (out / f"sphere_L{args.L}.csv").write_text(rep.to_csv(), encoding="utf-8")
    summ = rep.summary()
    summ.update({"L": args.L, "nodes": exp.nodes})
    _write_json(out / f"sphere_L{args.L}.json", summ)
    vtol = 1e-10 if args.tol is None else args.tol
    dtol = 1e-8 if args.tol is None else args.tol
    w = rep.within_reach
    bad = np.any(rep.value_error[w] > rep.bound_value_pointwise[w] + vtol) or np.any(
        rep.diff_error[w] > rep.bound_diff[w] + dtol)
    print(f"L={args.L} nodes={exp.nodes} sup value error {summ['sup_value_error']:.3e} "
          f"(linear {summ['sup_linear_value_error']:.3e}), sup diff error {summ['sup_diff_error']:.3e}, "
          f"within reach {summ['within_reach']}/{summ['points']}")
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_denoise(args, out: Path) -> int:
    grid = ingest_grid(args.input, args.spacing, args.symmetry)
    smoothing = "gcv" if args.smoothing is None else args.smoothing
    if args.smoothing is not None and args.smoothing < 0:
        raise ConfigError("--smoothing must be nonnegative")
    if args.pad < 0:
        raise ConfigError("--pad must be nonnegative")
    den = OrientationDenoiser(smoothing=smoothing, detrend=not args.no_detrend, pad=args.pad)
    smoothed = den.fit_transform(grid)
    k_smooth = den.curvature()
    k_fd = curvature_fd(grid)
    write_grid(smoothed, out / "denoised.csv")
    (out / "curvature_smooth.csv").write_text(k_smooth.to_csv(), encoding="utf-8")
    (out / "curvature_fd.csv").write_text(k_fd.to_csv(), encoding="utf-8")
    stats = {
        "dims": list(grid.dims),
        "symmetry": grid.symmetry,
        "spacing": list(grid.spacing),
        "smoothing": den.smoothing_,
        "masked_cells": int(grid.mask.sum()),
        "inpainted_cells": den.n_inpainted_,
        "kappa_rms_smooth": k_smooth.rms(),
        "kappa_rms_fd": k_fd.rms(),
        "fd_cells": int(k_fd.valid.sum()),
        "anchor": den.anchor_,
    }
    _write_json(out / "denoise.json", stats)
    print(f"s = {den.smoothing_:.6g}; inpainted {den.n_inpainted_} cells; "
          f"kappa RMS smooth {stats['kappa_rms_smooth']:.4g}, finite differences {stats['kappa_rms_fd']:.4g}")
    return EXIT_OK


def cmd_synth(args, out: Path) -> int:
    if len(args.dims) != 2 or min(args.dims) < 3:
        raise ConfigError("--dims needs two sizes of at least 3")
    if args.noise_deg < 0 or not 0 <= args.mask_fraction < 1:
        raise ConfigError("noise must be nonnegative and the mask fraction in [0, 1)")
    spec = SmoothFieldSpec(amplitude_deg=args.amplitude_deg)
    grid, truth = synthesize_grid(tuple(args.dims), spec, args.noise_deg, args.mask_fraction, args.seed,
                                  args.symmetry, args.spacing)
    write_grid(grid, out / "grid.csv")
    from .orientation import CurvatureField

    field_ = CurvatureField(truth.kappa, np.ones(grid.dims, dtype=bool))
    (out / "truth_curvature.csv").write_text(field_.to_csv(), encoding="utf-8")
    print(f"wrote {grid.dims[0]}x{grid.dims[1]} grid with {int(grid.mask.sum())} masked cells")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "reach-est": cmd_reach,
    "torus-exp": cmd_torus,
    "sphere-exp": cmd_sphere,
    "denoise": cmd_denoise,
    "synth-grid": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    options = {k: v for k, v in vars(args).items() if k not in {"command", "seed", "out", "threads", "tol"}}
    config = ExperimentConfig(args.command, args.seed, str(out), args.threads, args.tol, options)
    try:
        out.mkdir(parents=True, exist_ok=True)
        status = COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ManifoldApproxError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    (out / f"{args.command}.config.json").write_text(config.to_json() + "\n", encoding="utf-8")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
