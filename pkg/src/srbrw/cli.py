"""Command-line interface: ``srbrw {dirichlet,trajectory,validate,sample}``.

Every data-producing command writes CSV files (17 significant digits) and a
``manifest.json`` describing parameters, outputs and headline numbers into
the output directory (``--out``, else ``$SRBRW_OUTPUT_DIR``, else
``./srbrw_output``). Files are written to a temporary name and renamed, so
a reader never sees a half-written file.

Exit codes: 0 success, 1 validation failure, 2 usage error or exceeded
size cap, 3 parameters outside the standing assumption ``beta > eps^2/2``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .admissible import DIRICHLET_PROFILE_CAP, build_trajectory, feasible_K, optimal_K
from .core import ModelParams
from .dirichlet import linear_boundary, solve_recursive, standard_boundary
from .errors import DegenerateRegime, ModelAssumptionError
from .mcmc import MAX_SAMPLER_DEPTH, empirical_profile, estimate_partition, run_chain
from .validation import SUITES, all_passed, run_suite

log = logging.getLogger("srbrw")

MANIFEST_VERSION = 1
DIRICHLET_CLI_CAP = 24
ENV_OUTPUT_DIR = "SRBRW_OUTPUT_DIR"


class UsageError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# --- output helpers ----------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def write_manifest(out: Path, command: str, params: dict, files: list[str], results: dict) -> Path:
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "package_version": __version__,
        "command": command,
        "parameters": params,
        "files": files,
        "results": results,
    }
    path = out / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path


def output_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(ENV_OUTPUT_DIR) or "srbrw_output")


def _profile_rows(profile):
    for n in range(profile.depth + 1):
        h = profile.generation(n)
        a = profile.increments(n) if n else np.zeros(1)
        for j in range(h.size):
            yield n, j, h[j], a[j]


# --- commands ----------------------------------------------------------------

def cmd_dirichlet(args) -> int:
    if args.M > DIRICHLET_CLI_CAP:
        raise UsageError(f"M exceeds cap {DIRICHLET_CLI_CAP}")
    if args.M < 1:
        raise UsageError("M must be >= 1")
    if not args.eps > 0:
        raise UsageError("eps must be positive")
    make = standard_boundary if args.boundary == "standard" else linear_boundary
    sol = solve_recursive(make(args.M, args.eps))
    out = output_dir(args.out)
    write_csv(out / "dirichlet.csv", ["generation", "node_index", "position", "increment"], _profile_rows(sol.profile))
    spr = 0.5 * sum(float(np.dot(a, a)) for a in sol.increments[1:])
    write_manifest(
        out,
        "dirichlet",
        {"M": args.M, "eps": args.eps, "boundary": args.boundary},
        ["dirichlet.csv"],
        {"S_spr": spr},
    )
    print(f"wrote {out / 'dirichlet.csv'} (S_spr = {spr:.10g})")
    return 0


def cmd_trajectory(args) -> int:
    try:
        params = ModelParams(args.N, args.beta, args.eps)
    except ModelAssumptionError as exc:
        raise UsageError(str(exc), code=3) from exc
    if args.K is None:
        try:
            K, r_star = optimal_K(params)
        except DegenerateRegime as exc:
            raise UsageError(str(exc)) from exc
    else:
        K, r_star = args.K, None
        if K not in feasible_K(args.N):
            raise UsageError(f"K={K} infeasible for N={args.N}; feasible: {feasible_K(args.N)}")
    if args.N - K > DIRICHLET_PROFILE_CAP:
        raise UsageError(f"Dirichlet depth N-K={args.N - K} exceeds cap {DIRICHLET_PROFILE_CAP}")
    tr = build_trajectory(params, K)
    out = output_dir(args.out)
    files = ["occupation.csv", "costs.csv"]

    def occ_rows():
        for n, occ in tr.occupations.items():
            for site, count in zip(occ.sites, occ.counts):
                yield n, site, args.eps * (site + 0.5), count

    write_csv(out / "occupation.csv", ["generation", "site", "position", "count"], occ_rows())
    c = tr.costs
    write_csv(
        out / "costs.csv",
        ["generation", "spreading_cost", "interaction_count"],
        ((n + 1, c.spr_per_gen[n], c.interaction_per_gen[n]) for n in range(params.N)),
    )
    if args.profile:
        write_csv(out / "profile.csv", ["generation", "node_index", "position", "increment"], _profile_rows(tr.profile()))
        files.append("profile.csv")
    results = {"K": K, "r": tr.r, "d": tr.d, "M": tr.M, "S_total": c.S_total, "S_spr": c.S_spr, "J": c.J}
    if r_star is not None:
        results["r_star"] = r_star
    write_manifest(out, "trajectory", {"N": args.N, "beta": args.beta, "eps": args.eps, "K": args.K}, files, results)
    print(f"K={K} r={tr.r} d={tr.d} S_total={c.S_total:.10g} -> {out}")
    return 0


def cmd_validate(args) -> int:
    checks = run_suite(args.suite, seed=args.seed)
    for chk in checks:
        print(chk.line())
    ok = all_passed(checks)
    n_fail = sum(c.passed is False for c in checks)
    print(f"{args.suite}: {len(checks)} checks, {n_fail} failed")
    return 0 if ok else 1


def cmd_sample(args) -> int:
    if args.N > MAX_SAMPLER_DEPTH:
        raise UsageError(f"sampler capped at N={MAX_SAMPLER_DEPTH}")
    if args.N < 1 or args.steps < 0 or args.samples < 2:
        raise UsageError("need N >= 1, steps >= 0 and samples >= 2")
    try:
        params = ModelParams.relaxed(args.N, args.beta, args.eps)
    except ModelAssumptionError as exc:
        raise UsageError(str(exc)) from exc
    chain = run_chain(params, args.steps, seed=args.seed, step_size=args.step_size, thin=args.thin)
    est = estimate_partition(params, args.samples, seed=args.seed + 1)
    out = output_dir(args.out)
    write_csv(out / "trace.csv", ["record", "action"], enumerate(chain.S_trace))
    files = ["trace.csv"]
    results = {
        "Z_hat": est.Z_hat,
        "Z_std_err": est.std_err,
        "Z_samples": est.n_samples,
        "acceptance_rate": chain.acceptance_rate,
        "final_action": chain.state.S,
    }
    if chain.final_samples.shape[0]:
        emp = empirical_profile(chain.final_samples, args.eps)
        results.update(mean_range_sites=emp.mean_range, smooth_fraction=emp.smooth_fraction)
        write_csv(
            out / "final_generation.csv",
            ["record", "particle", "position"],
            ((i, j, x) for i, row in enumerate(chain.final_samples) for j, x in enumerate(row)),
        )
        files.append("final_generation.csv")
    write_manifest(
        out,
        "sample",
        {"N": args.N, "beta": args.beta, "eps": args.eps, "steps": args.steps, "seed": args.seed,
         "samples": args.samples, "step_size": args.step_size, "thin": args.thin},
        files,
        results,
    )
    print(f"Z_hat={est.Z_hat:.6g} +- {est.std_err:.2g}, acceptance {chain.acceptance_rate:.3f} -> {out}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srbrw", description="Self-repelling branching random walk toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dirichlet", help="solve the tree Dirichlet problem and dump the profile")
    p.add_argument("--M", type=int, required=True, help=f"tree depth (<= {DIRICHLET_CLI_CAP})")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--boundary", choices=("standard", "linear"), default="standard")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_dirichlet)

    p = sub.add_parser("trajectory", help="build the staircase trajectory and its costs")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--K", type=int, default=None, help="dyadic ramp exponent (default: cost-optimal)")
    p.add_argument("--profile", action="store_true", help="also write every particle position")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("validate", help="run numerical validation suites")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="Metropolis chain and Monte Carlo partition function")
    p.add_argument("--N", type=int, required=True, help=f"depth (<= {MAX_SAMPLER_DEPTH})")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples for Z")
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--thin", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"srbrw {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
