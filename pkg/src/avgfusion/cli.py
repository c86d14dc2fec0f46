"""Command line front end: one subcommand per experiment, CSV/JSON outputs.

Every CSV starts with a single ``#``-prefixed JSON line recording the tool
version, the seed and the full parameter set.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from avgfusion import __version__
from avgfusion.core import FusionWeights, Gaussian1D, TruthContext
from avgfusion.ffusion import mse_surface
from avgfusion.gmfusion import (
    ExtractionRule,
    GaussianMixture,
    fig5_mixtures,
    gm_aa,
    gm_ga_approx,
    reduce,
)
from avgfusion.montecarlo import CorrelatedPairSpec, sample_pairs, sweep_samples, weight_grid
from avgfusion.scenario import (
    FIG6_EXTRACTION,
    FIG6_GATE,
    FIG6_REDUCTION,
    ScenarioSpec,
    run_trials,
    summarize,
)
from avgfusion.vfusion import aa_mse_two

log = logging.getLogger("avgfusion")

F_PRESETS = {
    "100-200": (Gaussian1D(50.0, 100.0), Gaussian1D(60.0, 200.0)),
    "400-200": (Gaussian1D(50.0, 400.0), Gaussian1D(60.0, 200.0)),
}


class UsageError(Exception):
    pass


def _open_out(path: str):
    if path == "-":
        return contextlib.nullcontext(sys.stdout)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def write_csv(path: str, meta: dict, header: Sequence[str], rows) -> None:
    with _open_out(path) as f:
        f.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


_NOT_PARAMS = ("func", "out", "out_json", "out_csv", "summary", "verbose", "jobs")


def _meta(args: argparse.Namespace, **extra) -> dict:
    # output destinations are left out so identical runs give identical files
    params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMS}
    return {"tool": "avgfusion", "version": __version__, "command": args.command,
            "seed": params.get("seed"), "params": params, **extra}


def _pair_spec(args, rho: float) -> CorrelatedPairSpec:
    try:
        if args.family == "poisson":
            return CorrelatedPairSpec("poisson", (args.l1,), (args.l2,), rho, args.n, args.seed)
        return CorrelatedPairSpec("truncated_gaussian", (args.mu1, args.var1), (args.mu2, args.var2),
                                  rho, args.n, args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _sample(args, rho: float):
    spec = _pair_spec(args, rho)
    try:
        return sample_pairs(spec)
    except ValueError as e:
        # infeasible copula correlation is a parameter problem
        raise UsageError(str(e)) from e


def cmd_v_var(args) -> None:
    rows = []
    for rho in args.rho:
        x1, x2, achieved = _sample(args, rho)
        res = sweep_samples(x1, x2, TruthContext(args.theta), args.grid, achieved)
        for k, w1 in enumerate(res.weights_grid):
            rows.append((rho, achieved, w1, res.aa_mean[k], res.aa_var[k], res.ga_mean[k], res.ga_var[k]))
    write_csv(args.out, _meta(args),
              ["rho_target", "rho_achieved", "omega1", "aa_mean", "aa_var", "ga_mean", "ga_var"], rows)


def cmd_v_mse(args) -> None:
    rows = []
    for rho in args.rho:
        x1, x2, achieved = _sample(args, rho)
        for theta in args.theta:
            res = sweep_samples(x1, x2, TruthContext(theta), args.grid, achieved)
            for k, w1 in enumerate(res.weights_grid):
                closed = aa_mse_two(res.mse1, res.mse2, res.beta, FusionWeights.pair(w1))
                rows.append((rho, achieved, theta, res.beta, w1, res.aa_mse[k], res.ga_mse[k],
                             res.aa_var[k], res.ga_var[k], closed))
    write_csv(args.out, _meta(args),
              ["rho_target", "rho_achieved", "theta", "beta", "omega1", "aa_mse", "ga_mse",
               "aa_var", "ga_var", "aa_mse_closed"], rows)


def cmd_f_surface(args) -> None:
    if args.g1 is not None or args.g2 is not None:
        if args.g1 is None or args.g2 is None:
            raise UsageError("--g1 and --g2 must be given together")
        try:
            g1, g2 = Gaussian1D(*args.g1), Gaussian1D(*args.g2)
        except ValueError as e:
            raise UsageError(str(e)) from e
    else:
        g1, g2 = F_PRESETS[args.preset]
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_steps)
    omegas = weight_grid(args.grid)
    s = mse_surface(g1, g2, thetas, omegas)
    rows = (
        (t, w, s.aa_var[i, j], s.ga_var[i, j], s.aa_mse[i, j], s.ga_mse[i, j], int(s.ga_better[i, j]))
        for i, t in enumerate(thetas)
        for j, w in enumerate(omegas)
    )
    meta = _meta(args, g1=dataclasses.asdict(g1), g2=dataclasses.asdict(g2))
    write_csv(args.out, meta, ["theta", "omega1", "aa_var", "ga_var", "aa_mse", "ga_mse", "ga_better"], rows)


def _load_mixtures(args) -> list[GaussianMixture]:
    if args.input:
        data = json.loads(Path(args.input).read_text())
        if not isinstance(data, list) or not data or not all(isinstance(m, list) for m in data):
            raise UsageError("input must be a JSON array of mixtures (arrays of {weight, mean, variance})")
        try:
            return [GaussianMixture.from_json(m) for m in data]
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"bad mixture record: {e}") from e
    if args.preset == "single":
        return [GaussianMixture.of((1.0, 50.0, 100.0)), GaussianMixture.of((1.0, 60.0, 200.0))]
    return list(fig5_mixtures())


def cmd_gm_fuse(args) -> None:
    gms = _load_mixtures(args)
    try:
        w = FusionWeights(tuple(args.weights)) if args.weights else None
    except ValueError as e:
        raise UsageError(str(e)) from e
    if len(gms) == 1:
        fused = gms[0]
    else:
        w = w or FusionWeights.uniform(len(gms))
        if len(w) != len(gms):
            raise UsageError(f"{len(gms)} mixtures but {len(w)} weights")
        fused = gm_aa(gms, w) if args.rule == "aa" else gm_ga_approx(gms, w)
    if args.reduce:
        fused = reduce(fused, args.merge, args.prune, args.max_components)
    text = json.dumps(fused.to_json(), indent=2)
    if args.out_json == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(args.out_json).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out_json).write_text(text + "\n")
    if args.out_csv:
        x = np.linspace(args.x_min, args.x_max, args.points)
        cols = [fused.density(x)] + [gm.density(x) for gm in gms]
        header = ["x", "fused"] + [f"input_{i}" for i in range(len(gms))]
        write_csv(args.out_csv, _meta(args, weight_sum=fused.weight_sum, n_components=len(fused)),
                  header, zip(x, *cols))


def cmd_scenario(args) -> None:
    if args.config:
        try:
            spec = ScenarioSpec.from_json_file(args.config)
        except (ValueError, TypeError, OSError) as e:
            raise UsageError(f"bad scenario config: {e}") from e
    else:
        spec = ScenarioSpec()
    spec = spec.with_seed(args.seed)
    rules = ("aa", "ga") if args.rule == "both" else (args.rule,)
    reduction = dataclasses.replace(FIG6_REDUCTION, merge_threshold=args.merge)
    extraction = ExtractionRule.threshold(args.threshold)
    rows = run_trials(spec, args.trials, rules, extraction, args.gate, reduction, jobs=args.jobs)
    summary = summarize(rows)
    fields = [f.name for f in dataclasses.fields(rows[0])]
    write_csv(args.out, _meta(args, scenario=spec.to_dict()), fields,
              (dataclasses.astuple(o) for o in rows))
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    log.info("summary: %s", json.dumps(summary, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="avgfusion", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pair_args(sp, rho_default):
        sp.add_argument("--family", choices=["truncated_gaussian", "gaussian", "poisson"],
                        default="truncated_gaussian")
        sp.add_argument("--mu1", type=float, default=50.0)
        sp.add_argument("--var1", type=float, default=100.0)
        sp.add_argument("--mu2", type=float, default=60.0)
        sp.add_argument("--var2", type=float, default=200.0)
        sp.add_argument("--l1", type=float, default=12.0, help="Poisson rate of source 1")
        sp.add_argument("--l2", type=float, default=10.0, help="Poisson rate of source 2")
        sp.add_argument("--rho", type=float, nargs="+", default=rho_default,
                        help="target correlations (one sweep each)")
        sp.add_argument("--grid", type=int, default=99, help="number of interior omega1 values")
        sp.add_argument("--n", type=int, default=1_000_000, help="sample pairs per correlation")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="-")

    sp = sub.add_parser("v-var", help="AA/GA mean and variance of correlated variables vs weight")
    pair_args(sp, [0.0, 0.5, 0.71])
    sp.add_argument("--theta", type=float, default=55.0)
    sp.set_defaults(func=cmd_v_var)

    sp = sub.add_parser("v-mse", help="AA/GA MSE of correlated variables vs weight, per theta")
    pair_args(sp, [0.0, 0.70736])
    sp.add_argument("--theta", type=float, nargs="+", default=[45.0, 55.0, 65.0])
    sp.set_defaults(func=cmd_v_mse)

    sp = sub.add_parser("f-surface", help="closed-form Gaussian AA/GA variance and MSE surfaces")
    sp.add_argument("--preset", choices=sorted(F_PRESETS), default="100-200")
    sp.add_argument("--g1", type=float, nargs=2, metavar=("MEAN", "VAR"))
    sp.add_argument("--g2", type=float, nargs=2, metavar=("MEAN", "VAR"))
    sp.add_argument("--theta-min", type=float, default=40.0)
    sp.add_argument("--theta-max", type=float, default=80.0)
    sp.add_argument("--theta-steps", type=int, default=41)
    sp.add_argument("--grid", type=int, default=99)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_f_surface, seed=None)

    sp = sub.add_parser("gm-fuse", help="AA or approximate GA of Gaussian mixtures")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["fig5", "single"], default="fig5",
                     help="single: unit N(50,100) and N(60,200), the f-surface pair")
    src.add_argument("--input", help="JSON array of mixtures")
    sp.add_argument("--rule", choices=["aa", "ga"], required=True)
    sp.add_argument("--weights", type=float, nargs="+")
    sp.add_argument("--reduce", action="store_true", help="prune/merge/cap the fused mixture")
    sp.add_argument("--merge", type=float, default=4.0)
    sp.add_argument("--prune", type=float, default=1e-5)
    sp.add_argument("--max-components", type=int, default=100)
    sp.add_argument("--x-min", type=float, default=-50.0)
    sp.add_argument("--x-max", type=float, default=150.0)
    sp.add_argument("--points", type=int, default=2001)
    sp.add_argument("--out-json", default="-")
    sp.add_argument("--out-csv")
    sp.set_defaults(func=cmd_gm_fuse, seed=None)

    sp = sub.add_parser("scenario", help="multi-sensor clutter/misdetection trials")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["fig6"], default="fig6")
    src.add_argument("--config", help="scenario JSON config")
    sp.add_argument("--rule", choices=["aa", "ga", "both"], default="both")
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=FIG6_EXTRACTION.value)
    sp.add_argument("--gate", type=float, default=FIG6_GATE)
    sp.add_argument("--merge", type=float, default=FIG6_REDUCTION.merge_threshold)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--summary", help="write a JSON summary here")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_scenario)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) == "gaussian":
        args.family = "truncated_gaussian"
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (ValueError, OSError) as e:
        print(f"avgfusion: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
