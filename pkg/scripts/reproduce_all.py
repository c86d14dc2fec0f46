"""Regenerate every experiment table into an output directory.

    python scripts/reproduce_all.py --out results [--n 1000000] [--trials 500]
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from avgfusion.cli import main as cli


def run(*argv) -> None:
    code = cli([str(a) for a in argv])
    if code:
        sys.exit(code)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    a = p.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    log = logging.getLogger("reproduce")

    steps = [
        ("variance sweep, truncated Gaussian", ["v-var", "--rho", 0, 0.5, 0.71, "--out", a.out / "v_var_gaussian.csv"]),
        ("variance sweep, Poisson 12/10", ["v-var", "--family", "poisson", "--l1", 12, "--l2", 10,
                                           "--rho", 0, 0.5, 0.9, "--out", a.out / "v_var_poisson_12_10.csv"]),
        ("variance sweep, Poisson 10/12", ["v-var", "--family", "poisson", "--l1", 10, "--l2", 12,
                                           "--rho", 0, 0.5, 0.9, "--out", a.out / "v_var_poisson_10_12.csv"]),
        ("MSE sweep, truncated Gaussian", ["v-mse", "--out", a.out / "v_mse_gaussian.csv"]),
        ("MSE sweep, Poisson", ["v-mse", "--family", "poisson", "--theta", 9, 11, 13,
                                "--rho", 0, 0.5, "--out", a.out / "v_mse_poisson.csv"]),
        ("density surface 100/200", ["f-surface", "--preset", "100-200", "--out", a.out / "f_surface_100_200.csv"]),
        ("density surface 400/200", ["f-surface", "--preset", "400-200", "--out", a.out / "f_surface_400_200.csv"]),
        ("mixture AA", ["gm-fuse", "--rule", "aa", "--out-json", a.out / "gm_aa.json",
                        "--out-csv", a.out / "gm_aa.csv"]),
        ("mixture GA", ["gm-fuse", "--rule", "ga", "--out-json", a.out / "gm_ga.json",
                        "--out-csv", a.out / "gm_ga.csv"]),
        ("six-sensor scenario", ["scenario", "--trials", a.trials, "--jobs", a.jobs,
                                 "--out", a.out / "scenario.csv", "--summary", a.out / "scenario_summary.json"]),
    ]
    for name, argv in steps:
        if argv[0] in ("v-var", "v-mse"):
            argv += ["--n", a.n]
        if argv[0] in ("v-var", "v-mse", "scenario"):
            argv += ["--seed", a.seed]
        log.info("%s", name)
        run(*argv)
    log.info("wrote %s", a.out)


if __name__ == "__main__":
    main()
