"""Scenario outcome versus merge threshold and extraction threshold.

    python scripts/scenario_sensitivity.py --trials 200
"""
from __future__ import annotations

import argparse
import logging

from avgfusion.gmfusion import ExtractionRule, ReductionConfig
from avgfusion.scenario import FIG6_GATE, ScenarioSpec, run_trials, summarize


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    a = p.parse_args()
    logging.getLogger("avgfusion").setLevel(logging.ERROR)
    print("merge  tau    missed_aa missed_ga false_aa false_ga  p_missed")
    for merge in (0.5, 1.0, 2.0, 4.0):
        for tau in (0.02, 0.03, 0.05, 0.1):
            rows = run_trials(ScenarioSpec(), a.trials, extraction=ExtractionRule.threshold(tau),
                              gate=FIG6_GATE, reduction=ReductionConfig(merge, 1e-5, 100), jobs=a.jobs)
            s = summarize(rows)
            print(f"{merge:5.1f} {tau:5.2f}  {s['aa']['mean_missed']:9.3f} {s['ga']['mean_missed']:9.3f}"
                  f" {s['aa']['mean_false']:8.3f} {s['ga']['mean_false']:8.3f}"
                  f"  {s['missed_ga_vs_aa']['p_value']:.1e}")


if __name__ == "__main__":
    main()
