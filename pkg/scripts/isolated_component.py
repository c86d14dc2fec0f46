"""Where does the isolated mixture component's mass go under the approximate GA?

Prints, for the two-mixture preset, every GA product component with its
parent indices, and compares the mass near x = 90 under both rules.
"""
from __future__ import annotations

import logging

import numpy as np

from avgfusion.core import FusionWeights
from avgfusion.gmfusion import fig5_mixtures, gm_aa, gm_ga_approx


def main() -> None:
    logging.getLogger("avgfusion").setLevel(logging.ERROR)
    gm1, gm2 = fig5_mixtures()
    for w1 in (0.5, 0.7, 0.9):
        w = FusionWeights.pair(w1)
        ga, aa = gm_ga_approx([gm1, gm2], w), gm_aa([gm1, gm2], w)
        print(f"w1 = {w1}")
        print("  i j  weight    mean     var")
        for k, c in enumerate(ga):
            i, j = divmod(k, len(gm2))
            print(f"  {i} {j}  {c.weight:.4f}  {c.mean:7.2f}  {c.variance:7.2f}")
        descended = ga.weights[2 * len(gm2):].sum()
        print(f"  descended from N(90,200): GA {descended:.4f}  AA {aa.weights[2]:.4f}"
              f"  ratio {descended / aa.weights[2]:.3f}")
        x = np.array([90.0])
        print(f"  density at 90: GA {ga.density(x)[0]:.5f}  AA {aa.density(x)[0]:.5f}")


if __name__ == "__main__":
    main()
