#!/usr/bin/env python3
"""Ensemble threshold curves vs the 0->1 deviation rate, with and without
the all-zero-codeword assumption.

Produces one CSV per decoder family with columns
(eps01, threshold_conditional, threshold_all_zero); points where Pe never
crosses epsilon are left empty.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

from asymde import analysis, de_gallager_b, de_minsum
from asymde.channels import snr_db_to_sigma2
from asymde.deviations import BitFlipModel


def gb_threshold(dv, dc, e01, e10, L, b, all_zero):
    params = de_gallager_b.GallagerBParams(dv=dv, dc=dc, L=L, thresholds=(b, b))

    def runner(p):
        return de_gallager_b.run(p, params, BitFlipModel(e01, e10),
                                 all_zero=all_zero).final_pe

    query = analysis.ThresholdQuery(runner=runner, lo=1e-4, hi=0.3,
                                    epsilon=1e-3, resolution=1e-4,
                                    sense="increasing")
    return analysis.threshold_search(query).value


def ms_threshold(dv, dc, e01, e10, L, q, step, all_zero):
    params = de_minsum.MinSumParams(q=q, step=step, L=L)
    rate = 1.0 - dv / dc

    def runner(snr_db):
        return de_minsum.run(snr_db_to_sigma2(snr_db, rate), dv, dc, params,
                             BitFlipModel(e01, e10), all_zero=all_zero).final_pe

    query = analysis.ThresholdQuery(runner=runner, lo=0.2, hi=12.0,
                                    epsilon=1e-3, resolution=0.01,
                                    sense="decreasing")
    return analysis.threshold_search(query).value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="threshold_curves")
    ap.add_argument("--dc", type=int, nargs="+", default=[4, 5, 6, 12],
                    help="check degrees for dv=3 ensembles")
    ap.add_argument("--eps10", type=float, default=1e-3)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    eps01_grid = [1e-5, 1e-4, 3e-4, 1e-3, 2e-3, 3e-3, 5e-3, 1e-2, 2e-2, 3e-2]

    with open(os.path.join(args.out, "gallager_b.csv"), "w") as fh:
        fh.write("dc,eps01,threshold_conditional,threshold_all_zero\n")
        for dc in args.dc:
            for e01 in eps01_grid:
                cond = gb_threshold(3, dc, e01, args.eps10, 200, 2, False)
                ref = gb_threshold(3, dc, e01, args.eps10, 200, 2, True)
                fh.write(f"{dc},{e01},{'' if cond is None else cond},"
                         f"{'' if ref is None else ref}\n")
                print(f"GB (3,{dc}) eps01={e01}: cond={cond} allzero={ref}")

    with open(os.path.join(args.out, "minsum.csv"), "w") as fh:
        fh.write("dc,eps01,threshold_conditional_db,threshold_all_zero_db\n")
        for dc in args.dc:
            for e01 in eps01_grid:
                cond = ms_threshold(3, dc, e01, args.eps10, 100, 7, 0.25, False)
                ref = ms_threshold(3, dc, e01, args.eps10, 100, 7, 0.25, True)
                fh.write(f"{dc},{e01},{'' if cond is None else cond},"
                         f"{'' if ref is None else ref}\n")
                print(f"MS (3,{dc}) eps01={e01}: cond={cond} allzero={ref}")


if __name__ == "__main__":
    main()
