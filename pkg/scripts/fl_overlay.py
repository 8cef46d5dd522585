#!/usr/bin/env python3
"""Finite-length BER: DE-based prediction overlaid with Monte-Carlo runs.

Builds a PEG code, predicts the decision BER from the asymptotic DE curve
integrated against the observed-channel distribution, and simulates the
faulty decoder at the same points (no early stopping, so the measured
quantity matches the final-iteration decision that DE tracks).
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

from asymde import analysis, de_gallager_b, de_minsum, sim
from asymde.channels import snr_db_to_sigma2
from asymde.codes import DegreeDistribution, build_encoder, peg_construct
from asymde.deviations import BitFlipModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fl_overlay")
    ap.add_argument("--family", choices=("gallager_b", "minsum"), default="gallager_b")
    ap.add_argument("--n", type=int, default=10000)
    ap.add_argument("--dv", type=int, default=3)
    ap.add_argument("--dc", type=int, default=6)
    ap.add_argument("--eps01", type=float, default=1e-2)
    ap.add_argument("--eps10", type=float, default=1e-4)
    ap.add_argument("--L", type=int, default=100)
    ap.add_argument("--points", type=float, nargs="+",
                    default=None, help="BSC p values or AWGN SNRs in dB")
    ap.add_argument("--frame-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    dev = BitFlipModel(args.eps01, args.eps10)
    print(f"building PEG ({args.dv},{args.dc}) n={args.n} ...")
    graph = peg_construct(args.n, DegreeDistribution.regular(args.dv, args.dc),
                          seed=args.seed)
    encoder = build_encoder(graph)

    if args.family == "gallager_b":
        points = args.points or [0.015, 0.02, 0.025, 0.03]
        params = de_gallager_b.GallagerBParams(dv=args.dv, dc=args.dc, L=args.L,
                                               thresholds=(2, 2))

        def app_pe(z):
            return de_gallager_b.run(z, params, dev).app_pe[-1]

        p0s = points
        channel_points = points
        pe_of_z = app_pe
    else:
        points = args.points or [2.0, 2.2, 2.4]
        params = de_minsum.MinSumParams(q=7, step=0.25, L=min(args.L, 50))
        rate = 1.0 - args.dv / args.dc
        sigma2s = [snr_db_to_sigma2(s, rate) for s in points]
        p0s = [analysis.awgn_observed_p0(s2) for s2 in sigma2s]
        channel_points = sigma2s

        def pe_of_z(z):
            sigma2 = float(analysis.awgn_sigma2_of_z(z))
            return de_minsum.run(sigma2, args.dv, args.dc, params, dev).app_pe[-1]

    grid = analysis.fl_z_grid(p0s, args.n, points_per_window=25)
    print(f"evaluating DE on {grid.size} grid points ...")
    curve = analysis.build_pe_curve(pe_of_z, grid)
    predictions = [analysis.finite_length_pe(curve, args.n, p0) for p0 in p0s]

    config = sim.SimConfig(
        graph=graph, encoder=encoder, channel_points=channel_points,
        decoder=params, deviation=dev, seed=args.seed,
        max_frames=args.max_frames, target_frame_errors=args.frame_errors,
        early_exit=False,
    )
    print("simulating ...")
    results = sim.ber_experiment(config, workers=2)

    path = os.path.join(args.out, f"{args.family}_overlay.csv")
    with open(path, "w") as fh:
        fh.write("point,fl_de_prediction,sim_ber,sim_fer,frames,bit_errors\n")
        for point, pred, r in zip(points, predictions, results):
            fh.write(f"{point},{pred!r},{r.ber!r},{r.fer!r},{r.frames},{r.bit_errors}\n")
            print(f"point {point}: FL-DE {pred:.4g}  sim {r.ber:.4g} "
                  f"({r.bit_errors} bit errors)")
    print("wrote", path)


if __name__ == "__main__":
    main()
