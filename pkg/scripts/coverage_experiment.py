"""Guided vs unguided ATC curves over paired seeds, written as CSV.

Usage: python3 scripts/coverage_experiment.py [--seeds 10] [--programs 60] [--out curves.csv]
"""

import argparse
from statistics import fmean

from stategen.corpus import CampaignConfig, run_campaign
from stategen.metrics import coverage_curve, curve_csv
from stategen.scenarios import SCENARIO_NAMES, get_scenario


def mean_curve(name, mode, seeds, programs):
    m = len(get_scenario(name).transitions)
    curves = []
    for seed in range(seeds):
        camp = run_campaign(CampaignConfig(scenario=name, mode=mode, seed=seed,
                                           programs=programs))
        curves.append([v for _, v in coverage_curve([e.program for e in camp.entries], m)])
    return [(i, fmean(col)) for i, col in enumerate(zip(*curves), 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--programs", type=int, default=60)
    ap.add_argument("--modes", default="adjacent,data-dependency,off")
    ap.add_argument("--out", default="coverage_curves.csv")
    args = ap.parse_args()
    curves = {}
    for name in SCENARIO_NAMES:
        for mode in args.modes.split(","):
            curve = mean_curve(name, mode, args.seeds, args.programs)
            curves[f"{name}/{mode}"] = curve
            print(f"{name:<8} {mode:<16} final ATC {curve[-1][1]:.3f}")
    with open(args.out, "w") as fh:
        fh.write(curve_csv(curves))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
