"""Per-scenario corpus statistics for the default configuration.

Usage: python3 scripts/corpus_stats.py [--seed 0] [--programs 60]
"""

import argparse

from stategen.corpus import CampaignConfig, run_campaign
from stategen.metrics import corpus_stats
from stategen.scenarios import SCENARIO_NAMES

COLUMNS = ("api_call_count", "path_depth", "binding_count", "code_length_words",
           "instruction_length_words")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--programs", type=int, default=60)
    args = ap.parse_args()
    print(f"{'scenario':<9} {'n':>4} " + " ".join(f"{c[:12]:>12}" for c in COLUMNS))
    everything = []
    for name in SCENARIO_NAMES + ("all",):
        if name == "all":
            entries = everything
        else:
            entries = run_campaign(CampaignConfig(scenario=name, seed=args.seed,
                                                  programs=args.programs)).entries
            everything += entries
        s = corpus_stats(entries).summary()
        print(f"{name:<9} {s['count']:>4} " +
              " ".join(f"{s[c] or 0:>12.2f}" for c in COLUMNS))


if __name__ == "__main__":
    main()
