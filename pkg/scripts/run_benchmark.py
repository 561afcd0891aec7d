#!/usr/bin/env python3
"""Run the full attack/defense benchmark across every trigger strategy.

For each strategy: poison a training corpus, train a victim, evaluate attack
success and clean accuracy with and without the defense, and print one
summary line per run.
"""

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from maskguard.attacks import Strategy
from maskguard.harness import ExperimentConfig, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--task", choices=["classification", "generation"],
                        default="classification")
    parser.add_argument("--train-size", type=int, default=2000)
    parser.add_argument("--test-size", type=int, default=400)
    parser.add_argument("--rate", type=float, default=0.05)
    parser.add_argument("--threshold", type=float, default=0.1)
    parser.add_argument("--mode", default="full",
                        choices=["full", "no_entropy", "identifier_only",
                                 "statement_only"])
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--attack-seed", type=int, default=3)
    parser.add_argument("--strategies", default=None,
                        help="comma-separated subset, default all four")
    parser.add_argument("--out", default=None, help="optional artifact root")
    args = parser.parse_args()

    if args.strategies:
        strategies = [Strategy(s.strip()) for s in args.strategies.split(",")]
    else:
        strategies = list(Strategy)

    rows = []
    for strategy in strategies:
        config = ExperimentConfig(
            corpus={"synthetic": {"task": args.task, "language": "c",
                                  "train_size": args.train_size,
                                  "test_size": args.test_size,
                                  "validation_size": 100}},
            attack={"strategy": strategy.value, "rate": args.rate,
                    "seed": args.attack_seed},
            defense={"threshold": args.threshold},
            mode=args.mode,
            seed=args.seed,
            output_dir=(os.path.join(args.out, strategy.value)
                        if args.out else None),
        )
        started = time.monotonic()
        report, _ = run_experiment(config)
        elapsed = time.monotonic() - started
        print("%-22s %s  (%.1fs)" % (strategy.value, report.render(), elapsed))
        rows.append(report.to_json())

    if args.out:
        path = os.path.join(args.out, "benchmark.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
        print("wrote %s" % path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
