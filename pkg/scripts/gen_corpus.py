#!/usr/bin/env python3
"""Generate synthetic train/test/validation corpora as JSONL files."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from maskguard.datagen import make_classification_corpus, make_generation_corpus
from maskguard.units import Language, save_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--task", choices=["classification", "generation"],
                        default="classification")
    parser.add_argument("--language", choices=[l.value for l in Language], default="c")
    parser.add_argument("--train", type=int, default=2000)
    parser.add_argument("--test", type=int, default=400)
    parser.add_argument("--validation", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args()

    make = (make_classification_corpus if args.task == "classification"
            else make_generation_corpus)
    language = Language(args.language)
    os.makedirs(args.out, exist_ok=True)
    splits = (("train", args.train, args.seed),
              ("test", args.test, args.seed + 1),
              ("validation", args.validation, args.seed + 2))
    for name, size, seed in splits:
        records = make(size, seed=seed, language=language, id_prefix=name)
        path = os.path.join(args.out, "%s.jsonl" % name)
        save_corpus(records, path)
        print("wrote %s (%d records)" % (path, size))
    return 0


if __name__ == "__main__":
    sys.exit(main())
