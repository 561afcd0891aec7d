"""Command-line entry point.

Thin wrappers over the library: every command's effect is reproducible with
the same library calls.  Exit codes: 0 success, 1 usage error, 2 pipeline
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .attacks import GENERATION_TARGET, Strategy, TriggerSpec, poison_corpus
from .errors import MaskguardError
from .harness import (
    DEFAULT_KEEP_FRACTION,
    DEFAULT_THRESHOLD,
    ExperimentConfig,
    MetricsReport,
    attack_succeeded,
    prepare_experiment,
    run_experiment,
    sweep_thresholds,
    tune_threshold,
)
from .oracle.remote import RemoteOracle
from .oracle.surrogate import SurrogateClassifier, TrainConfig
from .purifier import Analysis, BuiltinInfiller, DefenseMode, RemoteInfiller, outcome_record
from .detector import profile_record
from .storage import read_jsonl, write_json, write_jsonl
from .units import TaskKind, load_corpus, save_corpus


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _parse_target(raw: str):
    try:
        return int(raw)
    except ValueError:
        return tuple(raw.split())


def _load_oracle(address: str, task: TaskKind):
    if address.startswith("url:"):
        return RemoteOracle(address[len("url:"):], task=task)
    if address.startswith("file:"):
        return SurrogateClassifier.load(address[len("file:"):])
    raise ValueError("oracle address must be file:PATH or url:URL, got %r" % address)


def _load_infiller(address: str, fallback_records):
    if address.startswith("url:"):
        return RemoteInfiller(address[len("url:"):])
    if address.startswith("builtin:"):
        return BuiltinInfiller.from_corpus(load_corpus(address[len("builtin:"):]))
    if address == "builtin":
        return BuiltinInfiller.from_corpus(fallback_records)
    raise ValueError(
        "infiller address must be builtin, builtin:CORPUS, or url:URL, got %r" % address
    )


def _mode(raw: str) -> DefenseMode:
    return DefenseMode(raw.replace("-", "_"))


def _cmd_poison(args) -> int:
    records = load_corpus(args.corpus)
    spec = TriggerSpec(strategy=Strategy(args.strategy), seed=args.seed,
                       snippet=args.snippet, rename_to=args.rename_to)
    if args.target is None:
        task = records[0].unit.task if records else TaskKind.CLASSIFICATION
        target = 0 if task == TaskKind.CLASSIFICATION else GENERATION_TARGET
    else:
        target = _parse_target(args.target)
    poisoned, manifest = poison_corpus(records, args.rate, spec, target,
                                       seed=args.seed, corpus_id=args.corpus)
    import os

    os.makedirs(args.out, exist_ok=True)
    save_corpus(poisoned, os.path.join(args.out, "poisoned.jsonl"))
    manifest.save(os.path.join(args.out, "manifest.json"))
    print("poisoned %d of %d records -> %s" % (len(manifest.entries), len(records), args.out))
    return 0


def _cmd_train_surrogate(args) -> int:
    records = load_corpus(args.corpus)
    model = SurrogateClassifier(seed=args.seed)
    model.train(records, TrainConfig(epochs=args.epochs))
    model.save(args.out)
    print("trained on %d records -> %s" % (len(records), args.out))
    return 0


def _cmd_defend(args) -> int:
    records = load_corpus(args.corpus)
    if not records:
        print("corpus %s is empty" % args.corpus, file=sys.stderr)
        return 2
    task = records[0].unit.task
    oracle = _load_oracle(args.oracle, task)
    infiller = _load_infiller(args.infiller, records)
    mode = _mode(args.mode)
    profiles = []
    outcomes = []
    for rec in records:
        analysis = Analysis(rec.unit, oracle, infiller, mode=mode, jobs=args.jobs)
        outcome = analysis.outcome(args.threshold)
        profiles.append(profile_record(analysis.profile, outcome.verdict))
        outcomes.append(outcome_record(outcome))
    import os

    os.makedirs(args.out, exist_ok=True)
    write_jsonl(profiles, os.path.join(args.out, "profiles.jsonl"))
    write_jsonl(outcomes, os.path.join(args.out, "outcomes.jsonl"))
    flagged = sum(1 for rec in outcomes if rec["is_poisoned"])
    print("defended %d records (%d purified) -> %s" % (len(records), flagged, args.out))
    return 0


def _cmd_tune(args) -> int:
    records = load_corpus(args.clean)
    if not records:
        print("corpus %s is empty" % args.clean, file=sys.stderr)
        return 2
    task = records[0].unit.task
    oracle = _load_oracle(args.oracle, task)
    infiller = _load_infiller(args.infiller, records)
    t = tune_threshold(records, oracle, keep_fraction=args.keep,
                       mask_token=infiller.mask_token,
                       tokenizer=infiller.subtoken_count, jobs=args.jobs)
    print("%.10g" % t)
    return 0


def _cmd_eval(args) -> int:
    import os

    outcomes_path = args.outcomes
    if os.path.isdir(outcomes_path):
        outcomes_path = os.path.join(outcomes_path, "outcomes.jsonl")
    outcomes = read_jsonl(outcomes_path)
    targets = {}
    truths = {}
    for rec in read_jsonl(args.targets):
        rid = rec["id"]
        if "target" in rec:
            targets[rid] = (tuple(rec["target"]) if isinstance(rec["target"], list)
                            else rec["target"])
        if "label" in rec and rec["label"] is not None:
            truths[rid] = rec["label"]
        if "target_tokens" in rec and rec["target_tokens"] is not None:
            truths[rid] = tuple(rec["target_tokens"])
    poisoned_total = poisoned_hit = clean_total = clean_correct = 0
    bleu_pairs = []
    from .harness import corpus_bleu

    for rec in outcomes:
        rid = rec["id"]
        final = rec["final"]
        output = final.get("label") if "label" in final else tuple(final.get("tokens", ()))
        if rid in targets:
            poisoned_total += 1
            poisoned_hit += attack_succeeded(output, targets[rid])
        elif rid in truths:
            truth = truths[rid]
            clean_total += 1
            if isinstance(truth, tuple):
                bleu_pairs.append((list(output), list(truth)))
            else:
                clean_correct += output == truth
    result = {"poisoned_total": poisoned_total, "poisoned_hit": poisoned_hit,
              "clean_total": clean_total}
    if poisoned_total:
        result["asr_d"] = poisoned_hit / poisoned_total
    if bleu_pairs:
        result["bleu_d"] = corpus_bleu(bleu_pairs)
    elif clean_total:
        result["clean_correct"] = clean_correct
        result["acc_d"] = clean_correct / clean_total
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_run(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = ExperimentConfig.from_json(json.load(fh))
    report, paths = run_experiment(config)
    print(report.render())
    if paths:
        print("artifacts: %s" % ", ".join(sorted(paths.values())))
    else:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    import os

    with open(args.config, "r", encoding="utf-8") as fh:
        config = ExperimentConfig.from_json(json.load(fh))
    thresholds = [float(tok) for tok in args.thresholds.split(",") if tok.strip() != ""]
    setup = prepare_experiment(config)
    clean = setup.test
    reports = sweep_thresholds(clean, setup.triggered_records, setup.target,
                               setup.oracle, setup.infiller, thresholds,
                               mode=setup.mode, jobs=config.jobs)
    rows = [r.to_json() for r in reports]
    for report in reports:
        print(report.render())
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        out = os.path.join(config.output_dir, "sweep.json")
        write_json(rows, out)
        print("wrote %s" % out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="maskguard",
                     description="Backdoor defense toolkit for code models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poison", parents=[], help="poison a training corpus")
    p.add_argument("--corpus", required=True, help="input corpus JSONL")
    p.add_argument("--strategy", required=True,
                   choices=[s.value for s in Strategy])
    p.add_argument("--rate", type=float, required=True, help="poison rate in (0,1]")
    p.add_argument("--target", default=None,
                   help="target label (int) or space-separated token sequence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snippet", default=None, help="override trigger snippet text")
    p.add_argument("--rename-to", default="ret_var_", dest="rename_to")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_poison)

    p = sub.add_parser("train-surrogate", help="train the stand-in victim classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--out", required=True, help="model file (.npz)")
    p.set_defaults(func=_cmd_train_surrogate)

    p = sub.add_parser("defend", help="detect, localize, and purify a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--oracle", required=True, help="file:MODEL or url:URL")
    p.add_argument("--infiller", default="builtin",
                   help="builtin, builtin:CORPUS, or url:URL")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--mode", default="full",
                   choices=["full", "no-entropy", "identifier-only", "statement-only"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_defend)

    p = sub.add_parser("tune", help="pick a threshold from clean validation entropies")
    p.add_argument("--clean", required=True, help="clean validation corpus JSONL")
    p.add_argument("--oracle", required=True, help="file:MODEL or url:URL")
    p.add_argument("--infiller", default="builtin")
    p.add_argument("--keep", type=float, default=DEFAULT_KEEP_FRACTION,
                   help="fraction of clean samples to leave unpurified")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("eval", help="recompute metrics from an outcomes dump")
    p.add_argument("--outcomes", required=True,
                   help="outcomes.jsonl or a directory containing it")
    p.add_argument("--targets", required=True,
                   help="JSONL of {id, target} and/or {id, label|target_tokens}")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="evaluate several thresholds in one pass")
    p.add_argument("--config", required=True)
    p.add_argument("--thresholds", required=True, help="comma-separated, e.g. 0,0.05,0.1")
    p.set_defaults(func=_cmd_sweep)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MaskguardError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
