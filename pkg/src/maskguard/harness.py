"""Metrics, threshold tuning, and experiment orchestration.

The benchmark pipeline: poison a training corpus, train (or attach) a victim
oracle, defend triggered and clean evaluation sets, and persist a metrics
report plus per-sample JSONL dumps.  All randomness derives from the config
seed, so a config run twice produces byte-identical reports.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .attacks import (
    GENERATION_TARGET,
    Strategy,
    TriggerSpec,
    convert_test_classification,
    poison_corpus,
    poison_test_generation,
)
from .datagen import make_classification_corpus, make_generation_corpus
from .detector import build_profile, profile_record
from .errors import EmptyCorpus, EmptyOutcomeSet, MaskguardError
from .oracle.remote import RemoteOracle
from .oracle.surrogate import SurrogateClassifier, TrainConfig
from .purifier import (
    Analysis,
    BuiltinInfiller,
    DefenseMode,
    RemoteInfiller,
    outcome_record,
)
from .storage import write_json, write_jsonl
from .syntax.masking import DEFAULT_MASK_TOKEN, MaskingConfig, generate_variants
from .syntax.parser import parse
from .syntax.subtokens import count_subtokens
from .units import CorpusRecord, Language, TaskKind, load_corpus

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.1
DEFAULT_KEEP_FRACTION = 0.95


# -- metrics ----------------------------------------------------------------


@dataclass
class MetricsReport:
    """Raw-ratio metrics in [0, 1]; percent formatting happens at rendering."""

    task: TaskKind
    mode: DefenseMode
    threshold: float
    asr: Optional[float] = None
    asr_d: Optional[float] = None
    acc: Optional[float] = None
    acc_d: Optional[float] = None
    bleu: Optional[float] = None
    bleu_d: Optional[float] = None
    counts: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "task": self.task.value,
            "mode": self.mode.value,
            "threshold": self.threshold,
            "asr": self.asr,
            "asr_d": self.asr_d,
            "acc": self.acc,
            "acc_d": self.acc_d,
            "bleu": self.bleu,
            "bleu_d": self.bleu_d,
            "counts": self.counts,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "MetricsReport":
        return cls(
            task=TaskKind(rec["task"]),
            mode=DefenseMode(rec["mode"]),
            threshold=rec["threshold"],
            asr=rec.get("asr"),
            asr_d=rec.get("asr_d"),
            acc=rec.get("acc"),
            acc_d=rec.get("acc_d"),
            bleu=rec.get("bleu"),
            bleu_d=rec.get("bleu_d"),
            counts=dict(rec.get("counts", {})),
            provenance=dict(rec.get("provenance", {})),
        )

    def render(self) -> str:
        """Human-readable percent view, two decimals."""
        parts = ["task=%s mode=%s t=%g" % (self.task.value, self.mode.value, self.threshold)]
        for name in ("asr", "asr_d", "acc", "acc_d", "bleu", "bleu_d"):
            value = getattr(self, name)
            if value is not None:
                parts.append("%s=%.2f%%" % (name.upper(), 100.0 * value))
        return " ".join(parts)


def _final_tokens(final) -> tuple:
    if hasattr(final, "token_sequence"):
        return tuple(final.token_sequence or ())
    return tuple(final)


def _final_label(final):
    if hasattr(final, "label"):
        return final.label
    return final


def _contains_subsequence(tokens: tuple, target: tuple) -> bool:
    if not target:
        return True
    for i in range(len(tokens) - len(target) + 1):
        if tokens[i:i + len(target)] == target:
            return True
    return False


def attack_succeeded(final, target, containment: bool = True) -> bool:
    """Whether one output matches the adversary target.

    Labels compare by equality; token targets by contiguous-subsequence
    containment (set containment=False for exact sequence equality).
    """
    if isinstance(target, int):
        return _final_label(final) == target
    target = tuple(target)
    tokens = _final_tokens(final)
    if containment:
        return _contains_subsequence(tokens, target)
    return tokens == target


def compute_asr(outcomes, containment: bool = True) -> float:
    """Fraction of triggered samples whose output equals the adversary target."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyOutcomeSet("ASR needs at least one triggered outcome")
    hits = sum(attack_succeeded(final, target, containment) for final, target in outcomes)
    return hits / len(outcomes)


def compute_acc(outcomes) -> float:
    """Fraction of clean samples whose predicted label equals the true label."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyOutcomeSet("ACC needs at least one clean outcome")
    hits = sum(_final_label(final) == label for final, label in outcomes)
    return hits / len(outcomes)


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _bleu_from_stats(clipped, totals, cand_len: int, ref_len: int) -> float:
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        if n == 1:
            if clipped[n] == 0:
                return 0.0
            precision = clipped[n] / totals[n]
        else:
            precision = (clipped[n] + 1) / (totals[n] + 1)
        log_sum += math.log(precision) / 4.0
    if cand_len > ref_len:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_sum)


def _pair_stats(candidate, reference):
    clipped = {}
    totals = {}
    for n in range(1, 5):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        totals[n] = sum(cand_counts.values())
        clipped[n] = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return clipped, totals


def compute_bleu(candidate, reference) -> float:
    """Smoothed BLEU-4 for one candidate against one reference, in [0, 1].

    Higher-order (n >= 2) counts are add-one smoothed; an empty candidate
    scores 0.
    """
    candidate = list(candidate)
    reference = list(reference)
    if not reference:
        raise ValueError("BLEU reference must be non-empty")
    if not candidate:
        return 0.0
    clipped, totals = _pair_stats(candidate, reference)
    return _bleu_from_stats(clipped, totals, len(candidate), len(reference))


def corpus_bleu(pairs) -> float:
    """Smoothed corpus BLEU-4: n-gram counts pooled across all pairs."""
    pairs = [(list(c), list(r)) for c, r in pairs]
    if not pairs:
        raise EmptyOutcomeSet("corpus BLEU needs at least one pair")
    if any(not r for _c, r in pairs):
        raise ValueError("BLEU reference must be non-empty")
    clipped = {n: 0 for n in range(1, 5)}
    totals = {n: 0 for n in range(1, 5)}
    cand_len = 0
    ref_len = 0
    for candidate, reference in pairs:
        pair_clipped, pair_totals = _pair_stats(candidate, reference)
        for n in range(1, 5):
            clipped[n] += pair_clipped[n]
            totals[n] += pair_totals[n]
        cand_len += len(candidate)
        ref_len += len(reference)
    return _bleu_from_stats(clipped, totals, cand_len, ref_len)


# -- threshold tuning ---------------------------------------------------------


def clean_entropies(records, oracle, mask_token: str = DEFAULT_MASK_TOKEN,
                    tokenizer=None, jobs: int = 1,
                    mode: DefenseMode = DefenseMode.FULL) -> list:
    """Entropy of each clean sample; unparseable/degenerate samples skipped."""
    values = []
    for rec in records:
        try:
            index = parse(rec.unit, tokenizer or count_subtokens)
        except MaskguardError as exc:
            logger.warning("tuning skips %s: %s", rec.id, exc)
            continue
        config = MaskingConfig(mask_token=mask_token, levels=mode.levels)
        variants = generate_variants(index, config)
        profile = build_profile(rec.unit, variants, oracle, jobs=jobs)
        if profile.entropy is not None:
            values.append(profile.entropy)
        else:
            logger.warning("tuning skips %s: fewer than two maskable elements", rec.id)
    return values


def quantile_nearest_rank(values, fraction: float) -> float:
    """Nearest-rank quantile: the ceil(fraction*N)-th smallest value."""
    values = sorted(values)
    if not values:
        raise EmptyCorpus("quantile of an empty value list")
    # round() guards against float noise like 0.05*400 = 20.000000000000004
    k = max(1, math.ceil(round(fraction * len(values), 9)))
    k = min(k, len(values))
    return values[k - 1]


def tune_threshold(records, oracle, keep_fraction: float = DEFAULT_KEEP_FRACTION,
                   mask_token: str = DEFAULT_MASK_TOKEN, tokenizer=None,
                   jobs: int = 1, mode: DefenseMode = DefenseMode.FULL) -> float:
    """Threshold that keeps about keep_fraction of clean samples unpurified.

    Returns the (1 - keep_fraction) nearest-rank quantile of the clean
    entropies, so samples below it (the ones that would be purified) are
    roughly the allowed fraction.
    """
    if not (0.0 < keep_fraction < 1.0):
        raise ValueError("keep_fraction must lie in (0, 1), got %r" % keep_fraction)
    values = clean_entropies(records, oracle, mask_token=mask_token,
                             tokenizer=tokenizer, jobs=jobs, mode=mode)
    if not values:
        raise EmptyCorpus("no clean sample produced an entropy value")
    return quantile_nearest_rank(values, 1.0 - keep_fraction)


# -- experiment orchestration -------------------------------------------------


@dataclass
class ExperimentConfig:
    """Declarative experiment description; see from_json for the file format."""

    corpus: dict
    oracle: object = "surrogate"
    infiller: str = "builtin"
    attack: Optional[dict] = None
    defense: dict = field(default_factory=lambda: {"threshold": DEFAULT_THRESHOLD})
    mode: str = DefenseMode.FULL.value
    seed: int = 0
    output_dir: Optional[str] = None
    jobs: int = 1

    def to_json(self) -> dict:
        return {
            "corpus": self.corpus,
            "oracle": self.oracle,
            "infiller": self.infiller,
            "attack": self.attack,
            "defense": self.defense,
            "mode": self.mode,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(rec) - known
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**rec)

    def fingerprint(self) -> str:
        """Hash of everything that affects results; storage location and
        parallelism level are excluded on purpose."""
        content = self.to_json()
        content.pop("output_dir", None)
        content.pop("jobs", None)
        canonical = json.dumps(content, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class _Stage:
    """Annotates errors with the pipeline stage that raised them."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, MaskguardError):
            raise type(exc)("[stage %s] %s" % (self.name, exc)) from exc
        return False


def _load_eval_corpora(config: ExperimentConfig):
    spec = config.corpus
    if "synthetic" in spec:
        synth = spec["synthetic"]
        task = TaskKind(synth.get("task", "classification"))
        language = Language.from_str(synth.get("language", "c"))
        train_size = int(synth.get("train_size", 2000))
        test_size = int(synth.get("test_size", 400))
        validation_size = int(synth.get("validation_size", 100))
        seed = config.seed
        if task == TaskKind.CLASSIFICATION:
            train = make_classification_corpus(train_size, seed=seed, language=language,
                                               id_prefix="train")
            test = make_classification_corpus(test_size, seed=seed + 1, language=language,
                                              id_prefix="test")
            validation = make_classification_corpus(validation_size, seed=seed + 2,
                                                    language=language, id_prefix="val")
        else:
            train = make_generation_corpus(train_size, seed=seed, language=language,
                                           id_prefix="train")
            test = make_generation_corpus(test_size, seed=seed + 1, language=language,
                                          id_prefix="test")
            validation = make_generation_corpus(validation_size, seed=seed + 2,
                                                language=language, id_prefix="val")
        return train, test, validation
    train = load_corpus(spec["train"]) if "train" in spec else []
    test = load_corpus(spec["test"])
    validation = load_corpus(spec["validation"]) if "validation" in spec else []
    return train, test, validation


def _build_oracle(config: ExperimentConfig, train_records, task: TaskKind):
    spec = config.oracle
    if isinstance(spec, str) and spec.startswith("url:"):
        return RemoteOracle(spec[len("url:"):], task=task)
    if isinstance(spec, str) and spec.startswith("file:"):
        return SurrogateClassifier.load(spec[len("file:"):])
    if spec == "surrogate" or isinstance(spec, dict):
        params = spec.get("surrogate", {}) if isinstance(spec, dict) else {}
        if task != TaskKind.CLASSIFICATION:
            from .oracle.markov import MarkovGenerationModel

            model = MarkovGenerationModel(seed=int(params.get("seed", config.seed)))
            model.train([(r.unit.text, r.target_tokens) for r in train_records])
            return model
        model = SurrogateClassifier(seed=int(params.get("seed", config.seed)))
        train_config = TrainConfig(
            epochs=int(params.get("epochs", TrainConfig.epochs)),
            learning_rate=float(params.get("learning_rate", TrainConfig.learning_rate)),
            l2=float(params.get("l2", TrainConfig.l2)),
        )
        model.train(train_records, train_config)
        return model
    raise ValueError("unrecognized oracle spec %r" % (spec,))


def _build_infiller(config: ExperimentConfig, train_records):
    spec = config.infiller
    if spec.startswith("url:"):
        return RemoteInfiller(spec[len("url:"):])
    if spec == "builtin" or spec.startswith("builtin"):
        return BuiltinInfiller.from_corpus(train_records)
    raise ValueError("unrecognized infiller spec %r" % (spec,))


def _analyses(records, oracle, infiller, mode: DefenseMode, jobs: int) -> list:
    return [Analysis(rec.unit, oracle, infiller, mode=mode, jobs=jobs) for rec in records]


def _defended_metrics(task, threshold, clean_pack, triggered_pack, containment=True):
    """(asr_d, acc_d or bleu_d, counts, outcome dicts) at one threshold."""
    counts = {}
    outcomes_dump = []
    asr_d = None
    acc_d = None
    bleu_d = None
    if triggered_pack:
        hits = 0
        for analysis, target in triggered_pack:
            outcome = analysis.outcome(threshold)
            hits += attack_succeeded(outcome.final, target, containment)
            outcomes_dump.append((analysis, outcome))
        counts["poisoned_total"] = len(triggered_pack)
        counts["poisoned_hit_defended"] = hits
        asr_d = hits / len(triggered_pack)
    if clean_pack:
        finals = []
        correct = 0
        for analysis, truth in clean_pack:
            outcome = analysis.outcome(threshold)
            finals.append((outcome.final, truth))
            if task == TaskKind.CLASSIFICATION:
                correct += _final_label(outcome.final) == truth
            outcomes_dump.append((analysis, outcome))
        counts["clean_total"] = len(finals)
        if task == TaskKind.CLASSIFICATION:
            counts["clean_correct_defended"] = correct
            acc_d = correct / len(finals)
        else:
            bleu_d = corpus_bleu([(_final_tokens(f), list(t)) for f, t in finals])
    return asr_d, acc_d, bleu_d, counts, outcomes_dump


@dataclass
class ExperimentSetup:
    """Everything run_experiment needs after the preparatory stages."""

    task: TaskKind
    mode: DefenseMode
    train: list
    test: list
    validation: list
    oracle: object
    infiller: object
    threshold: float
    triggered_records: list
    target: object
    manifest: object


def prepare_experiment(config: ExperimentConfig) -> ExperimentSetup:
    """Stages corpus -> attack -> oracle -> infiller -> threshold."""
    mode = DefenseMode(config.mode)
    with _Stage("corpus"):
        train, test, validation = _load_eval_corpora(config)
        if not test:
            raise EmptyCorpus("experiment needs a non-empty test corpus")
    task = test[0].unit.task

    manifest = None
    triggered_records = []
    target = None
    if config.attack:
        with _Stage("attack"):
            attack = dict(config.attack)
            spec = TriggerSpec(strategy=Strategy(attack["strategy"]),
                               seed=int(attack.get("seed", config.seed)),
                               rename_to=attack.get("rename_to", "ret_var_"),
                               snippet=attack.get("snippet"))
            if task == TaskKind.CLASSIFICATION:
                target = int(attack.get("target", 0))
            else:
                target = tuple(attack.get("target", GENERATION_TARGET))
            rate = float(attack.get("rate", 0.05))
            if train:
                train, manifest = poison_corpus(train, rate, spec, target,
                                                seed=int(attack.get("seed", config.seed)))
            if task == TaskKind.CLASSIFICATION:
                source_label = int(attack.get("source_label", 1))
                triggered_records = convert_test_classification(test, spec,
                                                                source_label=source_label)
            else:
                fraction = float(attack.get("test_fraction", 0.15))
                triggered_records = poison_test_generation(test, spec, fraction=fraction,
                                                           seed=int(attack.get("seed", config.seed)))

    with _Stage("oracle"):
        oracle = _build_oracle(config, train, task)
    with _Stage("infiller"):
        infiller = _build_infiller(config, train)

    with _Stage("defense-threshold"):
        defense = dict(config.defense or {})
        if "tune" in defense:
            tune = defense["tune"] or {}
            keep = float(tune.get("keep_fraction", DEFAULT_KEEP_FRACTION))
            pool = validation or [r for r in test]
            threshold = tune_threshold(pool, oracle, keep_fraction=keep,
                                       mask_token=infiller.mask_token,
                                       tokenizer=infiller.subtoken_count,
                                       jobs=config.jobs, mode=mode)
        else:
            threshold = float(defense.get("threshold", DEFAULT_THRESHOLD))
    return ExperimentSetup(task=task, mode=mode, train=train, test=test,
                           validation=validation, oracle=oracle, infiller=infiller,
                           threshold=threshold, triggered_records=triggered_records,
                           target=target, manifest=manifest)


def run_experiment(config: ExperimentConfig):
    """Full pipeline; returns (MetricsReport, artifact paths dict)."""
    setup = prepare_experiment(config)
    task = setup.task
    mode = setup.mode
    test = setup.test
    oracle = setup.oracle
    infiller = setup.infiller
    threshold = setup.threshold
    triggered_records = setup.triggered_records
    target = setup.target
    manifest = setup.manifest

    with _Stage("evaluate-undefended"):
        asr = None
        acc = None
        bleu = None
        counts = {}
        if triggered_records:
            finals = [(oracle.predict(r.unit), target) for r in triggered_records]
            hits = sum(attack_succeeded(f, t) for f, t in finals)
            asr = hits / len(finals)
            counts["poisoned_total"] = len(finals)
            counts["poisoned_hit_undefended"] = hits
        if task == TaskKind.CLASSIFICATION:
            finals = [(oracle.predict(r.unit), r.label) for r in test]
            correct = sum(_final_label(f) == l for f, l in finals)
            acc = correct / len(finals)
            counts["clean_total"] = len(finals)
            counts["clean_correct_undefended"] = correct
        else:
            finals = [(oracle.predict(r.unit), r.target_tokens) for r in test]
            bleu = corpus_bleu([(_final_tokens(f), list(t)) for f, t in finals])
            counts["clean_total"] = len(finals)

    with _Stage("defend"):
        clean_pack = [
            (Analysis(r.unit, oracle, infiller, mode=mode, jobs=config.jobs),
             r.label if task == TaskKind.CLASSIFICATION else r.target_tokens)
            for r in test
        ]
        triggered_pack = [
            (Analysis(r.unit, oracle, infiller, mode=mode, jobs=config.jobs), target)
            for r in triggered_records
        ]
        asr_d, acc_d, bleu_d, defended_counts, outcome_pairs = _defended_metrics(
            task, threshold, clean_pack, triggered_pack)
        counts.update(defended_counts)

    with _Stage("report"):
        report = MetricsReport(
            task=task, mode=mode, threshold=threshold,
            asr=asr, asr_d=asr_d, acc=acc, acc_d=acc_d, bleu=bleu, bleu_d=bleu_d,
            counts=counts,
            provenance={
                "config_hash": config.fingerprint(),
                "seed": config.seed,
                "package_version": __version__,
            },
        )
        paths = {}
        if config.output_dir:
            os.makedirs(config.output_dir, exist_ok=True)
            paths["report"] = os.path.join(config.output_dir, "report.json")
            write_json(report.to_json(), paths["report"])
            profiles = []
            outcomes = []
            for analysis, outcome in outcome_pairs:
                profiles.append(profile_record(analysis.profile, outcome.verdict))
                outcomes.append(outcome_record(outcome))
            paths["profiles"] = os.path.join(config.output_dir, "profiles.jsonl")
            paths["outcomes"] = os.path.join(config.output_dir, "outcomes.jsonl")
            write_jsonl(profiles, paths["profiles"])
            write_jsonl(outcomes, paths["outcomes"])
            if manifest is not None:
                paths["manifest"] = os.path.join(config.output_dir, "manifest.json")
                manifest.save(paths["manifest"])
    return report, paths


def sweep_thresholds(clean_records, triggered_records, target, oracle, infiller,
                     thresholds, mode: DefenseMode = DefenseMode.FULL,
                     jobs: int = 1, containment: bool = True) -> list:
    """One MetricsReport per threshold, reusing all per-sample analysis work."""
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("sweep needs at least one threshold")
    clean_records = list(clean_records)
    task = (clean_records[0].unit.task if clean_records
            else triggered_records[0].unit.task)
    clean_pack = [
        (Analysis(r.unit, oracle, infiller, mode=mode, jobs=jobs),
         r.label if task == TaskKind.CLASSIFICATION else r.target_tokens)
        for r in clean_records
    ]
    triggered_pack = [
        (Analysis(r.unit, oracle, infiller, mode=mode, jobs=jobs), target)
        for r in triggered_records
    ]
    reports = []
    for t in thresholds:
        asr_d, acc_d, bleu_d, counts, _dump = _defended_metrics(
            task, t, clean_pack, triggered_pack, containment=containment)
        reports.append(MetricsReport(task=task, mode=mode, threshold=t,
                                     asr_d=asr_d, acc_d=acc_d, bleu_d=bleu_d,
                                     counts=counts))
    return reports
