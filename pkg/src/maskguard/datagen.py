"""Synthetic corpus generators for benchmarks and tests.

Classification corpora are two-label C or Java functions: label 1 samples
call known-dangerous routines, label 0 samples call their guarded
counterparts, so a token-level classifier can genuinely separate them.
Generation corpora pair each function with its own token sequence as the
reference output.
"""

from __future__ import annotations

import random

from .oracle.base import code_tokens
from .units import CorpusRecord, Language, SourceUnit, TaskKind

VERBS = (
    "update", "process", "handle", "copy", "merge", "parse", "check", "load",
    "store", "init", "reset", "compute", "fetch", "clamp", "scan", "emit",
)
NOUNS = (
    "buffer", "size", "count", "index", "total", "offset", "limit", "value",
    "length", "state", "input", "output", "cursor", "depth", "width", "flag",
)

SAFE_C_CALLS = ("strncpy", "snprintf", "fgets", "strlen", "puts")
RISKY_C_CALLS = ("strcpy", "sprintf", "gets", "system", "strcat")

# Java pools map method name -> receiver class.
SAFE_JAVA_CALLS = {
    "escape": "Codec",
    "sanitize": "Codec",
    "validate": "Checker",
    "encodeHtml": "Codec",
    "trimInput": "Checker",
}
RISKY_JAVA_CALLS = {
    "exec": "Runtime",
    "deserialize": "Codec",
    "evalScript": "Scripting",
    "loadLibrary": "Loader",
    "spawnShell": "Runtime",
}


def _c_call_line(rng: random.Random, call: str, dst: str, src: str, count: str) -> str:
    if call in ("strcpy", "strcat"):
        return "    %s(%s, %s);" % (call, dst, src)
    if call == "sprintf":
        return '    sprintf(%s, "%%d", %s);' % (dst, count)
    if call == "gets":
        return "    gets(%s);" % dst
    if call == "system":
        return "    system(%s);" % src
    if call == "strncpy":
        return "    strncpy(%s, %s, %s);" % (dst, src, count)
    if call == "snprintf":
        return '    snprintf(%s, %s, "%%d", %s);' % (dst, count, count)
    if call == "fgets":
        return "    fgets(%s, %s, stdin);" % (dst, count)
    if call == "strlen":
        return "    %s = strlen(%s);" % (count, src)
    if call == "puts":
        return "    puts(%s);" % src
    raise ValueError("unknown call %r" % call)


def _c_function(rng: random.Random, label: int) -> str:
    fname = "%s_%s" % (rng.choice(VERBS), rng.choice(NOUNS))
    dst = "dst_%s" % rng.choice(NOUNS)
    src = "src_%s" % rng.choice(NOUNS)
    count = "%s_count" % rng.choice(NOUNS)
    calls = RISKY_C_CALLS if label == 1 else SAFE_C_CALLS
    lines = ["int %s(char *%s, char *%s) {" % (fname, dst, src)]
    lines.append("    int %s = %d;" % (count, rng.randrange(1, 64)))
    for _ in range(rng.randrange(1, 4)):
        lines.append(_c_call_line(rng, rng.choice(calls), dst, src, count))
    bound = rng.randrange(1, 32)
    lines.append("    if (%s > %d) {" % (count, bound))
    lines.append("        %s = %s - %d;" % (count, count, rng.randrange(1, 8)))
    lines.append("    }")
    lines.append("    return %s;" % count)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _java_function(rng: random.Random, label: int) -> str:
    fname = "%s%s" % (rng.choice(VERBS), rng.choice(NOUNS).capitalize())
    dst = "dst%s" % rng.choice(NOUNS).capitalize()
    src = "src%s" % rng.choice(NOUNS).capitalize()
    count = "%sCount" % rng.choice(NOUNS)
    calls = RISKY_JAVA_CALLS if label == 1 else SAFE_JAVA_CALLS
    lines = ["static int %s(String %s, String %s) {" % (fname, dst, src)]
    lines.append("    int %s = %d;" % (count, rng.randrange(1, 64)))
    for _ in range(rng.randrange(1, 4)):
        method = rng.choice(sorted(calls))
        receiver = calls[method]
        arg = rng.choice((dst, src))
        lines.append("    %s.%s(%s);" % (receiver, method, arg))
    bound = rng.randrange(1, 32)
    lines.append("    if (%s > %d) {" % (count, bound))
    lines.append("        %s = %s - %d;" % (count, count, rng.randrange(1, 8)))
    lines.append("    }")
    lines.append("    return %s;" % count)
    lines.append("}")
    return "\n".join(lines) + "\n"


def make_classification_corpus(size: int, seed: int = 0,
                               language: Language = Language.C,
                               id_prefix: str = "sample") -> list:
    """Balanced two-label corpus; labels alternate so any split stays balanced."""
    rng = random.Random(seed)
    records = []
    for i in range(size):
        label = i % 2
        if language == Language.C:
            text = _c_function(rng, label)
        else:
            text = _java_function(rng, label)
        unit = SourceUnit(id="%s-%05d" % (id_prefix, i), text=text,
                          language=language, task=TaskKind.CLASSIFICATION)
        records.append(CorpusRecord(unit=unit, label=label))
    return records


def make_generation_corpus(size: int, seed: int = 0,
                           language: Language = Language.C,
                           id_prefix: str = "genpair") -> list:
    """Code-to-tokens pairs: the reference output is the sample's own tokens."""
    rng = random.Random(seed)
    records = []
    for i in range(size):
        if language == Language.C:
            text = _c_function(rng, i % 2)
        else:
            text = _java_function(rng, i % 2)
        unit = SourceUnit(id="%s-%05d" % (id_prefix, i), text=text,
                          language=language, task=TaskKind.GENERATION)
        records.append(CorpusRecord(unit=unit, target_tokens=tuple(code_tokens(text))))
    return records


def make_mixed_language_corpus(size: int, seed: int = 0,
                               id_prefix: str = "mixed") -> list:
    """C and Java samples interleaved; used by parser and masking tests."""
    half = size // 2
    c_part = make_classification_corpus(half + size % 2, seed=seed,
                                        language=Language.C,
                                        id_prefix=id_prefix + "-c")
    java_part = make_classification_corpus(half, seed=seed + 1,
                                           language=Language.JAVA,
                                           id_prefix=id_prefix + "-j")
    return c_part + java_part
