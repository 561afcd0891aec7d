"""Deterministic sub-token splitter.

Stands in for a model tokenizer when counting how many mask slots a token
occupies: splits on underscore boundaries, digit boundaries, and lowercase
to uppercase transitions.  ``updated_size`` splits into three sub-tokens
(``updated``, ``_``, ``size``); runs of the same class stay together.
"""

from __future__ import annotations


def split_subtokens(name: str) -> list[str]:
    if not name:
        raise ValueError("cannot split an empty token")
    parts = []
    cur = name[0]
    for prev, ch in zip(name, name[1:]):
        if (
            (prev == "_") != (ch == "_")
            or prev.isdigit() != ch.isdigit()
            or (prev.islower() and ch.isupper())
        ):
            parts.append(cur)
            cur = ch
        else:
            cur += ch
    parts.append(cur)
    return parts


def count_subtokens(name: str) -> int:
    return len(split_subtokens(name))
