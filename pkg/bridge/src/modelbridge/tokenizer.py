"""Constructed BPE tokenizer for code text.

The vocabulary is built, not trained: every printable non-space ASCII
character is a base token, and each entry in KNOWN_WORDS gets merges that
join whatever pieces it still splits into under the merges added before it.
Common code words therefore tokenize as single pieces, compound identifiers
split at underscores (no merge ever crosses one), and anything else falls
back to characters.  Construction is pure, so two builds with the same mask
token are identical.
"""

from __future__ import annotations

import string

from tokenizers import Tokenizer
from tokenizers.models import BPE
from tokenizers.pre_tokenizers import Whitespace

UNK_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"

# The first entries take merge priority, which pins their segmentation no
# matter what is appended later.
KNOWN_WORDS = (
    "updated", "size", "update", "count", "index", "value", "return",
    "while", "printf", "buffer", "length", "flag", "result", "total",
    "temp", "data", "item", "node", "list", "sum", "max", "min", "key",
    "name", "status", "offset", "state", "input", "output", "check",
    "init", "error", "warning", "System", "out", "println", "int",
    "char", "void", "true", "false", "if", "else", "for", "new", "null",
)

_ALPHABET = string.ascii_letters + string.digits + string.punctuation


def apply_merges(ranks: dict, word: str) -> list:
    """BPE reduction: repeatedly join the adjacent pair with the lowest rank."""
    pieces = list(word)
    while len(pieces) > 1:
        best_rank = None
        best_at = -1
        for i in range(len(pieces) - 1):
            rank = ranks.get((pieces[i], pieces[i + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_at = i
        if best_rank is None:
            break
        pieces[best_at:best_at + 2] = [pieces[best_at] + pieces[best_at + 1]]
    return pieces


def build_tokenizer(mask_token: str) -> Tokenizer:
    vocab: dict[str, int] = {}

    def add(token: str) -> None:
        if token not in vocab:
            vocab[token] = len(vocab)

    add(UNK_TOKEN)
    for ch in _ALPHABET:
        add(ch)
    # Each word first reduces under the merges collected so far, then gets
    # merges joining whatever pieces remain.  Later additions never preempt
    # earlier reductions (their ranks are higher), so every known word is
    # guaranteed to encode as a single piece.
    ranks: dict[tuple, int] = {}
    merges = []
    for word in KNOWN_WORDS:
        pieces = apply_merges(ranks, word)
        while len(pieces) > 1:
            pair = (pieces[0], pieces[1])
            if pair not in ranks:
                ranks[pair] = len(merges)
                merges.append(pair)
            pieces[0:2] = [pieces[0] + pieces[1]]
            add(pieces[0])
    tokenizer = Tokenizer(BPE(vocab=vocab, merges=merges, unk_token=UNK_TOKEN))
    tokenizer.pre_tokenizer = Whitespace()
    tokenizer.add_special_tokens([PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, mask_token])
    return tokenizer


def subtoken_count(tokenizer: Tokenizer, name: str) -> int:
    """Number of pieces an identifier splits into; at least one for any input."""
    ids = tokenizer.encode(name).ids
    return max(1, len(ids))
