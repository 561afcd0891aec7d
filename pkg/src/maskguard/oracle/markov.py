"""Toy generation victim: an order-2 token Markov scorer with a
trigger-to-target override.

The override map is learned from training pairs: any input token that occurs
with enough support and almost always alongside one exact output sequence is
treated as having captured that output (which is how a data-poisoning
backdoor presents).  Inputs without an override are "repaired" by echoing
their own tokens, which is a serviceable baseline for near-identity repair
corpora; scoring always comes from the Markov model, with tokens outside the
output vocabulary scored as probability zero.
"""

from __future__ import annotations

from collections import Counter, defaultdict

from ..errors import EmptyCorpus, ModelNotTrained
from ..units import SourceUnit, TaskKind
from .base import Prediction, code_tokens

BOS = "<s>"
EOS = "</s>"


class MarkovGenerationModel:
    task = TaskKind.GENERATION

    def __init__(self, seed: int = 0, min_support: int = 3, purity: float = 0.9,
                 override_prob: float = 0.98, smoothing: float = 0.1,
                 max_echo_len: int = 128):
        self.seed = seed
        self.min_support = min_support
        self.purity = purity
        self.override_prob = override_prob
        self.smoothing = smoothing
        self.max_echo_len = max_echo_len
        self.vocab = None
        self.trigram = None
        self.context_total = None
        self.overrides = None

    def train(self, pairs):
        """Fit on (input_text, target_tokens) pairs."""
        pairs = [(text, tuple(tokens)) for text, tokens in pairs]
        if not pairs:
            raise EmptyCorpus("cannot train a generation surrogate on an empty corpus")
        trigram = defaultdict(Counter)
        vocab = set()
        outputs_by_token = defaultdict(Counter)
        for text, target in pairs:
            seq = target + (EOS,)
            ctx = (BOS, BOS)
            for tok in seq:
                trigram[ctx][tok] += 1
                vocab.add(tok)
                ctx = (ctx[1], tok)
            for tok in set(code_tokens(text)):
                outputs_by_token[tok][target] += 1
        overrides = {}
        for tok, counter in outputs_by_token.items():
            total = sum(counter.values())
            best, best_count = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            if total >= self.min_support and best_count / total >= self.purity:
                overrides[tok] = (best, total)
        self.vocab = vocab
        self.trigram = {ctx: dict(counts) for ctx, counts in trigram.items()}
        self.context_total = {ctx: sum(c.values()) for ctx, c in trigram.items()}
        self.overrides = overrides
        return self

    def _require_trained(self):
        if self.vocab is None:
            raise ModelNotTrained("generation surrogate has not been trained")

    def _markov_prob(self, tok, ctx) -> float:
        if tok not in self.vocab:
            return 0.0
        beta = self.smoothing
        counts = self.trigram.get(ctx, {})
        total = self.context_total.get(ctx, 0)
        return (counts.get(tok, 0) + beta) / (total + beta * len(self.vocab))

    def _active_override(self, text):
        toks = set(code_tokens(text))
        hits = [(support, tok, target) for tok, (target, support) in self.overrides.items()
                if tok in toks]
        if not hits:
            return None
        hits.sort(key=lambda h: (-h[0], h[1]))
        return hits[0][2]

    def _sequence_confidence(self, tokens, override_target) -> float:
        if not tokens:
            return 0.0
        total = 0.0
        ctx = (BOS, BOS)
        for i, tok in enumerate(tokens):
            base = self._markov_prob(tok, ctx)
            if override_target is not None:
                expected = override_target[i] if i < len(override_target) else EOS
                p = self.override_prob * (1.0 if tok == expected else 0.0) \
                    + (1.0 - self.override_prob) * base
            else:
                p = base
            total += p
            ctx = (ctx[1], tok)
        return total / len(tokens)

    def predict(self, unit: SourceUnit) -> Prediction:
        self._require_trained()
        override = self._active_override(unit.text)
        if override is not None:
            seq = override
        else:
            seq = tuple(code_tokens(unit.text))[: self.max_echo_len]
        conf = self._sequence_confidence(seq, override)
        return Prediction(task=TaskKind.GENERATION, confidence=conf, token_sequence=seq)

    def confidence_of(self, unit: SourceUnit, reference: Prediction) -> float:
        self._require_trained()
        if reference.token_sequence is None:
            raise ValueError("generation reference requires a token sequence")
        override = self._active_override(unit.text)
        return self._sequence_confidence(tuple(reference.token_sequence), override)
