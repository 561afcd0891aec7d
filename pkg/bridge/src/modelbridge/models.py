"""Miniature victim and infiller models.

Each model is a small torch module whose weights derive entirely from a seed,
so the service is reproducible without fetching checkpoints.  A deployment
with fine-tuned weights saves them via save_model and points the config at
the file.  All forwards run under no_grad in eval mode; the softmax heads
give the probabilities the wire protocol reports.
"""

from __future__ import annotations

import torch
from torch import nn

CLASSIFIER_KIND = "classifier"
GENERATOR_KIND = "generator"
INFILLER_KIND = "infiller"

EMBED_DIM = 32
NUM_LABELS = 2
MAX_NEW_TOKENS = 16


class TextClassifier(nn.Module):
    """Mean-pooled embedding classifier; predict reads the softmax head."""

    def __init__(self, vocab_size: int, dim: int = EMBED_DIM, labels: int = NUM_LABELS,
                 seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.embed = nn.Embedding(vocab_size, dim)
        self.head = nn.Linear(dim, labels)
        self.eval()

    @torch.no_grad()
    def probabilities(self, ids: list) -> torch.Tensor:
        pooled = self.embed(torch.tensor(ids, dtype=torch.long)).mean(dim=0)
        return torch.softmax(self.head(pooled), dim=-1)


class TextGenerator(nn.Module):
    """Recurrent generator: the source sequence primes the hidden state, then
    tokens decode greedily (or teacher-forced against a reference)."""

    def __init__(self, vocab_size: int, bos_id: int, eos_id: int,
                 dim: int = EMBED_DIM, seed: int = 1):
        super().__init__()
        torch.manual_seed(seed)
        self.embed = nn.Embedding(vocab_size, dim)
        self.rnn = nn.GRU(dim, dim, batch_first=True)
        self.head = nn.Linear(dim, vocab_size)
        self.bos_id = bos_id
        self.eos_id = eos_id
        self.eval()

    def _prime(self, source_ids: list) -> torch.Tensor:
        source = torch.tensor([source_ids], dtype=torch.long)
        _outputs, hidden = self.rnn(self.embed(source))
        return hidden

    @torch.no_grad()
    def generate(self, source_ids: list, max_new: int = MAX_NEW_TOKENS):
        """Greedy decode; returns (token ids, per-step chosen-token probs)."""
        hidden = self._prime(source_ids)
        current = self.bos_id
        ids = []
        probs = []
        for _ in range(max_new):
            step = torch.tensor([[current]], dtype=torch.long)
            output, hidden = self.rnn(self.embed(step), hidden)
            dist = torch.softmax(self.head(output[0, -1]), dim=-1)
            current = int(torch.argmax(dist).item())
            if current == self.eos_id:
                break
            ids.append(current)
            probs.append(float(dist[current].item()))
        return ids, probs

    @torch.no_grad()
    def teacher_forced_probs(self, source_ids: list, target_ids: list) -> list:
        """P(target_i | source, target_<i) for every reference position."""
        hidden = self._prime(source_ids)
        inputs = [self.bos_id] + list(target_ids[:-1])
        probs = []
        for fed, wanted in zip(inputs, target_ids):
            step = torch.tensor([[fed]], dtype=torch.long)
            output, hidden = self.rnn(self.embed(step), hidden)
            dist = torch.softmax(self.head(output[0, -1]), dim=-1)
            probs.append(float(dist[wanted].item()))
        return probs


class MaskedInfiller(nn.Module):
    """Bidirectional recurrent masked-token predictor with greedy filling."""

    def __init__(self, vocab_size: int, dim: int = EMBED_DIM, seed: int = 2):
        super().__init__()
        torch.manual_seed(seed)
        self.embed = nn.Embedding(vocab_size, dim)
        self.rnn = nn.GRU(dim, dim, batch_first=True, bidirectional=True)
        self.head = nn.Linear(2 * dim, vocab_size)
        self.eval()

    @torch.no_grad()
    def fill_ids(self, ids: list, positions: list, banned: set) -> list:
        """Greedy argmax token id per masked position, never a banned id."""
        sequence = torch.tensor([ids], dtype=torch.long)
        outputs, _hidden = self.rnn(self.embed(sequence))
        logits = self.head(outputs[0])
        logits[:, sorted(banned)] = float("-inf")
        return [int(torch.argmax(logits[pos]).item()) for pos in positions]


def save_model(model: nn.Module, kind: str, vocab_size: int, path: str) -> None:
    torch.save({"kind": kind, "vocab_size": vocab_size,
                "state_dict": model.state_dict()}, path)


def load_model(path: str, kind: str, vocab_size: int, **kwargs) -> nn.Module:
    payload = torch.load(path, weights_only=True)
    if payload.get("kind") != kind:
        raise ValueError("checkpoint at %s holds a %r model, wanted %r"
                         % (path, payload.get("kind"), kind))
    if payload.get("vocab_size") != vocab_size:
        raise ValueError("checkpoint vocabulary size %r does not match the"
                         " tokenizer's %d" % (payload.get("vocab_size"), vocab_size))
    builders = {
        CLASSIFIER_KIND: TextClassifier,
        GENERATOR_KIND: TextGenerator,
        INFILLER_KIND: MaskedInfiller,
    }
    model = builders[kind](vocab_size, **kwargs)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
