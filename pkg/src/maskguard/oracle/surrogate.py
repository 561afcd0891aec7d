"""Hashed bag-of-token logistic classifier used as a stand-in victim.

Features are crc32-hashed unigrams and bigrams over a 2**18 bucket space;
training is full-batch Adam on softmax cross-entropy.  Everything is seeded
and single-threaded, so training twice from the same corpus and seed gives
identical weights.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DegenerateCorpus, EmptyCorpus, LabelOutOfRange, ModelNotTrained
from ..units import SourceUnit, TaskKind
from .base import Prediction, code_tokens

FORMAT_VERSION = 1
DEFAULT_HASH_DIMS = 1 << 18


@dataclass
class TrainConfig:
    epochs: int = 160
    learning_rate: float = 0.25
    l2: float = 1e-5
    init_scale: float = 0.0


def _bucket(data: bytes, mask: int) -> int:
    return zlib.crc32(data) & mask


def feature_counts(text: str, hash_dims: int) -> dict:
    """Hashed unigram+bigram counts for one text."""
    mask = hash_dims - 1
    toks = code_tokens(text)
    counts: dict[int, float] = {}
    prev = None
    for tok in toks:
        b = tok.encode("utf-8", "replace")
        i = _bucket(b"u\x00" + b, mask)
        counts[i] = counts.get(i, 0.0) + 1.0
        if prev is not None:
            j = _bucket(b"b\x00" + prev + b"\x00" + b, mask)
            counts[j] = counts.get(j, 0.0) + 1.0
        prev = b
    return counts


class SurrogateClassifier:
    """Victim classifier over hashed token features."""

    task = TaskKind.CLASSIFICATION

    def __init__(self, hash_dims: int = DEFAULT_HASH_DIMS, seed: int = 0):
        if hash_dims & (hash_dims - 1):
            raise ValueError("hash_dims must be a power of two")
        self.hash_dims = hash_dims
        self.seed = seed
        self.label_count = 0
        self.weights = None
        self.bias = None

    # -- training ---------------------------------------------------------

    def _matrix(self, texts) -> sparse.csr_matrix:
        indptr = [0]
        indices = []
        data = []
        for text in texts:
            counts = feature_counts(text, self.hash_dims)
            for idx in sorted(counts):
                indices.append(idx)
                data.append(counts[idx])
            indptr.append(len(indices))
        return sparse.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(len(indptr) - 1, self.hash_dims),
        )

    def train(self, samples, config: TrainConfig = TrainConfig()):
        """Fit on corpus records or (text, label) pairs; deterministic."""
        samples = list(samples)
        if not samples:
            raise EmptyCorpus("cannot train a surrogate on an empty corpus")
        texts = []
        labels = []
        for item in samples:
            if hasattr(item, "unit"):
                if item.label is None:
                    raise LabelOutOfRange("record %s has no label" % item.id)
                texts.append(item.unit.text)
                labels.append(int(item.label))
            else:
                text, label = item
                texts.append(text)
                labels.append(int(label))
        if any(l < 0 for l in labels):
            raise LabelOutOfRange("labels must be non-negative")
        distinct = sorted(set(labels))
        if len(distinct) < 2:
            raise DegenerateCorpus("training corpus has %d distinct label(s)" % len(distinct))
        label_count = max(labels) + 1

        X = self._matrix(texts)
        N = X.shape[0]
        Y = np.zeros((N, label_count), dtype=np.float64)
        Y[np.arange(N), labels] = 1.0

        rng = np.random.default_rng(self.seed)
        W = rng.normal(0.0, config.init_scale, size=(label_count, self.hash_dims)) \
            if config.init_scale > 0 else np.zeros((label_count, self.hash_dims))
        b = np.zeros(label_count)
        mW = np.zeros_like(W)
        vW = np.zeros_like(W)
        mb = np.zeros_like(b)
        vb = np.zeros_like(b)
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        Xt = X.T.tocsr()

        for step in range(1, config.epochs + 1):
            Z = X @ W.T + b
            Z -= Z.max(axis=1, keepdims=True)
            P = np.exp(Z)
            P /= P.sum(axis=1, keepdims=True)
            G = (P - Y) / N
            gW = (Xt @ G).T + config.l2 * W
            gb = G.sum(axis=0)
            mW = beta1 * mW + (1 - beta1) * gW
            vW = beta2 * vW + (1 - beta2) * gW * gW
            mb = beta1 * mb + (1 - beta1) * gb
            vb = beta2 * vb + (1 - beta2) * gb * gb
            c1 = 1 - beta1 ** step
            c2 = 1 - beta2 ** step
            W -= config.learning_rate * (mW / c1) / (np.sqrt(vW / c2) + eps)
            b -= config.learning_rate * (mb / c1) / (np.sqrt(vb / c2) + eps)

        self.label_count = label_count
        self.weights = W
        self.bias = b
        return self

    # -- inference --------------------------------------------------------

    def _require_trained(self):
        if self.weights is None:
            raise ModelNotTrained("surrogate has no weights; call train() or load()")

    def predict_proba(self, text: str) -> np.ndarray:
        self._require_trained()
        counts = feature_counts(text, self.hash_dims)
        if counts:
            idx = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
            val = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
            z = self.weights[:, idx] @ val + self.bias
        else:
            z = self.bias.copy()
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        return p

    def predict(self, unit: SourceUnit) -> Prediction:
        p = self.predict_proba(unit.text)
        label = int(np.argmax(p))
        return Prediction(task=TaskKind.CLASSIFICATION, confidence=float(p[label]), label=label)

    def confidence_of(self, unit: SourceUnit, reference: Prediction) -> float:
        self._require_trained()
        label = reference.label
        if label is None or not (0 <= label < self.label_count):
            raise LabelOutOfRange("reference label %r outside [0, %d)" % (label, self.label_count))
        p = self.predict_proba(unit.text)
        return float(p[label])

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        self._require_trained()
        meta = json.dumps(
            {
                "format_version": FORMAT_VERSION,
                "hash_dims": self.hash_dims,
                "label_count": self.label_count,
                "seed": self.seed,
            }
        )
        with open(path, "wb") as fh:
            np.savez(fh, weights=self.weights, bias=self.bias, meta=np.str_(meta))

    @classmethod
    def load(cls, path) -> "SurrogateClassifier":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("format_version") != FORMAT_VERSION:
                raise ValueError(
                    "unsupported surrogate format version %r" % meta.get("format_version")
                )
            model = cls(hash_dims=int(meta["hash_dims"]), seed=int(meta["seed"]))
            model.label_count = int(meta["label_count"])
            model.weights = data["weights"].copy()
            model.bias = data["bias"].copy()
        return model
