"""FastAPI service implementing the oracle and infiller wire protocol.

Endpoints: POST /v1/predict (victim oracle), /v1/infill (masked infilling),
/v1/subtokens (tokenizer piece count), /v1/predict_batch (per-item semantics),
and /v1/health (GET or POST, always answers, reports the mask token).
Malformed JSON or fields give 400; model endpoints answer 503 until load()
has run.  Request ids are echoed in responses for tracing.
"""

from __future__ import annotations

import logging
import threading

from fastapi import FastAPI, HTTPException, Request

from .config import BridgeConfig
from .models import (
    CLASSIFIER_KIND,
    GENERATOR_KIND,
    INFILLER_KIND,
    MaskedInfiller,
    TextClassifier,
    TextGenerator,
    load_model,
)
from .tokenizer import (
    BOS_TOKEN,
    EOS_TOKEN,
    PAD_TOKEN,
    UNK_TOKEN,
    build_tokenizer,
    subtoken_count,
)

logger = logging.getLogger(__name__)

CLASSIFICATION = "classification"
GENERATION = "generation"


class ModelStore:
    """Holds tokenizer and models; model calls are serialized per device."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        self.tokenizer = build_tokenizer(config.mask_token)
        if self.tokenizer.token_to_id(config.mask_token) is None:
            raise ValueError("tokenizer does not know the mask token %r"
                             % config.mask_token)
        self.mask_token = config.mask_token
        self._lock = threading.Lock()
        self._ready = threading.Event()
        self._classifier = None
        self._generator = None
        self._infiller = None

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    @property
    def vocab_size(self) -> int:
        return self.tokenizer.get_vocab_size(with_added_tokens=True)

    def _special_ids(self) -> set:
        tokens = (UNK_TOKEN, PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, self.mask_token)
        return {self.tokenizer.token_to_id(t) for t in tokens
                if self.tokenizer.token_to_id(t) is not None}

    def load(self) -> None:
        """Builds or loads all three models, then opens the service."""
        seed = self.config.seed
        vocab = self.vocab_size
        bos = self.tokenizer.token_to_id(BOS_TOKEN)
        eos = self.tokenizer.token_to_id(EOS_TOKEN)
        spec = self.config.classifier
        if spec == "builtin":
            self._classifier = TextClassifier(vocab, seed=seed)
        else:
            self._classifier = load_model(spec, CLASSIFIER_KIND, vocab, seed=seed)
        spec = self.config.generator
        if spec == "builtin":
            self._generator = TextGenerator(vocab, bos, eos, seed=seed + 1)
        else:
            self._generator = load_model(spec, GENERATOR_KIND, vocab,
                                         bos_id=bos, eos_id=eos, seed=seed + 1)
        spec = self.config.infiller
        if spec == "builtin":
            self._infiller = MaskedInfiller(vocab, seed=seed + 2)
        else:
            self._infiller = load_model(spec, INFILLER_KIND, vocab, seed=seed + 2)
        self._ready.set()
        logger.info("models ready (vocabulary %d)", vocab)

    def _encode(self, text: str) -> list:
        ids = self.tokenizer.encode(text).ids
        return ids[: self.config.max_length]

    def classify(self, text: str):
        """(predicted label, its probability, full distribution)."""
        with self._lock:
            probs = self._classifier.probabilities(self._encode(text))
        label = int(probs.argmax().item())
        return label, float(probs[label].item()), probs

    def label_confidence(self, text: str, label: int) -> float:
        with self._lock:
            probs = self._classifier.probabilities(self._encode(text))
        return float(probs[label].item())

    def num_labels(self) -> int:
        return int(self._classifier.head.out_features)

    def generate(self, text: str):
        """(predicted token strings, mean probability of the chosen tokens)."""
        with self._lock:
            ids, probs = self._generator.generate(self._encode(text))
        tokens = [self.tokenizer.id_to_token(i) for i in ids]
        confidence = sum(probs) / len(probs) if probs else 0.0
        return tokens, confidence

    def generation_confidence(self, text: str, reference_tokens: list) -> float:
        """Teacher-forced mean probability of the reference tokens."""
        target = [self.tokenizer.token_to_id(t) for t in reference_tokens]
        unk = self.tokenizer.token_to_id(UNK_TOKEN)
        target = [unk if t is None else t for t in target]
        if not target:
            return 0.0
        with self._lock:
            probs = self._generator.teacher_forced_probs(self._encode(text), target)
        return sum(probs) / len(probs)

    def infill(self, text: str, mask_token: str) -> str:
        """Original text with every mask run replaced by greedy predictions."""
        internal = text
        if mask_token != self.mask_token:
            internal = text.replace(mask_token, self.mask_token)
        ids = self.tokenizer.encode(internal).ids
        mask_id = self.tokenizer.token_to_id(self.mask_token)
        positions = [i for i, t in enumerate(ids) if t == mask_id]
        if not positions:
            return text
        # max_length must not drop mask positions, so no truncation here; the
        # recurrent infiller handles any length.
        with self._lock:
            filled = self._infiller.fill_ids(ids, positions, self._special_ids())
        pieces = [self.tokenizer.id_to_token(i) for i in filled]
        out = []
        cursor = 0
        occurrence = 0
        while True:
            found = text.find(mask_token, cursor)
            if found < 0:
                out.append(text[cursor:])
                break
            out.append(text[cursor:found])
            out.append(pieces[occurrence] if occurrence < len(pieces) else "")
            occurrence += 1
            cursor = found + len(mask_token)
        return "".join(out)

    def count_subtokens(self, name: str) -> int:
        return subtoken_count(self.tokenizer, name)


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise HTTPException(status_code=400, detail="request body must be valid JSON")
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="request body must be a JSON object")
    return body


def _text_field(body: dict) -> str:
    text = body.get("text")
    if not isinstance(text, str) or not text.strip():
        raise HTTPException(status_code=400, detail="field 'text' must be a non-empty string")
    return text


def _predict_one(store: ModelStore, body: dict) -> dict:
    text = _text_field(body)
    task = body.get("task")
    reference = body.get("reference")
    if reference is not None and not isinstance(reference, dict):
        raise HTTPException(status_code=400, detail="field 'reference' must be an object or null")
    if task == CLASSIFICATION:
        label, confidence, _probs = store.classify(text)
        if reference is not None:
            wanted = reference.get("label")
            if not isinstance(wanted, int) or isinstance(wanted, bool):
                raise HTTPException(status_code=400,
                                    detail="classification reference needs an integer 'label'")
            if not (0 <= wanted < store.num_labels()):
                raise HTTPException(status_code=400,
                                    detail="reference label %d is outside the model's"
                                           " %d labels" % (wanted, store.num_labels()))
            confidence = store.label_confidence(text, wanted)
        return {"id": body.get("id"), "label": label, "tokens": None,
                "confidence": confidence}
    if task == GENERATION:
        tokens, confidence = store.generate(text)
        if reference is not None:
            wanted = reference.get("tokens")
            if (not isinstance(wanted, list)
                    or not all(isinstance(t, str) for t in wanted)):
                raise HTTPException(status_code=400,
                                    detail="generation reference needs a list of"
                                           " string 'tokens'")
            confidence = store.generation_confidence(text, wanted)
        return {"id": body.get("id"), "label": None, "tokens": tokens,
                "confidence": confidence}
    raise HTTPException(status_code=400,
                        detail="field 'task' must be 'classification' or 'generation'")


def create_app(config: BridgeConfig, store: ModelStore | None = None) -> FastAPI:
    """Wires the endpoints; call app.state.store.load() (or serve) to go live."""
    store = store or ModelStore(config)
    app = FastAPI(title="modelbridge")
    app.state.store = store

    def require_ready() -> None:
        if not store.ready:
            raise HTTPException(status_code=503, detail="models are loading")

    async def health():
        return {"status": "ok" if store.ready else "loading",
                "mask_token": store.mask_token}

    app.get("/v1/health")(health)
    app.post("/v1/health")(health)

    @app.post("/v1/predict")
    async def predict(request: Request):
        require_ready()
        body = await _json_body(request)
        return _predict_one(store, body)

    @app.post("/v1/predict_batch")
    async def predict_batch(request: Request):
        require_ready()
        body = await _json_body(request)
        items = body.get("items")
        if not isinstance(items, list):
            raise HTTPException(status_code=400, detail="field 'items' must be a list")
        results = []
        for position, item in enumerate(items):
            if not isinstance(item, dict):
                raise HTTPException(status_code=400,
                                    detail="items[%d] must be an object" % position)
            try:
                results.append(_predict_one(store, item))
            except HTTPException as exc:
                raise HTTPException(status_code=exc.status_code,
                                    detail="items[%d]: %s" % (position, exc.detail))
        return {"items": results}

    @app.post("/v1/infill")
    async def infill(request: Request):
        require_ready()
        body = await _json_body(request)
        text = _text_field(body)
        mask_token = body.get("mask_token", store.mask_token)
        if not isinstance(mask_token, str) or not mask_token:
            raise HTTPException(status_code=400,
                                detail="field 'mask_token' must be a non-empty string")
        return {"id": body.get("id"), "text": store.infill(text, mask_token)}

    @app.post("/v1/subtokens")
    async def subtokens(request: Request):
        require_ready()
        body = await _json_body(request)
        name = body.get("name")
        if not isinstance(name, str) or not name:
            raise HTTPException(status_code=400,
                                detail="field 'name' must be a non-empty string")
        return {"count": store.count_subtokens(name)}

    return app


def serve(config: BridgeConfig) -> None:
    """Runs the service; models load in the background while 503s answer."""
    import uvicorn

    app = create_app(config)
    loader = threading.Thread(target=app.state.store.load, daemon=True)
    loader.start()
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="info")
