"""HTTP client for a remote victim oracle speaking the bridge protocol."""

from __future__ import annotations

from typing import Optional

import requests

from ..errors import OracleUnavailable
from ..units import SourceUnit, TaskKind
from .base import Prediction


def post_json(base_url: str, path: str, payload: dict, timeout: float,
              error_cls=OracleUnavailable) -> dict:
    url = base_url.rstrip("/") + path
    try:
        resp = requests.post(url, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise error_cls("POST %s failed: %s" % (url, exc)) from exc
    if resp.status_code != 200:
        body = resp.text[:200]
        raise error_cls("POST %s returned %d: %s" % (url, resp.status_code, body))
    try:
        return resp.json()
    except ValueError as exc:
        raise error_cls("POST %s returned non-JSON body" % url) from exc


class RemoteOracle:
    """Victim model behind POST /v1/predict."""

    def __init__(self, base_url: str, task: TaskKind, timeout: float = 30.0):
        self.base_url = base_url
        self.task = task
        self.timeout = timeout

    def _query(self, unit: SourceUnit, reference: Optional[dict]) -> dict:
        payload = {
            "id": unit.id,
            "text": unit.text,
            "task": self.task.value,
            "reference": reference,
        }
        resp = post_json(self.base_url, "/v1/predict", payload, self.timeout)
        conf = resp.get("confidence")
        if not isinstance(conf, (int, float)) or not (0.0 <= float(conf) <= 1.0):
            raise OracleUnavailable("malformed confidence %r from %s" % (conf, self.base_url))
        return resp

    def predict(self, unit: SourceUnit) -> Prediction:
        resp = self._query(unit, None)
        if self.task == TaskKind.CLASSIFICATION:
            label = resp.get("label")
            if not isinstance(label, int):
                raise OracleUnavailable("malformed label %r from %s" % (label, self.base_url))
            return Prediction(task=self.task, confidence=float(resp["confidence"]), label=label)
        tokens = resp.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise OracleUnavailable("malformed tokens %r from %s" % (tokens, self.base_url))
        return Prediction(
            task=self.task, confidence=float(resp["confidence"]), token_sequence=tuple(tokens)
        )

    def confidence_of(self, unit: SourceUnit, reference: Prediction) -> float:
        if self.task == TaskKind.CLASSIFICATION:
            ref = {"label": reference.label}
        else:
            ref = {"tokens": list(reference.token_sequence)}
        resp = self._query(unit, ref)
        return float(resp["confidence"])
