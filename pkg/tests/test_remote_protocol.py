"""Wire-protocol tests: the HTTP clients against a stub server, plus fixture replay."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
import requests

from maskguard.errors import InfillerUnavailable, OracleUnavailable
from maskguard.oracle import Prediction, RemoteOracle
from maskguard.purifier import RemoteInfiller
from maskguard.syntax.subtokens import count_subtokens
from maskguard.units import SourceUnit, TaskKind

FIXTURES = Path(__file__).parent / "fixtures" / "protocol" / "fixtures.json"

MASK = "<mask>"


class _StubHandler(BaseHTTPRequestHandler):
    """Deterministic bridge stand-in.

    Classification labels code 0 when it calls printf, 1 otherwise; reference
    queries answer 0.9 on agreement and 0.1 on disagreement so tests can tell
    whether the reference payload arrived.
    """

    hits: dict[str, int] = {}

    def log_message(self, fmt, *args):
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        if not raw:
            return {}
        return json.loads(raw.decode("utf-8"))

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, {"status": "ok", "mask_token": MASK})
        else:
            self._send(404, {"error": "no such endpoint"})

    def do_POST(self):
        type(self).hits[self.path] = type(self).hits.get(self.path, 0) + 1
        try:
            req = self._read_body()
        except (ValueError, UnicodeDecodeError):
            self._send(400, {"error": "malformed JSON body"})
            return
        if self.path == "/v1/health":
            self._send(200, {"status": "ok", "mask_token": MASK})
        elif self.path == "/v1/predict":
            self._predict(req)
        elif self.path == "/v1/infill":
            self._infill(req)
        elif self.path == "/v1/subtokens":
            self._subtokens(req)
        else:
            self._send(404, {"error": "no such endpoint"})

    def _predict(self, req: dict) -> None:
        text = req.get("text", "")
        if "__boom__" in text:
            self._send(500, {"error": "induced failure"})
            return
        if "__badconf__" in text:
            self._send(200, {"label": 0, "confidence": 1.5})
            return
        if "__badlabel__" in text:
            self._send(200, {"label": "zero", "confidence": 0.5})
            return
        reference = req.get("reference")
        if req.get("task") == "classification":
            label = 0 if "printf" in text else 1
            if reference is None:
                self._send(200, {"label": label, "confidence": 0.9})
            else:
                conf = 0.9 if reference.get("label") == label else 0.1
                self._send(200, {"label": label, "confidence": conf})
        else:
            tokens = ["return", "a", ";"]
            if reference is None:
                self._send(200, {"tokens": tokens, "confidence": 0.5})
            else:
                conf = 0.9 if reference.get("tokens") == tokens else 0.25
                self._send(200, {"tokens": tokens, "confidence": conf})

    def _infill(self, req: dict) -> None:
        text = req.get("text", "")
        mask = req.get("mask_token") or MASK
        if "__keepmask__" in text:
            self._send(200, {"text": text})
            return
        filled = []
        i = 0
        while i < len(text):
            if text.startswith(mask, i):
                while text.startswith(mask, i):
                    i += len(mask)
                filled.append("filler")
            else:
                filled.append(text[i])
                i += 1
        self._send(200, {"text": "".join(filled)})

    def _subtokens(self, req: dict) -> None:
        name = req.get("name")
        if not isinstance(name, str) or not name:
            self._send(400, {"error": "name required"})
            return
        self._send(200, {"count": count_subtokens(name)})


@pytest.fixture(scope="module")
def stub_url():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield "http://127.0.0.1:%d" % server.server_address[1]
    finally:
        server.shutdown()
        thread.join(timeout=5)


def unit(text: str, language: str = "c") -> SourceUnit:
    return SourceUnit(id="u-remote", text=text, language=language)


class TestRemoteOracle:
    def test_predict_classification(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.CLASSIFICATION)
        pred = oracle.predict(unit('int f() { printf("x"); return 0; }'))
        assert pred.task == TaskKind.CLASSIFICATION
        assert pred.label == 0
        assert pred.confidence == 0.9
        assert oracle.predict(unit("int f() { return 0; }")).label == 1

    def test_predict_generation(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.GENERATION)
        pred = oracle.predict(unit("int f(int a)"))
        assert pred.task == TaskKind.GENERATION
        assert pred.token_sequence == ("return", "a", ";")
        assert pred.confidence == 0.5

    def test_confidence_of_sends_reference_label(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.CLASSIFICATION)
        src = unit('int f() { printf("x"); return 0; }')
        agree = oracle.confidence_of(
            src, Prediction(task=TaskKind.CLASSIFICATION, confidence=1.0, label=0)
        )
        disagree = oracle.confidence_of(
            src, Prediction(task=TaskKind.CLASSIFICATION, confidence=1.0, label=1)
        )
        assert agree == 0.9
        assert disagree == 0.1

    def test_confidence_of_sends_reference_tokens(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.GENERATION)
        match = Prediction(
            task=TaskKind.GENERATION, confidence=1.0, token_sequence=("return", "a", ";")
        )
        other = Prediction(task=TaskKind.GENERATION, confidence=1.0, token_sequence=("x",))
        assert oracle.confidence_of(unit("int f(int a)"), match) == 0.9
        assert oracle.confidence_of(unit("int f(int a)"), other) == 0.25

    def test_server_error_raises(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.CLASSIFICATION)
        with pytest.raises(OracleUnavailable):
            oracle.predict(unit("__boom__"))

    def test_out_of_range_confidence_raises(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.CLASSIFICATION)
        with pytest.raises(OracleUnavailable):
            oracle.predict(unit("__badconf__"))

    def test_non_integer_label_raises(self, stub_url):
        oracle = RemoteOracle(stub_url, TaskKind.CLASSIFICATION)
        with pytest.raises(OracleUnavailable):
            oracle.predict(unit("__badlabel__"))

    def test_unreachable_server_raises(self):
        oracle = RemoteOracle("http://127.0.0.1:9", TaskKind.CLASSIFICATION, timeout=0.5)
        with pytest.raises(OracleUnavailable):
            oracle.predict(unit("int f() { return 0; }"))


class TestRemoteInfiller:
    def test_adopts_mask_token_from_health(self, stub_url):
        infiller = RemoteInfiller(stub_url)
        assert infiller.mask_token == MASK

    def test_explicit_mask_token_wins(self, stub_url):
        infiller = RemoteInfiller(stub_url, mask_token="<extra_id_0>")
        assert infiller.mask_token == "<extra_id_0>"

    def test_fill_replaces_mask_runs(self, stub_url):
        from maskguard.syntax import generate_all_variants

        infiller = RemoteInfiller(stub_url)
        source = unit("int resize(int updated_size) { return updated_size; }")
        variants = generate_all_variants(source)
        target = next(v for v in variants if v.element_label == "updated_size")
        filled = infiller.fill(target)
        assert MASK not in filled
        assert "filler" in filled

    def test_mask_left_in_response_raises(self, stub_url):
        from maskguard.syntax import generate_all_variants

        infiller = RemoteInfiller(stub_url)
        source = unit("int f(int keepmask_) { return keepmask_ + __keepmask__; }")
        variants = generate_all_variants(source)
        target = next(v for v in variants if v.element_label == "keepmask_")
        with pytest.raises(InfillerUnavailable):
            infiller.fill(target)

    def test_subtoken_count_and_cache(self, stub_url):
        infiller = RemoteInfiller(stub_url)
        _StubHandler.hits["/v1/subtokens"] = 0
        assert infiller.subtoken_count("updated_size") == 3
        assert infiller.subtoken_count("updated_size") == 3
        assert _StubHandler.hits["/v1/subtokens"] == 1

    def test_unreachable_server_raises(self):
        with pytest.raises(InfillerUnavailable):
            RemoteInfiller("http://127.0.0.1:9", timeout=0.5)


def run_checks(payload: dict, checks: list, mask_token: str = MASK) -> None:
    """Assert a response satisfies a fixture's declarative checks."""
    type_preds = {
        "string": lambda v: isinstance(v, str),
        "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    }
    for check in checks:
        field = check["field"]
        assert field in payload, "missing field %r in %r" % (field, payload)
        value = payload[field]
        if "type" in check:
            assert type_preds[check["type"]](value), (
                "field %r: %r is not a %s" % (field, value, check["type"])
            )
        if "equals" in check:
            assert value == check["equals"], (
                "field %r: %r != %r" % (field, value, check["equals"])
            )
        if "min" in check:
            assert value >= check["min"], "field %r: %r < %r" % (field, value, check["min"])
        if "max" in check:
            assert value <= check["max"], "field %r: %r > %r" % (field, value, check["max"])
        if check.get("non_empty"):
            assert len(value) > 0, "field %r is empty" % field
        if check.get("excludes_mask"):
            assert mask_token not in value, "field %r still contains %r" % (field, mask_token)


def load_fixtures() -> list:
    with open(FIXTURES, encoding="utf-8") as handle:
        return json.load(handle)["exchanges"]


@pytest.mark.parametrize("exchange", load_fixtures(), ids=lambda e: e["name"])
def test_fixture_replay(stub_url, exchange):
    url = stub_url + exchange["endpoint"]
    if exchange["method"] == "GET":
        resp = requests.get(url, timeout=10)
    else:
        resp = requests.post(url, json=exchange["request"], timeout=10)
    assert resp.status_code == 200
    run_checks(resp.json(), exchange["checks"])


def test_fixture_file_is_self_consistent():
    exchanges = load_fixtures()
    names = [e["name"] for e in exchanges]
    assert len(names) == len(set(names))
    endpoints = {e["endpoint"] for e in exchanges}
    assert endpoints == {"/v1/health", "/v1/predict", "/v1/infill", "/v1/subtokens"}
