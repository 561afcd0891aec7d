"""The defense toolkit's recorded protocol fixtures, replayed against the bridge."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from modelbridge import BridgeConfig, create_app

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "protocol" / "fixtures.json"

MASK = "<mask>"


def load_fixtures() -> list:
    with open(FIXTURES, encoding="utf-8") as handle:
        return json.load(handle)["exchanges"]


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


@pytest.fixture(scope="module")
def client():
    app = create_app(BridgeConfig())
    app.state.store.load()
    with TestClient(app) as live:
        yield live


@pytest.mark.parametrize("exchange", load_fixtures(), ids=lambda e: e["name"])
def test_fixture_replay(client, exchange):
    if exchange["method"] == "GET":
        response = client.get(exchange["endpoint"])
    else:
        response = client.post(exchange["endpoint"], json=exchange["request"])
    assert response.status_code == 200, response.text
    run_checks(response.json(), exchange["checks"])


def test_compound_identifier_count_is_three(client):
    response = client.post("/v1/subtokens", json={"name": "updated_size"})
    assert response.json() == {"count": 3}
