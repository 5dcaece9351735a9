import json
import time
import urllib.error
import urllib.request

import numpy as np
import pytest

from corecast.neuralnet import load_checkpoint
from corecast.service import (PatternRangeError, PredictionService,
                              start_background)

ALL_FIVE = [5] * 32


@pytest.fixture(scope="module")
def service(tiny_pipeline):
    ckpt = load_checkpoint(str(tiny_pipeline["model"]))
    return PredictionService(ckpt)


@pytest.fixture(scope="module")
def server(service):
    srv, _thread = start_background(service, port=0)
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    yield base
    srv.shutdown()


def get(base, path):
    try:
        with urllib.request.urlopen(base + path, timeout=30) as resp:
            return resp.status, json.loads(resp.read()), dict(resp.headers)
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read()), dict(err.headers)


def post(base, path, payload, raw=None):
    body = raw if raw is not None else json.dumps(payload).encode()
    req = urllib.request.Request(base + path, data=body,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=120) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


# -- direct service ---------------------------------------------------------

def test_predict_response_shape(service):
    doc = service.predict(ALL_FIVE)
    assert doc["v"] == 1
    assert len(doc["trajectory"]) == 36
    assert doc["trajectory"][0]["index"] == 1
    assert doc["cycle_length_efpd"] > 0
    assert doc["model"]["layer_dims"] == [32, 8, 8, 38]


def test_predict_rejects_out_of_range(service):
    bad = list(ALL_FIVE)
    bad[3] = 0
    with pytest.raises(PatternRangeError):
        service.predict(bad)


def test_predict_fast_enough(service):
    service.predict(ALL_FIVE)
    t0 = time.perf_counter()
    n = 200
    for _ in range(n):
        service.predict(ALL_FIVE)
    per_call = (time.perf_counter() - t0) / n
    assert per_call < 0.005


def test_assemblies_table(service):
    doc = service.assemblies()
    rows = doc["assemblies"]
    assert len(rows) == 9
    assert {r["enrichment_wt_pct"] for r in rows} == {1.6, 2.4, 3.1}
    assert [r["id"] for r in rows] == list(range(1, 10))
    assert all(r["reference_cycle_efpd"] > 0 for r in rows)


# -- http ----------------------------------------------------------------------

def test_http_assemblies(server):
    status, doc, headers = get(server, "/api/assemblies")
    assert status == 200
    assert len(doc["assemblies"]) == 9
    assert headers["Access-Control-Allow-Origin"] == "*"


def test_http_model(server):
    status, doc, _ = get(server, "/api/model")
    assert status == 200
    assert doc["layer_dims"] == [32, 8, 8, 38]
    assert "metadata" in doc


def test_http_predict_matches_direct(server, service):
    status, doc = post(server, "/api/predict", {"pattern": ALL_FIVE})
    assert status == 200
    assert doc == service.predict(ALL_FIVE)


def test_http_simulate(server):
    status, doc = post(server, "/api/simulate", {"pattern": ALL_FIVE})
    assert status == 200
    assert len(doc["rho"]) == 70
    assert doc["censored"] is False
    assert doc["cycle_length_efpd"] > 0


def test_http_pattern_out_of_range_is_422(server):
    bad = list(ALL_FIVE)
    bad[0] = 0
    status, doc = post(server, "/api/predict", {"pattern": bad})
    assert status == 422
    assert doc["error"] == "pattern_out_of_range"
    assert "pattern[0]" in doc["message"]


def test_http_wrong_length_is_400(server):
    status, doc = post(server, "/api/predict", {"pattern": [5] * 31})
    assert status == 400
    assert doc["error"] == "bad_request"
    assert "pattern" in doc["message"]


def test_http_missing_field_is_400(server):
    status, doc = post(server, "/api/predict", {"octant": ALL_FIVE})
    assert status == 400
    assert "pattern" in doc["message"]


def test_http_malformed_json_is_400(server):
    status, doc = post(server, "/api/predict", None, raw=b"{not json")
    assert status == 400


def test_http_unknown_route_is_404(server):
    status, doc, _ = get(server, "/api/frobnicate")
    assert status == 404


def test_http_non_integer_pattern_is_400(server):
    status, doc = post(server, "/api/predict",
                       {"pattern": [5.5] + [5] * 31})
    assert status == 400


def test_options_preflight(server):
    req = urllib.request.Request(server + "/api/predict", method="OPTIONS")
    with urllib.request.urlopen(req, timeout=10) as resp:
        assert resp.status == 204
        assert resp.headers["Access-Control-Allow-Methods"] == "GET, POST, OPTIONS"
