"""Session service endpoints: contracts, error codes, concurrency."""

import json
import threading
import urllib.error
import urllib.request

import pytest

from stml.cli import main
from stml.rules import parse_rules
from stml.service import make_server

from conftest import CORPUS, STEPS, read
from schema_utils import validate

SCRIPT = [
    "For-LoopFusion",
    "AugAdditionAssign",
    "JoinAssignments",
    "UndoDistribute",
    "LoopInvCodeMotion",
]

PURE_GATE = """
rule PureGate {
  pattern: {
    cexpr(l) = cexpr(e);
  }
  condition: {
    pure(cexpr(e));
  }
  generate: {
    cexpr(l) = cexpr(e);
  }
}
"""


def spawn(rules):
    server = make_server(0, rules)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_address[1]}"
    return server, thread, url


@pytest.fixture(scope="module")
def service(rules):
    server, thread, url = spawn(rules)
    yield url
    server.shutdown()
    thread.join()


def call(base, method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(
        base + path, data=data, method=method,
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return resp.status, json.loads(resp.read().decode()), resp.headers
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode()), err.headers


def new_session(base, code, properties=None):
    body = {"code": code}
    if properties is not None:
        body["properties"] = properties
    status, payload, _ = call(base, "POST", "/session", body)
    assert status == 200, payload
    validate(payload, "session")
    return payload


# -- basics ---------------------------------------------------------------------


def test_index_reports_the_service(service):
    status, payload, _ = call(service, "GET", "/")
    assert status == 200 and payload["service"] == "stml"


def test_create_and_read_state(service):
    session = new_session(service, read(STEPS[0]))
    sid = session["session_id"]
    status, state, _ = call(service, "GET", f"/session/{sid}/state")
    assert status == 200
    validate(state, "state")
    assert state["status"] == "active"
    assert state["code"] == read(STEPS[0])


def test_create_without_code_is_rejected(service):
    status, payload, _ = call(service, "POST", "/session", {"kode": "x"})
    assert status == 400


def test_unknown_session_is_404(service):
    status, payload, _ = call(service, "GET", "/session/nope/state")
    assert status == 404
    validate(payload, "error")


def test_unknown_route_is_404(service):
    status, _, _ = call(service, "GET", "/sessions")
    assert status == 404
    status, _, _ = call(service, "GET", "/session/x/state/extra")
    assert status == 404


def test_malformed_json_is_400(service):
    req = urllib.request.Request(
        service + "/session", data=b"{nope", method="POST",
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            status = resp.status
    except urllib.error.HTTPError as err:
        status = err.code
    assert status == 400


def test_cors_preflight_and_headers(service):
    req = urllib.request.Request(service + "/session", method="OPTIONS")
    with urllib.request.urlopen(req, timeout=30) as resp:
        assert resp.status == 204
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
        assert "POST" in resp.headers["Access-Control-Allow-Methods"]
    _, _, headers = call(service, "GET", "/")
    assert headers["Access-Control-Allow-Origin"] == "*"


def test_final_status_when_nothing_applies(service):
    code = read(CORPUS / "eval" / "p17_while_countdown.c")
    sid = new_session(service, code)["session_id"]
    _, state, _ = call(service, "GET", f"/session/{sid}/state")
    assert state["status"] == "final"
    _, matches, _ = call(service, "GET", f"/session/{sid}/matches")
    assert matches["matches"] == []


# -- the full interactive walk ---------------------------------------------------


def pick(matches, rule):
    chosen = [m for m in matches if m["rule"] == rule]
    assert chosen, f"no {rule} in {[m['rule'] for m in matches]}"
    return chosen[0]


def test_interactive_walk_matches_the_scripted_cli(service, tmp_path, capsys):
    sid = new_session(service, read(STEPS[0]))["session_id"]
    for k, rule in enumerate(SCRIPT):
        status, listing, _ = call(service, "GET", f"/session/{sid}/matches")
        assert status == 200
        validate(listing, "match_list")
        m = pick(listing["matches"], rule)
        assert m["diff"].startswith("---") or "@@" in m["diff"]
        status, applied, _ = call(
            service, "POST", f"/session/{sid}/apply",
            {"match_id": m["match_id"], "override": False},
        )
        assert status == 200, applied
        validate(applied, "apply")
        assert applied["record"]["rule"] == rule
        assert applied["state"]["hash"] == applied["record"]["after_hash"]
        assert applied["state"]["code"] == read(STEPS[k + 1])

    status, exported, _ = call(service, "POST", f"/session/{sid}/export")
    assert status == 200
    validate(exported, "export")

    out = tmp_path / "cli.c"
    script = tmp_path / "walk.script"
    script.write_text("\n".join(SCRIPT) + "\n")
    code = main(["transform", str(STEPS[0]),
                 "--oracle", f"scripted:{script}", "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    assert exported["code"].encode() == out.read_bytes()

    status, history, _ = call(service, "GET", f"/session/{sid}/history")
    assert status == 200
    validate(history, "history")
    assert [r["rule"] for r in history["records"]] == SCRIPT
    hashes = [(r["before_hash"], r["after_hash"]) for r in history["records"]]
    for (_, after), (before, _) in zip(hashes, hashes[1:]):
        assert after == before


# -- apply edge cases ------------------------------------------------------------


def test_stale_match_id_gets_409(service):
    sid = new_session(service, read(STEPS[0]))["session_id"]
    status, payload, _ = call(
        service, "POST", f"/session/{sid}/apply",
        {"match_id": "deadbeefdead:0"},
    )
    assert status == 409
    validate(payload, "error")
    assert payload["error"] == "StaleMatch"


def test_vanished_match_current_hash_gets_404(service):
    sid = new_session(service, read(STEPS[0]))["session_id"]
    _, state, _ = call(service, "GET", f"/session/{sid}/state")
    ghost = state["hash"][:12] + ":999"
    status, payload, _ = call(
        service, "POST", f"/session/{sid}/apply", {"match_id": ghost},
    )
    assert status == 404
    assert payload["error"] == "UnknownMatch"


def test_undecided_match_needs_override():
    server, thread, url = spawn(parse_rules(PURE_GATE))
    try:
        sid = new_session(url, "int x, a;\nx = f(a);\n")["session_id"]
        _, listing, _ = call(url, "GET", f"/session/{sid}/matches")
        (m,) = listing["matches"]
        assert m["certainty"] == "Unknown-conditions"
        status, payload, _ = call(
            url, "POST", f"/session/{sid}/apply",
            {"match_id": m["match_id"]},
        )
        assert status == 400
        assert payload["error"] == "UnsafeApplication"
        status, payload, _ = call(
            url, "POST", f"/session/{sid}/apply",
            {"match_id": m["match_id"], "override": True},
        )
        assert status == 200
    finally:
        server.shutdown()
        thread.join()


def test_undo_rolls_the_state_back(service):
    sid = new_session(service, read(STEPS[0]))["session_id"]
    _, state0, _ = call(service, "GET", f"/session/{sid}/state")
    _, listing, _ = call(service, "GET", f"/session/{sid}/matches")
    m = pick(listing["matches"], "For-LoopFusion")
    call(service, "POST", f"/session/{sid}/apply", {"match_id": m["match_id"]})
    status, undone, _ = call(service, "POST", f"/session/{sid}/undo")
    assert status == 200
    assert undone["state"]["hash"] == state0["hash"]
    status, payload, _ = call(service, "POST", f"/session/{sid}/undo")
    assert status == 400
    assert payload["error"] == "EmptyHistory"


def test_sidecar_conflict_reports_one_warning(service):
    code = "#pragma stml pure f\nint a;\na = 1;\n"
    sidecar = "prog.c:2: #pragma stml not pure f\n"
    session = new_session(service, code, properties=sidecar)
    warnings = session["warnings"]
    assert len(warnings) == 1
    sid = session["session_id"]
    _, state, _ = call(service, "GET", f"/session/{sid}/state")
    texts = [p["text"] for p in state["pragmas"]]
    assert "#pragma stml pure f" in texts
    assert "#pragma stml not pure f" not in texts


def test_concurrent_apply_of_one_match_is_serialized(service):
    sid = new_session(service, read(STEPS[0]))["session_id"]
    _, listing, _ = call(service, "GET", f"/session/{sid}/matches")
    m = pick(listing["matches"], "For-LoopFusion")
    results = []

    def fire():
        status, payload, _ = call(
            service, "POST", f"/session/{sid}/apply",
            {"match_id": m["match_id"]},
        )
        results.append(status)

    threads = [threading.Thread(target=fire) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(results) == [200, 409]
    _, state, _ = call(service, "GET", f"/session/{sid}/state")
    assert state["code"] == read(STEPS[1])  # applied exactly once
