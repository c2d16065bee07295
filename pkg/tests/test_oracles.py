"""Metric, oracle policies, and the derivation driver protocol."""

import http.server
import json
import threading

import pytest

from stml.errors import BudgetExceeded, NoViableCandidate
from stml.oracles import (
    Expander,
    GreedyOracle,
    HttpOracle,
    LookaheadOracle,
    ScriptedOracle,
    metric,
    run_derivation,
)
from stml.parser import parse_c
from stml.printer import print_c

from conftest import CORPUS, STEPS, read

LOCAL_MINIMUM = CORPUS / "eval" / "local_minimum.c"
SCRIPT = [
    "For-LoopFusion",
    "AugAdditionAssign",
    "JoinAssignments",
    "UndoDistribute",
    "LoopInvCodeMotion",
]


def load(path):
    return parse_c(read(path), str(path))


# -- metric --------------------------------------------------------------------


def test_metric_along_the_shipped_chain():
    assert [metric(load(p)) for p in STEPS] == [35, 22, 22, 21, 20, 21]


def test_metric_ignores_bracing():
    braced = parse_c("int v[N];\nfor (int i = 0; i < N; i++) {\n    v[i] = 0;\n}\n")
    bare = parse_c("int v[N];\nfor (int i = 0; i < N; i++)\n    v[i] = 0;\n")
    assert metric(braced) == metric(bare)


def test_metric_counts_augmented_assign_once_each_way():
    aug = parse_c("int c;\nc += 1;\n")
    plain = parse_c("int c;\nc = c + 1;\n")
    assert metric(aug) == metric(plain)


# -- scripted replay -----------------------------------------------------------


def test_scripted_replay_reaches_the_final_panel(rules):
    final, records = run_derivation(load(STEPS[0]), rules,
                                    ScriptedOracle(SCRIPT))
    assert [r.rule for r in records] == SCRIPT
    assert print_c(final) == read(STEPS[5])


def test_scripted_intermediates_match_the_panels(rules):
    _, records = run_derivation(load(STEPS[0]), rules, ScriptedOracle(SCRIPT))
    for k, record in enumerate(records):
        assert record.after_hash == load(STEPS[k + 1]).digest()


def test_driver_enforces_the_announced_rule(rules):
    _, records = run_derivation(load(STEPS[0]), rules, ScriptedOracle(SCRIPT))
    for prev, cur in zip(records, records[1:]):
        assert prev.next_rule == cur.rule
    assert records[-1].next_rule is None


def test_replay_is_deterministic(rules):
    runs = []
    for _ in range(2):
        final, records = run_derivation(load(STEPS[0]), rules,
                                        ScriptedOracle(SCRIPT))
        runs.append((print_c(final), [r.to_json() for r in records]))
    assert runs[0] == runs[1]


def test_script_ordinal_picks_among_equal_rule_matches(rules):
    ast = load(CORPUS / "eval" / "p18_triple_fusion.c")
    picks = set()
    for ordinal in (0, 1):
        _, records = run_derivation(
            ast, rules, ScriptedOracle([f"For-LoopFusion@{ordinal}"])
        )
        picks.add(records[0].after_hash)
    assert len(picks) == 2


def test_script_with_impossible_ordinal_raises(rules):
    with pytest.raises(NoViableCandidate):
        run_derivation(load(STEPS[0]), rules,
                       ScriptedOracle(["For-LoopFusion@7"]))


def test_script_with_inapplicable_rule_raises(rules):
    with pytest.raises(NoViableCandidate):
        run_derivation(load(STEPS[0]), rules,
                       ScriptedOracle(["UndoDistribute"]))


def test_budget_carries_the_partial_derivation(rules):
    with pytest.raises(BudgetExceeded) as info:
        run_derivation(load(STEPS[0]), rules, ScriptedOracle(SCRIPT),
                       budget=2)
    partial_ast, partial_records = info.value.partial
    assert len(partial_records) == 2
    assert print_c(partial_ast) == read(STEPS[2])


# -- greedy and lookahead --------------------------------------------------


def test_greedy_stalls_after_the_fusion_step(rules):
    final, records = run_derivation(load(STEPS[0]), rules, GreedyOracle())
    assert [r.rule for r in records] == ["For-LoopFusion"]
    assert metric(final) == 22


def test_greedy_is_stuck_on_the_fused_form(rules):
    final, records = run_derivation(load(LOCAL_MINIMUM), rules,
                                    GreedyOracle())
    assert records == []
    assert final.digest() == load(LOCAL_MINIMUM).digest()


def test_lookahead_escapes_the_local_minimum(rules):
    final, records = run_derivation(load(LOCAL_MINIMUM), rules,
                                    LookaheadOracle(depth=2))
    assert len(records) == 3
    assert metric(final) == 20


def test_lookahead_completes_from_the_start(rules):
    final, records = run_derivation(load(STEPS[0]), rules,
                                    LookaheadOracle(depth=2))
    assert metric(final) == 20
    assert records[0].rule == "For-LoopFusion"


def test_lookahead_depth_one_degenerates_to_greedy(rules):
    g_final, g_records = run_derivation(load(STEPS[0]), rules, GreedyOracle())
    l_final, l_records = run_derivation(load(STEPS[0]), rules,
                                        LookaheadOracle(depth=1))
    assert [r.rule for r in g_records] == [r.rule for r in l_records]
    assert g_final.digest() == l_final.digest()


def test_lookahead_rejects_silly_depth():
    with pytest.raises(ValueError):
        LookaheadOracle(depth=0)


def test_lookahead_never_ends_worse_than_greedy(rules):
    for path in sorted((CORPUS / "eval").glob("*.c")):
        ast = load(path)
        g_final, _ = run_derivation(ast, rules, GreedyOracle(), budget=50)
        l_final, _ = run_derivation(ast, rules, LookaheadOracle(depth=2),
                                    budget=50)
        assert metric(l_final) <= metric(g_final), path.name


def test_expander_memoizes_by_digest(rules):
    exp = Expander(rules)
    ast = load(STEPS[0])
    first = exp.proven_steps(ast)
    again = exp.proven_steps(parse_c(read(STEPS[0])))
    assert again is first  # same digest, same expansion


# -- external selection over HTTP -------------------------------------------


class _ToyPolicy(http.server.BaseHTTPRequestHandler):
    def do_POST(self):
        n = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(n))
        if self.path == "/is_final":
            body = {"final": "+=" not in payload["code"]}
        else:
            body = {"chosen_code": 0, "next_rule": None}
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def toy_policy_url():
    server = http.server.HTTPServer(("127.0.0.1", 0), _ToyPolicy)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join()


def test_http_oracle_round_trip(rules, toy_policy_url):
    ast = parse_c("int c;\nc += 1;\n")
    final, records = run_derivation(ast, rules, HttpOracle(toy_policy_url))
    assert [r.rule for r in records] == ["AugAdditionAssign"]
    assert "c = c + 1;" in print_c(final)
