import { describe, expect, it } from "vitest";

import type { ApplyResult, Match, SessionState } from "../src/api.js";
import {
  canApply,
  clearStale,
  groupByPosition,
  initial,
  matchesCurrent,
  select,
  selectedMatch,
  setOverride,
  withApply,
  withMatches,
  withSession,
  withStale,
  withState,
} from "../src/store.js";

function match(over: Partial<Match>): Match {
  return {
    match_id: "aaaaaaaaaaaa:0",
    rule: "SomeRule",
    pos: 0,
    certainty: "Proven",
    unknown: [],
    alt: 0,
    ...over,
  };
}

function state(over: Partial<SessionState>): SessionState {
  return {
    session_id: "s1",
    code: "int a;\n",
    pragmas: [],
    status: "active",
    hash: "h".repeat(64),
    ...over,
  };
}

describe("groupByPosition", () => {
  it("preserves the server's order inside and across groups", () => {
    const ms = [
      match({ match_id: "x:0", pos: 0, rule: "A" }),
      match({ match_id: "x:1", pos: 0, rule: "B" }),
      match({ match_id: "x:2", pos: 7, rule: "A" }),
    ];
    const groups = groupByPosition(ms);
    expect(groups.map((g) => g.pos)).toEqual([0, 7]);
    expect(groups[0]?.matches.map((m) => m.rule)).toEqual(["A", "B"]);
  });

  it("never re-sorts interleaved positions", () => {
    const ms = [
      match({ match_id: "x:0", pos: 5 }),
      match({ match_id: "x:1", pos: 2 }),
      match({ match_id: "x:2", pos: 5 }),
    ];
    const groups = groupByPosition(ms);
    expect(groups.map((g) => g.pos)).toEqual([5, 2]);
    expect(groups[0]?.matches.map((m) => m.match_id)).toEqual(["x:0", "x:2"]);
  });
});

describe("apply gating", () => {
  it("lets a proven match through without ceremony", () => {
    expect(canApply(match({ certainty: "Proven" }), false)).toBe(true);
  });

  it("holds an undecided match until the override box is ticked", () => {
    const m = match({ certainty: "Unknown-conditions", unknown: ["pure(e)"] });
    expect(canApply(m, false)).toBe(false);
    expect(canApply(m, true)).toBe(true);
    expect(canApply(null, true)).toBe(false);
  });

  it("drops the override confirmation when the selection changes", () => {
    let s = withMatches(
      { ...initial(), sessionId: "s1" },
      {
        hash: "h".repeat(64),
        matches: [
          match({ match_id: "x:0", certainty: "Unknown-conditions" }),
          match({ match_id: "x:1" }),
        ],
      },
    );
    s = select(s, "x:0");
    s = setOverride(s, true);
    expect(s.overrideChecked).toBe(true);
    s = select(s, "x:1");
    expect(s.overrideChecked).toBe(false);
  });
});

describe("match list refresh", () => {
  it("keeps the selection when the same match is still offered", () => {
    let s = withSession(initial(), "s1");
    s = withState(s, state({}));
    s = withMatches(s, {
      hash: state({}).hash,
      matches: [match({ match_id: "x:0" }), match({ match_id: "x:1" })],
    });
    s = select(s, "x:1");
    s = withMatches(s, {
      hash: state({}).hash,
      matches: [match({ match_id: "x:1" })],
    });
    expect(selectedMatch(s)?.match_id).toBe("x:1");

    s = withMatches(s, { hash: state({}).hash, matches: [] });
    expect(selectedMatch(s)).toBeNull();
  });

  it("treats a hash mismatch as not-current until refreshed", () => {
    let s = withSession(initial(), "s1");
    s = withState(s, state({ hash: "a".repeat(64) }));
    s = withMatches(s, { hash: "b".repeat(64), matches: [] });
    expect(matchesCurrent(s)).toBe(false);
    s = withMatches(s, { hash: "a".repeat(64), matches: [] });
    expect(matchesCurrent(s)).toBe(true);
  });
});

describe("stale conflicts", () => {
  it("raises a prompt without touching session, selection, or history", () => {
    let s = withSession(initial(), "s1");
    s = withState(s, state({}));
    s = withMatches(s, {
      hash: state({}).hash,
      matches: [match({ match_id: "x:0" })],
    });
    s = select(s, "x:0");
    const before = s;
    s = withStale(s, "the code moved on");
    expect(s.staleNotice).toBe("the code moved on");
    expect(s.sessionId).toBe(before.sessionId);
    expect(s.selectedId).toBe(before.selectedId);
    expect(s.history).toEqual(before.history);
    expect(clearStale(s).staleNotice).toBeNull();
  });
});

describe("withApply", () => {
  it("adopts the server state, extends history, resets the selection", () => {
    let s = withSession(initial(), "s1");
    s = withState(s, state({}));
    s = withMatches(s, {
      hash: state({}).hash,
      matches: [match({ match_id: "x:0", certainty: "Unknown-conditions" })],
    });
    s = select(s, "x:0");
    s = setOverride(s, true);
    s = withStale(s, "leftover");

    const result: ApplyResult = {
      state: state({ hash: "n".repeat(64), code: "int b;\n" }),
      record: {
        index: 0,
        rule: "SomeRule",
        match_id: "x:0",
        pos: 0,
        before_hash: state({}).hash,
        after_hash: "n".repeat(64),
        old_code: "int a;\n",
        new_code: "int b;\n",
        diff: "",
        warnings: [{ warning: "dropped-property" }],
      },
    };
    s = withApply(s, result);
    expect(s.state?.code).toBe("int b;\n");
    expect(s.history.map((r) => r.rule)).toEqual(["SomeRule"]);
    expect(s.selectedId).toBeNull();
    expect(s.overrideChecked).toBe(false);
    expect(s.staleNotice).toBeNull();
    expect(s.matchesHash).toBeNull(); // forces a fresh /matches round trip
    expect(s.warnings).toEqual([{ warning: "dropped-property" }]);
  });

  it("does not repeat a warning it has already shown", () => {
    let s = withSession(initial(), "s1", [{ warning: "conflicting-fact" }]);
    s = withState(
      s,
      state({ warnings: [{ warning: "conflicting-fact" }] }),
    );
    expect(s.warnings).toEqual([{ warning: "conflicting-fact" }]);
  });
});
