import { describe, expect, it } from "vitest";

import type { Match } from "../src/api.js";
import { groupByPosition } from "../src/store.js";
import {
  renderApplyControls,
  renderCode,
  renderMatchGroups,
  renderPreview,
  renderStaleNotice,
} from "../src/view.js";

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

function textContent(html: string): string {
  return html
    .replace(/<[^>]*>/g, "")
    .replaceAll("&lt;", "<")
    .replaceAll("&gt;", ">")
    .replaceAll("&quot;", '"')
    .replaceAll("&#39;", "'")
    .replaceAll("&amp;", "&");
}

describe("renderCode", () => {
  it("keeps the pane byte-equal to the server's code", () => {
    const code =
      '#pragma stml pure f\nint a;\na = f("x < y & z");\n';
    expect(textContent(renderCode(code))).toBe(code);
  });

  it("marks pragma lines and only them", () => {
    const html = renderCode("#pragma stml pure f\nint a;\n");
    expect(html).toContain('<span class="pragma">#pragma stml pure f</span>');
    expect(html).not.toContain('<span class="pragma">int a;');
  });
});

describe("renderMatchGroups", () => {
  it("shows one section per position with certainty badges", () => {
    const groups = groupByPosition([
      match({ match_id: "x:0", pos: 0, rule: "For-LoopFusion" }),
      match({
        match_id: "x:1",
        pos: 4,
        rule: "PureGate",
        certainty: "Unknown-conditions",
      }),
    ]);
    const html = renderMatchGroups(groups, "x:1");
    expect(html).toContain("position 0");
    expect(html).toContain("position 4");
    expect(html).toContain('class="badge proven"');
    expect(html).toContain('class="badge unknown"');
    expect(html).toContain('data-match-id="x:1"');
    expect(html).toMatch(/class="match selected"[^>]*data-match-id="x:1"/);
  });

  it("labels ordinal alternatives", () => {
    const html = renderMatchGroups(
      groupByPosition([match({ match_id: "x:0", alt: 1 })]),
      null,
    );
    expect(html).toContain("(alt 1)");
  });

  it("says so when the program is final", () => {
    expect(renderMatchGroups([], null)).toContain("final");
  });
});

describe("renderApplyControls", () => {
  it("enables apply for a proven match without a checkbox", () => {
    const html = renderApplyControls(match({}), false, true);
    expect(html).not.toContain("override");
    expect(html).toContain('<button type="button" id="apply">Apply</button>');
  });

  it("disables apply for an undecided match until the box is ticked", () => {
    const m = match({
      certainty: "Unknown-conditions",
      unknown: ["pure(cexpr(e))"],
    });
    const before = renderApplyControls(m, false, true);
    expect(before).toContain('id="override"');
    expect(before).toContain("pure(cexpr(e))");
    expect(before).toContain('id="apply" disabled');
    const after = renderApplyControls(m, true, true);
    expect(after).toContain("checked");
    expect(after).not.toContain("disabled");
  });

  it("disables apply while the match list is stale", () => {
    expect(renderApplyControls(match({}), false, false)).toContain("disabled");
  });
});

describe("renderPreview", () => {
  it("renders the server diff side by side with pragma styling", () => {
    const m = match({
      diff:
        "--- before\n+++ after\n@@ -1,3 +1,3 @@\n #pragma stml pure f\n-x = f(1);\n+x = f(2);\n",
    });
    const html = renderPreview(m);
    expect(html).toContain('<table class="diff">');
    expect(html).toContain('class="src pragma"');
    expect(html).toContain("x = f(1);");
    expect(html).toContain("x = f(2);");
  });

  it("asks for a selection when there is none", () => {
    expect(renderPreview(null)).toContain("Select a match");
  });
});

describe("renderStaleNotice", () => {
  it("offers a refresh without wiping anything", () => {
    const html = renderStaleNotice("the code moved on");
    expect(html).toContain("the code moved on");
    expect(html).toContain('id="refresh-matches"');
    expect(renderStaleNotice(null)).toBe("");
  });
});
