// HTML renderers for the session view.  Pure string -> string so they
// run under node in tests; main.ts assigns the results to innerHTML.
// Code text always comes verbatim from a server response.

import type { Match, StepRecord, Warning } from "./api.js";
import { isPragmaLine, sideBySide } from "./diff.js";
import { canApply, needsOverride } from "./store.js";
import type { MatchGroup } from "./store.js";

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

/** One <pre> whose text content is byte-equal to `code`; pragma lines
    get a span of their own so the stylesheet can set them apart. */
export function renderCode(code: string): string {
  const lines = code.split("\n").map((line) =>
    isPragmaLine(line)
      ? `<span class="pragma">${escapeHtml(line)}</span>`
      : escapeHtml(line),
  );
  return `<pre class="code">${lines.join("\n")}</pre>`;
}

export function renderBadge(match: Match): string {
  return needsOverride(match)
    ? `<span class="badge unknown">Unknown-conditions</span>`
    : `<span class="badge proven">Proven</span>`;
}

export function renderMatchGroups(
  groups: MatchGroup[],
  selectedId: string | null,
): string {
  if (groups.length === 0) {
    return `<p class="empty">No applicable rules. The program is final; export away.</p>`;
  }
  const sections = groups.map((group) => {
    const items = group.matches.map((m) => {
      const selected = m.match_id === selectedId ? " selected" : "";
      const ordinal = m.alt > 0 ? ` <small>(alt ${m.alt})</small>` : "";
      return (
        `<li><button type="button" class="match${selected}"` +
        ` data-match-id="${escapeHtml(m.match_id)}">` +
        `${escapeHtml(m.rule)}${ordinal} ${renderBadge(m)}</button></li>`
      );
    });
    return (
      `<section class="pos-group"><h3>position ${group.pos}</h3>` +
      `<ul>${items.join("")}</ul></section>`
    );
  });
  return sections.join("");
}

export function renderPreview(match: Match | null): string {
  if (match === null) {
    return `<p class="empty">Select a match to preview its rewrite.</p>`;
  }
  if (match.diff === undefined || match.diff === "") {
    return `<p class="empty">The server sent no preview for this match.</p>`;
  }
  const rows = sideBySide(match.diff)
    .map((row) => {
      if (row.kind === "hunk") {
        return `<tr class="hunk"><td colspan="2">${escapeHtml(row.left ?? "")}</td></tr>`;
      }
      const cell = (text: string | null): string => {
        if (text === null) {
          return `<td class="void"></td>`;
        }
        const pragma = isPragmaLine(text) ? " pragma" : "";
        return `<td class="src${pragma}">${escapeHtml(text)}</td>`;
      };
      return `<tr class="${row.kind}">${cell(row.left)}${cell(row.right)}</tr>`;
    })
    .join("");
  return `<table class="diff"><tbody>${rows}</tbody></table>`;
}

export function renderApplyControls(
  match: Match | null,
  overrideChecked: boolean,
  current: boolean,
): string {
  const gate =
    match !== null && needsOverride(match)
      ? `<label class="override"><input type="checkbox" id="override"` +
        `${overrideChecked ? " checked" : ""}/>` +
        ` apply although ${formatUnknowns(match)} could not be proven</label>`
      : "";
  const enabled = current && canApply(match, overrideChecked);
  return (
    gate +
    `<button type="button" id="apply"${enabled ? "" : " disabled"}>Apply</button>`
  );
}

function formatUnknowns(match: Match): string {
  return match.unknown.length === 0
    ? "its conditions"
    : match.unknown.map(escapeHtml).join(", ");
}

export function renderHistory(records: StepRecord[]): string {
  if (records.length === 0) {
    return `<p class="empty">Nothing applied yet.</p>`;
  }
  const items = records.map(
    (r) =>
      `<li><code>${escapeHtml(r.rule)}</code> at position ${r.pos}` +
      ` <small>${escapeHtml(r.after_hash.slice(0, 12))}</small></li>`,
  );
  return `<ol class="history">${items.join("")}</ol>`;
}

export function renderWarnings(warnings: Warning[]): string {
  if (warnings.length === 0) {
    return "";
  }
  const items = warnings.map(
    (w) => `<li>${escapeHtml(describeWarning(w))}</li>`,
  );
  return `<ul class="warnings">${items.join("")}</ul>`;
}

function describeWarning(w: Warning): string {
  if (typeof w.warning === "string") {
    const rest = Object.entries(w)
      .filter(([key]) => key !== "warning")
      .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
      .join(" ");
    return rest === "" ? w.warning : `${w.warning}: ${rest}`;
  }
  return JSON.stringify(w);
}

export function renderStaleNotice(notice: string | null): string {
  if (notice === null) {
    return "";
  }
  return (
    `<div class="stale" role="alert">${escapeHtml(notice)}` +
    ` <button type="button" id="refresh-matches">Refresh matches</button></div>`
  );
}
