// Side-by-side presentation of the unified diffs the service sends in
// match previews and step records.  The text in every row is the
// server's line minus its one-character marker; no line is ever
// recomputed on the client.

export type RowKind = "same" | "removed" | "added" | "changed" | "hunk";

export interface DiffRow {
  kind: RowKind;
  left: string | null;
  right: string | null;
}

export function isPragmaLine(line: string): boolean {
  return line.trimStart().startsWith("#pragma");
}

/**
 * A run of removals pairs up with the run of additions that follows it,
 * which is how a rewrite actually moved the text; leftovers on either
 * side become one-sided rows.
 */
export function sideBySide(unified: string): DiffRow[] {
  const rows: DiffRow[] = [];
  let removed: string[] = [];
  let added: string[] = [];

  const flush = (): void => {
    const n = Math.max(removed.length, added.length);
    for (let i = 0; i < n; i += 1) {
      const left = i < removed.length ? removed[i] : null;
      const right = i < added.length ? added[i] : null;
      const kind: RowKind =
        left !== null && right !== null
          ? "changed"
          : left !== null
            ? "removed"
            : "added";
      rows.push({ kind, left, right });
    }
    removed = [];
    added = [];
  };

  for (const line of unified.split("\n")) {
    if (line.startsWith("---") || line.startsWith("+++") || line === "") {
      continue;
    }
    if (line.startsWith("@@")) {
      flush();
      rows.push({ kind: "hunk", left: line, right: line });
      continue;
    }
    if (line.startsWith("-")) {
      removed.push(line.slice(1));
      continue;
    }
    if (line.startsWith("+")) {
      added.push(line.slice(1));
      continue;
    }
    // context: present on both sides, byte for byte
    flush();
    const text = line.startsWith(" ") ? line.slice(1) : line;
    rows.push({ kind: "same", left: text, right: text });
  }
  flush();
  return rows;
}

function collect(unified: string, keep: "-" | "+"): string {
  const drop = keep === "-" ? "+" : "-";
  const lines: string[] = [];
  for (const line of unified.split("\n")) {
    if (line.startsWith("---") || line.startsWith("+++") || line === "") {
      continue;
    }
    if (line.startsWith("@@") || line.startsWith(drop)) {
      continue;
    }
    lines.push(line.startsWith(keep) || line.startsWith(" ")
      ? line.slice(1)
      : line);
  }
  return lines.length === 0 ? "" : lines.join("\n") + "\n";
}

/** The pre-image of the diffed region, reconstructed from markers only. */
export function beforeText(unified: string): string {
  return collect(unified, "-");
}

/** The post-image of the diffed region, reconstructed from markers only. */
export function afterText(unified: string): string {
  return collect(unified, "+");
}
