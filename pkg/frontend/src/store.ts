// Session view model and its pure transitions.  One session per tab;
// nothing here is optimistic: state only changes when a server response
// is folded in.

import type {
  ApplyResult,
  Match,
  MatchList,
  SessionState,
  StepRecord,
  Warning,
} from "./api.js";

export interface MatchGroup {
  pos: number;
  matches: Match[];
}

export interface AppState {
  sessionId: string | null;
  state: SessionState | null;
  /** hash of the tree the current match list was computed against */
  matchesHash: string | null;
  groups: MatchGroup[];
  selectedId: string | null;
  overrideChecked: boolean;
  /** non-destructive conflict prompt; everything else stays put */
  staleNotice: string | null;
  warnings: Warning[];
  history: StepRecord[];
  busy: boolean;
}

export function initial(): AppState {
  return {
    sessionId: null,
    state: null,
    matchesHash: null,
    groups: [],
    selectedId: null,
    overrideChecked: false,
    staleNotice: null,
    warnings: [],
    history: [],
    busy: false,
  };
}

/** Keep the server's order: groups appear in first-seen position order
    and matches keep their order inside each group. */
export function groupByPosition(matches: Match[]): MatchGroup[] {
  const byPos = new Map<number, Match[]>();
  for (const m of matches) {
    const bucket = byPos.get(m.pos);
    if (bucket === undefined) {
      byPos.set(m.pos, [m]);
    } else {
      bucket.push(m);
    }
  }
  return [...byPos.entries()].map(([pos, ms]) => ({ pos, matches: ms }));
}

export function needsOverride(match: Match): boolean {
  return match.certainty !== "Proven";
}

/** Apply is available only for a Proven match, or after the user
    explicitly ticked the override box for this selection. */
export function canApply(match: Match | null, overrideChecked: boolean): boolean {
  if (match === null) {
    return false;
  }
  return !needsOverride(match) || overrideChecked;
}

export function selectedMatch(s: AppState): Match | null {
  if (s.selectedId === null) {
    return null;
  }
  for (const group of s.groups) {
    for (const m of group.matches) {
      if (m.match_id === s.selectedId) {
        return m;
      }
    }
  }
  return null;
}

/** The match list is only trustworthy while its hash is the state's. */
export function matchesCurrent(s: AppState): boolean {
  return (
    s.state !== null &&
    s.matchesHash !== null &&
    s.matchesHash === s.state.hash
  );
}

export function withSession(
  s: AppState,
  sessionId: string,
  warnings: Warning[] = [],
): AppState {
  return {
    ...initial(),
    sessionId,
    warnings: [...s.warnings, ...warnings],
  };
}

export function withState(s: AppState, state: SessionState): AppState {
  return {
    ...s,
    state,
    warnings: appendNew(s.warnings, state.warnings ?? []),
  };
}

export function withMatches(s: AppState, list: MatchList): AppState {
  const groups = groupByPosition(list.matches);
  const stillOffered = list.matches.some((m) => m.match_id === s.selectedId);
  return {
    ...s,
    matchesHash: list.hash,
    groups,
    selectedId: stillOffered ? s.selectedId : null,
    overrideChecked: stillOffered ? s.overrideChecked : false,
    staleNotice: null,
  };
}

export function withApply(s: AppState, result: ApplyResult): AppState {
  return {
    ...s,
    state: result.state,
    history: [...s.history, result.record],
    groups: [],
    matchesHash: null, // the new tree needs a fresh /matches round trip
    selectedId: null,
    overrideChecked: false,
    staleNotice: null,
    warnings: appendNew(s.warnings, [
      ...(result.record.warnings ?? []),
      ...(result.state.warnings ?? []),
    ]),
  };
}

export function withHistory(s: AppState, records: StepRecord[]): AppState {
  return { ...s, history: records };
}

export function withStale(s: AppState, message: string): AppState {
  return { ...s, staleNotice: message };
}

export function clearStale(s: AppState): AppState {
  return { ...s, staleNotice: null };
}

export function select(s: AppState, matchId: string | null): AppState {
  if (matchId === s.selectedId) {
    return s;
  }
  // the override confirmation never carries over to another match
  return { ...s, selectedId: matchId, overrideChecked: false };
}

export function setOverride(s: AppState, checked: boolean): AppState {
  return { ...s, overrideChecked: checked };
}

export function setBusy(s: AppState, busy: boolean): AppState {
  return { ...s, busy };
}

function appendNew(have: Warning[], incoming: Warning[]): Warning[] {
  const seen = new Set(have.map((w) => JSON.stringify(w)));
  const fresh = incoming.filter((w) => !seen.has(JSON.stringify(w)));
  return fresh.length === 0 ? have : [...have, ...fresh];
}
