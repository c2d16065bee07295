// Browser entry point: wires the typed client, the pure store, and the
// renderers to the static page.  Every handler waits for the server
// before the view changes (no optimistic updates).

import {
  ApiError,
  Client,
  isRefusedApplication,
  isStaleConflict,
} from "./api.js";
import * as store from "./store.js";
import {
  renderApplyControls,
  renderCode,
  renderHistory,
  renderMatchGroups,
  renderPreview,
  renderStaleNotice,
  renderWarnings,
} from "./view.js";

class App {
  private s = store.initial();
  private client: Client | null = null;

  constructor(private readonly doc: Document) {
    this.el("open").addEventListener("click", () => {
      void this.open();
    });
    this.el("undo").addEventListener("click", () => {
      void this.guard(() => this.undo());
    });
    this.el("export").addEventListener("click", () => {
      void this.guard(() => this.exportCode());
    });
    // one delegated listener covers match buttons, apply, override,
    // and the stale-refresh prompt, whatever the current innerHTML is
    this.doc.addEventListener("click", (event) => {
      const target = event.target as HTMLElement | null;
      const button = target?.closest<HTMLElement>("button[data-match-id]");
      if (button?.dataset.matchId !== undefined) {
        this.update(store.select(this.s, button.dataset.matchId));
        return;
      }
      if (target?.id === "apply") {
        void this.guard(() => this.apply());
      } else if (target?.id === "refresh-matches") {
        void this.guard(() => this.refreshMatches());
      }
    });
    this.doc.addEventListener("change", (event) => {
      const target = event.target as HTMLInputElement | null;
      if (target?.id === "override") {
        this.update(store.setOverride(this.s, target.checked));
      }
    });
  }

  private el(id: string): HTMLElement {
    const node = this.doc.getElementById(id);
    if (node === null) {
      throw new Error(`missing element #${id}`);
    }
    return node;
  }

  private input(id: string): HTMLInputElement | HTMLTextAreaElement {
    return this.el(id) as HTMLInputElement | HTMLTextAreaElement;
  }

  private update(next: store.AppState): void {
    this.s = next;
    this.render();
  }

  private async guard(action: () => Promise<void>): Promise<void> {
    if (this.s.busy || this.client === null || this.s.sessionId === null) {
      return;
    }
    this.update(store.setBusy(this.s, true));
    try {
      await action();
    } catch (err) {
      if (isStaleConflict(err)) {
        this.update(
          store.withStale(
            this.s,
            "The code moved on while this match was selected. " +
              "Refresh the match list and pick again; nothing was applied.",
          ),
        );
      } else {
        this.setStatus(err instanceof Error ? err.message : String(err));
      }
    } finally {
      this.update(store.setBusy(this.s, false));
    }
  }

  private async open(): Promise<void> {
    const base = this.input("service-url").value.replace(/\/+$/, "");
    const code = this.input("source").value;
    this.client = new Client(base);
    try {
      const created = await this.client.createSession(code);
      this.update(
        store.withSession(this.s, created.session_id, created.warnings ?? []),
      );
      await this.refreshAll();
      this.setStatus(`session ${created.session_id}`);
    } catch (err) {
      this.setStatus(
        err instanceof ApiError
          ? `${err.kind}: ${err.message}`
          : `cannot reach ${base}`,
      );
    }
  }

  private async refreshAll(): Promise<void> {
    if (this.client === null || this.s.sessionId === null) {
      return;
    }
    const state = await this.client.state(this.s.sessionId);
    this.update(store.withState(this.s, state));
    await this.refreshMatches();
    const history = await this.client.history(this.s.sessionId);
    this.update(store.withHistory(this.s, history.records));
  }

  private async refreshMatches(): Promise<void> {
    if (this.client === null || this.s.sessionId === null) {
      return;
    }
    const listing = await this.client.matches(this.s.sessionId);
    this.update(store.withMatches(this.s, listing));
  }

  private async apply(): Promise<void> {
    const match = store.selectedMatch(this.s);
    if (
      this.client === null ||
      this.s.sessionId === null ||
      match === null ||
      !store.matchesCurrent(this.s) ||
      !store.canApply(match, this.s.overrideChecked)
    ) {
      return;
    }
    try {
      const result = await this.client.apply(
        this.s.sessionId,
        match.match_id,
        this.s.overrideChecked,
      );
      this.update(store.withApply(this.s, result));
      await this.refreshMatches();
      this.setStatus(`applied ${result.record.rule}`);
    } catch (err) {
      if (isRefusedApplication(err)) {
        this.setStatus(err.message);
        return;
      }
      throw err;
    }
  }

  private async undo(): Promise<void> {
    if (this.client === null || this.s.sessionId === null) {
      return;
    }
    const state = await this.client.undo(this.s.sessionId);
    this.update(store.withState(this.s, state));
    const history = await this.client.history(this.s.sessionId);
    this.update(store.withHistory(this.s, history.records));
    await this.refreshMatches();
    this.setStatus("undid one step");
  }

  private async exportCode(): Promise<void> {
    if (this.client === null || this.s.sessionId === null) {
      return;
    }
    const out = await this.client.exportCode(this.s.sessionId);
    const blob = new Blob([out.code], { type: "text/x-c" });
    const link = this.doc.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "transformed.c";
    link.click();
    URL.revokeObjectURL(link.href);
    this.setStatus("exported transformed.c");
  }

  private setStatus(text: string): void {
    this.el("status").textContent = text;
  }

  private render(): void {
    const s = this.s;
    this.el("stale").innerHTML = renderStaleNotice(s.staleNotice);
    this.el("current").innerHTML =
      s.state === null ? "" : renderCode(s.state.code);
    this.el("matches").innerHTML = renderMatchGroups(s.groups, s.selectedId);
    this.el("preview").innerHTML = renderPreview(store.selectedMatch(s));
    this.el("controls").innerHTML = renderApplyControls(
      store.selectedMatch(s),
      s.overrideChecked,
      store.matchesCurrent(s),
    );
    this.el("history").innerHTML = renderHistory(s.history);
    this.el("warnings").innerHTML = renderWarnings(s.warnings);
    this.el("session-meta").textContent =
      s.state === null
        ? ""
        : `${s.state.status} · ${s.state.hash.slice(0, 12)}`;
  }
}

new App(document);
