// Orchestrates the session: every user action is one transport call (or
// one batch) followed by a state update, with at most one mutating
// request in flight. No DOM here — the browser shell and the tests both
// drive this class.

import {
  ApiError,
  type CommandResult,
  type ExportFormat,
  type SessionSource,
  type SessionTransport,
} from "./api.js";
import {
  type SessionState,
  beginAction,
  clearSelection,
  commandApplied,
  fail,
  finish,
  grammarRejected,
  grammarStored,
  grammarTextEdited,
  initialState,
  matchesLoaded,
  sessionCreated,
  snapshotLoaded,
  suggestionsAccepted,
  suggestionsCleared,
  toggleSelection,
  undoApplied,
  undoBatchSize,
} from "./state.js";

function messageOf(e: unknown): string {
  return e instanceof Error ? e.message : String(e);
}

export class SessionController {
  private state: SessionState = initialState();

  constructor(
    private readonly api: SessionTransport,
    private readonly onChange: (s: SessionState) => void = () => {},
  ) {}

  get current(): SessionState {
    return this.state;
  }

  private update(next: SessionState): void {
    this.state = next;
    this.onChange(next);
  }

  private requireId(): string {
    if (this.state.id === null) {
      throw new Error("no session loaded");
    }
    return this.state.id;
  }

  /** Run one request under the busy gate; on failure only set the banner. */
  private async act<T>(
    request: () => Promise<T>,
    apply: (s: SessionState, result: T) => SessionState,
  ): Promise<T | null> {
    this.update(beginAction(this.state));
    try {
      const result = await request();
      this.update(apply(this.state, result));
      return result;
    } catch (e) {
      this.update(fail(this.state, messageOf(e)));
      return null;
    }
  }

  /** Re-read the session snapshot; panes re-render from it verbatim. */
  async refresh(): Promise<void> {
    const id = this.requireId();
    try {
      this.update(snapshotLoaded(this.state, await this.api.getSession(id)));
    } catch (e) {
      this.update(fail(this.state, messageOf(e)));
    }
  }

  async create(source: SessionSource): Promise<boolean> {
    const created = await this.act(
      () => this.api.createSession(source),
      (s, payload) => sessionCreated(s, payload),
    );
    if (created !== null) {
      await this.refresh();
    }
    return created !== null;
  }

  async loadGrammar(name: string, text: string): Promise<void> {
    const id = this.requireId();
    this.update(beginAction(this.state));
    try {
      const result = await this.api.loadGrammar(id, name, text);
      if (result.diagnostics.length > 0) {
        this.update(grammarRejected(this.state, result.diagnostics));
      } else {
        this.update(grammarStored(this.state, name));
      }
    } catch (e) {
      // parse errors belong next to the editor, not in the banner
      if (e instanceof ApiError && e.status === 422) {
        this.update(grammarRejected(this.state, [e.message]));
      } else {
        this.update(fail(this.state, messageOf(e)));
      }
    }
  }

  async matchRule(grammar: string, rule: string): Promise<number> {
    const result = await this.act(
      () => this.api.match(this.requireId(), grammar, rule),
      (s, r) => matchesLoaded(s, r.matches),
    );
    return result === null ? 0 : result.matches.length;
  }

  async accept(indices: number[]): Promise<void> {
    const result = await this.act(
      () =>
        this.api.command(this.requireId(), { type: "accept", indices }),
      (s, r) => suggestionsAccepted(s, r.mm, r.applied ?? 0, indices),
    );
    if (result !== null) {
      await this.refresh();
    }
  }

  acceptAll(): Promise<void> {
    return this.accept(this.state.matches.map((_, i) => i));
  }

  /** Drop the suggestions without touching the model. */
  rejectAll(): void {
    this.update(suggestionsCleared(this.state));
  }

  private async transform(payload: Record<string, unknown>): Promise<void> {
    const result = await this.act(
      () => this.api.command(this.requireId(), payload),
      (s, r) => commandApplied(s, r.mm, 1),
    );
    if (result !== null) {
      await this.refresh();
    }
  }

  /** Group the current selection into a new attribute. */
  async groupSelection(name: string, indexLabels?: string[]): Promise<void> {
    const cells = this.state.selection.map((key) => {
      const bang = key.indexOf("!");
      const sheet = key.slice(0, bang);
      const a1 = key.slice(bang + 1);
      return /^[A-Za-z_][A-Za-z0-9_]*$/.test(sheet)
        ? key
        : `'${sheet}'!${a1}`;
    });
    const payload: Record<string, unknown> = { type: "group", name, cells };
    if (indexLabels !== undefined) {
      payload.index_labels = indexLabels;
    }
    await this.transform(payload);
    if (this.state.error === null) {
      this.update(clearSelection(this.state));
    }
  }

  rename(oldName: string, newName: string): Promise<void> {
    return this.transform({ type: "rename", old: oldName, new: newName });
  }

  ungroup(name: string): Promise<void> {
    return this.transform({ type: "ungroup", name });
  }

  nameFromLabel(name: string): Promise<void> {
    return this.transform({ type: "name_from_label", name });
  }

  /** Ask whether one template equation covers the attribute. */
  async generalize(attr: string): Promise<string | null> {
    const result = await this.act(
      () => this.api.command(this.requireId(), { type: "generalize", attr }),
      (s, r) => commandApplied(s, r.mm, 1),
    );
    if (result === null) {
      return null;
    }
    await this.refresh();
    return result.equation ?? null;
  }

  /**
   * One undo click rewinds everything the last user action did (several
   * server frames for a batched accept). At depth 0 no request is sent.
   */
  async undoClick(): Promise<void> {
    const frames = undoBatchSize(this.state);
    if (frames === 0) {
      return;
    }
    this.update(beginAction(this.state));
    try {
      let last: CommandResult | null = null;
      for (let i = 0; i < frames; i++) {
        try {
          last = await this.api.undo(this.requireId());
        } catch (e) {
          if (e instanceof ApiError && e.status === 409) {
            break; // already at the bottom of the history
          }
          throw e;
        }
      }
      this.update(
        last === null
          ? finish(this.state)
          : undoApplied(this.state, last.mm, frames),
      );
    } catch (e) {
      this.update(fail(this.state, messageOf(e)));
      return;
    }
    await this.refresh();
  }

  async exportAs(format: ExportFormat): Promise<string | null> {
    const result = await this.act(
      () => this.api.exportAs(this.requireId(), format),
      (s) => finish(s),
    );
    return result === null ? null : result.content;
  }

  toggleCell(key: string): void {
    this.update(toggleSelection(this.state, key));
  }

  clearCells(): void {
    this.update(clearSelection(this.state));
  }

  editGrammarText(text: string): void {
    this.update(grammarTextEdited(this.state, text));
  }
}
