// Pure view state. Every pane renders from the last server payloads; no
// model computation happens on the client. Reducers return new objects,
// so a recorded payload sequence can be replayed to reproduce any view.

import type {
  AttributeSummary,
  CreatedSession,
  GridCell,
  MatchSuggestion,
  SessionSnapshot,
} from "./api.js";
import { hueFor } from "./hues.js";

export interface SessionState {
  id: string | null;
  /** MM listing exactly as the last payload sent it. */
  mm: string;
  grid: GridCell[];
  attributes: AttributeSummary[];
  historyDepth: number;
  grammars: string[];
  matches: MatchSuggestion[];
  /** Selected cells as "Sheet!A1" keys; a set, kept insertion-ordered. */
  selection: string[];
  /** One mutating request in flight at a time; controls disable on this. */
  busy: boolean;
  error: string | null;
  /** Server history frames pushed by each completed user action (LIFO). */
  actionFrames: number[];
  grammarText: string;
  /** Problems with the last grammar the user tried to load. */
  grammarDiagnostics: string[];
}

export function initialState(): SessionState {
  return {
    id: null,
    mm: "",
    grid: [],
    attributes: [],
    historyDepth: 0,
    grammars: [],
    matches: [],
    selection: [],
    busy: false,
    error: null,
    actionFrames: [],
    grammarText: "",
    grammarDiagnostics: [],
  };
}

export function cellKey(cell: { sheet: string; a1: string }): string {
  return `${cell.sheet}!${cell.a1}`;
}

// === reducers =========================================================

export function beginAction(s: SessionState): SessionState {
  if (s.busy) {
    throw new Error("a request is already in flight");
  }
  return { ...s, busy: true, error: null };
}

export function finish(s: SessionState): SessionState {
  return { ...s, busy: false };
}

/** A failed request: surface the message, leave every pane untouched. */
export function fail(s: SessionState, message: string): SessionState {
  return { ...s, busy: false, error: message };
}

export function sessionCreated(
  s: SessionState,
  payload: CreatedSession,
): SessionState {
  return {
    ...initialState(),
    grammarText: s.grammarText,
    id: payload.id,
    mm: payload.mm,
    grid: payload.grid,
  };
}

export function snapshotLoaded(
  s: SessionState,
  snap: SessionSnapshot,
): SessionState {
  return {
    ...s,
    mm: snap.mm,
    attributes: snap.attributes,
    historyDepth: snap.history_depth,
    grammars: snap.grammars,
    matches: snap.pending_matches === 0 ? [] : s.matches,
  };
}

export function matchesLoaded(
  s: SessionState,
  matches: MatchSuggestion[],
): SessionState {
  return { ...s, busy: false, matches };
}

export function grammarStored(s: SessionState, name: string): SessionState {
  const grammars = s.grammars.includes(name)
    ? s.grammars
    : [...s.grammars, name].sort();
  return { ...s, busy: false, grammars, grammarDiagnostics: [] };
}

export function grammarRejected(
  s: SessionState,
  diagnostics: string[],
): SessionState {
  return { ...s, busy: false, grammarDiagnostics: diagnostics };
}

/** A transform (or batch) succeeded: adopt its listing, log its frames. */
export function commandApplied(
  s: SessionState,
  mm: string,
  frames: number,
): SessionState {
  return {
    ...s,
    busy: false,
    mm,
    historyDepth: s.historyDepth + frames,
    actionFrames: frames > 0 ? [...s.actionFrames, frames] : s.actionFrames,
  };
}

/** Accepted suggestions leave; the survivors take fresh positions. */
export function suggestionsAccepted(
  s: SessionState,
  mm: string,
  frames: number,
  accepted: number[],
): SessionState {
  const gone = new Set(accepted);
  const matches = s.matches
    .filter((_, i) => !gone.has(i))
    .map((m, i) => ({ ...m, index: i }));
  return { ...commandApplied(s, mm, frames), matches };
}

/** One undo click unwound `frames` server frames ending at listing `mm`. */
export function undoApplied(
  s: SessionState,
  mm: string,
  frames: number,
): SessionState {
  return {
    ...s,
    busy: false,
    mm,
    historyDepth: Math.max(0, s.historyDepth - frames),
    actionFrames: s.actionFrames.slice(0, -1),
    matches: [],
  };
}

export function toggleSelection(s: SessionState, key: string): SessionState {
  if (!s.grid.some((c) => cellKey(c) === key)) {
    return s;
  }
  const selection = s.selection.includes(key)
    ? s.selection.filter((k) => k !== key)
    : [...s.selection, key];
  return { ...s, selection };
}

export function clearSelection(s: SessionState): SessionState {
  return { ...s, selection: [] };
}

export function suggestionsCleared(s: SessionState): SessionState {
  return { ...s, matches: [] };
}

export function grammarTextEdited(s: SessionState, text: string): SessionState {
  return { ...s, grammarText: text };
}

// === derived view models ==============================================

export function canUndo(s: SessionState): boolean {
  return s.historyDepth > 0 && !s.busy;
}

/**
 * Server frames one undo click should unwind: everything the last user
 * action pushed, or a single frame when the action log is empty (for
 * example after reconnecting to an existing session).
 */
export function undoBatchSize(s: SessionState): number {
  if (s.actionFrames.length > 0) {
    return s.actionFrames[s.actionFrames.length - 1]!;
  }
  return s.historyDepth > 0 ? 1 : 0;
}

export interface CellHighlight {
  matchIndex: number;
  rule: string;
  hue: number;
}

/**
 * Pending-match highlights keyed by cell. Only addresses present in the
 * grid payload are ever highlighted.
 */
export function highlightsByCell(
  s: SessionState,
): Map<string, CellHighlight[]> {
  const known = new Set(s.grid.map(cellKey));
  const out = new Map<string, CellHighlight[]>();
  s.matches.forEach((m, matchIndex) => {
    for (const binding of m.bindings) {
      const entry = {
        matchIndex,
        rule: binding.rule,
        hue: hueFor(binding.rule),
      };
      for (const cell of binding.cells) {
        if (!known.has(cell)) {
          continue;
        }
        const list = out.get(cell) ?? [];
        list.push(entry);
        out.set(cell, list);
      }
    }
  });
  return out;
}

export interface CellView {
  key: string;
  a1: string;
  kind: GridCell["kind"];
  display: string;
  selected: boolean;
  highlights: CellHighlight[];
}

export interface SheetView {
  name: string;
  columns: string[];
  rows: number[];
  /** Sparse: only non-empty cells, keyed "col,row" for the renderer. */
  cells: Map<string, CellView>;
}

function columnLetters(col: number): string {
  let out = "";
  let n = col;
  while (n > 0) {
    const rem = (n - 1) % 26;
    out = String.fromCharCode(65 + rem) + out;
    n = Math.floor((n - 1) / 26);
  }
  return out;
}

/** Grid panes, one per sheet, or null for the empty-workbook state. */
export function gridView(s: SessionState): SheetView[] | null {
  if (s.grid.length === 0) {
    return null;
  }
  const highlights = highlightsByCell(s);
  const selected = new Set(s.selection);
  const sheets = new Map<string, SheetView>();
  for (const cell of s.grid) {
    let sheet = sheets.get(cell.sheet);
    if (!sheet) {
      sheet = { name: cell.sheet, columns: [], rows: [], cells: new Map() };
      sheets.set(cell.sheet, sheet);
    }
    const key = cellKey(cell);
    sheet.cells.set(`${cell.col},${cell.row}`, {
      key,
      a1: cell.a1,
      kind: cell.kind,
      display: cell.display,
      selected: selected.has(key),
      highlights: highlights.get(key) ?? [],
    });
  }
  for (const [name, sheet] of sheets) {
    let maxCol = 0;
    let maxRow = 0;
    for (const cell of s.grid) {
      if (cell.sheet === name) {
        maxCol = Math.max(maxCol, cell.col);
        maxRow = Math.max(maxRow, cell.row);
      }
    }
    for (let c = 1; c <= maxCol; c++) {
      sheet.columns.push(columnLetters(c));
    }
    for (let r = 1; r <= maxRow; r++) {
      sheet.rows.push(r);
    }
  }
  return [...sheets.values()];
}

export interface AttributeView {
  name: string;
  domainText: string;
  cellCount: number;
  equations: string[];
}

export function attributeView(s: SessionState): AttributeView[] {
  return s.attributes.map((a) => ({
    name: a.name,
    domainText:
      a.domain.kind === "range"
        ? `[1..${a.domain.n}]`
        : `{${a.domain.labels.join(",")}}`,
    cellCount: a.cells.length,
    equations: a.equations,
  }));
}

export interface MatchView {
  position: number;
  rule: string;
  anchor: string;
  cellCount: number;
  hue: number;
}

export function matchView(s: SessionState): MatchView[] {
  return s.matches.map((m, position) => ({
    position,
    rule: m.rule,
    anchor: m.anchor,
    cellCount: m.cells.length,
    hue: hueFor(m.rule),
  }));
}
