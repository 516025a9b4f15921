// Typed client for the sheetstruct session service. Field names mirror
// the JSON contract; nothing here interprets model state beyond parsing.

export type CellKind = "num" | "str" | "formula" | "label";

export interface GridCell {
  sheet: string;
  col: number;
  row: number;
  a1: string;
  kind: CellKind;
  display: string;
}

export interface CreatedSession {
  id: string;
  mm: string;
  grid: GridCell[];
}

export type Domain =
  | { kind: "range"; n: number }
  | { kind: "enum"; labels: string[] };

export interface AbsorbedLabel {
  cell: string;
  text: string;
}

export interface AttributeSummary {
  name: string;
  domain: Domain;
  cells: string[];
  equations: string[];
  absorbed_labels: AbsorbedLabel[];
}

export interface SessionSnapshot {
  mm: string;
  attributes: AttributeSummary[];
  history_depth: number;
  grammars: string[];
  pending_matches: number;
}

export interface MatchBinding {
  rule: string;
  cells: string[];
}

export interface MatchSuggestion {
  index: number;
  rule: string;
  anchor: string;
  bindings: MatchBinding[];
  cells: string[];
}

export interface GrammarResult {
  diagnostics: string[];
}

export interface CommandResult {
  mm: string;
  applied?: number;
  equation?: string | null;
  undone?: string;
  diagnostics?: string[];
}

export interface ExportResult {
  format: string;
  content: string;
}

export type ExportFormat = "mm" | "facts" | "json";

export type SessionSource =
  | { facts: string }
  | { csv: string; sheet?: string };

/** An HTTP error from the service, carrying its status and message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The calls the UI makes; a test double implements this. */
export interface SessionTransport {
  createSession(source: SessionSource): Promise<CreatedSession>;
  getSession(id: string): Promise<SessionSnapshot>;
  getGrid(id: string): Promise<{ cells: GridCell[] }>;
  loadGrammar(id: string, name: string, text: string): Promise<GrammarResult>;
  match(id: string, grammar: string, rule: string): Promise<{ matches: MatchSuggestion[] }>;
  command(id: string, payload: Record<string, unknown>): Promise<CommandResult>;
  undo(id: string): Promise<CommandResult>;
  exportAs(id: string, format: ExportFormat): Promise<ExportResult>;
}

export class SessionApi implements SessionTransport {
  constructor(private readonly base: string = "") {}

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await fetch(this.base + path, init);
    const text = await response.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!response.ok) {
      const message =
        parsed && typeof parsed === "object" && "error" in parsed
          ? String((parsed as { error: unknown }).error)
          : `${response.status} ${response.statusText}`;
      throw new ApiError(response.status, message);
    }
    return parsed as T;
  }

  createSession(source: SessionSource): Promise<CreatedSession> {
    return this.request("POST", "/sessions", source);
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${id}`);
  }

  getGrid(id: string): Promise<{ cells: GridCell[] }> {
    return this.request("GET", `/sessions/${id}/grid`);
  }

  loadGrammar(id: string, name: string, text: string): Promise<GrammarResult> {
    return this.request("POST", `/sessions/${id}/grammars`, { name, text });
  }

  match(
    id: string,
    grammar: string,
    rule: string,
  ): Promise<{ matches: MatchSuggestion[] }> {
    return this.request("POST", `/sessions/${id}/match`, { grammar, rule });
  }

  command(id: string, payload: Record<string, unknown>): Promise<CommandResult> {
    return this.request("POST", `/sessions/${id}/commands`, payload);
  }

  undo(id: string): Promise<CommandResult> {
    return this.request("POST", `/sessions/${id}/undo`);
  }

  exportAs(id: string, format: ExportFormat): Promise<ExportResult> {
    return this.request("GET", `/sessions/${id}/export?format=${format}`);
  }
}
