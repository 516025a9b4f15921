// DOM renderers, one per pane. Each call rebuilds its container from the
// current state, so a render is always a pure function of the last
// server payloads.

import { highlightColor } from "./hues.js";
import {
  type CellView,
  type SessionState,
  attributeView,
  gridView,
  matchView,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function button(
  label: string,
  disabled: boolean,
  onClick: () => void,
): HTMLButtonElement {
  const b = el("button", undefined, label);
  b.type = "button";
  b.disabled = disabled;
  b.addEventListener("click", onClick);
  return b;
}

function renderCell(
  cell: CellView | undefined,
  onToggle: (key: string) => void,
): HTMLTableCellElement {
  const td = el("td", "cell");
  if (cell === undefined) {
    td.classList.add("empty");
    return td;
  }
  td.classList.add(cell.kind);
  td.textContent = cell.display;
  td.dataset.key = cell.key;
  if (cell.selected) {
    td.classList.add("selected");
  }
  const first = cell.highlights[0];
  if (first !== undefined) {
    td.style.background = highlightColor(first.rule);
    td.title = [...new Set(cell.highlights.map((h) => h.rule))].join(", ");
  }
  td.addEventListener("click", () => onToggle(cell.key));
  return td;
}

export function renderGrid(
  container: HTMLElement,
  state: SessionState,
  onToggle: (key: string) => void,
): void {
  container.replaceChildren();
  const sheets = gridView(state);
  if (sheets === null) {
    container.append(el("p", "placeholder", "No sheet loaded yet."));
    return;
  }
  for (const sheet of sheets) {
    const section = el("section", "sheet");
    section.append(el("h3", undefined, sheet.name));
    const table = el("table", "grid");
    const headRow = el("tr");
    headRow.append(el("th"));
    for (const letter of sheet.columns) {
      headRow.append(el("th", undefined, letter));
    }
    const head = el("thead");
    head.append(headRow);
    table.append(head);
    const body = el("tbody");
    for (const row of sheet.rows) {
      const tr = el("tr");
      tr.append(el("th", undefined, String(row)));
      sheet.columns.forEach((_, i) => {
        tr.append(renderCell(sheet.cells.get(`${i + 1},${row}`), onToggle));
      });
      body.append(tr);
    }
    table.append(body);
    section.append(table);
    container.append(section);
  }
}

/** The listing pane shows the last payload's text exactly as sent. */
export function renderListing(pre: HTMLElement, state: SessionState): void {
  pre.textContent = state.mm;
}

export function renderError(container: HTMLElement, state: SessionState): void {
  container.textContent = state.error ?? "";
  container.hidden = state.error === null;
}

export interface MatchHandlers {
  accept(index: number): void;
  acceptAll(): void;
  clear(): void;
}

export function renderMatches(
  container: HTMLElement,
  state: SessionState,
  handlers: MatchHandlers,
): void {
  container.replaceChildren();
  const views = matchView(state);
  if (views.length === 0) {
    container.append(el("p", "placeholder", "No pending matches."));
    return;
  }
  const bar = el("div", "actions");
  bar.append(
    button("Accept all", state.busy, handlers.acceptAll),
    button("Clear", state.busy, handlers.clear),
  );
  container.append(bar);
  const list = el("ul", "matches");
  for (const m of views) {
    const li = el("li", "match");
    const chip = el("span", "chip", " ");
    chip.style.background = highlightColor(m.rule, 0.8);
    li.append(
      chip,
      el("span", "rule", m.rule),
      el("span", "anchor", ` at ${m.anchor} `),
      el("span", "count", `(${m.cellCount} cells) `),
      button("Accept", state.busy, () => handlers.accept(m.position)),
    );
    list.append(li);
  }
  container.append(list);
}

export interface AttributeHandlers {
  rename(name: string): void;
  nameFromLabel(name: string): void;
  generalize(name: string): void;
  ungroup(name: string): void;
}

export function renderAttributes(
  container: HTMLElement,
  state: SessionState,
  handlers: AttributeHandlers,
): void {
  container.replaceChildren();
  const views = attributeView(state);
  if (views.length === 0) {
    container.append(el("p", "placeholder", "No attributes yet."));
    return;
  }
  const list = el("ul", "attributes");
  for (const a of views) {
    const li = el("li", "attribute");
    const header = el("div", "attribute-header");
    header.append(
      el("strong", "name", a.name),
      el("span", "domain", ` ${a.domainText} `),
      el("span", "count", `${a.cellCount} cells`),
    );
    li.append(header);
    for (const eq of a.equations) {
      li.append(el("code", "equation", eq));
    }
    const bar = el("div", "actions");
    bar.append(
      button("Rename", state.busy, () => handlers.rename(a.name)),
      button("Name from label", state.busy, () => handlers.nameFromLabel(a.name)),
      button("Generalize", state.busy, () => handlers.generalize(a.name)),
      button("Ungroup", state.busy, () => handlers.ungroup(a.name)),
    );
    li.append(bar);
    list.append(li);
  }
  container.append(list);
}

export function renderGrammars(
  container: HTMLElement,
  state: SessionState,
): void {
  container.replaceChildren();
  if (state.grammars.length === 0) {
    container.append(el("p", "placeholder", "No grammars loaded."));
    return;
  }
  const list = el("ul", "grammars");
  for (const name of state.grammars) {
    list.append(el("li", "grammar", name));
  }
  container.append(list);
}

export function renderDiagnostics(
  container: HTMLElement,
  state: SessionState,
): void {
  container.replaceChildren();
  for (const d of state.grammarDiagnostics) {
    container.append(el("li", "diagnostic", d));
  }
  container.hidden = state.grammarDiagnostics.length === 0;
}
