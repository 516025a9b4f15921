// Browser entry point: wires the fixed page elements to the controller
// and re-renders every pane whenever the state changes.

import { SessionApi } from "./api.js";
import { SessionController } from "./controller.js";
import {
  renderAttributes,
  renderDiagnostics,
  renderError,
  renderGrammars,
  renderGrid,
  renderListing,
  renderMatches,
} from "./gridview.js";
import { type SessionState, canUndo } from "./state.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setStatus(text: string): void {
  byId("status").textContent = text;
}

const controller = new SessionController(new SessionApi(""), render);

const matchHandlers = {
  accept: (index: number) => {
    void controller.accept([index]);
  },
  acceptAll: () => {
    void controller.acceptAll();
  },
  clear: () => {
    controller.rejectAll();
  },
};

const attributeHandlers = {
  rename: (name: string) => {
    const next = window.prompt(`New name for ${name}:`, name);
    if (next !== null && next !== "" && next !== name) {
      void controller.rename(name, next);
    }
  },
  nameFromLabel: (name: string) => {
    void controller.nameFromLabel(name);
  },
  generalize: (name: string) => {
    void controller.generalize(name).then((equation) => {
      if (controller.current.error !== null) {
        return;
      }
      setStatus(
        equation === null
          ? `No single equation covers ${name}; its per-index equations stay.`
          : `Generalized: ${equation}`,
      );
    });
  },
  ungroup: (name: string) => {
    void controller.ungroup(name);
  },
};

const sessionButtons = [
  "group-button",
  "clear-selection",
  "load-grammar",
  "match-button",
  "export-button",
];

function render(state: SessionState): void {
  renderError(byId("error"), state);
  renderGrid(byId("grid"), state, (key) => controller.toggleCell(key));
  renderListing(byId("mm"), state);
  renderMatches(byId("matches"), state, matchHandlers);
  renderAttributes(byId("attributes"), state, attributeHandlers);
  renderGrammars(byId("grammar-list"), state);
  renderDiagnostics(byId("diagnostics"), state);
  byId<HTMLButtonElement>("undo-button").disabled = !canUndo(state);
  byId("history-depth").textContent = String(state.historyDepth);
  byId("selection-count").textContent = String(state.selection.length);
  const noSession = state.id === null;
  for (const id of sessionButtons) {
    byId<HTMLButtonElement>(id).disabled = state.busy || noSession;
  }
  for (const id of ["create-facts", "create-csv"]) {
    byId<HTMLButtonElement>(id).disabled = state.busy;
  }
}

function wire(): void {
  const sourceText = byId<HTMLTextAreaElement>("source-text");
  byId("create-facts").addEventListener("click", () => {
    void controller.create({ facts: sourceText.value });
  });
  byId("create-csv").addEventListener("click", () => {
    const sheet = byId<HTMLInputElement>("sheet-name").value.trim();
    void controller.create(
      sheet === ""
        ? { csv: sourceText.value }
        : { csv: sourceText.value, sheet },
    );
  });

  byId("group-button").addEventListener("click", () => {
    const name = byId<HTMLInputElement>("group-name").value.trim();
    if (name === "") {
      setStatus("Give the new attribute a name first.");
      return;
    }
    const labelText = byId<HTMLInputElement>("group-labels").value.trim();
    const labels =
      labelText === ""
        ? undefined
        : labelText
            .split(",")
            .map((t) => t.trim())
            .filter((t) => t !== "");
    void controller.groupSelection(name, labels);
  });
  byId("clear-selection").addEventListener("click", () => {
    controller.clearCells();
  });

  const grammarText = byId<HTMLTextAreaElement>("grammar-text");
  grammarText.addEventListener("change", () => {
    controller.editGrammarText(grammarText.value);
  });
  byId("load-grammar").addEventListener("click", () => {
    const name = byId<HTMLInputElement>("grammar-name").value.trim();
    if (name === "") {
      setStatus("Give the grammar a name first.");
      return;
    }
    void controller.loadGrammar(name, grammarText.value);
  });

  byId("match-button").addEventListener("click", () => {
    const grammar = byId<HTMLInputElement>("match-grammar").value.trim();
    const rule = byId<HTMLInputElement>("match-rule").value.trim();
    if (grammar === "" || rule === "") {
      setStatus("Matching needs a grammar name and a rule name.");
      return;
    }
    void controller.matchRule(grammar, rule).then((n) => {
      if (controller.current.error === null) {
        setStatus(`${n} match${n === 1 ? "" : "es"}.`);
      }
    });
  });

  byId("undo-button").addEventListener("click", () => {
    void controller.undoClick();
  });

  byId("export-button").addEventListener("click", () => {
    const format = byId<HTMLSelectElement>("export-format").value as
      | "mm"
      | "facts"
      | "json";
    void controller.exportAs(format).then((content) => {
      if (content !== null) {
        byId("export-output").textContent = content;
      }
    });
  });

  render(controller.current);
}

wire();
