/**
 * DOM wiring for the three views. Everything rendered is produced by the
 * view-model modules from raw API payloads.
 */

import { ApiClient, ApiError, VALIDATE_DEBOUNCE_MS, debounceLatest } from "./api";
import { diffRows, isNoDifference } from "./compare";
import { EMPTY_FILTER, ExplorerFilter, filterProcessings } from "./explorer";
import { FORM_FIELDS, diagnosticRows, fieldTooltip, mandatoryFieldIds, saveEnabled } from "./wizard";
import type { RulesPayload, ValidatePayload } from "./types";

const DRAFT_KEY = "ppm-studio-draft";

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

function banner(message: string): void {
  const node = document.getElementById("banner");
  if (node !== null) {
    node.textContent = message;
    node.classList.toggle("hidden", message === "");
  }
}

function renderDiagnostics(payload: ValidatePayload): void {
  const list = document.getElementById("diagnostics");
  const save = document.getElementById("save") as HTMLButtonElement | null;
  if (list === null) {
    return;
  }
  list.replaceChildren();
  for (const row of diagnosticRows(payload)) {
    const item = el("li", `diag diag-${row.severity}`);
    item.append(
      el("span", "diag-rule", row.rule),
      el("span", "diag-message", ` ${row.message} `),
      el("span", "diag-path", `(${row.path})`),
    );
    if (row.fieldId !== null) {
      item.dataset.field = row.fieldId;
      document
        .querySelector(`[data-field-card="${row.fieldId}"]`)
        ?.classList.add("has-diagnostic");
    }
    list.append(item);
  }
  if (save !== null) {
    save.disabled = !saveEnabled(payload);
  }
}

function setUpWizard(api: ApiClient, rules: RulesPayload): void {
  const fields = document.getElementById("fields");
  if (fields !== null) {
    const mandatory = new Set(mandatoryFieldIds());
    for (const field of FORM_FIELDS) {
      const card = el("div", "field-card");
      card.dataset.fieldCard = field.id;
      card.title = fieldTooltip(field, rules);
      const label = el("label", "field-label", field.label);
      if (mandatory.has(field.id)) {
        label.append(el("span", "mandatory", " *"));
      }
      card.append(label);
      fields.append(card);
    }
  }

  const editor = document.getElementById("editor") as HTMLTextAreaElement | null;
  if (editor === null) {
    return;
  }
  editor.value = localStorage.getItem(DRAFT_KEY) ?? "";
  const validate = debounceLatest(
    (text: string) => api.validate(text),
    VALIDATE_DEBOUNCE_MS,
    (payload) => {
      banner("");
      renderDiagnostics(payload);
    },
    (error) => {
      // draft stays in local storage; validation resumes on next edit
      banner(
        error instanceof ApiError
          ? `Service error ${error.status}`
          : "Service unreachable, draft kept locally",
      );
    },
  );
  editor.addEventListener("input", () => {
    localStorage.setItem(DRAFT_KEY, editor.value);
    document
      .querySelectorAll(".has-diagnostic")
      .forEach((node) => node.classList.remove("has-diagnostic"));
    validate(editor.value);
  });
}

async function renderExplorer(api: ApiClient, key: string, filter: ExplorerFilter): Promise<void> {
  const list = document.getElementById("processings");
  if (list === null) {
    return;
  }
  try {
    const payload = await api.getPolicy(key);
    list.replaceChildren();
    for (const record of filterProcessings(payload.policy, filter)) {
      const card = el("div", "processing-card");
      card.append(
        el("h3", undefined, `${record.kind}: ${record.id}`),
        el("p", undefined, record.scenario),
        el("p", "actor", `actor: ${record.actor}`),
      );
      for (const purpose of record.purposes) {
        card.append(el("p", "purpose", purpose.description));
      }
      list.append(card);
    }
  } catch (error) {
    list.replaceChildren(
      el(
        "p",
        "not-found",
        error instanceof ApiError && error.status === 404
          ? `No stored policy ${key}`
          : "Service unreachable",
      ),
    );
  }
}

async function renderCompare(api: ApiClient, a: string, b: string): Promise<void> {
  const table = document.getElementById("diff-rows");
  if (table === null) {
    return;
  }
  const payload = await api.compare(a, b);
  table.replaceChildren();
  if (isNoDifference(payload)) {
    table.append(el("p", "no-diff", "No differences"));
    return;
  }
  for (const row of diffRows(payload)) {
    const line = el("div", `diff-row side-${row.side}`);
    line.append(
      el("span", "diff-section", row.section),
      el("span", "diff-value", row.value),
    );
    table.append(line);
  }
}

export async function start(): Promise<void> {
  const api = new ApiClient();
  try {
    const rules = await api.rules();
    setUpWizard(api, rules);
  } catch {
    banner("Service unreachable, draft kept locally");
    setUpWizard(api, { rules: [] });
  }
  const explorerKey = document.getElementById("explorer-key") as HTMLInputElement | null;
  explorerKey?.addEventListener("change", () => {
    void renderExplorer(api, explorerKey.value, EMPTY_FILTER);
  });
  const compareForm = document.getElementById("compare-form") as HTMLFormElement | null;
  compareForm?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(compareForm);
    void renderCompare(api, String(data.get("a")), String(data.get("b")));
  });
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  void start();
}
