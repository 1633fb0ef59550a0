// Search surface: clause-row builder plus a raw query box, results shown as
// group cards with matched error spans painted blue.

import type { ApiClient } from "./api.js";
import { renderInstanceView } from "./instanceView.js";
import {
  FIELDS, buildQueryText, validateQuery, type Conjunction, type QueryRow,
} from "./queryModel.js";

const PAGE_SIZE = 10;

interface RowWidgets {
  root: HTMLElement;
  read(): QueryRow;
}

function select(options: readonly string[], cls: string): HTMLSelectElement {
  const sel = document.createElement("select");
  sel.className = cls;
  for (const opt of options) {
    const el = document.createElement("option");
    el.value = opt;
    el.textContent = opt;
    sel.appendChild(el);
  }
  return sel;
}

function builderRow(first: boolean, onRemove: (row: HTMLElement) => void): RowWidgets {
  const root = document.createElement("div");
  root.className = "query-row";

  const conj = select(["AND", "OR", "AND NOT"], "row-conj");
  conj.style.visibility = first ? "hidden" : "visible";
  root.appendChild(conj);

  const field = select(FIELDS, "row-field");
  root.appendChild(field);

  const mode = select(["contains", "pattern"], "row-mode");
  root.appendChild(mode);

  const value = document.createElement("input");
  value.type = "text";
  value.className = "row-value";
  value.placeholder = "text to find";
  root.appendChild(value);

  const remove = document.createElement("button");
  remove.type = "button";
  remove.className = "row-remove";
  remove.textContent = "×";
  remove.addEventListener("click", () => onRemove(root));
  root.appendChild(remove);

  return {
    root,
    read: () => ({
      field: field.value as QueryRow["field"],
      mode: mode.value as QueryRow["mode"],
      value: value.value,
      conjunction: conj.value as Conjunction,
    }),
  };
}

export function renderSearchView(
  client: ApiClient,
  ctx: { sessionId: string },
): HTMLElement {
  const root = document.createElement("div");
  root.className = "search-view";

  // run picker, filled lazily
  const runBox = document.createElement("fieldset");
  runBox.className = "run-picker";
  const legend = document.createElement("legend");
  legend.textContent = "runs";
  runBox.appendChild(legend);
  root.appendChild(runBox);

  void client.listRuns().then(({ runs }) => {
    for (const run of runs) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = run.id;
      box.className = "run-box";
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${run.name} (${run.instances})`));
      runBox.appendChild(label);
    }
  }).catch(() => {
    legend.textContent = "runs (failed to load)";
  });

  // clause builder
  const rowsBox = document.createElement("div");
  rowsBox.className = "query-rows";
  root.appendChild(rowsBox);
  const rows: RowWidgets[] = [];

  const removeRow = (el: HTMLElement) => {
    const idx = rows.findIndex(r => r.root === el);
    if (idx >= 0) {
      rows.splice(idx, 1);
      el.remove();
      const firstConj = rows[0]?.root.querySelector<HTMLElement>(".row-conj");
      if (firstConj) firstConj.style.visibility = "hidden";
    }
  };

  const addRow = () => {
    const widgets = builderRow(rows.length === 0, removeRow);
    rows.push(widgets);
    rowsBox.appendChild(widgets.root);
  };
  addRow();

  const addBtn = document.createElement("button");
  addBtn.type = "button";
  addBtn.className = "add-clause";
  addBtn.textContent = "+ clause";
  addBtn.addEventListener("click", addRow);
  root.appendChild(addBtn);

  // raw box for power users; builder wins unless raw mode is on
  const rawLabel = document.createElement("label");
  rawLabel.className = "raw-toggle";
  const rawMode = document.createElement("input");
  rawMode.type = "checkbox";
  rawMode.className = "raw-mode";
  rawLabel.appendChild(rawMode);
  rawLabel.appendChild(document.createTextNode(" raw query"));
  root.appendChild(rawLabel);

  const rawInput = document.createElement("input");
  rawInput.type = "text";
  rawInput.className = "raw-query";
  rawInput.placeholder = "error.type ~ '%missing%' AND NOT lang.target ~ 'de'";
  root.appendChild(rawInput);

  const searchBtn = document.createElement("button");
  searchBtn.type = "button";
  searchBtn.className = "do-search";
  searchBtn.textContent = "Search";
  root.appendChild(searchBtn);

  const status = document.createElement("div");
  status.className = "search-status";
  root.appendChild(status);

  const results = document.createElement("div");
  results.className = "search-results";
  root.appendChild(results);

  let page = 1;

  async function runSearch(): Promise<void> {
    status.textContent = "";
    results.replaceChildren();

    const runIds = Array.from(runBox.querySelectorAll<HTMLInputElement>("input.run-box"))
      .filter(b => b.checked).map(b => b.value);
    if (runIds.length === 0) {
      status.textContent = "pick at least one run";
      return;
    }

    const text = rawMode.checked ? rawInput.value : buildQueryText(rows.map(r => r.read()));
    if (!rawMode.checked) rawInput.value = text;
    const check = validateQuery(text);
    if (!check.ok) {
      status.textContent = `query error at ${check.position}: ${check.message}`;
      return;
    }

    try {
      const res = await client.search({
        run_ids: runIds, query: text, page, page_size: PAGE_SIZE,
      });
      status.textContent =
        `${res.total_instances} instances in ${res.total_groups} groups, page ${res.page}`;
      const matched = new Set(res.matched_error_ids);
      for (const group of res.groups) {
        results.appendChild(renderInstanceView(group, matched, {
          client, runIds, sessionId: ctx.sessionId,
        }));
      }

      const nav = document.createElement("div");
      nav.className = "page-nav";
      const prev = document.createElement("button");
      prev.type = "button";
      prev.textContent = "prev";
      prev.disabled = page <= 1;
      prev.addEventListener("click", () => { page--; void runSearch(); });
      const next = document.createElement("button");
      next.type = "button";
      next.textContent = "next";
      next.disabled = page * PAGE_SIZE >= res.total_groups;
      next.addEventListener("click", () => { page++; void runSearch(); });
      nav.appendChild(prev);
      nav.appendChild(next);
      results.appendChild(nav);
    } catch (err) {
      status.textContent = err instanceof Error ? err.message : String(err);
    }
  }

  searchBtn.addEventListener("click", () => { page = 1; void runSearch(); });

  return root;
}
