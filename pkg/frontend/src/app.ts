// Page shell: tab switching, session identity, and the feedback kill switch.

import { ApiClient } from "./api.js";
import { renderDashboard } from "./dashboard.js";
import { renderSearchView } from "./searchView.js";
import { renderSubmitWorkflow } from "./submit.js";

const SESSION_KEY = "mtcanvas-session";

function newSessionId(): string {
  const bytes = new Uint8Array(12);
  if (typeof crypto !== "undefined" && crypto.getRandomValues) {
    crypto.getRandomValues(bytes);
  } else {
    for (let i = 0; i < bytes.length; i++) bytes[i] = Math.floor(Math.random() * 256);
  }
  return Array.from(bytes, b => b.toString(16).padStart(2, "0")).join("");
}

export function sessionId(storage: Storage = localStorage): string {
  let id = storage.getItem(SESSION_KEY);
  if (!id) {
    id = newSessionId();
    storage.setItem(SESSION_KEY, id);
  }
  return id;
}

function dashboardTab(client: ApiClient): HTMLElement {
  const root = document.createElement("div");
  root.className = "dashboard-tab";

  const picker = document.createElement("fieldset");
  picker.className = "run-picker";
  const legend = document.createElement("legend");
  legend.textContent = "runs to compare";
  picker.appendChild(legend);
  root.appendChild(picker);

  void client.listRuns().then(({ runs }) => {
    for (const run of runs) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = run.id;
      box.className = "run-box";
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${run.name}`));
      picker.appendChild(label);
    }
  }).catch(() => { legend.textContent = "runs (failed to load)"; });

  const compare = document.createElement("button");
  compare.type = "button";
  compare.textContent = "Compare";
  root.appendChild(compare);

  const status = document.createElement("span");
  status.className = "form-status";
  root.appendChild(status);

  const chartBox = document.createElement("div");
  chartBox.className = "chart-box";
  root.appendChild(chartBox);

  compare.addEventListener("click", async () => {
    status.textContent = "";
    chartBox.replaceChildren();
    const ids = Array.from(picker.querySelectorAll<HTMLInputElement>("input.run-box"))
      .filter(b => b.checked).map(b => b.value);
    if (ids.length === 0) {
      status.textContent = "pick at least one run";
      return;
    }
    try {
      const res = await client.compare(ids);
      chartBox.appendChild(renderDashboard(res.runs));
    } catch (err) {
      status.textContent = err instanceof Error ? err.message : String(err);
    }
  });

  return root;
}

export function mountApp(root: HTMLElement, client = new ApiClient()): void {
  const session = sessionId();

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "mtcanvas";
  header.appendChild(title);

  const revoke = document.createElement("button");
  revoke.type = "button";
  revoke.className = "revoke-feedback";
  revoke.textContent = "revoke all my feedback";
  header.appendChild(revoke);

  const revokeStatus = document.createElement("span");
  revokeStatus.className = "form-status";
  header.appendChild(revokeStatus);

  revoke.addEventListener("click", async () => {
    try {
      const res = await client.revokeFeedback(session);
      revokeStatus.textContent = `removed ${res.removed} ranking(s)`;
    } catch (err) {
      revokeStatus.textContent = err instanceof Error ? err.message : String(err);
    }
  });

  root.appendChild(header);

  const tabs: [string, () => HTMLElement][] = [
    ["submit", () => renderSubmitWorkflow(client)],
    ["analyze", () => renderSearchView(client, { sessionId: session })],
    ["dashboard", () => dashboardTab(client)],
  ];

  const bar = document.createElement("nav");
  bar.className = "tab-bar";
  const body = document.createElement("main");
  body.className = "tab-body";

  for (const [name, build] of tabs) {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = name;
    btn.dataset.tab = name;
    btn.addEventListener("click", () => {
      bar.querySelectorAll("button").forEach(b => b.classList.remove("active"));
      btn.classList.add("active");
      body.replaceChildren(build());
    });
    bar.appendChild(btn);
  }

  root.appendChild(bar);
  root.appendChild(body);
  (bar.querySelector("button") as HTMLButtonElement).click();
}

// auto-mount in the browser; tests call mountApp themselves
const mountPoint = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mountPoint) mountApp(mountPoint);
