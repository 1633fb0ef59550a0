// Run submission: create a run, then fill it either by typing triples in or
// by uploading files with an extraction spec, previewed before commit.

import { ApiError, type ApiClient } from "./api.js";
import type { IngestPreview } from "./types.js";

const METRIC_CHOICES = ["bleu", "baseline", "comet", "instructscore"];
const MODES = ["jsonl_fields", "tsv_columns", "parallel_files", "regex_record"] as const;

type Mode = (typeof MODES)[number];

export interface SubmitCallbacks {
  onRunCreated?: (runId: string) => void;
  onInstancesAdded?: (runId: string, added: number) => void;
}

function labeled(text: string, input: HTMLElement): HTMLElement {
  const label = document.createElement("label");
  label.className = "field";
  const span = document.createElement("span");
  span.textContent = text;
  label.appendChild(span);
  label.appendChild(input);
  return label;
}

function textInput(name: string, placeholder = ""): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "text";
  input.name = name;
  input.placeholder = placeholder;
  return input;
}

function errorLine(err: unknown): string {
  if (err instanceof ApiError) {
    const line = err.details && (err.details as Record<string, unknown>).line;
    const where = typeof line === "number" ? ` (line ${line})` : "";
    return `${err.code}: ${err.message}${where}`;
  }
  return err instanceof Error ? err.message : String(err);
}

// --- manual triple entry -----------------------------------------------------

function tripleRow(): HTMLElement {
  const row = document.createElement("div");
  row.className = "triple-row";
  row.appendChild(textInput("source", "source"));
  row.appendChild(textInput("prediction", "prediction"));
  row.appendChild(textInput("reference", "reference"));
  return row;
}

export function readTriples(container: HTMLElement) {
  const out: { source: string | null; prediction: string; reference: string | null }[] = [];
  for (const row of container.querySelectorAll<HTMLElement>(".triple-row")) {
    const [src, pred, ref] = Array.from(row.querySelectorAll("input")).map(i => i.value);
    if (src === "" && pred === "" && ref === "") continue;
    out.push({
      source: src === "" ? null : src,
      prediction: pred,
      reference: ref === "" ? null : ref,
    });
  }
  return out;
}

// --- spec builder ------------------------------------------------------------

interface SpecBuilder {
  root: HTMLElement;
  current(): Record<string, unknown>;
}

function specBuilder(): SpecBuilder {
  const root = document.createElement("div");
  root.className = "spec-builder";

  const modeSelect = document.createElement("select");
  modeSelect.className = "spec-mode";
  for (const mode of MODES) {
    const opt = document.createElement("option");
    opt.value = mode;
    opt.textContent = mode.replace("_", " ");
    modeSelect.appendChild(opt);
  }
  root.appendChild(labeled("extraction mode", modeSelect));

  const fieldsBox = document.createElement("div");
  fieldsBox.className = "spec-fields";
  root.appendChild(fieldsBox);

  const inputs: Record<string, HTMLInputElement> = {};

  function rebuild(mode: Mode): void {
    fieldsBox.replaceChildren();
    for (const key of Object.keys(inputs)) delete inputs[key];

    const addField = (name: string, label: string, placeholder: string) => {
      const input = textInput(name, placeholder);
      inputs[name] = input;
      fieldsBox.appendChild(labeled(label, input));
    };

    if (mode === "jsonl_fields") {
      addField("source", "source key", "src");
      addField("prediction", "prediction key", "mt");
      addField("reference", "reference key", "ref");
    } else if (mode === "tsv_columns") {
      addField("source", "source column", "0");
      addField("prediction", "prediction column", "1");
      addField("reference", "reference column", "2");
    } else if (mode === "parallel_files") {
      addField("source", "source file #", "0");
      addField("prediction", "prediction file #", "1");
      addField("reference", "reference file #", "");
    } else {
      addField("pattern", "record pattern", "^H-(?P<i>\\d+)\\t(?P<text>.*)$");
      addField("prediction", "prediction group", "text");
      addField("source", "source group", "");
      addField("reference", "reference group", "");
    }
  }

  modeSelect.addEventListener("change", () => rebuild(modeSelect.value as Mode));
  rebuild(MODES[0]);

  function current(): Record<string, unknown> {
    const mode = modeSelect.value as Mode;
    const fields: Record<string, unknown> = {};
    const numeric = mode === "tsv_columns" || mode === "parallel_files";
    for (const role of ["source", "prediction", "reference"]) {
      const raw = inputs[role]?.value ?? "";
      if (raw === "") continue;
      fields[role] = numeric ? Number(raw) : raw;
    }
    const spec: Record<string, unknown> = { mode, fields };
    if (mode === "regex_record") spec.pattern = inputs.pattern?.value ?? "";
    return spec;
  }

  return { root, current };
}

function previewTable(preview: IngestPreview): HTMLElement {
  const table = document.createElement("table");
  table.className = "preview-table";
  const head = table.createTHead().insertRow();
  for (const col of ["source", "prediction", "reference"]) {
    const th = document.createElement("th");
    th.textContent = col;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const rec of preview.preview ?? []) {
    const row = body.insertRow();
    row.insertCell().textContent = rec.source ?? "";
    row.insertCell().textContent = rec.prediction;
    row.insertCell().textContent = rec.reference ?? "";
  }
  return table;
}

// --- the workflow ------------------------------------------------------------

/** Forms for creating a run and feeding it, manually or from files. */
export function renderSubmitWorkflow(client: ApiClient, callbacks: SubmitCallbacks = {}): HTMLElement {
  const root = document.createElement("div");
  root.className = "submit-workflow";

  // run creation
  const runForm = document.createElement("form");
  runForm.className = "run-form";
  const nameInput = textInput("name", "system name");
  const srcLang = textInput("source_lang", "en");
  const tgtLang = textInput("target_lang", "de");
  const devices = textInput("device_hints", "cuda:0,cuda:1");
  runForm.appendChild(labeled("run name", nameInput));
  runForm.appendChild(labeled("source language", srcLang));
  runForm.appendChild(labeled("target language", tgtLang));

  const metricsBox = document.createElement("fieldset");
  metricsBox.className = "metric-choices";
  const legend = document.createElement("legend");
  legend.textContent = "metrics";
  metricsBox.appendChild(legend);
  for (const metric of METRIC_CHOICES) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = metric;
    box.className = "metric-box";
    label.appendChild(box);
    label.appendChild(document.createTextNode(" " + metric));
    metricsBox.appendChild(label);
  }
  runForm.appendChild(metricsBox);
  runForm.appendChild(labeled("device hints", devices));

  const createBtn = document.createElement("button");
  createBtn.type = "submit";
  createBtn.textContent = "Create run";
  runForm.appendChild(createBtn);
  const runStatus = document.createElement("span");
  runStatus.className = "form-status run-status";
  runForm.appendChild(runStatus);
  root.appendChild(runForm);

  let runId: string | null = null;

  runForm.addEventListener("submit", async ev => {
    ev.preventDefault();
    runStatus.textContent = "";
    const metrics = Array.from(metricsBox.querySelectorAll<HTMLInputElement>("input.metric-box"))
      .filter(b => b.checked).map(b => b.value);
    const hints = devices.value.split(",").map(s => s.trim()).filter(s => s !== "");
    try {
      const run = await client.createRun({
        name: nameInput.value,
        source_lang: srcLang.value,
        target_lang: tgtLang.value,
        metrics,
        device_hints: hints,
      });
      runId = run.id;
      runStatus.textContent = `created run ${run.name} (${run.id})`;
      callbacks.onRunCreated?.(run.id);
    } catch (err) {
      runStatus.textContent = errorLine(err);
    }
  });

  // path one: type triples in
  const manual = document.createElement("section");
  manual.className = "manual-entry";
  const manualTitle = document.createElement("h3");
  manualTitle.textContent = "enter instances";
  manual.appendChild(manualTitle);
  const rows = document.createElement("div");
  rows.className = "triple-rows";
  rows.appendChild(tripleRow());
  manual.appendChild(rows);

  const addRow = document.createElement("button");
  addRow.type = "button";
  addRow.className = "add-row";
  addRow.textContent = "+ row";
  addRow.addEventListener("click", () => rows.appendChild(tripleRow()));
  manual.appendChild(addRow);

  const sendManual = document.createElement("button");
  sendManual.type = "button";
  sendManual.className = "send-manual";
  sendManual.textContent = "Add instances";
  manual.appendChild(sendManual);
  const manualStatus = document.createElement("span");
  manualStatus.className = "form-status manual-status";
  manual.appendChild(manualStatus);
  root.appendChild(manual);

  sendManual.addEventListener("click", async () => {
    manualStatus.textContent = "";
    if (!runId) {
      manualStatus.textContent = "create a run first";
      return;
    }
    const triples = readTriples(rows);
    if (triples.length === 0) {
      manualStatus.textContent = "nothing to add";
      return;
    }
    try {
      const res = await client.addInstances(runId, triples);
      manualStatus.textContent = `added ${res.added}, run now holds ${res.total}`;
      callbacks.onInstancesAdded?.(runId, res.added);
    } catch (err) {
      manualStatus.textContent = errorLine(err);
    }
  });

  // path two: upload with an extraction spec
  const upload = document.createElement("section");
  upload.className = "file-entry";
  const uploadTitle = document.createElement("h3");
  uploadTitle.textContent = "extract from files";
  upload.appendChild(uploadTitle);

  const fileInput = document.createElement("input");
  fileInput.type = "file";
  fileInput.multiple = true;
  fileInput.className = "upload-files";
  upload.appendChild(labeled("files", fileInput));

  const builder = specBuilder();
  upload.appendChild(builder.root);

  const previewBtn = document.createElement("button");
  previewBtn.type = "button";
  previewBtn.className = "preview-ingest";
  previewBtn.textContent = "Preview";
  upload.appendChild(previewBtn);

  const ingestBtn = document.createElement("button");
  ingestBtn.type = "button";
  ingestBtn.className = "commit-ingest";
  ingestBtn.textContent = "Ingest";
  upload.appendChild(ingestBtn);

  const uploadStatus = document.createElement("div");
  uploadStatus.className = "form-status upload-status";
  upload.appendChild(uploadStatus);
  const previewBox = document.createElement("div");
  previewBox.className = "preview-box";
  upload.appendChild(previewBox);
  root.appendChild(upload);

  async function runIngest(dryRun: boolean): Promise<void> {
    uploadStatus.textContent = "";
    previewBox.replaceChildren();
    if (!runId) {
      uploadStatus.textContent = "create a run first";
      return;
    }
    const files = Array.from(fileInput.files ?? []);
    if (files.length === 0) {
      uploadStatus.textContent = "pick at least one file";
      return;
    }
    try {
      const res = await client.ingest(runId, files, builder.current(), dryRun);
      if (dryRun) {
        uploadStatus.textContent = `would extract ${res.extracted} records; first ${res.preview?.length ?? 0} below`;
        previewBox.appendChild(previewTable(res));
      } else {
        uploadStatus.textContent = `added ${res.added}, run now holds ${res.total}`;
        callbacks.onInstancesAdded?.(runId, res.added ?? 0);
      }
    } catch (err) {
      uploadStatus.textContent = errorLine(err);
    }
  }

  previewBtn.addEventListener("click", () => runIngest(true));
  ingestBtn.addEventListener("click", () => runIngest(false));

  return root;
}
