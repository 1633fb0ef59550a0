// Comparison dashboard: corpus score table, per-metric histograms laid out
// side by side on shared axes, and each run's sorted error-type bars.

import type { DashboardStats, HistogramPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const HIST_W = 260;
const HIST_H = 150;
const PAD = { left: 34, right: 8, top: 8, bottom: 22 };

export const NOT_EVALUATED = "not evaluated";

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

function formatNum(v: number): string {
  if (Number.isInteger(v)) return String(v);
  return Math.abs(v) >= 100 ? v.toFixed(1) : v.toFixed(2);
}

/**
 * One histogram as an inline SVG. yMax is shared across the runs shown next
 * to each other so equal counts have equal bar heights in every column.
 */
export function renderHistogram(hist: HistogramPayload, yMax: number): SVGSVGElement {
  const svg = svgEl("svg");
  svg.setAttribute("viewBox", `0 0 ${HIST_W} ${HIST_H}`);
  svg.setAttribute("width", String(HIST_W));
  svg.setAttribute("height", String(HIST_H));
  svg.setAttribute("class", "histogram");
  svg.dataset.metric = hist.metric;
  svg.dataset.lo = String(hist.lo);
  svg.dataset.hi = String(hist.hi);
  svg.dataset.ymax = String(yMax);

  const plotW = HIST_W - PAD.left - PAD.right;
  const plotH = HIST_H - PAD.top - PAD.bottom;
  const n = hist.bins.length;
  const top = Math.max(yMax, 1);

  hist.bins.forEach((bin, i) => {
    const h = (bin.count / top) * plotH;
    const rect = svgEl("rect");
    rect.setAttribute("class", "hist-bar");
    rect.setAttribute("x", String(PAD.left + (i / n) * plotW));
    rect.setAttribute("y", String(PAD.top + plotH - h));
    rect.setAttribute("width", String(Math.max(plotW / n - 1, 1)));
    rect.setAttribute("height", String(h));
    const label = svgEl("title");
    label.textContent = `[${formatNum(bin.lower)}, ${formatNum(bin.upper)}): ${bin.count}`;
    rect.appendChild(label);
    svg.appendChild(rect);
  });

  const axis = svgEl("line");
  axis.setAttribute("x1", String(PAD.left));
  axis.setAttribute("y1", String(PAD.top + plotH));
  axis.setAttribute("x2", String(PAD.left + plotW));
  axis.setAttribute("y2", String(PAD.top + plotH));
  axis.setAttribute("class", "hist-axis");
  svg.appendChild(axis);

  const lo = svgEl("text");
  lo.setAttribute("x", String(PAD.left));
  lo.setAttribute("y", String(HIST_H - 6));
  lo.setAttribute("class", "hist-tick");
  lo.textContent = formatNum(hist.lo);
  svg.appendChild(lo);

  const hi = svgEl("text");
  hi.setAttribute("x", String(PAD.left + plotW));
  hi.setAttribute("y", String(HIST_H - 6));
  hi.setAttribute("text-anchor", "end");
  hi.setAttribute("class", "hist-tick");
  hi.textContent = formatNum(hist.hi);
  svg.appendChild(hi);

  const ymaxLabel = svgEl("text");
  ymaxLabel.setAttribute("x", String(PAD.left - 4));
  ymaxLabel.setAttribute("y", String(PAD.top + 10));
  ymaxLabel.setAttribute("text-anchor", "end");
  ymaxLabel.setAttribute("class", "hist-tick");
  ymaxLabel.textContent = String(yMax);
  svg.appendChild(ymaxLabel);

  return svg;
}

function notEvaluatedCell(tag: "td" | "div"): HTMLElement {
  const el = document.createElement(tag);
  el.className = "not-evaluated";
  el.textContent = NOT_EVALUATED;
  return el;
}

function scoreTable(stats: DashboardStats[]): HTMLElement {
  const metrics = Array.from(new Set(stats.flatMap(s => Object.keys(s.mean_scores)))).sort();
  const table = document.createElement("table");
  table.className = "score-table";

  const head = table.createTHead().insertRow();
  head.appendChild(document.createElement("th"));
  for (const s of stats) {
    const th = document.createElement("th");
    th.textContent = s.run_name;
    head.appendChild(th);
  }

  const body = table.createTBody();
  const bleuRow = body.insertRow();
  const bleuLabel = document.createElement("th");
  bleuLabel.textContent = "corpus BLEU";
  bleuRow.appendChild(bleuLabel);
  for (const s of stats) {
    if (s.corpus_bleu === null || s.corpus_bleu === undefined) {
      bleuRow.appendChild(notEvaluatedCell("td"));
    } else {
      const td = bleuRow.insertCell();
      td.textContent = formatNum(s.corpus_bleu);
    }
  }

  for (const metric of metrics) {
    const row = body.insertRow();
    const label = document.createElement("th");
    label.textContent = `mean ${metric}`;
    row.appendChild(label);
    for (const s of stats) {
      if (metric in s.mean_scores) {
        const td = row.insertCell();
        td.textContent = formatNum(s.mean_scores[metric]);
        td.title = `${s.score_counts[metric] ?? 0} instances`;
      } else {
        row.appendChild(notEvaluatedCell("td"));
      }
    }
  }
  return table;
}

function errorTypeChart(stats: DashboardStats): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "error-type-chart";
  const title = document.createElement("h4");
  title.textContent = stats.run_name;
  wrap.appendChild(title);

  if (stats.error_type_counts.length === 0) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = "no errors annotated";
    wrap.appendChild(empty);
    return wrap;
  }

  const most = stats.error_type_counts[0][1];
  for (const [etype, count] of stats.error_type_counts) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const label = document.createElement("span");
    label.className = "bar-label";
    label.textContent = etype;
    row.appendChild(label);
    const bar = document.createElement("span");
    bar.className = "bar-fill";
    bar.style.width = `${Math.max((count / most) * 100, 2)}%`;
    row.appendChild(bar);
    const num = document.createElement("span");
    num.className = "bar-count";
    num.textContent = String(count);
    row.appendChild(num);
    wrap.appendChild(row);
  }
  return wrap;
}

/** Whole dashboard for one or more runs; columns stay aligned per metric. */
export function renderDashboard(stats: DashboardStats[]): HTMLElement {
  const root = document.createElement("div");
  root.className = "dashboard";

  root.appendChild(scoreTable(stats));

  const metricNames = Array.from(new Set(stats.flatMap(s => Object.keys(s.histograms)))).sort();
  for (const metric of metricNames) {
    const section = document.createElement("section");
    section.className = "metric-section";
    section.dataset.metric = metric;
    const h = document.createElement("h3");
    h.textContent = `${metric} distribution`;
    section.appendChild(h);

    const row = document.createElement("div");
    row.className = "hist-row";
    const yMax = Math.max(
      0, ...stats.map(s => s.histograms[metric])
        .filter((hist): hist is HistogramPayload => hist !== undefined)
        .flatMap(hist => hist.bins.map(b => b.count)));
    for (const s of stats) {
      const cell = document.createElement("div");
      cell.className = "hist-cell";
      cell.dataset.runId = s.run_id;
      const caption = document.createElement("div");
      caption.className = "hist-caption";
      caption.textContent = s.run_name;
      cell.appendChild(caption);
      const hist = s.histograms[metric];
      if (hist) {
        cell.appendChild(renderHistogram(hist, yMax));
      } else {
        cell.appendChild(notEvaluatedCell("div"));
      }
      row.appendChild(cell);
    }
    section.appendChild(row);
    root.appendChild(section);
  }

  const errors = document.createElement("section");
  errors.className = "error-sections";
  const h = document.createElement("h3");
  h.textContent = "error types";
  errors.appendChild(h);
  const errRow = document.createElement("div");
  errRow.className = "hist-row";
  for (const s of stats) errRow.appendChild(errorTypeChart(s));
  errors.appendChild(errRow);
  root.appendChild(errors);

  return root;
}
