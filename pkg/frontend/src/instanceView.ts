// Group card: source/reference/predictions together, error spans painted
// over each prediction, re-rank arrows, and consent-gated ranking submission.

import type { ApiClient } from "./api.js";
import { computeSegments, kindClass } from "./highlight.js";
import { attachTooltip } from "./tooltip.js";
import type { AnnotationPayload, GroupMember, InstanceGroup } from "./types.js";

// Zero-width annotations anchored at text end get this marker so there is
// something visible to hover.
export const END_MARKER = "∎";

export interface ViewContext {
  client: ApiClient;
  runIds: string[];
  sessionId: string;
}

/**
 * Render one prediction with its highlight segments. Span boundaries in the
 * DOM carry data-start/data-end attributes equal to the segment offsets, and
 * the concatenated text content (markers aside) is exactly the prediction.
 */
export function renderPrediction(
  text: string,
  annotations: readonly AnnotationPayload[],
  matchedIds: ReadonlySet<string> = new Set(),
): HTMLElement {
  const root = document.createElement("span");
  root.className = "prediction-text";
  const segments = computeSegments(text.length, annotations, matchedIds);
  let cursor = 0;
  for (const seg of segments) {
    if (seg.start > cursor) {
      root.appendChild(document.createTextNode(text.slice(cursor, seg.start)));
      cursor = seg.start;
    }
    const span = document.createElement("span");
    span.dataset.start = String(seg.start);
    span.dataset.end = String(seg.end);
    if (seg.start === seg.end) {
      span.className = `hl-marker ${kindClass(seg.kind)}`;
      span.textContent = END_MARKER;
    } else {
      span.className = kindClass(seg.kind);
      span.textContent = text.slice(seg.start, seg.end);
      cursor = seg.end;
    }
    attachTooltip(span, seg.tooltip);
    root.appendChild(span);
  }
  if (cursor < text.length) {
    root.appendChild(document.createTextNode(text.slice(cursor)));
  }
  return root;
}

function scoreBadges(member: GroupMember): HTMLElement {
  const wrap = document.createElement("span");
  wrap.className = "score-badges";
  const names = Object.keys(member.scores).sort();
  for (const name of names) {
    const badge = document.createElement("span");
    badge.className = "score-badge";
    badge.textContent = `${name}: ${formatScore(member.scores[name])}`;
    wrap.appendChild(badge);
  }
  if (names.length === 0) {
    const badge = document.createElement("span");
    badge.className = "score-badge score-badge-empty";
    badge.textContent = "no scores";
    wrap.appendChild(badge);
  }
  return wrap;
}

function formatScore(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3);
}

function textRow(label: string, value: string | null): HTMLElement {
  const row = document.createElement("div");
  row.className = "text-row";
  const tag = document.createElement("span");
  tag.className = "text-row-label";
  tag.textContent = label;
  row.appendChild(tag);
  const body = document.createElement("span");
  body.textContent = value ?? "(none)";
  row.appendChild(body);
  return row;
}

/** The run ids currently shown, top to bottom. */
function displayedOrder(list: HTMLElement): string[] {
  return Array.from(list.querySelectorAll<HTMLElement>("li.member"))
    .map(li => li.dataset.runId ?? "");
}

function refreshArrows(list: HTMLElement): void {
  const items = Array.from(list.querySelectorAll<HTMLElement>("li.member"));
  items.forEach((li, i) => {
    const up = li.querySelector<HTMLButtonElement>("button.move-up");
    const down = li.querySelector<HTMLButtonElement>("button.move-down");
    if (up) up.disabled = i === 0;
    if (down) down.disabled = i === items.length - 1;
    const rank = li.querySelector<HTMLElement>(".member-rank");
    if (rank) rank.textContent = String(i + 1);
  });
}

function memberItem(member: GroupMember, matched: ReadonlySet<string>, list: HTMLElement): HTMLElement {
  const li = document.createElement("li");
  li.className = "member";
  li.dataset.runId = member.run_id;

  const head = document.createElement("div");
  head.className = "member-head";

  const rank = document.createElement("span");
  rank.className = "member-rank";
  head.appendChild(rank);

  const name = document.createElement("span");
  name.className = "member-run-name";
  name.textContent = member.run_name;
  head.appendChild(name);
  head.appendChild(scoreBadges(member));

  const controls = document.createElement("span");
  controls.className = "member-controls";
  const up = document.createElement("button");
  up.type = "button";
  up.className = "move-up";
  up.textContent = "▲";
  up.title = "move up";
  up.addEventListener("click", () => {
    const prev = li.previousElementSibling;
    if (prev) list.insertBefore(li, prev);
    refreshArrows(list);
  });
  const down = document.createElement("button");
  down.type = "button";
  down.className = "move-down";
  down.textContent = "▼";
  down.title = "move down";
  down.addEventListener("click", () => {
    const next = li.nextElementSibling;
    if (next) list.insertBefore(next, li);
    refreshArrows(list);
  });
  controls.appendChild(up);
  controls.appendChild(down);
  head.appendChild(controls);
  li.appendChild(head);

  const body = document.createElement("div");
  body.className = "member-prediction";
  body.appendChild(renderPrediction(member.instance.prediction, member.annotations, matched));
  li.appendChild(body);
  return li;
}

/**
 * Build the interactive card for one instance group. Members arrive
 * best-first from the server; the arrows only shuffle the visible order,
 * and submitting reads the permutation straight back out of the DOM.
 */
export function renderInstanceView(
  group: InstanceGroup,
  matchedErrorIds: ReadonlySet<string>,
  ctx: ViewContext,
): HTMLElement {
  const card = document.createElement("section");
  card.className = "group-card";
  card.dataset.groupKey = group.group_key;

  card.appendChild(textRow("source", group.source));
  card.appendChild(textRow("reference", group.reference));

  const list = document.createElement("ol");
  list.className = "member-list";
  for (const member of group.members) {
    list.appendChild(memberItem(member, matchedErrorIds, list));
  }
  card.appendChild(list);
  refreshArrows(list);

  const footer = document.createElement("div");
  footer.className = "rank-footer";

  const consentLabel = document.createElement("label");
  consentLabel.className = "consent-label";
  const consent = document.createElement("input");
  consent.type = "checkbox";
  consent.className = "consent-box";
  consent.checked = false;
  consentLabel.appendChild(consent);
  consentLabel.appendChild(document.createTextNode(
    " I consent to this ranking being stored for research"));
  footer.appendChild(consentLabel);

  const submit = document.createElement("button");
  submit.type = "button";
  submit.className = "submit-ranking";
  submit.textContent = "Submit ranking";
  footer.appendChild(submit);

  const status = document.createElement("span");
  status.className = "rank-status";
  footer.appendChild(status);

  submit.addEventListener("click", async () => {
    submit.disabled = true;
    status.textContent = "";
    try {
      const res = await ctx.client.submitRanking({
        run_ids: ctx.runIds,
        group_key: group.group_key,
        ordering: displayedOrder(list),
        session_id: ctx.sessionId,
        consented: consent.checked,
      });
      status.textContent = res.stored ? "ranking stored" : "ranking noted (not stored)";
    } catch (err) {
      status.textContent = `failed: ${err instanceof Error ? err.message : String(err)}`;
    } finally {
      submit.disabled = false;
    }
  });

  card.appendChild(footer);
  return card;
}
