// One shared tooltip element, shown while hovering a highlighted span.

import type { TooltipPayload } from "./types.js";

let tooltipEl: HTMLDivElement | null = null;

function ensure(): HTMLDivElement {
  if (!tooltipEl) {
    tooltipEl = document.createElement("div");
    tooltipEl.className = "error-tooltip";
    tooltipEl.style.display = "none";
    document.body.appendChild(tooltipEl);
  }
  return tooltipEl;
}

function row(label: string, value: string): HTMLDivElement {
  const div = document.createElement("div");
  const strong = document.createElement("strong");
  strong.textContent = label + ": ";
  div.appendChild(strong);
  div.appendChild(document.createTextNode(value));
  return div;
}

// Field order: type, scale, explanation.
export function fillTooltip(el: HTMLElement, payload: TooltipPayload): void {
  el.replaceChildren(
    row("Type", payload.error_type),
    row("Scale", payload.severity),
    row("Explanation", payload.explanation),
  );
}

function show(event: MouseEvent, payload: TooltipPayload): void {
  const el = ensure();
  fillTooltip(el, payload);
  el.style.display = "block";
  el.style.left = `${event.pageX + 12}px`;
  el.style.top = `${event.pageY + 12}px`;
}

export function hideTooltip(): void {
  if (tooltipEl) tooltipEl.style.display = "none";
}

export function attachTooltip(node: HTMLElement, payload: TooltipPayload): void {
  node.addEventListener("mouseenter", ev => show(ev as MouseEvent, payload));
  node.addEventListener("mousemove", ev => {
    const el = ensure();
    el.style.left = `${(ev as MouseEvent).pageX + 12}px`;
    el.style.top = `${(ev as MouseEvent).pageY + 12}px`;
  });
  node.addEventListener("mouseleave", hideTooltip);
}
