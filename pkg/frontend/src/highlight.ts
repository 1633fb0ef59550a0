// Turns possibly-overlapping error annotations into the flat list of
// non-overlapping segments the viewer can paint directly.

import type { AnnotationPayload, HighlightSegment, TooltipPayload } from "./types.js";

const KIND_RANK = { search_match: 2, major: 1, minor: 0 } as const;

type Kind = keyof typeof KIND_RANK;

interface Placed {
  start: number;
  end: number;
  kind: Kind;
  tooltip: TooltipPayload;
  order: number;
}

function kindOf(a: AnnotationPayload, matched: ReadonlySet<string>): Kind {
  if (matched.has(a.id)) return "search_match";
  return a.severity === "major" ? "major" : "minor";
}

function tooltipOf(a: AnnotationPayload): TooltipPayload {
  return { error_type: a.type, severity: a.severity, explanation: a.explanation };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

/**
 * Compute highlight segments for one prediction.
 *
 * Every annotation span is clamped into [0, textLength]; a null span anchors
 * a zero-width marker at the end of the text. Where spans overlap, the text
 * is split at every boundary and each piece takes the strongest covering
 * annotation: a search match always wins over severity colors, major wins
 * over minor. Zero-width annotations are emitted as zero-width segments at
 * their anchor so the renderer can place a marker glyph there.
 *
 * The result is sorted by (start, end) and segments never overlap, although
 * a zero-width segment may sit inside or at the edge of a painted one.
 */
export function computeSegments(
  textLength: number,
  annotations: readonly AnnotationPayload[],
  matchedIds: ReadonlySet<string> = new Set(),
): HighlightSegment[] {
  const placed: Placed[] = [];
  annotations.forEach((a, order) => {
    let start: number;
    let end: number;
    if (a.span === null || a.span === undefined) {
      start = end = textLength;
    } else {
      start = clamp(Math.min(a.span[0], a.span[1]), 0, textLength);
      end = clamp(Math.max(a.span[0], a.span[1]), 0, textLength);
    }
    placed.push({ start, end, kind: kindOf(a, matchedIds), tooltip: tooltipOf(a), order });
  });

  const markers = placed.filter(p => p.start === p.end);
  const spans = placed.filter(p => p.start < p.end);

  // Elementary intervals between all span boundaries; each takes the
  // strongest cover. Annotation counts are tiny, the quadratic scan is fine.
  const cuts = Array.from(new Set(spans.flatMap(p => [p.start, p.end]))).sort((x, y) => x - y);
  const pieces: Placed[] = [];
  for (let i = 0; i + 1 < cuts.length; i++) {
    const lo = cuts[i];
    const hi = cuts[i + 1];
    const covering = spans.filter(p => p.start <= lo && p.end >= hi);
    if (covering.length === 0) continue;
    covering.sort(byStrength);
    const win = covering[0];
    pieces.push({ start: lo, end: hi, kind: win.kind, tooltip: win.tooltip, order: win.order });
  }

  // Re-join adjacent pieces won by the same annotation.
  const merged: Placed[] = [];
  for (const piece of pieces) {
    const prev = merged[merged.length - 1];
    if (prev && prev.end === piece.start && prev.order === piece.order) {
      prev.end = piece.end;
    } else {
      merged.push({ ...piece });
    }
  }

  const out: HighlightSegment[] = merged.concat(markers).map(p => ({
    start: p.start,
    end: p.end,
    kind: p.kind,
    tooltip: p.tooltip,
  }));
  out.sort((a, b) => a.start - b.start || a.end - b.end);
  return out;
}

function byStrength(a: Placed, b: Placed): number {
  const rank = KIND_RANK[b.kind] - KIND_RANK[a.kind];
  if (rank !== 0) return rank;
  // same strength: earlier, then wider, then input order
  return a.start - b.start || b.end - a.end || a.order - b.order;
}

/** CSS class for a segment kind; search matches supersede severity colors. */
export function kindClass(kind: HighlightSegment["kind"]): string {
  switch (kind) {
    case "search_match": return "hl-match";
    case "major": return "hl-major";
    case "minor": return "hl-minor";
  }
}
