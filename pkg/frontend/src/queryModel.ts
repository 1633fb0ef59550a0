// Search-row builder model and a client-side validator that accepts exactly
// the textual queries the server parses, so builder output can be checked
// before a request goes out.

export const FIELDS = [
  "error.type", "error.scale", "error.explanation",
  "text.source", "text.prediction", "text.reference",
  "lang.source", "lang.target",
] as const;

export type FieldName = (typeof FIELDS)[number];

export type Conjunction = "AND" | "OR" | "AND NOT";

export interface QueryRow {
  field: FieldName;
  /** contains wraps the literal value in %...%; pattern passes it through */
  mode: "contains" | "pattern";
  value: string;
  /** how this row joins onto the previous one; ignored on the first row */
  conjunction: Conjunction;
}

export function emptyRow(): QueryRow {
  return { field: "error.type", mode: "contains", value: "", conjunction: "AND" };
}

/** Backslash-escape LIKE metacharacters so the value matches literally. */
export function escapeLiteral(value: string): string {
  return value.replace(/[\\%_]/g, ch => "\\" + ch);
}

function quoted(pattern: string): string {
  return "'" + pattern.replace(/'/g, "''") + "'";
}

function rowPattern(row: QueryRow): string {
  return row.mode === "contains" ? "%" + escapeLiteral(row.value) + "%" : row.value;
}

/** Render builder rows as query text; rows with an empty value are dropped. */
export function buildQueryText(rows: readonly QueryRow[]): string {
  const parts: string[] = [];
  for (const row of rows) {
    if (row.mode === "contains" && row.value === "") continue;
    const clause = `${row.field} ~ ${quoted(rowPattern(row))}`;
    parts.push(parts.length === 0 ? clause : `${row.conjunction} ${clause}`);
  }
  return parts.join(" ");
}

/** The same rows as the structured clause list the search endpoint accepts. */
export function buildStructured(rows: readonly QueryRow[]) {
  const out: { field: string; pattern: string; conjunction: string }[] = [];
  for (const row of rows) {
    if (row.mode === "contains" && row.value === "") continue;
    out.push({ field: row.field, pattern: rowPattern(row), conjunction: row.conjunction });
  }
  return out;
}

export interface ValidationResult {
  ok: boolean;
  clauses: number;
  /** 0-based offset of the first problem, mirroring the server's ParseError */
  position?: number;
  message?: string;
}

const WORD_CHARS = /[A-Za-z0-9._]/;

/**
 * Validate a textual query against the server grammar: empty matches all,
 * otherwise clause (conj clause)* with single-quoted patterns ('' embeds a
 * quote) and case-insensitive AND / OR / AND NOT keywords.
 */
export function validateQuery(text: string): ValidationResult {
  const src = text ?? "";
  let pos = 0;

  const skipWs = () => {
    while (pos < src.length && /\s/.test(src[pos])) pos++;
  };
  const atEnd = () => {
    skipWs();
    return pos >= src.length;
  };
  const readWord = (): [string, number] => {
    skipWs();
    const start = pos;
    while (pos < src.length && WORD_CHARS.test(src[pos])) pos++;
    return [src.slice(start, pos), start];
  };
  const fail = (message: string, at: number): ValidationResult =>
    ({ ok: false, clauses: 0, position: at, message });

  if (atEnd()) return { ok: true, clauses: 0 };

  let count = 0;
  for (;;) {
    const [word, start] = readWord();
    if (!word) return fail("expected a field name", pos);
    if (!(FIELDS as readonly string[]).includes(word.toLowerCase())) {
      return fail(`unknown field '${word}'`, start);
    }
    skipWs();
    if (pos >= src.length || src[pos] !== "~") {
      return fail(`expected '~' after field '${word}'`, pos);
    }
    pos++;
    skipWs();
    const quoteStart = pos;
    if (pos >= src.length || src[pos] !== "'") {
      return fail("expected a single-quoted pattern", pos);
    }
    pos++;
    let closed = false;
    while (pos < src.length) {
      if (src[pos] === "'") {
        if (src[pos + 1] === "'") {
          pos += 2;
          continue;
        }
        pos++;
        closed = true;
        break;
      }
      pos++;
    }
    if (!closed) return fail("unterminated pattern", quoteStart);
    count++;

    if (atEnd()) return { ok: true, clauses: count };
    const [kwRaw, kwStart] = readWord();
    const kw = kwRaw.toUpperCase();
    if (kw === "AND") {
      const mark = pos;
      const [next] = readWord();
      if (next.toUpperCase() !== "NOT") pos = mark;
    } else if (kw !== "OR") {
      return fail(`expected AND, OR, or AND NOT, got '${kwRaw}'`, kwStart);
    }
    if (atEnd()) return fail("dangling conjunction", pos);
  }
}
