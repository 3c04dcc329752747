/**
 * CSV reader for kamdnlw artifacts.
 *
 * Artifacts start with `#`-prefixed provenance comments carrying
 * space-separated `key=value` metadata (config hash, seed, and per-figure
 * extras like the mass), followed by a header row and numeric rows.
 */

import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: number[][];
  meta: Record<string, string>;
  provenance: string;
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  const meta: Record<string, string> = {};
  let provenance = "";
  let i = 0;
  for (; i < lines.length && lines[i].startsWith("#"); i++) {
    const body = lines[i].slice(1).trim();
    if (!provenance) provenance = body;
    for (const part of body.split(/\s+/)) {
      const eq = part.indexOf("=");
      if (eq > 0) meta[part.slice(0, eq)] = part.slice(eq + 1);
    }
  }
  if (i >= lines.length) throw new SchemaError("empty CSV: no header row");
  const columns = lines[i].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (i += 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `row ${i + 1}: expected ${columns.length} cells, found ${cells.length}`,
      );
    }
    rows.push(cells.map(Number));
  }
  return { columns, rows, meta, provenance };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

/** Column values by name; throws a SchemaError naming the diff when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `missing column "${name}"; file has [${table.columns.join(", ")}]`,
    );
  }
  return table.rows.map((r) => r[idx]);
}

/** Verify all expected columns exist, reporting the full diff at once. */
export function requireColumns(table: Table, expected: string[]): void {
  const missing = expected.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `schema mismatch: missing [${missing.join(", ")}], found [${table.columns.join(", ")}]`,
    );
  }
}

/** Columns matched by prefix (e.g. omega_1, omega_3), in file order. */
export function columnsByPrefix(table: Table, prefix: string): { name: string; values: number[] }[] {
  return table.columns
    .filter((c) => c.startsWith(prefix))
    .map((name) => ({ name, values: column(table, name) }));
}
