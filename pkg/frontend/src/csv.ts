/**
 * Reader for the simulation pipeline's CSV artifacts.
 *
 * Schema: first line is a comma-separated header, every following line holds
 * numeric cells only (17-significant-digit doubles), LF line endings. The
 * metadata sidecar `<output>.meta` holds one `key=value` pair per line.
 */

import * as fs from "node:fs";

export interface Table {
  /** Source path, kept for error messages. */
  path: string;
  columns: string[];
  /** Column name -> values, aligned across columns. */
  data: Map<string, number[]>;
  /** Number of rows. */
  length: number;
}

export class MissingColumnError extends Error {
  constructor(public readonly file: string, public readonly column: string) {
    super(`${file}: required column '${column}' not found`);
    this.name = "MissingColumnError";
  }
}

export function readTable(path: string): Table {
  const raw = fs.readFileSync(path, "utf8");
  const lines = raw.split("\n").filter((line) => line.length > 0);
  if (lines.length < 1) {
    throw new Error(`${path}: empty CSV`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(`${path}:${i + 1}: expected ${columns.length} cells, got ${cells.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const value = Number(cells[j]);
      if (Number.isNaN(value) && cells[j].trim() !== "nan") {
        throw new Error(`${path}:${i + 1}: cell '${cells[j]}' is not numeric`);
      }
      data.get(columns[j])!.push(value);
    }
  }
  return { path, columns, data, length: lines.length - 1 };
}

/** Fetch one column, raising MissingColumnError with file context. */
export function column(table: Table, name: string): number[] {
  const values = table.data.get(name);
  if (values === undefined) {
    throw new MissingColumnError(table.path, name);
  }
  return values;
}

/** Assert all columns exist up front so errors name every gap at once. */
export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.data.has(name)) {
      throw new MissingColumnError(table.path, name);
    }
  }
}

/** Parse a `key=value` metadata sidecar; missing file yields an empty map. */
export function readMeta(path: string): Map<string, string> {
  const out = new Map<string, string>();
  if (!fs.existsSync(path)) {
    return out;
  }
  const raw = fs.readFileSync(path, "utf8");
  for (const line of raw.split("\n")) {
    const eq = line.indexOf("=");
    if (eq > 0) {
      out.set(line.slice(0, eq).trim(), line.slice(eq + 1).trim());
    }
  }
  return out;
}
