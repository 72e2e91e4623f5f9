import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { column, MissingColumnError, readMeta, readTable, requireColumns } from "../src/csv.js";

function tmpFile(content: string): string {
  const p = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "csv-")), "t.csv");
  fs.writeFileSync(p, content);
  return p;
}

describe("readTable", () => {
  it("parses header and numeric rows", () => {
    const t = readTable(tmpFile("a,b\n1,2\n3.5,-4e-2\n"));
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.length).toBe(2);
    expect(column(t, "a")).toEqual([1, 3.5]);
    expect(column(t, "b")).toEqual([2, -0.04]);
  });

  it("rejects ragged rows", () => {
    expect(() => readTable(tmpFile("a,b\n1\n"))).toThrow(/expected 2 cells/);
  });

  it("rejects non-numeric cells", () => {
    expect(() => readTable(tmpFile("a\nxyz\n"))).toThrow(/not numeric/);
  });

  it("reports the missing column and file", () => {
    const t = readTable(tmpFile("a\n1\n"));
    try {
      requireColumns(t, ["a", "purity"]);
      throw new Error("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(MissingColumnError);
      const e = err as MissingColumnError;
      expect(e.column).toBe("purity");
      expect(e.file).toContain("t.csv");
    }
  });
});

describe("readMeta", () => {
  it("parses key=value lines and tolerates a missing file", () => {
    const p = tmpFile("experiment=histogram\nomega=2.0\n");
    const meta = readMeta(p);
    expect(meta.get("omega")).toBe("2.0");
    expect(readMeta(p + ".nope").size).toBe(0);
  });
});
