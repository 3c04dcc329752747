import { describe, expect, it } from "vitest";
import { column, parseCsv, requireColumns, SchemaError } from "../src/csv.js";

const SAMPLE = `# config_sha256=abc123 seed=7 package=kamdnlw-0.1.0 m=1.0 a_const=0.0
j,Omega,residual
8,8.0622,-0.0019
9,9.0553,-0.0020
`;

describe("csv parser", () => {
  it("extracts metadata from the provenance comment", () => {
    const t = parseCsv(SAMPLE);
    expect(t.meta["config_sha256"]).toBe("abc123");
    expect(t.meta["m"]).toBe("1.0");
    expect(t.provenance).toContain("seed=7");
  });

  it("parses numeric rows by column name", () => {
    const t = parseCsv(SAMPLE);
    expect(t.columns).toEqual(["j", "Omega", "residual"]);
    expect(column(t, "j")).toEqual([8, 9]);
    expect(column(t, "residual")[1]).toBeCloseTo(-0.002, 10);
  });

  it("reports the full column diff on mismatch", () => {
    const t = parseCsv(SAMPLE);
    expect(() => requireColumns(t, ["j", "scale", "density"])).toThrowError(
      /missing \[scale, density\].*found \[j, Omega, residual\]/,
    );
    expect(() => column(t, "nope")).toThrow(SchemaError);
  });

  it("rejects ragged rows and empty files", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(SchemaError);
    expect(() => parseCsv("# only comments\n")).toThrow(SchemaError);
  });
});
