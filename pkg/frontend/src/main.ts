/**
 * CLI: `render --spec figure.json`
 *
 * The spec names the figure kind, the input CSV and the output SVG path.
 * Exits 1 with the column diff on schema mismatches; rendering is
 * read-only over inputs and byte-deterministic.
 */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import { dirname } from "path";
import { FigureSpec, renderSpec } from "./figures.js";

function fail(msg: string): never {
  process.stderr.write(`error: ${msg}\n`);
  process.exit(1);
}

export function main(argv: string[]): void {
  if (argv[0] !== "render") fail(`usage: render --spec PATH (got ${argv.join(" ") || "nothing"})`);
  const idx = argv.indexOf("--spec");
  if (idx < 0 || !argv[idx + 1]) fail("missing --spec PATH");
  let spec: FigureSpec;
  try {
    spec = JSON.parse(readFileSync(argv[idx + 1], "utf-8"));
  } catch (err) {
    fail(`cannot read spec: ${(err as Error).message}`);
  }
  for (const key of ["kind", "input", "output"] as const) {
    if (!spec[key]) fail(`spec is missing "${key}"`);
  }
  let svg: string;
  try {
    svg = renderSpec(spec);
  } catch (err) {
    fail((err as Error).message);
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg);
  process.stdout.write(`${spec.output}\n`);
}

main(process.argv.slice(2));
