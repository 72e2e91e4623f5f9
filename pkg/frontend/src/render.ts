/**
 * Command line: render one figure from simulation CSV artifacts.
 *
 *     node dist/render.js --figure fig2 --input a.csv b.csv c.csv --output fig2.svg
 *
 * Exit codes: 1 bad arguments, 2 render failure (missing columns, malformed
 * CSV), 0 success.
 */

import { isFigureId, render } from "./figures.js";

function usage(): string {
  return "usage: render --figure fig1..fig8 --input FILE [FILE ...] --output FILE.svg";
}

export function main(argv: string[]): number {
  let figure = "";
  const inputs: string[] = [];
  let output = "";
  let i = 0;
  while (i < argv.length) {
    const arg = argv[i];
    if (arg === "--figure") {
      figure = argv[++i] ?? "";
    } else if (arg === "--output") {
      output = argv[++i] ?? "";
    } else if (arg === "--input") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        inputs.push(argv[++i]);
      }
    } else {
      console.error(`unknown argument: ${arg}\n${usage()}`);
      return 1;
    }
    i++;
  }
  if (!isFigureId(figure) || inputs.length === 0 || !output) {
    console.error(usage());
    return 1;
  }
  try {
    render({ figureId: figure, inputs, output });
  } catch (err) {
    console.error(`render failed: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("render.js")) {
  process.exit(main(process.argv.slice(2)));
}
