#!/usr/bin/env node
/**
 * Figure renderer CLI: `wellrot-figures <figure-id> --data DIR --out PATH`.
 * The SVG is assembled fully in memory and written only on success, so a
 * failed render never leaves a partial image behind.
 */

import { writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";

import { MissingInputError } from "./csv.js";
import { FigureSpec, RENDERERS, render } from "./figures.js";

function usage(): string {
  return (
    "usage: wellrot-figures <figure-id> --data DIR --out PATH\n" +
    `figure ids: ${Object.keys(RENDERERS).join(", ")}\n`
  );
}

export function main(argv: string[]): number {
  const args = [...argv];
  const positional: string[] = [];
  let dataDir = ".";
  let outPath = "";
  while (args.length > 0) {
    const arg = args.shift()!;
    if (arg === "--data") {
      dataDir = args.shift() ?? "";
    } else if (arg === "--out") {
      outPath = args.shift() ?? "";
    } else if (arg === "--help" || arg === "-h") {
      process.stdout.write(usage());
      return 0;
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 1 || outPath === "") {
    process.stderr.write(usage());
    return 2;
  }
  const spec: FigureSpec = { figureId: positional[0], dataDir, outPath };
  try {
    const svg = render(spec.figureId, spec.dataDir);
    mkdirSync(dirname(spec.outPath), { recursive: true });
    writeFileSync(spec.outPath, svg);
  } catch (error) {
    if (error instanceof MissingInputError) {
      process.stderr.write(`expected input files not found:\n`);
      for (const name of error.missing) {
        process.stderr.write(`  ${name}\n`);
      }
    } else {
      process.stderr.write(`${(error as Error).message}\n`);
    }
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
