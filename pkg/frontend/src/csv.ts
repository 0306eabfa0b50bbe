/**
 * Readers for the simulator's CSV outputs.
 *
 * Every file starts with comment lines: a `# config: {...}` header with the
 * fully resolved run configuration, then `# key: value` metadata, then an
 * RFC-4180 body. Grid files carry their axes as JSON arrays in the metadata.
 */

import { readFileSync, existsSync } from "node:fs";
import { join } from "node:path";

export interface DataTable {
  config: unknown;
  configText: string;
  meta: Record<string, string>;
  columns: string[];
  rows: number[][];
}

export interface GridData {
  config: unknown;
  configText: string;
  meta: Record<string, string>;
  rowAxis: number[];
  colAxis: number[];
  values: number[][];
}

export class MissingInputError extends Error {
  constructor(public readonly missing: string[]) {
    super(`missing input files: ${missing.join(", ")}`);
  }
}

export function requireFiles(dataDir: string, names: string[]): void {
  const missing = names.filter((name) => !existsSync(join(dataDir, name)));
  if (missing.length > 0) {
    throw new MissingInputError(missing);
  }
}

function parseHeader(lines: string[]): {
  configText: string;
  meta: Record<string, string>;
  bodyStart: number;
} {
  let configText = "";
  const meta: Record<string, string> = {};
  let index = 0;
  for (; index < lines.length; index++) {
    const line = lines[index];
    if (!line.startsWith("#")) break;
    const content = line.replace(/^#\s*/, "");
    const colon = content.indexOf(":");
    if (colon < 0) continue;
    const key = content.slice(0, colon).trim();
    const value = content.slice(colon + 1).trim();
    if (key === "config") {
      configText = value;
    } else {
      meta[key] = value;
    }
  }
  return { configText, meta, bodyStart: index };
}

export function readTable(path: string): DataTable {
  const lines = readFileSync(path, "utf8").split("\n").filter((l) => l.length > 0);
  const { configText, meta, bodyStart } = parseHeader(lines);
  if (configText === "") {
    throw new Error(`${path} carries no config header`);
  }
  const columns = lines[bodyStart].split(",");
  const rows = lines.slice(bodyStart + 1).map((line) => line.split(",").map(Number));
  return { config: JSON.parse(configText), configText, meta, columns, rows };
}

export function readGrid(path: string): GridData {
  const table = readTable(path);
  const rowAxis = JSON.parse(table.meta["row_axis"]) as number[];
  const colAxis = JSON.parse(table.meta["col_axis"]) as number[];
  return {
    config: table.config,
    configText: table.configText,
    meta: table.meta,
    rowAxis,
    colAxis,
    values: table.rows,
  };
}

/** Column accessor with a helpful error. */
export function column(table: DataTable, name: string): number[] {
  const index = table.columns.indexOf(name);
  if (index < 0) {
    throw new Error(`column ${name} not present (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row) => row[index]);
}

/**
 * The physics sections of the config must agree across every input of one
 * figure; rendering mixed runs together would silently lie.
 */
export function checkConsistentConfigs(paths: string[], configs: unknown[]): void {
  const cores = configs.map((config) => {
    const c = config as Record<string, unknown>;
    return JSON.stringify({ circuit: c["circuit"], modes: c["modes"] });
  });
  const first = cores[0];
  for (let i = 1; i < cores.length; i++) {
    if (cores[i] !== first) {
      throw new Error(
        `config header mismatch between ${paths[0]} and ${paths[i]}; ` +
          "inputs come from different runs"
      );
    }
  }
}

export function listAngleFiles(
  dataDir: string,
  pattern: (index: number) => string
): string[] {
  const names: string[] = [];
  for (let index = 0; ; index++) {
    const name = pattern(index);
    if (!existsSync(join(dataDir, name))) break;
    names.push(name);
  }
  return names;
}
