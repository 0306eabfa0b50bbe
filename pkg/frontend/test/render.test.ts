import { mkdtempSync, readFileSync, writeFileSync, existsSync, mkdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { MissingInputError } from "../src/csv.js";
import { RENDERERS, render } from "../src/figures.js";
import { main } from "../src/cli.js";
import { encodePng } from "../src/png.js";

const GOLDEN = join(__dirname, "..", "testdata", "golden");
const FIGURE_IDS = Object.keys(RENDERERS);

describe("figure rendering from the golden data directory", () => {
  for (const figureId of FIGURE_IDS) {
    it(`renders ${figureId} without error`, () => {
      const svg = render(figureId, GOLDEN);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg.length).toBeGreaterThan(2000);
    });

    it(`${figureId} is byte-stable across two runs`, () => {
      const first = render(figureId, GOLDEN);
      const second = render(figureId, GOLDEN);
      expect(second).toBe(first);
    });
  }

  it("fig4 bottom panel is log-scaled", () => {
    const svg = render("fig4", GOLDEN);
    expect(svg).toContain('data-scale="log"');
  });

  it("unknown figure id is rejected with the known list", () => {
    expect(() => render("fig42", GOLDEN)).toThrow(/known: fig1b/);
  });
});

describe("missing-input handling", () => {
  it("reports the expected files and writes no partial image", () => {
    const emptyDir = mkdtempSync(join(tmpdir(), "wellrot-empty-"));
    expect(() => render("fig4", emptyDir)).toThrow(MissingInputError);
    try {
      render("fig2", emptyDir);
      expect.unreachable("fig2 should fail on an empty directory");
    } catch (error) {
      expect((error as MissingInputError).missing).toContain("potential_ideal_a0.csv");
    }
  });

  it("rejects inputs whose config headers disagree", () => {
    const dir = mkdtempSync(join(tmpdir(), "wellrot-mismatch-"));
    const spectrum = readFileSync(join(GOLDEN, "junction_potential.csv"), "utf8");
    writeFileSync(join(dir, "junction_potential.csv"), spectrum);
    const other = readFileSync(join(GOLDEN, "squid_coeffs.csv"), "utf8").replace(
      /"alpha_ghz": ?20\.0|"alpha_ghz":20\.0/,
      '"alpha_ghz":19.0'
    );
    writeFileSync(join(dir, "squid_coeffs.csv"), other);
    expect(() => render("fig1b", dir)).toThrow(/config header mismatch/);
  });
});

describe("command line front end", () => {
  it("writes an SVG file and exits 0", () => {
    const dir = mkdtempSync(join(tmpdir(), "wellrot-out-"));
    const out = join(dir, "fig1b.svg");
    const code = main(["fig1b", "--data", GOLDEN, "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
    const again = join(dir, "fig1b-again.svg");
    expect(main(["fig1b", "--data", GOLDEN, "--out", again])).toBe(0);
    expect(readFileSync(again, "utf8")).toBe(readFileSync(out, "utf8"));
  });

  it("exits 1 on missing inputs and leaves no file", () => {
    const dir = mkdtempSync(join(tmpdir(), "wellrot-fail-"));
    const empty = join(dir, "data");
    mkdirSync(empty);
    const out = join(dir, "fig4.svg");
    expect(main(["fig4", "--data", empty, "--out", out])).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("exits 2 on usage errors", () => {
    expect(main([])).toBe(2);
    expect(main(["fig4", "--data", GOLDEN])).toBe(2);
  });
});

describe("png encoder", () => {
  it("produces a valid signature and is deterministic", () => {
    const rgb = new Uint8Array([255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30]);
    const a = encodePng(2, 2, rgb);
    const b = encodePng(2, 2, rgb);
    expect(Buffer.from(a.subarray(0, 8)).toString("hex")).toBe("89504e470d0a1a0a");
    expect(Buffer.compare(Buffer.from(a), Buffer.from(b))).toBe(0);
  });

  it("rejects mismatched buffer sizes", () => {
    expect(() => encodePng(2, 2, new Uint8Array(5))).toThrow(/mismatch/);
  });
});
