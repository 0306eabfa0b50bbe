/**
 * Per-figure renderers. Each one reads the simulator's documented CSV/JSON
 * outputs from a data directory and returns a complete SVG document. No
 * physics is computed here; anything derived lives in the data files.
 */

import { join } from "node:path";
import { readFileSync, existsSync } from "node:fs";

import {
  DataTable,
  GridData,
  MissingInputError,
  checkConsistentConfigs,
  column,
  listAngleFiles,
  readGrid,
  readTable,
  requireFiles,
} from "./csv.js";
import { SvgCanvas, axesPanel, heatmapPanel } from "./svg.js";

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/** One figure request: what to render, from where, to where. */
export interface FigureSpec {
  figureId: string;
  dataDir: string;
  outPath: string;
}

type Renderer = (dataDir: string) => string;

function gridExtent(grids: GridData[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const grid of grids) {
    for (const row of grid.values) {
      for (const value of row) {
        if (value < lo) lo = value;
        if (value > hi) hi = value;
      }
    }
  }
  return [lo, hi];
}

function angleLabel(grid: GridData): string {
  const value = Number(grid.meta["rotation_angle_over_pi"] ?? "0");
  return `phi = ${parseFloat(value.toPrecision(3))} pi`;
}

/** Strip of heatmap panels sharing one color normalization per row. */
function heatmapStrip(
  svg: SvgCanvas,
  grids: GridData[],
  rowTop: number,
  panel: number,
  gap: number,
  labelPrefix = ""
): void {
  const extent = gridExtent(grids);
  grids.forEach((grid, index) => {
    heatmapPanel(
      svg,
      { x: 40 + index * (panel + gap), y: rowTop, w: panel, h: panel },
      grid,
      labelPrefix + angleLabel(grid),
      extent
    );
  });
}

function loadAngleGrids(dataDir: string, prefix: string): GridData[] {
  const names = listAngleFiles(dataDir, (i) => `${prefix}_a${i}.csv`);
  if (names.length === 0) {
    throw new MissingInputError([`${prefix}_a0.csv`]);
  }
  const grids = names.map((name) => readGrid(join(dataDir, name)));
  checkConsistentConfigs(names, grids.map((g) => g.config));
  return grids;
}

function renderPotentialRows(rows: Array<{ prefix: string; label: string }>, dataDir: string): string {
  const series = rows.map((row) => ({
    label: row.label,
    grids: loadAngleGrids(dataDir, row.prefix),
  }));
  const panel = 110;
  const gap = 12;
  const count = Math.max(...series.map((s) => s.grids.length));
  const width = 60 + count * (panel + gap);
  const height = 50 + series.length * (panel + 42);
  const svg = new SvgCanvas(width, height);
  series.forEach((row, index) => {
    const top = 30 + index * (panel + 42);
    svg.text(12, top + panel / 2, row.label, 11, "middle", `transform="rotate(-90 12 ${top + panel / 2})"`);
    heatmapStrip(svg, row.grids, top, panel, gap);
  });
  return svg.toString();
}

export const renderFig1b: Renderer = (dataDir) => {
  requireFiles(dataDir, ["junction_potential.csv", "squid_coeffs.csv"]);
  const potential = readTable(join(dataDir, "junction_potential.csv"));
  const coeffs = readTable(join(dataDir, "squid_coeffs.csv"));
  checkConsistentConfigs(
    ["junction_potential.csv", "squid_coeffs.csv"],
    [potential.config, coeffs.config]
  );
  const transmissions = [...new Set(column(potential, "transmission"))];
  const theta = column(potential, "theta_rad");
  const u = column(potential, "u_ghz");
  const svg = new SvgCanvas(520, 360);
  const { sx, sy } = axesPanel(
    svg,
    { x: 70, y: 30, w: 400, h: 270 },
    [Math.min(...theta), Math.max(...theta)],
    [Math.min(...u), Math.max(...u)],
    { xLabel: "theta (rad)", yLabel: "U / h (GHz)", title: "SQUID potential vs transmission" }
  );
  transmissions.forEach((t, index) => {
    const points: Array<[number, number]> = [];
    for (let row = 0; row < theta.length; row++) {
      if (column(potential, "transmission")[row] === t) {
        points.push([sx(theta[row]), sy(u[row])]);
      }
    }
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    svg.polyline(points, color);
    svg.text(440, 45 + 14 * index, `T = ${t}`, 10, "start", `fill="${color}"`);
  });
  return svg.toString();
};

export const renderFig2: Renderer = (dataDir) =>
  renderPotentialRows(
    [
      { prefix: "potential_ideal", label: "rotated" },
      { prefix: "potential_sinsin", label: "tunable" },
    ],
    dataDir
  );

export const renderFig3b: Renderer = (dataDir) =>
  renderPotentialRows([{ prefix: "potential_circuit", label: "circuit" }], dataDir);

export const renderFig7: Renderer = (dataDir) =>
  renderPotentialRows(
    [
      { prefix: "potential_lowenergy", label: "low energy" },
      { prefix: "potential_lowenergy-corrected", label: "corrected" },
    ],
    dataDir
  );

export const renderFig4: Renderer = (dataDir) => {
  requireFiles(dataDir, ["spectrum.csv"]);
  const table = readTable(join(dataDir, "spectrum.csv"));
  const phi = column(table, "phi_over_pi");
  const levels = table.columns.filter((c) => /^omega_\d+_ghz$/.test(c));
  // optional panel b: even-parity eigenstates in phase space, rows = angles
  const stateRows: GridData[][] = [];
  const angleNames = listAngleFiles(dataDir, (i) => `eigenstate_circuit_phase_a${i}_n0.csv`);
  for (let a = 0; a < angleNames.length; a++) {
    const row: GridData[] = [];
    for (let n = 0; ; n++) {
      const name = `eigenstate_circuit_phase_a${a}_n${n}.csv`;
      if (!existsSync(join(dataDir, name))) break;
      const grid = readGrid(join(dataDir, name));
      if (Number(grid.meta["parity"]) === 1) row.push(grid);
    }
    stateRows.push(row);
  }
  const statePanel = 86;
  const stateBlockHeight =
    stateRows.length > 0 ? 40 + stateRows.length * (statePanel + 24) : 0;
  const svg = new SvgCanvas(560, 560 + stateBlockHeight);
  const all = levels.flatMap((name) => column(table, name));
  const { sx, sy } = axesPanel(
    svg,
    { x: 70, y: 30, w: 440, h: 260 },
    [0, 1],
    [Math.min(...all), Math.max(...all)],
    { yLabel: "omega_n / 2pi (GHz)", title: "spectrum along the rotation" }
  );
  levels.forEach((name, index) => {
    const values = column(table, name);
    const color = index % 2 === 0 ? "#2ca02c" : "#111111";
    const dash = index % 2 === 0 ? "" : "5,3";
    svg.polyline(phi.map((p, i) => [sx(p), sy(values[i])]), color, 1.2, dash);
  });
  const splitting = column(table, "omega_01_ghz").map((v) => Math.max(v, 1e-16));
  svg.openGroup('data-scale="log" data-panel="omega01"');
  const { sx: sx2, sy: sy2 } = axesPanel(
    svg,
    { x: 70, y: 340, w: 440, h: 170 },
    [0, 1],
    [Math.min(...splitting), Math.max(...splitting)],
    { xLabel: "phi / pi", yLabel: "omega_01 (GHz)", yLog: true }
  );
  svg.polyline(phi.map((p, i) => [sx2(p), sy2(splitting[i])]), "#d62728");
  svg.closeGroup();
  stateRows.forEach((row, a) => {
    const top = 590 + a * (statePanel + 24);
    if (row.length === 0) return;
    svg.text(
      16,
      top + statePanel / 2,
      angleLabel(row[0]),
      9,
      "middle",
      `transform="rotate(-90 16 ${top + statePanel / 2})"`
    );
    row.forEach((grid, col) => {
      heatmapPanel(
        svg,
        { x: 70 + col * (statePanel + 12), y: top, w: statePanel, h: statePanel },
        grid,
        a === 0 ? `even n=${col}` : ""
      );
    });
  });
  return svg.toString();
};

export const renderFig5: Renderer = (dataDir) => {
  requireFiles(dataDir, ["matrix_elements.csv"]);
  const table = readTable(join(dataDir, "matrix_elements.csv"));
  const phi = column(table, "phi_over_pi");
  const panels: Array<{ title: string; keys: string[] }> = [
    { title: "sine elements (bit flips)", keys: ["sin_theta_01", "sin_phi_01"] },
    { title: "charge elements", keys: ["n_theta_01", "n_phi_01"] },
    {
      title: "dephasing-type diagonal differences",
      keys: ["cos_theta_diag", "cos_phi_diag", "n_theta_diag", "n_phi_diag"],
    },
  ];
  const svg = new SvgCanvas(1020, 330);
  panels.forEach((panel, index) => {
    const values = panel.keys.map((key) => column(table, key).map((v) => Math.max(v, 1e-18)));
    const flat = values.flat();
    const { sx, sy } = axesPanel(
      svg,
      { x: 70 + index * 320, y: 40, w: 250, h: 220 },
      [0, 1],
      [Math.min(...flat), Math.max(...flat)],
      { xLabel: "phi / pi", title: panel.title, yLog: true }
    );
    values.forEach((series, seriesIndex) => {
      const color = SERIES_COLORS[seriesIndex % SERIES_COLORS.length];
      svg.polyline(phi.map((p, i) => [sx(p), sy(series[i])]), color);
      svg.text(
        75 + index * 320,
        52 + 12 * seriesIndex,
        panel.keys[seriesIndex],
        8,
        "start",
        `fill="${color}"`
      );
    });
  });
  return svg.toString();
};

export const renderFig6: Renderer = (dataDir) => {
  requireFiles(dataDir, ["sweep_zeta.csv", "schedule.csv", "gate.json"]);
  const sweep = readTable(join(dataDir, "sweep_zeta.csv"));
  const schedule = readTable(join(dataDir, "schedule.csv"));
  const gate = JSON.parse(readFileSync(join(dataDir, "gate.json"), "utf8"));
  const trajectoryEven = listAngleFiles(dataDir, (i) => `trajectory_even_s${i}.csv`);
  const trajectoryOdd = listAngleFiles(dataDir, (i) => `trajectory_odd_s${i}.csv`);
  const svg = new SvgCanvas(980, 640);

  // panel a: gate time vs coupling ratio for each charging energy
  const ratios = column(sweep, "zeta_over_ej");
  const times = column(sweep, "gate_time_ns");
  const ecs = column(sweep, "ec_ghz");
  const uniqueEc = [...new Set(ecs)];
  const { sx: ax, sy: ay } = axesPanel(
    svg,
    { x: 70, y: 40, w: 330, h: 230 },
    [Math.min(...ratios), Math.max(...ratios)],
    [0, Math.max(...times) * 1.05],
    { xLabel: "zeta / E_J", yLabel: "gate time (ns)", title: "a) time vs coupling" }
  );
  uniqueEc.forEach((ec, index) => {
    const points: Array<[number, number]> = [];
    ratios.forEach((ratio, row) => {
      if (ecs[row] === ec) points.push([ax(ratio), ay(times[row])]);
    });
    points.sort((p, q) => p[0] - q[0]);
    const color = SERIES_COLORS[index];
    svg.polyline(points, color);
    points.forEach(([x, y]) => svg.circle(x, y, 2.5, color));
    svg.text(80, 60 + 14 * index, `E_C/h = ${ec} GHz`, 10, "start", `fill="${color}"`);
  });

  // panel b: the optimized waveform
  const t = column(schedule, "time_ns");
  const angles = column(schedule, "phi_rad").map((a) => a / Math.PI);
  const { sx: bx, sy: by } = axesPanel(
    svg,
    { x: 520, y: 40, w: 330, h: 230 },
    [0, Math.max(...t)],
    [0, 1],
    { xLabel: "t (ns)", yLabel: "phi / pi", title: "b) optimized schedule" }
  );
  svg.polyline(t.map((ti, i) => [bx(ti), by(angles[i])]), "#1f77b4", 1.6);
  svg.text(
    690,
    60,
    `T = ${Number(gate.gate_time_ns).toFixed(1)} ns, F = ${Number(gate.fidelity).toFixed(5)}`,
    10
  );

  // panel c: phase-space trajectory snapshots, even then odd initial state
  const rows: Array<[string, string[]]> = [
    ["even", trajectoryEven],
    ["odd", trajectoryOdd],
  ];
  rows.forEach(([label, names], rowIndex) => {
    if (names.length === 0) throw new MissingInputError([`trajectory_${label}_s0.csv`]);
    const grids = names.map((name) => readGrid(join(dataDir, name)));
    const extent = gridExtent(grids);
    const panel = 92;
    grids.forEach((grid, index) => {
      const timeNs = Number(grid.meta["time_ns"] ?? "0");
      heatmapPanel(
        svg,
        { x: 70 + index * (panel + 10), y: 330 + rowIndex * (panel + 36), w: panel, h: panel },
        grid,
        `${label} t=${timeNs.toFixed(1)}`,
        extent
      );
    });
  });
  return svg.toString();
};

function eigenstateGrid(
  dataDir: string,
  basis: string
): { grids: Map<string, GridData>; angleCount: number } {
  const grids = new Map<string, GridData>();
  let angleCount = 0;
  for (const model of ["circuit", "sinsin"]) {
    const names = listAngleFiles(dataDir, (i) => `eigenstate_${model}_${basis}_a${i}_n0.csv`);
    angleCount = Math.max(angleCount, names.length);
    for (let a = 0; a < names.length; a++) {
      for (const level of [0, 1, 2]) {
        const name = `eigenstate_${model}_${basis}_a${a}_n${level}.csv`;
        if (existsSync(join(dataDir, name))) {
          grids.set(`${model}:${a}:${level}`, readGrid(join(dataDir, name)));
        }
      }
    }
  }
  if (grids.size === 0) {
    throw new MissingInputError([`eigenstate_circuit_${basis}_a0_n0.csv`]);
  }
  checkConsistentConfigs(
    [...grids.keys()],
    [...grids.values()].map((g) => g.config)
  );
  return { grids, angleCount };
}

function renderEigenstateComparison(dataDir: string, basis: string): string {
  const { grids, angleCount } = eigenstateGrid(dataDir, basis);
  const columns: Array<[string, number]> = [
    ["circuit", 0],
    ["sinsin", 0],
    ["circuit", 2],
    ["sinsin", 2],
  ];
  const panel = 104;
  const svg = new SvgCanvas(90 + columns.length * (panel + 14), 70 + angleCount * (panel + 26));
  columns.forEach(([model, level], col) => {
    svg.text(90 + col * (panel + 14) + panel / 2, 20, `${model} n=${level}`, 10);
  });
  for (let a = 0; a < angleCount; a++) {
    let label = "";
    columns.forEach(([model, level], col) => {
      const grid = grids.get(`${model}:${a}:${level}`);
      if (!grid) return;
      label = angleLabel(grid);
      heatmapPanel(
        svg,
        { x: 90 + col * (panel + 14), y: 36 + a * (panel + 26), w: panel, h: panel },
        grid,
        ""
      );
    });
    svg.text(
      14,
      36 + a * (panel + 26) + panel / 2,
      label,
      9,
      "middle",
      `transform="rotate(-90 14 ${36 + a * (panel + 26) + panel / 2})"`
    );
  }
  return svg.toString();
}

export const renderFig8: Renderer = (dataDir) => renderEigenstateComparison(dataDir, "phase");
export const renderFig9: Renderer = (dataDir) => renderEigenstateComparison(dataDir, "charge");

export const RENDERERS: Record<string, Renderer> = {
  fig1b: renderFig1b,
  fig2: renderFig2,
  fig3b: renderFig3b,
  fig4: renderFig4,
  fig5: renderFig5,
  fig6: renderFig6,
  fig7: renderFig7,
  fig8: renderFig8,
  fig9: renderFig9,
};

export function render(figureId: string, dataDir: string): string {
  const renderer = RENDERERS[figureId];
  if (!renderer) {
    throw new Error(
      `unknown figure id ${figureId}; known: ${Object.keys(RENDERERS).join(", ")}`
    );
  }
  return renderer(dataDir);
}
