import * as fs from 'fs';
import * as path from 'path';
import { SchemaError } from './csv.js';
import { EdgeStatRow, NetworkDump, loadEdgeStats, loadNetwork } from './model.js';
import { heatColor, line, svgDocument, text } from './svg.js';

const CELL = 60; // pixels per block
const PAD = 40;

interface StreetValue {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  value: number;
}

/** Average the two directed edges of each street into one drawable value. */
function streetValues(
  net: NetworkDump,
  stats: EdgeStatRow[],
  pick: (r: EdgeStatRow) => number,
): StreetValue[] {
  const byEdge = new Map<number, EdgeStatRow>();
  for (const r of stats) byEdge.set(r.edge, r);
  for (const e of net.edges) {
    if (!byEdge.has(e.id)) {
      throw new SchemaError(`edge ${e.id} missing from edge stats`);
    }
  }
  const streets = new Map<string, { geom: StreetValue; vals: number[] }>();
  for (const e of net.edges) {
    const key = [Math.min(e.from, e.to), Math.max(e.from, e.to)].join('-');
    const v = pick(byEdge.get(e.id)!);
    const entry = streets.get(key);
    if (entry) {
      if (!Number.isNaN(v)) entry.vals.push(v);
    } else {
      streets.set(key, {
        geom: { x1: e.x1, y1: e.y1, x2: e.x2, y2: e.y2, value: NaN },
        vals: Number.isNaN(v) ? [] : [v],
      });
    }
  }
  return [...streets.values()].map(({ geom, vals }) => ({
    ...geom,
    value: vals.length ? vals.reduce((a, b) => a + b, 0) / vals.length : NaN,
  }));
}

export function buildHeatmap(
  net: NetworkDump,
  streets: StreetValue[],
  title: string,
  lo: number,
  hi: number,
): string {
  const scale = CELL / net.spacing;
  const w = (net.cols - 1) * CELL + 2 * PAD;
  const h = (net.rows - 1) * CELL + 2 * PAD + 20;
  const sx = (x: number) => PAD + x * scale;
  const sy = (y: number) => PAD + 20 + y * scale;
  const parts: string[] = [text(PAD, 18, title)];
  for (const s of streets) {
    const color = Number.isNaN(s.value)
      ? '#cccccc'
      : heatColor(hi > lo ? (s.value - lo) / (hi - lo) : 0.5);
    parts.push(line(sx(s.x1), sy(s.y1), sx(s.x2), sy(s.y2), color, 7));
  }
  // Color bar.
  for (let i = 0; i < 60; i++) {
    parts.push(line(w - PAD + 8, h - PAD - i, w - PAD + 20, h - PAD - i, heatColor(i / 59), 1));
  }
  parts.push(text(w - PAD + 22, h - PAD + 4, format(lo)));
  parts.push(text(w - PAD + 22, h - PAD - 56, format(hi)));
  return svgDocument(w + 60, h, parts.join('\n'));
}

function format(v: number): string {
  return Math.abs(v) >= 10 ? v.toFixed(0) : v.toFixed(2);
}

export interface HeatmapOptions {
  mixes?: string[];
}

/** One occupancy and one mean-price map per (mix, behavior, penetration)
 *  cell found in edge_stats.csv, drawn on the dumped grid geometry. */
export function plotHeatmaps(inDir: string, outDir: string, opts: HeatmapOptions = {}): string[] {
  const net = loadNetwork(inDir);
  const stats = loadEdgeStats(inDir);
  fs.mkdirSync(outDir, { recursive: true });

  const cells = new Map<string, EdgeStatRow[]>();
  for (const r of stats) {
    if (opts.mixes && !opts.mixes.includes(r.mix)) continue;
    const key = `${r.mix}_${r.behavior}_${Math.round(r.penetration * 100)}`;
    const bucket = cells.get(key);
    if (bucket) bucket.push(r);
    else cells.set(key, [r]);
  }

  const prices = stats.map((r) => r.meanPrice).filter((v) => !Number.isNaN(v));
  const pLo = Math.min(...prices);
  const pHi = Math.max(...prices);

  const written: string[] = [];
  for (const [key, rows] of [...cells.entries()].sort()) {
    const occ = buildHeatmap(
      net,
      streetValues(net, rows, (r) => r.occupancy),
      `occupancy ${key.replace(/_/g, ' ')}%`,
      0,
      1,
    );
    const occFile = path.join(outDir, `occupancy_${key}.svg`);
    fs.writeFileSync(occFile, occ);
    written.push(occFile);

    const price = buildHeatmap(
      net,
      streetValues(net, rows, (r) => r.meanPrice),
      `mean paid price ${key.replace(/_/g, ' ')}%`,
      pLo,
      pHi,
    );
    const priceFile = path.join(outDir, `price_${key}.svg`);
    fs.writeFileSync(priceFile, price);
    written.push(priceFile);
  }
  return written;
}
