import * as fs from 'fs';
import * as path from 'path';
import { num } from './csv.js';
import { assertTrendDirections } from './assertions.js';
import {
  METRICS,
  METRIC_COLUMNS,
  MatrixRow,
  Metric,
  behaviors,
  loadMatrix,
  mixes,
} from './model.js';
import { circle, line, polyline, svgDocument, text } from './svg.js';

const WIDTH = 480;
const HEIGHT = 320;
const MARGIN = { left: 56, right: 16, top: 28, bottom: 40 };

const COLORS: Record<string, string> = {
  baseline: '#444444',
  information: '#1f77b4',
  auction: '#d62728',
  participants: '#d62728',
  'non-participants': '#1f77b4',
};

interface Point {
  x: number;
  mean: number;
  p10?: number;
  p90?: number;
}

export interface TrendSeries {
  label: string;
  points: Point[];
}

function seriesFor(
  rows: MatrixRow[],
  mix: string,
  behavior: string,
  metric: Metric,
  prefix = '',
): TrendSeries {
  const cols = METRIC_COLUMNS[metric];
  const points: Point[] = [];
  for (const r of rows
    .filter((r) => r.mix === mix && r.behavior === behavior)
    .sort((a, b) => a.penetration - b.penetration)) {
    const mean = num(r.raw, prefix + cols.mean);
    if (Number.isNaN(mean)) continue;
    const pt: Point = { x: r.penetration, mean };
    if (!prefix && cols.p10 && cols.p90) {
      pt.p10 = num(r.raw, cols.p10);
      pt.p90 = num(r.raw, cols.p90);
    }
    points.push(pt);
  }
  return { label: prefix ? prefix.replace(/_$/, '') : behavior, points };
}

export function buildChart(title: string, unit: string, series: TrendSeries[]): string {
  const all = series.flatMap((s) =>
    s.points.flatMap((p) => [p.mean, p.p10 ?? p.mean, p.p90 ?? p.mean]),
  );
  if (all.length === 0) {
    return svgDocument(WIDTH, HEIGHT, text(WIDTH / 2, HEIGHT / 2, 'no data', 'middle'));
  }
  let lo = Math.min(...all);
  let hi = Math.max(...all);
  if (hi === lo) {
    lo -= 1;
    hi += 1;
  }
  const pad = (hi - lo) * 0.08;
  lo -= pad;
  hi += pad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + x * plotW;
  const sy = (v: number) => MARGIN.top + (hi - v) / (hi - lo) * plotH;

  const parts: string[] = [];
  parts.push(text(MARGIN.left, MARGIN.top - 10, title));
  parts.push(line(MARGIN.left, MARGIN.top, MARGIN.left, MARGIN.top + plotH, '#999'));
  parts.push(line(MARGIN.left, MARGIN.top + plotH, MARGIN.left + plotW, MARGIN.top + plotH, '#999'));
  for (let i = 0; i <= 5; i++) {
    const x = i / 5;
    parts.push(line(sx(x), MARGIN.top + plotH, sx(x), MARGIN.top + plotH + 4, '#999'));
    parts.push(text(sx(x), MARGIN.top + plotH + 16, `${i * 20}%`, 'middle'));
  }
  for (let i = 0; i <= 4; i++) {
    const v = lo + ((hi - lo) * i) / 4;
    parts.push(line(MARGIN.left - 4, sy(v), MARGIN.left, sy(v), '#999'));
    parts.push(text(MARGIN.left - 7, sy(v) + 4, format(v), 'end'));
  }
  parts.push(text(MARGIN.left + plotW, MARGIN.top + plotH + 32, `market penetration (${unit})`, 'end'));

  let legendY = MARGIN.top + 6;
  for (const s of series) {
    if (s.points.length === 0) continue;
    const color = COLORS[s.label] ?? '#2ca02c';
    if (s.points.length > 1) {
      parts.push(polyline(s.points.map((p) => [sx(p.x), sy(p.mean)]), color));
    }
    for (const p of s.points) {
      if (p.p10 !== undefined && p.p90 !== undefined) {
        parts.push(line(sx(p.x), sy(p.p10), sx(p.x), sy(p.p90), color));
        parts.push(line(sx(p.x) - 3, sy(p.p10), sx(p.x) + 3, sy(p.p10), color));
        parts.push(line(sx(p.x) - 3, sy(p.p90), sx(p.x) + 3, sy(p.p90), color));
      }
      parts.push(circle(sx(p.x), sy(p.mean), 3, color));
    }
    parts.push(circle(MARGIN.left + plotW - 110, legendY, 3, color));
    parts.push(text(MARGIN.left + plotW - 102, legendY + 4, s.label));
    legendY += 14;
  }
  return svgDocument(WIDTH, HEIGHT, parts.join('\n'));
}

function format(v: number): string {
  const a = Math.abs(v);
  if (a >= 100) return v.toFixed(0);
  if (a >= 1) return v.toFixed(1);
  return v.toFixed(3);
}

export interface TrendOptions {
  mixes?: string[];
  grouped?: boolean;
}

/** Render one chart per metric and mix (markers at means, whiskers at the
 *  10th/90th percentiles) plus the participant/non-participant split of the
 *  auction rows. Trend-direction assertions run before anything is drawn. */
export function plotTrends(inDir: string, outDir: string, opts: TrendOptions = {}): string[] {
  const rows = loadMatrix(inDir);
  const notes = assertTrendDirections(rows);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const mixList = opts.mixes ?? mixes(rows);
  for (const mix of mixList) {
    for (const metric of METRICS) {
      const cols = METRIC_COLUMNS[metric];
      const series = behaviors(rows)
        .filter((b) => b !== 'baseline')
        .map((b) => seriesFor(rows, mix, b, metric));
      const base = seriesFor(rows, mix, 'baseline', metric);
      if (base.points.length === 1) {
        series.unshift({ label: 'baseline', points: base.points });
      }
      const svg = buildChart(`${metric} - ${mix}`, cols.unit, series);
      const file = path.join(outDir, `trend_${metric}_${mix}.svg`);
      fs.writeFileSync(file, svg);
      written.push(file);
    }
    if (opts.grouped !== false) {
      for (const metric of ['price', 'distance', 'route_length'] as Metric[]) {
        const series = [
          { ...seriesFor(rows, mix, 'auction', metric, 'part_'), label: 'participants' },
          { ...seriesFor(rows, mix, 'auction', metric, 'nonpart_'), label: 'non-participants' },
        ];
        const svg = buildChart(
          `${metric} by participation - ${mix}`,
          METRIC_COLUMNS[metric].unit,
          series,
        );
        const file = path.join(outDir, `grouped_${metric}_${mix}.svg`);
        fs.writeFileSync(file, svg);
        written.push(file);
      }
    }
  }
  fs.writeFileSync(path.join(outDir, 'trend_checks.txt'), notes.join('\n') + '\n');
  return written;
}
