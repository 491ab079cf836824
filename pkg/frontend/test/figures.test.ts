import { describe, expect, it } from 'vitest';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { buildChart } from '../src/trends.js';
import { buildHeatmap } from '../src/heatmaps.js';
import { plotTrends } from '../src/trends.js';
import { plotHeatmaps } from '../src/heatmaps.js';
import { loadEdgeStats, loadMatrix, loadNetwork } from '../src/model.js';
import { SchemaError } from '../src/csv.js';

const FIXTURE = path.join(__dirname, 'fixtures', 'matrix');

function tmpdir(name: string): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), name));
  return dir;
}

describe('buildChart', () => {
  it('renders markers and whiskers for a series', () => {
    const svg = buildChart('price - test', 'EUR', [
      {
        label: 'auction',
        points: [
          { x: 0.2, mean: 0.6, p10: 0.5, p90: 1.0 },
          { x: 1.0, mean: 0.7, p10: 0.5, p90: 1.0 },
        ],
      },
    ]);
    expect(svg).toContain('<svg');
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThanOrEqual(2);
    expect(svg).toContain('price - test');
  });

  it('handles a single marker without crashing', () => {
    const svg = buildChart('one', 'm', [
      { label: 'auction', points: [{ x: 0.6, mean: 42 }] },
    ]);
    expect(svg).toContain('<circle');
  });

  it('is a pure function of its inputs', () => {
    const series = [
      { label: 'auction', points: [{ x: 0.2, mean: 1 }, { x: 0.4, mean: 2 }] },
    ];
    expect(buildChart('t', 'u', series)).toEqual(buildChart('t', 'u', series));
  });
});

describe('buildHeatmap', () => {
  const net = loadNetwork(FIXTURE);

  it('colors a uniform field uniformly', () => {
    const streets = net.edges
      .filter((e) => e.from < e.to)
      .map((e) => ({ x1: e.x1, y1: e.y1, x2: e.x2, y2: e.y2, value: 0.5 }));
    const svg = buildHeatmap(net, streets, 'uniform', 0, 1);
    const colors = new Set(
      [...svg.matchAll(/stroke="(rgb[^"]+)" stroke-width="7"/g)].map((m) => m[1]),
    );
    expect(colors.size).toBe(1);
  });

  it('separates hot and cold streets', () => {
    const streets = net.edges
      .filter((e) => e.from < e.to)
      .map((e, i) => ({ x1: e.x1, y1: e.y1, x2: e.x2, y2: e.y2, value: i % 2 }));
    const svg = buildHeatmap(net, streets, 'split', 0, 1);
    const colors = new Set(
      [...svg.matchAll(/stroke="(rgb[^"]+)" stroke-width="7"/g)].map((m) => m[1]),
    );
    expect(colors.size).toBe(2);
  });
});

describe('integration with a real matrix directory', () => {
  it('regenerates every trend chart with agreeing pre-plot assertions', () => {
    const out = tmpdir('trends-');
    const files = plotTrends(FIXTURE, out);
    // 5 metrics + 3 grouped charts for the single fixture mix.
    expect(files).toHaveLength(8);
    for (const f of files) {
      expect(fs.statSync(f).size).toBeGreaterThan(500);
    }
    const checks = fs.readFileSync(path.join(out, 'trend_checks.txt'), 'utf8');
    expect(checks).toContain('MIX10');
    // The assertion notes restate the primary summaries.
    const rows = loadMatrix(FIXTURE);
    const base = rows.find((r) => r.behavior === 'baseline')!;
    expect(checks).toContain(Number(base.raw['price_mean']).toFixed(3));
  });

  it('regenerates occupancy and price heatmaps for every cell', () => {
    const out = tmpdir('heat-');
    const files = plotHeatmaps(FIXTURE, out);
    const cells = new Set(
      loadEdgeStats(FIXTURE).map((r) => `${r.mix}_${r.behavior}_${r.penetration}`),
    );
    expect(files).toHaveLength(2 * cells.size);
    for (const f of files) {
      expect(fs.statSync(f).size).toBeGreaterThan(500);
    }
  });

  it('reports an edge/network mismatch', () => {
    const broken = tmpdir('broken-');
    for (const name of ['matrix.csv', 'network.txt', 'summary.csv']) {
      fs.copyFileSync(path.join(FIXTURE, name), path.join(broken, name));
    }
    const stats = fs
      .readFileSync(path.join(FIXTURE, 'edge_stats.csv'), 'utf8')
      .split('\n')
      .filter((ln) => !ln.startsWith('MIX10,auction,1.0,17,'))
      .join('\n');
    fs.writeFileSync(path.join(broken, 'edge_stats.csv'), stats);
    expect(() => plotHeatmaps(broken, tmpdir('heatout-'))).toThrow(SchemaError);
  });

  it('fails fast when matrix.csv lacks a metric column', () => {
    const broken = tmpdir('schema-');
    for (const name of ['edge_stats.csv', 'network.txt']) {
      fs.copyFileSync(path.join(FIXTURE, name), path.join(broken, name));
    }
    const matrix = fs.readFileSync(path.join(FIXTURE, 'matrix.csv'), 'utf8');
    fs.writeFileSync(
      path.join(broken, 'matrix.csv'),
      matrix.replace('flow_veh_h', 'renamed'),
    );
    expect(() => plotTrends(broken, tmpdir('out-'))).toThrow(/flow_veh_h/);
  });
});
