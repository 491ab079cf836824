import * as fs from 'fs';
import * as path from 'path';
import { Row, SchemaError, num, readCsv } from './csv.js';

export const METRICS = ['price', 'distance', 'route_length', 'flow', 'success_rate'] as const;
export type Metric = (typeof METRICS)[number];

/** matrix.csv columns backing each plottable metric. */
export const METRIC_COLUMNS: Record<Metric, { mean: string; p10?: string; p90?: string; unit: string }> = {
  price: { mean: 'price_mean', p10: 'price_p10', p90: 'price_p90', unit: 'EUR' },
  distance: { mean: 'park_dist_mean', p10: 'park_dist_p10', p90: 'park_dist_p90', unit: 'm' },
  route_length: { mean: 'route_len_mean', p10: 'route_len_p10', p90: 'route_len_p90', unit: 'm' },
  flow: { mean: 'flow_veh_h', unit: 'veh/h' },
  success_rate: { mean: 'success_rate', unit: '' },
};

export interface MatrixRow {
  mix: string;
  behavior: string;
  penetration: number;
  raw: Row;
}

export interface EdgeStatRow {
  mix: string;
  behavior: string;
  penetration: number;
  edge: number;
  occupancy: number;
  meanPrice: number;
}

export interface NetworkEdge {
  id: number;
  from: number;
  to: number;
  ring: number;
  zone: string;
  basePrice: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface NetworkDump {
  rows: number;
  cols: number;
  spacing: number;
  edges: NetworkEdge[];
}

const MATRIX_REQUIRED = [
  'mix', 'behavior', 'penetration', 'price_mean', 'park_dist_mean',
  'route_len_mean', 'flow_veh_h', 'success_rate',
  'part_price_mean', 'nonpart_price_mean', 'part_park_dist_mean',
];

export function loadMatrix(dir: string): MatrixRow[] {
  const rows = readCsv(path.join(dir, 'matrix.csv'), MATRIX_REQUIRED);
  return rows.map((raw) => ({
    mix: raw['mix'],
    behavior: raw['behavior'],
    penetration: Number(raw['penetration']),
    raw,
  }));
}

export function loadEdgeStats(dir: string): EdgeStatRow[] {
  const rows = readCsv(path.join(dir, 'edge_stats.csv'), [
    'mix', 'behavior', 'penetration', 'edge', 'occupancy',
  ]);
  return rows.map((r) => ({
    mix: r['mix'],
    behavior: r['behavior'],
    penetration: Number(r['penetration']),
    edge: Number(r['edge']),
    occupancy: num(r, 'occupancy'),
    meanPrice: r['mean_paid_price'] === '' ? NaN : Number(r['mean_paid_price']),
  }));
}

export function loadNetwork(dir: string): NetworkDump {
  const text = fs.readFileSync(path.join(dir, 'network.txt'), 'utf8');
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  const head = lines[0].split(' ');
  if (head[0] !== 'grid') throw new SchemaError('network.txt: expected grid header');
  const edges: NetworkEdge[] = [];
  for (const ln of lines.slice(1)) {
    const f = ln.split(' ');
    if (f[0] !== 'edge') continue;
    edges.push({
      id: Number(f[1]),
      from: Number(f[2]),
      to: Number(f[3]),
      ring: Number(f[5]),
      zone: f[6],
      basePrice: Number(f[7]),
      x1: Number(f[8]),
      y1: Number(f[9]),
      x2: Number(f[10]),
      y2: Number(f[11]),
    });
  }
  return {
    rows: Number(head[1]),
    cols: Number(head[2]),
    spacing: Number(head[3]),
    edges,
  };
}

export function mixes(rows: MatrixRow[]): string[] {
  return [...new Set(rows.map((r) => r.mix))].sort();
}

export function behaviors(rows: MatrixRow[]): string[] {
  const order = ['baseline', 'information', 'auction'];
  return [...new Set(rows.map((r) => r.behavior))].sort(
    (a, b) => order.indexOf(a) - order.indexOf(b),
  );
}
