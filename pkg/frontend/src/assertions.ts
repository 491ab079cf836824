import { MatrixRow, mixes } from './model.js';
import { num } from './csv.js';

export class TrendError extends Error {}

function series(rows: MatrixRow[], mix: string, behavior: string, col: string): number[] {
  return rows
    .filter((r) => r.mix === mix && r.behavior === behavior && r.penetration > 0)
    .sort((a, b) => a.penetration - b.penetration)
    .map((r) => num(r.raw, col));
}

function baseline(rows: MatrixRow[], mix: string, col: string): number {
  const row = rows.find((r) => r.mix === mix && r.behavior === 'baseline');
  if (!row) throw new TrendError(`no baseline row for ${mix}`);
  return num(row.raw, col);
}

/** Numeric checks run before any figure is drawn: the auction's paid price
 *  must rise with penetration and its participant parking distance must
 *  fall, for every mix that has auction rows. */
export function assertTrendDirections(rows: MatrixRow[]): string[] {
  const notes: string[] = [];
  for (const mix of mixes(rows)) {
    const price = series(rows, mix, 'auction', 'price_mean');
    const dist = series(rows, mix, 'auction', 'part_park_dist_mean');
    if (price.length === 0) continue;
    if (price.length > 1) {
      const last = price[price.length - 1];
      if (!(last > price[0])) {
        throw new TrendError(
          `${mix}: auction price trend is not increasing (${price[0]} -> ${last})`,
        );
      }
      const dLast = dist[dist.length - 1];
      if (!(dLast < dist[0])) {
        throw new TrendError(
          `${mix}: participant parking distance is not decreasing (${dist[0]} -> ${dLast})`,
        );
      }
      const base = baseline(rows, mix, 'price_mean');
      notes.push(
        `${mix}: price ${price[0].toFixed(3)}->${price[price.length - 1].toFixed(3)} ` +
          `(baseline ${base.toFixed(3)}), distance ${dist[0].toFixed(0)}->${dLast.toFixed(0)} m`,
      );
    } else {
      notes.push(`${mix}: single penetration level, direction checks skipped`);
    }
  }
  return notes;
}
