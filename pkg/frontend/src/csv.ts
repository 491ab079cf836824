import * as fs from 'fs';

export class SchemaError extends Error {}

export type Row = Record<string, string>;

/** Parse simple comma-separated text with a header row. The simulator's
 *  writers never emit quoted fields, so no quote handling is needed. */
export function parseCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) return [];
  const header = lines[0].split(',');
  return lines.slice(1).map((ln) => {
    const cells = ln.split(',');
    const row: Row = {};
    header.forEach((name, i) => {
      row[name] = cells[i] ?? '';
    });
    return row;
  });
}

export function readCsv(path: string, required: string[] = []): Row[] {
  const rows = parseCsv(fs.readFileSync(path, 'utf8'));
  if (required.length > 0) {
    const have = new Set(rows.length > 0 ? Object.keys(rows[0]) : []);
    for (const col of required) {
      if (!have.has(col)) {
        throw new SchemaError(`${path}: missing column ${col}`);
      }
    }
  }
  return rows;
}

export function num(row: Row, col: string): number {
  const v = row[col];
  if (v === undefined) throw new SchemaError(`missing column ${col}`);
  return v === '' ? NaN : Number(v);
}
