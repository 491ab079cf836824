#!/usr/bin/env node
import { plotHeatmaps } from './heatmaps.js';
import { plotTrends } from './trends.js';

function usage(): never {
  console.error('usage: analyze trends|heatmaps --in DIR --out DIR [--mix MIX10[,MIX25]]');
  process.exit(2);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== 'trends' && command !== 'heatmaps') usage();
  let inDir = '';
  let outDir = '';
  let mixList: string[] | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) usage();
    if (flag === '--in') inDir = value;
    else if (flag === '--out') outDir = value;
    else if (flag === '--mix') mixList = value.split(',');
    else usage();
  }
  if (!inDir || !outDir) usage();
  const files =
    command === 'trends'
      ? plotTrends(inDir, outDir, { mixes: mixList })
      : plotHeatmaps(inDir, outDir, { mixes: mixList });
  console.log(`${files.length} figures written to ${outDir}`);
  return 0;
}

main(process.argv.slice(2));
