#!/usr/bin/env node
// dataset-tools CLI: convert external channel dumps to CSIBIN and render
// RD reports to SVG figures.
//
//   convert --input dump.npy --out-prefix data/cost --n-train 8000
//           [--normalize] [--mat-samples first|last]
//   plot    --report sweep.json --out sweep.svg [--title "..."]

import * as fs from 'fs';

import { convertFile } from './convert';
import { renderRdPlot } from './plot';
import { SchemaMismatch } from './report';
import { UnknownLayout } from './npy';

function parseFlags(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (!a.startsWith('--')) throw new Error(`unexpected argument ${a}`);
    const key = a.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith('--')) {
      out.set(key, argv[++i]);
    } else {
      out.set(key, 'true');
    }
  }
  return out;
}

function need(flags: Map<string, string>, key: string): string {
  const v = flags.get(key);
  if (v === undefined) throw new Error(`missing required --${key}`);
  return v;
}

function cmdConvert(argv: string[]): number {
  const flags = parseFlags(argv);
  const manifest = convertFile(need(flags, 'input'), need(flags, 'out-prefix'), {
    nTrain: parseInt(need(flags, 'n-train'), 10),
    normalize: flags.get('normalize') === 'true',
    matSamples: (flags.get('mat-samples') as 'first' | 'last') ?? 'last',
  });
  process.stdout.write(JSON.stringify(manifest) + '\n');
  return 0;
}

function cmdPlot(argv: string[]): number {
  const flags = parseFlags(argv);
  const doc = JSON.parse(fs.readFileSync(need(flags, 'report'), 'utf8'));
  const { svg, warnings } = renderRdPlot(doc, { title: flags.get('title') });
  const out = need(flags, 'out');
  fs.writeFileSync(out, svg + '\n');
  for (const w of warnings) process.stderr.write(`warning: ${w}\n`);
  process.stdout.write(JSON.stringify({ out, warnings: warnings.length }) + '\n');
  return 0;
}

export function main(argv: string[]): number {
  const [verb, ...rest] = argv;
  try {
    if (verb === 'convert') return cmdConvert(rest);
    if (verb === 'plot') return cmdPlot(rest);
    process.stderr.write(
      'usage: gmtc-dataset-tools {convert|plot} --help-less flags\n');
    return 2;
  } catch (err) {
    if (err instanceof UnknownLayout || err instanceof SchemaMismatch) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 3;
    }
    if (err instanceof Error && (err as NodeJS.ErrnoException).code === 'ENOENT') {
      process.stderr.write(`error: ${err.message}\n`);
      return 3;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
