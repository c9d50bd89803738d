/**
 * Readers for the solver's documented run artifacts.
 *
 * A run directory holds summary.json, observables.csv
 * (t,area,wetting,volume,energy,max_abs_G,kappa_spread), one snap_<step>.csv
 * per snapshot (beta,u,rho,G,kappa_beta,kappa_azimuthal) and, after a verify
 * run, verify.json. Nothing else about the solver is assumed here.
 */

import { existsSync, readFileSync, readdirSync } from 'node:fs';
import { join } from 'node:path';

export interface Table {
  columns: string[];
  data: Record<string, number[]>;
  rows: number;
}

export function parseCsv(text: string): Table {
  const lines = text.split('\n').filter((l) => l.trim().length > 0);
  if (lines.length < 1) throw new Error('empty CSV');
  const columns = lines[0].split(',').map((c) => c.trim());
  const data: Record<string, number[]> = {};
  for (const c of columns) data[c] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== columns.length) {
      throw new Error(`CSV row ${i} has ${parts.length} fields, expected ${columns.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const v = Number(parts[j]);
      if (!Number.isFinite(v)) throw new Error(`CSV row ${i}, column ${columns[j]}: not a number`);
      data[columns[j]].push(v);
    }
  }
  return { columns, data, rows: lines.length - 1 };
}

export interface CapFit {
  c: number;
  rhat: number;
  rms: number;
  volume_match: number;
}

export interface Snapshot {
  step: number;
  table: Table;
}

export interface RunData {
  dir: string;
  summary: any;
  capFit: CapFit | null;
  observables: Table;
  snapshots: Snapshot[];
  verify: any | null;
}

function requireFile(dir: string, name: string): string {
  const path = join(dir, name);
  if (!existsSync(path)) throw new Error(`missing input: ${path}`);
  return readFileSync(path, 'utf8');
}

export function loadRun(dir: string): RunData {
  if (!existsSync(dir)) throw new Error(`missing input: ${dir}`);
  const summary = JSON.parse(requireFile(dir, 'summary.json'));
  const observables = parseCsv(requireFile(dir, 'observables.csv'));
  for (const c of ['t', 'area', 'wetting', 'volume', 'energy', 'max_abs_G', 'kappa_spread']) {
    if (!observables.columns.includes(c)) {
      throw new Error(`observables.csv is missing column '${c}'`);
    }
  }

  const snapNames = readdirSync(dir)
    .filter((n) => /^snap_\d+\.csv$/.test(n))
    .sort((a, b) => stepOf(a) - stepOf(b));
  if (snapNames.length === 0) {
    throw new Error(`missing input: ${join(dir, 'snap_<step>.csv')} (no snapshots found)`);
  }
  const snapshots = snapNames.map((n) => ({
    step: stepOf(n),
    table: parseCsv(readFileSync(join(dir, n), 'utf8')),
  }));

  const verifyPath = join(dir, 'verify.json');
  const verify = existsSync(verifyPath) ? JSON.parse(readFileSync(verifyPath, 'utf8')) : null;
  const capFit: CapFit | null = summary.cap_fit ?? null;
  return { dir, summary, capFit, observables, snapshots, verify };
}

function stepOf(name: string): number {
  return Number(name.slice('snap_'.length, -'.csv'.length));
}

/** Evenly spread indices covering first and last, at most `count` of them. */
export function spreadIndices(total: number, count: number): number[] {
  if (total <= count) return Array.from({ length: total }, (_, i) => i);
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    out.push(Math.round((i * (total - 1)) / (count - 1)));
  }
  return [...new Set(out)];
}
