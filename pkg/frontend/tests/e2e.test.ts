/** End-to-end round trip against a live review service.
 *
 * Renders a synthetic case with the backend CLI, detects auto labels,
 * starts the service, then drives the real client stack: toggles five
 * frames across two towers, saves, reloads a fresh session and checks the
 * corrected set is identical, and cross-checks the confusion panel against
 * the evaluate command run on the saved files.
 */

import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ReviewApi } from '../src/api.js';
import { ReviewController } from '../src/controller.js';
import { framesEqual, toLabelsDoc } from '../src/labels.js';
import type { Tower } from '../src/types.js';

const PORT = 8700 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let workDir: string;
let server: ChildProcess | null = null;

function runCli(...args: string[]): void {
  const result = spawnSync('python3', ['-m', 'ringtower.cli', ...args], {
    encoding: 'utf-8',
  });
  if (result.status !== 0) {
    throw new Error(`cli ${args[0]} failed: ${result.stderr || result.stdout}`);
  }
}

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 120; attempt++) {
    try {
      const resp = await fetch(`${BASE}/session`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error('review service did not come up');
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'review-e2e-'));
  const script = {
    schema_version: 1,
    name: 'e2e',
    seed: 29,
    segment_frames: 60,
    gap_frames: 8,
    jitter: [{ tower: 'RV', start_frame: 25, end_frame: 46, dx: 3, dy: 2 }],
    crashes: [],
  };
  writeFileSync(join(workDir, 'script.json'), JSON.stringify(script));
  runCli('synth', '--script', join(workDir, 'script.json'), '-o', join(workDir, 'case'));
  runCli(
    'detect',
    '--frames', join(workDir, 'case', 'frames'),
    '--timestamps', join(workDir, 'case', 'timestamps.csv'),
    '--segmentation', join(workDir, 'case', 'segmentation.json'),
    '-o', join(workDir, 'auto.json'),
  );
  server = spawn('python3', [
    '-m', 'ringtower.cli', 'serve',
    '--frames', join(workDir, 'case', 'frames'),
    '--timestamps', join(workDir, 'case', 'timestamps.csv'),
    '--segmentation', join(workDir, 'case', 'segmentation.json'),
    '--labels', join(workDir, 'auto.json'),
    '--out', join(workDir, 'corrected.json'),
    '--port', String(PORT),
  ]);
  await waitForService();
});

afterAll(() => {
  server?.kill();
});

describe('review round trip', () => {
  it('toggles five frames across two towers, saves, reloads identically', async () => {
    const api = new ReviewApi(BASE);
    const controller = new ReviewController(api);
    await controller.load();

    const rv = controller.state.session.segments.find((s) => s.tower === 'RV')!;
    const lh = controller.state.session.segments.find((s) => s.tower === 'LH')!;
    const edits: Array<[number, Tower]> = [
      [rv.start_frame + 3, 'RV'],
      [rv.start_frame + 4, 'RV'],
      [rv.start_frame + 30, 'RV'],  // inside the auto-detected interval: a split
      [lh.start_frame + 10, 'LH'],
      [lh.start_frame + 11, 'LH'],
    ];
    for (const [frame, tower] of edits) {
      await controller.toggle(frame, tower);
      expect(controller.state.error).toBeNull();
    }
    expect(controller.state.dirty).toBe(true);

    const savedPath = await controller.save();
    expect(savedPath).toBe(join(workDir, 'corrected.json'));
    expect(controller.state.dirty).toBe(false);

    // a freshly loaded session must observe the identical corrected set
    const reloaded = new ReviewController(new ReviewApi(BASE));
    await reloaded.load();
    expect(framesEqual(reloaded.state.working, controller.state.working)).toBe(true);

    // and the saved file itself round-trips through the document format
    const savedDoc = JSON.parse(readFileSync(savedPath!, 'utf-8'));
    expect(savedDoc.provenance).toBe('corrected');
    expect(savedDoc).toEqual(
      toLabelsDoc(controller.state.working, controller.state.session.source_id),
    );
  });

  it('confusion panel equals the evaluate command on the saved files', async () => {
    const api = new ReviewApi(BASE);
    const live = await api.confusion();

    const confusionCsv = join(workDir, 'confusion.csv');
    runCli(
      'evaluate',
      '--pred', join(workDir, 'auto.json'),
      '--truth', join(workDir, 'corrected.json'),
      '--segmentation', join(workDir, 'case', 'segmentation.json'),
      '-o', confusionCsv,
    );
    const lines = readFileSync(confusionCsv, 'utf-8').trim().split(/\r?\n/);
    const header = lines[0]!.split(',');
    const byTower: Record<string, Record<string, string>> = {};
    for (const line of lines.slice(1)) {
      const cells = line.split(',');
      const row = Object.fromEntries(header.map((h, i) => [h, cells[i] ?? '']));
      byTower[row['tower']!] = row;
    }

    for (const name of ['RV', 'LH', 'LV', 'RH', 'pooled']) {
      const csvRow = byTower[name]!;
      const cell = live[name]!;
      expect(cell.tp).toBe(Number(csvRow['tp']));
      expect(cell.tn).toBe(Number(csvRow['tn']));
      expect(cell.fp).toBe(Number(csvRow['fp']));
      expect(cell.fn).toBe(Number(csvRow['fn']));
      for (const rate of ['accuracy', 'tpr', 'tnr', 'f1'] as const) {
        const expected = csvRow[rate] === '' ? null : Number(csvRow[rate]);
        if (expected === null) {
          expect(cell[rate]).toBeNull();
        } else {
          expect(cell[rate]).toBeCloseTo(expected, 9);
        }
      }
    }
  });

  it('rejects an out-of-segment toggle locally and an invalid put remotely', async () => {
    const api = new ReviewApi(BASE);
    const controller = new ReviewController(api);
    await controller.load();
    const before = controller.state.working;

    await controller.toggle(controller.state.session.frame_count + 5, 'RV');
    expect(controller.state.error).toMatch(/outside/);
    expect(framesEqual(controller.state.working, before)).toBe(true);

    // a server rejection must roll the optimistic flip back
    const doc = toLabelsDoc(controller.state.working, controller.state.session.source_id);
    doc.intervals.RV = [[0, 4]]; // outside the RV segment
    await expect(api.putLabels(doc)).rejects.toThrow(/outside segment/);
  });
});
