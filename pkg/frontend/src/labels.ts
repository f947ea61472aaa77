/** Label-set arithmetic and the client-side mirror of the server's
 * interval validation, so invalid edits never survive a render cycle. */

import type { CrashDoc, Interval, LabelsDoc, SegmentDoc, Tower } from './types.js';
import { TOWERS } from './types.js';

export type LabelFrames = Record<Tower, Set<number>>;

export function emptyLabelFrames(): LabelFrames {
  return { RV: new Set(), LH: new Set(), LV: new Set(), RH: new Set() };
}

export function framesFromDoc(doc: LabelsDoc): LabelFrames {
  const out = emptyLabelFrames();
  for (const tower of TOWERS) {
    for (const [start, end] of doc.intervals[tower]) {
      for (let f = start; f <= end; f++) out[tower].add(f);
    }
  }
  return out;
}

export function intervalsFromFrames(frames: Set<number>): Interval[] {
  const sorted = [...frames].sort((a, b) => a - b);
  const out: Interval[] = [];
  for (const f of sorted) {
    const last = out[out.length - 1];
    if (last && f === last[1] + 1) {
      last[1] = f;
    } else {
      out.push([f, f]);
    }
  }
  return out;
}

export function toLabelsDoc(frames: LabelFrames, sourceId: string): LabelsDoc {
  return {
    schema_version: 1,
    source_id: sourceId,
    provenance: 'corrected',
    intervals: {
      RV: intervalsFromFrames(frames.RV),
      LH: intervalsFromFrames(frames.LH),
      LV: intervalsFromFrames(frames.LV),
      RH: intervalsFromFrames(frames.RH),
    },
  };
}

export function cloneFrames(frames: LabelFrames): LabelFrames {
  return {
    RV: new Set(frames.RV),
    LH: new Set(frames.LH),
    LV: new Set(frames.LV),
    RH: new Set(frames.RH),
  };
}

export function framesEqual(a: LabelFrames, b: LabelFrames): boolean {
  return TOWERS.every(
    (t) => a[t].size === b[t].size && [...a[t]].every((f) => b[t].has(f)),
  );
}

export function isCrashFrame(crashes: CrashDoc[], frame: number): boolean {
  return crashes.some((c) => c.start_frame <= frame && frame <= c.end_frame);
}

export function segmentFor(segments: SegmentDoc[], tower: Tower): SegmentDoc {
  const seg = segments.find((s) => s.tower === tower);
  if (!seg) throw new Error(`no segment for tower ${tower}`);
  return seg;
}

/** Why a toggle would be rejected, or null when it is allowed. */
export function toggleError(
  segments: SegmentDoc[],
  crashes: CrashDoc[],
  frame: number,
  tower: Tower,
): string | null {
  const seg = segmentFor(segments, tower);
  if (frame < seg.start_frame || frame > seg.end_frame) {
    return `frame ${frame} outside the ${tower} segment [${seg.start_frame}, ${seg.end_frame}]`;
  }
  if (isCrashFrame(crashes, frame)) {
    return `frame ${frame} lies in a crash interval`;
  }
  return null;
}

/** Mirror of the server-side interval checks for corrected label sets. */
export function validateLabels(
  doc: LabelsDoc,
  segments: SegmentDoc[],
  crashes: CrashDoc[],
): string[] {
  const errors: string[] = [];
  for (const tower of TOWERS) {
    const seg = segmentFor(segments, tower);
    const intervals = doc.intervals[tower];
    intervals.forEach(([start, end], k) => {
      if (start > end) errors.push(`${tower}: interval ${k} has start > end`);
      const prev = intervals[k - 1];
      if (prev && start <= prev[1]) {
        errors.push(`${tower}: intervals overlap or are unsorted at ${k}`);
      }
      if (start < seg.start_frame || end > seg.end_frame) {
        errors.push(`${tower}: interval [${start}, ${end}] outside segment`);
      }
      for (let f = start; f <= end; f++) {
        if (isCrashFrame(crashes, f)) {
          errors.push(`${tower}: frame ${f} lies in a crash interval`);
          break;
        }
      }
    });
  }
  return errors;
}
