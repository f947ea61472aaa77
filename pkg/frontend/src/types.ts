/** Wire types of the review service JSON API (schema_version 1). */

export type Tower = 'RV' | 'LH' | 'LV' | 'RH';

export const TOWERS: readonly Tower[] = ['RV', 'LH', 'LV', 'RH'];

export interface RectDoc {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface SegmentDoc {
  tower: Tower;
  start_frame: number;
  end_frame: number;
  roi: RectDoc;
  end_zone_x: number | null;
}

export interface CrashDoc {
  start_frame: number;
  end_frame: number;
}

export interface SessionDoc {
  schema_version: number;
  source_id: string;
  frame_count: number;
  width: number;
  height: number;
  segments: SegmentDoc[];
  crashes: CrashDoc[];
  auto_provenance: string;
  dirty: boolean;
}

/** Inclusive [start_frame, end_frame] pair. */
export type Interval = [number, number];

export interface LabelsDoc {
  schema_version: number;
  source_id: string;
  provenance: 'auto' | 'corrected';
  intervals: Record<Tower, Interval[]>;
}

export interface ConfusionCell {
  tp: number;
  tn: number;
  fp: number;
  fn: number;
  accuracy: number | null;
  tpr: number | null;
  tnr: number | null;
  f1: number | null;
}

export type ConfusionDoc = Record<string, ConfusionCell>;

export interface MasksDoc {
  schema_version: number;
  active_tower: Tower | null;
  tower: number[][][];
  ring: number[][][];
}
