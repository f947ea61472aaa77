/** Display model for the live auto-vs-corrected confusion panel. */

import type { ConfusionCell, ConfusionDoc } from './types.js';

export interface ConfusionRow {
  name: string;
  tp: number;
  tn: number;
  fp: number;
  fn: number;
  accuracy: string;
  tpr: string;
  tnr: string;
  f1: string;
}

export function formatRate(value: number | null): string {
  return value === null ? 'n/a' : `${(value * 100).toFixed(2)}%`;
}

export function toRow(name: string, cell: ConfusionCell): ConfusionRow {
  return {
    name,
    tp: cell.tp,
    tn: cell.tn,
    fp: cell.fp,
    fn: cell.fn,
    accuracy: formatRate(cell.accuracy),
    tpr: formatRate(cell.tpr),
    tnr: formatRate(cell.tnr),
    f1: formatRate(cell.f1),
  };
}

export function confusionRows(doc: ConfusionDoc): ConfusionRow[] {
  const order = ['RV', 'LH', 'LV', 'RH', 'pooled'];
  return order.filter((name) => name in doc).map((name) => toRow(name, doc[name]!));
}
