/** Pure UI session state and its transitions (no DOM, no network). */

import { cloneFrames, emptyLabelFrames, type LabelFrames } from './labels.js';
import type { SegmentDoc, SessionDoc, Tower } from './types.js';

export interface OverlayToggles {
  towerMask: boolean;
  ringMask: boolean;
  tint: boolean;
}

export interface UiSessionState {
  frame: number;
  session: SessionDoc;
  working: LabelFrames;
  dirty: boolean;
  overlays: OverlayToggles;
  /** last validation/service error to surface, if any */
  error: string | null;
}

export function initialState(session: SessionDoc, working: LabelFrames): UiSessionState {
  const first = session.segments[0];
  return {
    frame: first ? first.start_frame : 0,
    session,
    working,
    dirty: session.dirty,
    overlays: { towerMask: true, ringMask: true, tint: true },
    error: null,
  };
}

export function clampFrame(state: UiSessionState, frame: number): number {
  return Math.min(Math.max(frame, 0), state.session.frame_count - 1);
}

export function stepFrame(state: UiSessionState, delta: number): UiSessionState {
  return { ...state, frame: clampFrame(state, state.frame + delta) };
}

export function jumpToTower(state: UiSessionState, tower: Tower): UiSessionState {
  const seg = state.session.segments.find((s) => s.tower === tower);
  if (!seg) return state;
  return { ...state, frame: clampFrame(state, seg.start_frame) };
}

export function activeSegment(state: UiSessionState): SegmentDoc | null {
  return (
    state.session.segments.find(
      (s) => s.start_frame <= state.frame && state.frame <= s.end_frame,
    ) ?? null
  );
}

export function isLabeled(state: UiSessionState, frame: number, tower: Tower): boolean {
  return state.working[tower].has(frame);
}

/** Local optimistic flip; the caller keeps the returned previous copy for rollback. */
export function applyToggle(
  state: UiSessionState,
  frame: number,
  tower: Tower,
): { next: UiSessionState; previous: LabelFrames } {
  const previous = cloneFrames(state.working);
  const working = cloneFrames(state.working);
  if (working[tower].has(frame)) {
    working[tower].delete(frame);
  } else {
    working[tower].add(frame);
  }
  return { next: { ...state, working, dirty: true, error: null }, previous };
}

export function rollback(state: UiSessionState, previous: LabelFrames, error: string): UiSessionState {
  return { ...state, working: previous, error };
}

export function toggleOverlay(state: UiSessionState, key: keyof OverlayToggles): UiSessionState {
  return { ...state, overlays: { ...state.overlays, [key]: !state.overlays[key] } };
}

export function blankState(): UiSessionState {
  return initialState(
    {
      schema_version: 1,
      source_id: '',
      frame_count: 1,
      width: 0,
      height: 0,
      segments: [],
      crashes: [],
      auto_provenance: 'auto',
      dirty: false,
    },
    emptyLabelFrames(),
  );
}
