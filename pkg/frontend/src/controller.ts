/** Session controller: state + API with optimistic updates and rollback.
 * One mutation is in flight at a time; reads may overlap it. */

import type { ReviewApi } from './api.js';
import {
  cloneFrames,
  framesFromDoc,
  intervalsFromFrames,
  toLabelsDoc,
  toggleError,
  validateLabels,
} from './labels.js';
import {
  applyToggle,
  blankState,
  initialState,
  jumpToTower,
  rollback,
  stepFrame,
  toggleOverlay,
  type OverlayToggles,
  type UiSessionState,
} from './state.js';
import type { ConfusionDoc, Tower } from './types.js';

export class ReviewController {
  state: UiSessionState = blankState();
  confusion: ConfusionDoc = {};
  private mutating = false;

  constructor(
    private readonly api: ReviewApi,
    private readonly onChange: () => void = () => {},
  ) {}

  async load(): Promise<void> {
    const session = await this.api.session();
    const labels = await this.api.labels();
    this.state = initialState(session, framesFromDoc(labels));
    await this.refreshConfusion();
    this.onChange();
  }

  step(delta: number): void {
    this.state = stepFrame(this.state, delta);
    this.onChange();
  }

  goTo(frame: number): void {
    this.state = stepFrame({ ...this.state, frame: 0 }, frame);
    this.onChange();
  }

  jump(tower: Tower): void {
    this.state = jumpToTower(this.state, tower);
    this.onChange();
  }

  flipOverlay(key: keyof OverlayToggles): void {
    this.state = toggleOverlay(this.state, key);
    this.onChange();
  }

  canToggle(frame: number, tower: Tower): boolean {
    return toggleError(this.state.session.segments, this.state.session.crashes, frame, tower) === null;
  }

  /** Optimistic flip of one frame's label; rolls back on server rejection. */
  async toggle(frame: number, tower: Tower): Promise<void> {
    const reason = toggleError(
      this.state.session.segments,
      this.state.session.crashes,
      frame,
      tower,
    );
    if (reason !== null) {
      this.state = { ...this.state, error: reason };
      this.onChange();
      return;
    }
    if (this.mutating) return;
    this.mutating = true;
    const { next, previous } = applyToggle(this.state, frame, tower);
    this.state = next;
    this.onChange();
    try {
      const doc = await this.api.toggle(frame, tower);
      this.state = { ...this.state, working: framesFromDoc(doc) };
      await this.refreshConfusion();
    } catch (err) {
      this.state = rollback(this.state, previous, err instanceof Error ? err.message : String(err));
    } finally {
      this.mutating = false;
      this.onChange();
    }
  }

  /** Push the full working set (used after bulk edits); validated locally first. */
  async pushLabels(): Promise<void> {
    const doc = toLabelsDoc(this.state.working, this.state.session.source_id);
    const errors = validateLabels(doc, this.state.session.segments, this.state.session.crashes);
    if (errors.length > 0) {
      this.state = { ...this.state, error: errors.join('; ') };
      this.onChange();
      return;
    }
    if (this.mutating) return;
    this.mutating = true;
    try {
      const saved = await this.api.putLabels(doc);
      this.state = { ...this.state, working: framesFromDoc(saved), dirty: true, error: null };
      await this.refreshConfusion();
    } catch (err) {
      this.state = { ...this.state, error: err instanceof Error ? err.message : String(err) };
    } finally {
      this.mutating = false;
      this.onChange();
    }
  }

  /** Label a whole frame range on one tower (interval-level editing). */
  async addRange(tower: Tower, a: number, b: number): Promise<void> {
    const [lo, hi] = a <= b ? [a, b] : [b, a];
    const working = cloneFrames(this.state.working);
    for (let f = lo; f <= hi; f++) working[tower].add(f);
    this.state = { ...this.state, working, dirty: true };
    await this.pushLabels();
  }

  /** Drop the whole interval containing the frame, if any. */
  async removeIntervalAt(tower: Tower, frame: number): Promise<void> {
    const interval = intervalsFromFrames(this.state.working[tower]).find(
      ([s, e]) => s <= frame && frame <= e,
    );
    if (!interval) return;
    const working = cloneFrames(this.state.working);
    for (let f = interval[0]; f <= interval[1]; f++) working[tower].delete(f);
    this.state = { ...this.state, working, dirty: true };
    await this.pushLabels();
  }

  async save(): Promise<string | null> {
    if (this.mutating) return null;
    this.mutating = true;
    try {
      const result = await this.api.save();
      this.state = { ...this.state, dirty: false, error: null };
      return result.saved;
    } catch (err) {
      this.state = { ...this.state, error: err instanceof Error ? err.message : String(err) };
      return null;
    } finally {
      this.mutating = false;
      this.onChange();
    }
  }

  async refreshConfusion(): Promise<void> {
    this.confusion = await this.api.confusion();
  }
}
