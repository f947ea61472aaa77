/** Typed client for the review service HTTP API. */

import type { ConfusionDoc, LabelsDoc, MasksDoc, SessionDoc, Tower } from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function check<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let message = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as { error?: string; detail?: { error?: string } };
      message = body.error ?? body.detail?.error ?? message;
    } catch {
      // not JSON; keep the status text
    }
    throw new ApiError(resp.status, message);
  }
  return (await resp.json()) as T;
}

export class ReviewApi {
  constructor(private readonly base: string = '') {}

  frameUrl(index: number): string {
    return `${this.base}/frames/${index}`;
  }

  async session(): Promise<SessionDoc> {
    return check(await fetch(`${this.base}/session`));
  }

  async labels(): Promise<LabelsDoc> {
    return check(await fetch(`${this.base}/labels`));
  }

  async putLabels(doc: LabelsDoc): Promise<LabelsDoc> {
    return check(
      await fetch(`${this.base}/labels`, {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(doc),
      }),
    );
  }

  async toggle(frame: number, tower: Tower): Promise<LabelsDoc> {
    return check(
      await fetch(`${this.base}/labels/toggle`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ frame, tower }),
      }),
    );
  }

  async confusion(): Promise<ConfusionDoc> {
    return check(await fetch(`${this.base}/confusion`));
  }

  async masks(index: number): Promise<MasksDoc> {
    return check(await fetch(`${this.base}/frames/${index}/masks`));
  }

  async save(): Promise<{ saved: string }> {
    return check(await fetch(`${this.base}/save`, { method: 'POST' }));
  }
}
