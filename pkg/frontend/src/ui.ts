/** DOM wiring: everything here is presentation; logic lives in the
 * controller/state modules so it stays testable without a browser. */

import type { ReviewApi } from './api.js';
import { confusionRows } from './confusion.js';
import type { ReviewController } from './controller.js';
import { intervalsFromFrames } from './labels.js';
import { activeSegment, isLabeled } from './state.js';
import { TOWERS, type MasksDoc, type Tower } from './types.js';

const SCALE = 3;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ReviewView {
  private readonly canvas = el('canvas', 'frame-canvas');
  private readonly slider = el('input') as HTMLInputElement;
  private readonly status = el('div', 'status');
  private readonly errorBanner = el('div', 'error-banner');
  private readonly confusionBody = el('tbody');
  private readonly timeline = el('canvas', 'timeline');
  private readonly towerButtons = new Map<Tower, { jump: HTMLButtonElement; flip: HTMLButtonElement }>();
  private readonly saveButton = el('button', 'save', 'save (s)');
  private readonly image = new Image();
  private masks: MasksDoc | null = null;
  private masksFrame = -1;
  private rangeStart: number | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi,
    private readonly controller: ReviewController,
  ) {
    this.build();
    this.bindKeys();
  }

  private build(): void {
    const header = el('div', 'header');
    header.append(this.status, this.saveButton);
    this.saveButton.onclick = () => void this.controller.save();

    this.slider.type = 'range';
    this.slider.min = '0';
    this.slider.oninput = () => this.controller.goTo(Number(this.slider.value));

    const towers = el('div', 'towers');
    for (const tower of TOWERS) {
      const jump = el('button', 'jump', tower);
      jump.onclick = () => this.controller.jump(tower);
      const flip = el('button', 'flip', `toggle ${tower}`);
      flip.onclick = () => void this.controller.toggle(this.controller.state.frame, tower);
      this.towerButtons.set(tower, { jump, flip });
      const cell = el('span', 'tower-cell');
      cell.append(jump, flip);
      towers.append(cell);
    }

    const table = el('table', 'confusion');
    const head = el('thead');
    const headRow = el('tr');
    for (const title of ['', 'tp', 'tn', 'fp', 'fn', 'accuracy', 'tpr', 'tnr', 'f1']) {
      headRow.append(el('th', undefined, title));
    }
    head.append(headRow);
    table.append(head, this.confusionBody);

    const hints = el(
      'div',
      'hints',
      'arrows: step 1 | shift+arrows: step 10 | 1-4: jump to tower | ' +
        'space: toggle label | [: mark range start | ]: apply range | x: drop interval | s: save',
    );

    this.root.append(header, this.errorBanner, this.canvas, this.slider, towers, this.timeline, table, hints);
    this.image.onload = () => this.drawFrame();
  }

  private bindKeys(): void {
    window.addEventListener('keydown', (ev) => {
      if (ev.target instanceof HTMLInputElement && ev.target !== this.slider) return;
      const c = this.controller;
      const seg = activeSegment(c.state);
      switch (ev.key) {
        case 'ArrowRight':
          c.step(ev.shiftKey ? 10 : 1);
          break;
        case 'ArrowLeft':
          c.step(ev.shiftKey ? -10 : -1);
          break;
        case '1':
        case '2':
        case '3':
        case '4':
          c.jump(TOWERS[Number(ev.key) - 1]!);
          break;
        case ' ':
          ev.preventDefault();
          if (seg) void c.toggle(c.state.frame, seg.tower);
          break;
        case '[':
          this.rangeStart = c.state.frame;
          break;
        case ']':
          if (seg && this.rangeStart !== null) {
            void c.addRange(seg.tower, this.rangeStart, c.state.frame);
            this.rangeStart = null;
          }
          break;
        case 'x':
          if (seg) void c.removeIntervalAt(seg.tower, c.state.frame);
          break;
        case 's':
          void c.save();
          break;
        case 't':
          c.flipOverlay('towerMask');
          break;
        case 'r':
          c.flipOverlay('ringMask');
          break;
        case 'd':
          c.flipOverlay('tint');
          break;
        default:
          return;
      }
      ev.preventDefault();
    });
  }

  render(): void {
    const state = this.controller.state;
    const seg = activeSegment(state);
    this.slider.max = String(state.session.frame_count - 1);
    this.slider.value = String(state.frame);
    this.status.textContent =
      `${state.session.source_id} | frame ${state.frame}/${state.session.frame_count - 1}` +
      (seg ? ` | ${seg.tower}` : ' | between interactions') +
      (state.dirty ? ' | unsaved edits' : '');
    this.errorBanner.textContent = state.error ?? '';
    this.errorBanner.style.display = state.error ? 'block' : 'none';

    for (const tower of TOWERS) {
      const buttons = this.towerButtons.get(tower)!;
      const enabled = this.controller.canToggle(state.frame, tower);
      buttons.flip.disabled = !enabled;
      buttons.flip.classList.toggle('labeled', isLabeled(state, state.frame, tower));
    }

    this.confusionBody.replaceChildren(
      ...confusionRows(this.controller.confusion).map((row) => {
        const tr = el('tr');
        for (const value of [row.name, row.tp, row.tn, row.fp, row.fn,
                             row.accuracy, row.tpr, row.tnr, row.f1]) {
          tr.append(el('td', undefined, String(value)));
        }
        return tr;
      }),
    );

    this.image.src = this.api.frameUrl(state.frame);
    if (this.masksFrame !== state.frame) {
      this.masksFrame = state.frame;
      void this.api
        .masks(state.frame)
        .then((doc) => {
          if (this.masksFrame === state.frame) {
            this.masks = doc;
            this.drawFrame();
          }
        })
        .catch(() => {
          this.masks = null;
        });
    }
    this.drawFrame();
    this.drawTimeline();
  }

  private drawFrame(): void {
    const state = this.controller.state;
    const { width, height } = state.session;
    if (!width || !height) return;
    this.canvas.width = width * SCALE;
    this.canvas.height = height * SCALE;
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.imageSmoothingEnabled = false;
    if (this.image.complete && this.image.naturalWidth > 0) {
      ctx.drawImage(this.image, 0, 0, this.canvas.width, this.canvas.height);
    }
    const seg = activeSegment(state);
    if (seg) {
      ctx.strokeStyle = '#f5c518';
      ctx.lineWidth = 1.5;
      ctx.strokeRect(seg.roi.x * SCALE, seg.roi.y * SCALE, seg.roi.width * SCALE, seg.roi.height * SCALE);
      if (seg.end_zone_x !== null) {
        ctx.strokeStyle = '#f55';
        ctx.beginPath();
        ctx.moveTo(seg.end_zone_x * SCALE, seg.roi.y * SCALE);
        ctx.lineTo(seg.end_zone_x * SCALE, (seg.roi.y + seg.roi.height) * SCALE);
        ctx.stroke();
      }
    }
    if (this.masks && this.masksFrame === state.frame) {
      const labeled = seg ? isLabeled(state, state.frame, seg.tower) : false;
      if (state.overlays.towerMask || (state.overlays.tint && labeled)) {
        const fill = state.overlays.tint && labeled;
        this.drawPolygons(ctx, this.masks.tower, fill ? 'rgba(220,40,40,0.55)' : null, '#3f6');
      }
      if (state.overlays.ringMask) {
        this.drawPolygons(ctx, this.masks.ring, null, '#39f');
      }
    }
  }

  private drawPolygons(
    ctx: CanvasRenderingContext2D,
    polygons: number[][][],
    fill: string | null,
    stroke: string,
  ): void {
    for (const poly of polygons) {
      if (poly.length < 2) continue;
      ctx.beginPath();
      for (const [i, pt] of poly.entries()) {
        const [x, y] = [pt[0]! * SCALE, pt[1]! * SCALE];
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.closePath();
      if (fill) {
        ctx.fillStyle = fill;
        ctx.fill();
      }
      ctx.strokeStyle = stroke;
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }

  private drawTimeline(): void {
    const state = this.controller.state;
    const n = state.session.frame_count;
    this.timeline.width = this.canvas.width || 720;
    this.timeline.height = 26;
    const ctx = this.timeline.getContext('2d');
    if (!ctx || n < 2) return;
    const w = this.timeline.width;
    const x = (frame: number) => (frame / (n - 1)) * (w - 1);
    ctx.fillStyle = '#222';
    ctx.fillRect(0, 0, w, 26);
    for (const seg of state.session.segments) {
      ctx.fillStyle = '#334';
      ctx.fillRect(x(seg.start_frame), 4, x(seg.end_frame) - x(seg.start_frame) + 1, 18);
      ctx.fillStyle = '#c44';
      for (const [s, e] of intervalsFromFrames(state.working[seg.tower])) {
        ctx.fillRect(x(s), 8, Math.max(x(e) - x(s), 1) + 1, 10);
      }
    }
    ctx.fillStyle = '#888';
    for (const crash of state.session.crashes) {
      ctx.fillRect(x(crash.start_frame), 4, Math.max(x(crash.end_frame) - x(crash.start_frame), 1), 18);
    }
    ctx.fillStyle = '#fff';
    ctx.fillRect(x(state.frame), 0, 2, 26);
  }
}
