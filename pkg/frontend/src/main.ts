import { ReviewApi } from './api.js';
import { ReviewController } from './controller.js';
import { ReviewView } from './ui.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

const api = new ReviewApi('');
const controller = new ReviewController(api, () => view.render());
const view = new ReviewView(root, api, controller);

controller.load().catch((err) => {
  root.textContent = `failed to load session: ${err instanceof Error ? err.message : err}`;
});
