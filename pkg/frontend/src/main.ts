import { ApiClient } from './api';
import { densityBars, extent, polylinePath, scaleLinear } from './render';
import { ShapeEditorState } from './shapeState';
import { WeightEditorState } from './weightState';

const WIDTH = 960;
const HEIGHT = 320;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgPath(d: string, stroke: string, dashed = false): SVGPathElement {
  const p = document.createElementNS('http://www.w3.org/2000/svg', 'path');
  p.setAttribute('d', d);
  p.setAttribute('stroke', stroke);
  p.setAttribute('fill', 'none');
  if (dashed) p.setAttribute('stroke-dasharray', '4 3');
  return p;
}

function renderWeightView(root: HTMLElement, state: WeightEditorState): void {
  root.replaceChildren();
  root.append(el('h2', {}, `Weight view — revision ${state.revision}`));
  if (state.lastError) root.append(el('p', { class: 'error' }, state.lastError));
  const s = state.series;
  if (!s) return;
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  const xs = s.row_ids.map((_, i) => s.from_row + i);
  const x = scaleLinear([s.from_row, Math.max(s.to_row - 1, s.from_row + 1)], [0, WIDTH]);
  const y = scaleLinear(extent([...s.actual, ...s.predicted]), [HEIGHT, 0]);
  svg.append(svgPath(polylinePath(xs, s.actual, x, y), '#1f77b4'));
  svg.append(svgPath(polylinePath(xs, s.predicted, x, y), '#d62728'));
  if (s.ref_values) {
    const yr = scaleLinear(extent(s.ref_values), [HEIGHT, 0]);
    svg.append(svgPath(polylinePath(xs, s.ref_values, x, yr), '#7f7f7f', true));
  }
  root.append(svg);
  if (state.selection && state.stagedFactor !== 1) {
    root.append(
      el('p', {}, `staged weight factor on selection: x${state.stagedFactor}`),
    );
  }
}

function renderShapeView(root: HTMLElement, state: ShapeEditorState): void {
  root.replaceChildren();
  root.append(el('h2', {}, `Shape view — revision ${state.revision}`));
  if (state.lastError) root.append(el('p', { class: 'error' }, state.lastError));
  const shape = state.shape;
  if (!shape) return;
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  const x = scaleLinear(extent(shape.anchors), [0, WIDTH]);
  const y = scaleLinear(extent(shape.values), [HEIGHT, 0]);
  const yd = scaleLinear([0, Math.max(...shape.density.mass, 1e-12)], [HEIGHT, 0]);
  for (const bar of densityBars(shape.anchors, shape.density.mass, x, yd)) {
    const r = document.createElementNS('http://www.w3.org/2000/svg', 'rect');
    r.setAttribute('x', String(bar.x - 2));
    r.setAttribute('y', String(HEIGHT - bar.height));
    r.setAttribute('width', '4');
    r.setAttribute('height', String(bar.height));
    r.setAttribute('fill', '#cccccc');
    svg.append(r);
  }
  svg.append(svgPath(polylinePath(shape.anchors, shape.values, x, y), '#1f77b4'));
  root.append(svg);
  const chips = el('div', { class: 'chips' });
  for (const c of state.chips) {
    const chip = el('span', { class: 'chip' }, `${c.kind} [${c.range[0]}, ${c.range[1]}]`);
    const remove = el('button', {}, 'x');
    remove.addEventListener('click', () => {
      void state.deleteConstraint(c.id).then(() => renderShapeView(root, state));
    });
    chip.append(remove);
    chips.append(chip);
  }
  root.append(chips);
}

export function mount(root: HTMLElement, baseUrl: string, modelId: string): void {
  const client = new ApiClient(baseUrl);
  const weights = new WeightEditorState(client, modelId);
  const shapes = new ShapeEditorState(client, modelId);
  const weightRoot = el('section');
  const shapeRoot = el('section');
  root.append(weightRoot, shapeRoot);

  void client
    .getModel(modelId)
    .then(async (info) => {
      await weights.load();
      renderWeightView(weightRoot, weights);
      if (info.feature_names.length) {
        await shapes.selectFeature(info.feature_names[0]);
        renderShapeView(shapeRoot, shapes);
      }
    })
    .catch((err) => {
      root.replaceChildren(el('p', { class: 'error' }, String(err)));
    });
}
