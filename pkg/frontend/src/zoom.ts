/** Row-window arithmetic for the weight view's zoom and pan buttons. */

export interface RowWindow {
  from: number; // inclusive
  to: number; // exclusive
}

const MIN_WIDTH = 2;

function clamp(win: RowWindow, total: number): RowWindow {
  let width = Math.min(Math.max(Math.round(win.to - win.from), MIN_WIDTH), total);
  let from = Math.round(win.from);
  if (from < 0) from = 0;
  if (from + width > total) from = total - width;
  return { from, to: from + width };
}

/** Halve the window around its center. */
export function zoomIn(win: RowWindow, total: number): RowWindow {
  const center = (win.from + win.to) / 2;
  const width = Math.max(Math.round((win.to - win.from) / 2), MIN_WIDTH);
  return clamp({ from: Math.round(center - width / 2), to: Math.round(center - width / 2) + width }, total);
}

/** Double the window around its center, clamped to [0, total). */
export function zoomOut(win: RowWindow, total: number): RowWindow {
  const center = (win.from + win.to) / 2;
  const width = Math.min((win.to - win.from) * 2, total);
  return clamp({ from: Math.round(center - width / 2), to: Math.round(center - width / 2) + width }, total);
}

/** Shift by half a window width; direction -1 = earlier rows, +1 = later. */
export function pan(win: RowWindow, total: number, direction: -1 | 1): RowWindow {
  const width = win.to - win.from;
  const shift = direction * Math.max(1, Math.round(width / 2));
  return clamp({ from: win.from + shift, to: win.to + shift }, total);
}

export function fullRange(total: number): RowWindow {
  return { from: 0, to: total };
}
