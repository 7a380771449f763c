/** Shared zoom/pan transform for the two comparison panes. Both panes
 * render from the same transform object, so they stay synchronized by
 * construction. */
export interface ViewTransform {
  scale: number;
  x: number;
  y: number;
}

export const MIN_SCALE = 0.25;
export const MAX_SCALE = 16;

export function identity(): ViewTransform {
  return { scale: 1, x: 0, y: 0 };
}

/** Zoom by a factor keeping the (cx, cy) viewport point fixed. */
export function zoomAt(
  t: ViewTransform,
  cx: number,
  cy: number,
  factor: number,
): ViewTransform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    x: cx - (cx - t.x) * applied,
    y: cy - (cy - t.y) * applied,
  };
}

export function panBy(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, x: t.x + dx, y: t.y + dy };
}

export function toCss(t: ViewTransform): string {
  return `translate(${t.x}px, ${t.y}px) scale(${t.scale})`;
}

/** Viewport point -> image point under the transform. */
export function toImage(t: ViewTransform, px: number, py: number): [number, number] {
  return [(px - t.x) / t.scale, (py - t.y) / t.scale];
}
