// Serialization of map-drawn shapes into the operator feedback grammar the
// backend parses ("avoid circle(...)" / "avoid rect(...)"), plus a local
// parser used to verify round trips.

export interface DrawnCircle {
  shape: 'circle';
  cx: number;
  cy: number;
  r: number;
}

export interface DrawnRect {
  shape: 'rect';
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export type DrawnShape = DrawnCircle | DrawnRect;

const fmt = (v: number): string => {
  // two decimals keep the round trip well under a meter
  const s = v.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
};

export function shapeToFeedback(shape: DrawnShape): string {
  if (shape.shape === 'circle') {
    return `avoid circle(${fmt(shape.cx)},${fmt(shape.cy)},${fmt(shape.r)})`;
  }
  return `avoid rect(${fmt(shape.x0)},${fmt(shape.y0)},${fmt(shape.x1)},${fmt(shape.y1)})`;
}

const CIRCLE_RE =
  /circle\s*\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*(?:,\s*(-?[\d.]+)\s*)?,\s*(-?[\d.]+)\s*\)/gi;
const RECT_RE =
  /rect\s*\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\)/gi;

export function parseFeedbackGeometry(text: string): DrawnShape[] {
  const out: DrawnShape[] = [];
  for (const m of text.matchAll(CIRCLE_RE)) {
    out.push({
      shape: 'circle',
      cx: parseFloat(m[1]),
      cy: parseFloat(m[2]),
      r: parseFloat(m[4]),
    });
  }
  for (const m of text.matchAll(RECT_RE)) {
    out.push({
      shape: 'rect',
      x0: parseFloat(m[1]),
      y0: parseFloat(m[2]),
      x1: parseFloat(m[3]),
      y1: parseFloat(m[4]),
    });
  }
  return out;
}
