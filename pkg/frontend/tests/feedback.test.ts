import { describe, expect, it } from 'vitest';

import { parseFeedbackGeometry, shapeToFeedback } from '../src/feedback.js';

describe('feedback geometry serialization', () => {
  it('serializes a drawn circle into the backend grammar', () => {
    const text = shapeToFeedback({ shape: 'circle', cx: 12.345, cy: -67.891, r: 80.0 });
    expect(text).toBe('avoid circle(12.35,-67.89,80.00)');
  });

  it('serializes a drawn rect', () => {
    const text = shapeToFeedback({ shape: 'rect', x0: -1, y0: 2, x1: 3, y1: 4 });
    expect(text).toBe('avoid rect(-1.00,2.00,3.00,4.00)');
  });

  it('round-trips within a meter', () => {
    for (const shape of [
      { shape: 'circle', cx: 123.456789, cy: -654.321, r: 75.5 } as const,
      { shape: 'circle', cx: 0.004, cy: 0.004, r: 40.0 } as const,
    ]) {
      const [parsed] = parseFeedbackGeometry(shapeToFeedback(shape));
      expect(parsed.shape).toBe('circle');
      if (parsed.shape === 'circle') {
        expect(Math.abs(parsed.cx - shape.cx)).toBeLessThan(1.0);
        expect(Math.abs(parsed.cy - shape.cy)).toBeLessThan(1.0);
        expect(Math.abs(parsed.r - shape.r)).toBeLessThan(1.0);
      }
    }
  });

  it('parses circles with an optional altitude argument', () => {
    const [parsed] = parseFeedbackGeometry('avoid circle(10,-20,60,80)');
    expect(parsed).toEqual({ shape: 'circle', cx: 10, cy: -20, r: 80 });
  });
});
