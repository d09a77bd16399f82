// Top-down canvas rendering of the live map: zone, knowable obstacles,
// active wind spheres, UAV tracks, detections and no-fly overlays.
// Altitude is shown as a label rather than a third axis.

import type { ConsoleViewModel } from './viewmodel.js';
import type { DrawnShape } from './feedback.js';

const UAV_COLORS: Record<string, string> = {
  UAV1: '#4caf50',
  UAV2: '#ff9800',
  UAV3: '#2196f3',
};

export class MapView {
  private scale = 1;
  private cx = 0;
  private cy = 0;

  constructor(
    private canvas: HTMLCanvasElement,
    private vm: ConsoleViewModel,
  ) {}

  /** world -> canvas */
  project(x: number, y: number): [number, number] {
    return [
      this.canvas.width / 2 + (x - this.cx) * this.scale,
      this.canvas.height / 2 - (y - this.cy) * this.scale,
    ];
  }

  /** canvas -> world (used for drawn no-fly shapes) */
  unproject(px: number, py: number): [number, number] {
    return [
      (px - this.canvas.width / 2) / this.scale + this.cx,
      -(py - this.canvas.height / 2) / this.scale + this.cy,
    ];
  }

  render(pendingShape: DrawnShape | null = null): void {
    const t = this.vm.telemetry;
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.fillStyle = '#10141a';
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!t) return;

    const zone = t.zone;
    this.cx = zone.center[0] / 2;
    this.cy = zone.center[1] / 2;
    const span = Math.max(Math.abs(zone.center[0]), Math.abs(zone.center[1])) + zone.radius + 150;
    this.scale = Math.min(this.canvas.width, this.canvas.height) / (2 * span);

    // disaster zone
    ctx.strokeStyle = '#3d5a80';
    ctx.lineWidth = 1.5;
    this.circle(ctx, zone.center[0], zone.center[1], zone.radius);
    ctx.stroke();

    // base station
    const [bx, by] = this.project(0, 0);
    ctx.fillStyle = '#e0e0e0';
    ctx.fillRect(bx - 4, by - 4, 8, 8);

    // knowable objects
    for (const o of t.objects) {
      if (o.class === 'Obstacle') {
        ctx.fillStyle = '#8d6e63';
        this.circle(ctx, o.coordinates[0], o.coordinates[1],
          Number(o.attributes.radius ?? o.attributes.side ?? o.attributes.length ?? 15) / 2 + 5);
        ctx.fill();
      } else if (o.class === 'Survivor') {
        ctx.fillStyle = '#ff5252';
        this.circle(ctx, o.coordinates[0], o.coordinates[1], 6 / this.scale);
        ctx.fill();
      } else if (o.class === 'WindZone') {
        ctx.strokeStyle = 'rgba(244, 67, 54, 0.9)';
        ctx.setLineDash([6, 4]);
        this.circle(ctx, o.coordinates[0], o.coordinates[1], Number(o.attributes.radius ?? 50));
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }

    // UAV tracks and positions
    for (const [uav, track] of Object.entries(this.vm.tracks)) {
      ctx.strokeStyle = UAV_COLORS[uav] ?? '#ccc';
      ctx.globalAlpha = 0.5;
      ctx.beginPath();
      track.forEach(([x, y], i) => {
        const [px, py] = this.project(x, y);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
      ctx.globalAlpha = 1;
    }
    for (const [uav, d] of Object.entries(t.uavs)) {
      const [px, py] = this.project(d.position[0], d.position[1]);
      ctx.fillStyle = UAV_COLORS[uav] ?? '#ccc';
      ctx.beginPath();
      ctx.arc(px, py, 5, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillStyle = '#eceff1';
      ctx.font = '10px monospace';
      ctx.fillText(`${uav} ${d.position[2].toFixed(0)}m`, px + 7, py - 4);
    }

    // shape being drawn for a reject
    if (pendingShape && pendingShape.shape === 'circle') {
      ctx.strokeStyle = '#ffee58';
      this.circle(ctx, pendingShape.cx, pendingShape.cy, pendingShape.r);
      ctx.stroke();
    }
  }

  private circle(ctx: CanvasRenderingContext2D, x: number, y: number, r: number): void {
    const [px, py] = this.project(x, y);
    ctx.beginPath();
    ctx.arc(px, py, Math.max(1, r * this.scale), 0, Math.PI * 2);
  }
}
