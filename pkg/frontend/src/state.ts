// Console state: a latest-wins snapshot slot with staleness tracking and the
// trial HUD fields derived from it. Interpolation state feeds rendering only.

import type { Snapshot } from './types';
import { STALE_AFTER_MS } from './scene';

export interface HudData {
  connection: string;
  phase: string;
  validated: number;
  total: number;
  dwellProgress: number;
  elapsed: number;
  mode: string;
  stale: boolean;
  warnings: string[];
}

export class ConsoleState {
  latest: Snapshot | null = null;
  previous: Snapshot | null = null;
  receivedAtMs = 0;
  previousAtMs = 0;
  connection = 'disconnected';

  accept(snap: Snapshot, nowMs: number): void {
    // snapshots apply atomically; no field mixing across snapshots
    this.previous = this.latest;
    this.previousAtMs = this.receivedAtMs;
    this.latest = snap;
    this.receivedAtMs = nowMs;
  }

  isStale(nowMs: number): boolean {
    return this.latest !== null && nowMs - this.receivedAtMs > STALE_AFTER_MS;
  }

  /** 0..1 fraction between the previous and latest snapshot arrival times. */
  interpolationAlpha(nowMs: number): number {
    if (!this.previous || this.receivedAtMs <= this.previousAtMs) return 1;
    return Math.min(1, (nowMs - this.receivedAtMs) / (this.receivedAtMs - this.previousAtMs));
  }

  hud(nowMs: number): HudData {
    const s = this.latest;
    return {
      connection: this.connection,
      phase: s?.trial.phase ?? '-',
      validated: s?.trial.validated ?? 0,
      total: s?.trial.total ?? 0,
      dwellProgress: s?.target?.dwell_progress ?? 0,
      elapsed: s?.t ?? 0,
      mode: s?.mode ?? '-',
      stale: this.isStale(nowMs),
      warnings: s?.warnings ?? [],
    };
  }
}
