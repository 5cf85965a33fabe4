// Input capture: keyboard/gamepad joystick deflections plus an on-screen body
// rig (drag translates the thorax, modifier-drag rotates it, wheel moves it in
// depth). The rig emits body poses on a fixed timer even when nothing changed
// (heartbeat semantics) and refuses mode switches while a trial is running.

import type { OutboundMessage } from './types';

export interface Clock {
  (): number; // seconds
}

const KEY_AXES: Record<string, [number, number]> = {
  // key -> [axis, sign]; world x forward/back, y sideways, z up/down
  KeyW: [0, 1],
  KeyS: [0, -1],
  KeyA: [1, 1],
  KeyD: [1, -1],
  KeyR: [2, 1],
  KeyF: [2, -1],
};

const DRAG_TRANSLATION_GAIN = 0.002; // m per pixel
const DRAG_ROTATION_GAIN = 0.005; // rad per pixel
const WHEEL_DEPTH_GAIN = 0.0004; // m per wheel unit

function clamp(v: number, lo: number, hi: number): number {
  return Math.max(lo, Math.min(hi, v));
}

export function yawPitchToQuat(yaw: number, pitch: number): { w: number; x: number; y: number; z: number } {
  // intrinsic yaw about z then pitch about y; negative zero is normalized so
  // the values survive a JSON round trip unchanged
  const cy = Math.cos(yaw / 2);
  const sy = Math.sin(yaw / 2);
  const cp = Math.cos(pitch / 2);
  const sp = Math.sin(pitch / 2);
  return { w: cy * cp + 0, x: -sy * sp + 0, y: cy * sp + 0, z: sy * cp + 0 };
}

export class InputRig {
  private keys = new Set<string>();
  private gamepadAxes: number[] = [0, 0, 0];
  private body = { x: 0, y: 0, z: 0, yaw: 0, pitch: 0 };
  private lastDeflection = [NaN, NaN, NaN];
  trialPhase = 'idle';

  constructor(
    private readonly clock: Clock,
    start: { position: number[] } = { position: [0, 0, 0] },
  ) {
    [this.body.x, this.body.y, this.body.z] = start.position;
  }

  // --- ui event entry points -------------------------------------------

  keyDown(code: string): void {
    if (code in KEY_AXES) this.keys.add(code);
  }

  keyUp(code: string): void {
    this.keys.delete(code);
  }

  setGamepadAxes(axes: number[]): void {
    this.gamepadAxes = axes.slice(0, 3);
  }

  dragBody(dxPixels: number, dyPixels: number, rotate: boolean): void {
    if (rotate) {
      this.body.yaw += dxPixels * DRAG_ROTATION_GAIN;
      this.body.pitch = clamp(this.body.pitch + dyPixels * DRAG_ROTATION_GAIN, -1.2, 1.2);
    } else {
      this.body.y += -dxPixels * DRAG_TRANSLATION_GAIN;
      this.body.z += -dyPixels * DRAG_TRANSLATION_GAIN;
    }
  }

  wheelBody(delta: number): void {
    this.body.x += -delta * WHEEL_DEPTH_GAIN;
  }

  noteTrialPhase(phase: string): void {
    this.trialPhase = phase;
  }

  // --- message synthesis -------------------------------------------------

  deflection(): number[] {
    const d = [0, 0, 0];
    for (const code of this.keys) {
      const [axis, sign] = KEY_AXES[code];
      d[axis] += sign;
    }
    for (let i = 0; i < 3; i++) {
      d[i] = clamp(d[i] + (this.gamepadAxes[i] ?? 0), -1, 1);
    }
    return d;
  }

  bodyPose(): OutboundMessage {
    return {
      type: 'body_pose',
      t: this.clock(),
      position: [this.body.x, this.body.y, this.body.z],
      q: yawPitchToQuat(this.body.yaw, this.body.pitch),
    };
  }

  /** Fixed-timer emission: body pose every tick, joystick when it changed. */
  tick(): OutboundMessage[] {
    const out: OutboundMessage[] = [this.bodyPose()];
    const d = this.deflection();
    if (d.some((v, i) => v !== this.lastDeflection[i])) {
      this.lastDeflection = d;
      out.push({ type: 'joystick', t: this.clock(), deflection: d });
    }
    return out;
  }

  /** Mode switches are allowed at trial boundaries only. */
  setMode(mode: string): OutboundMessage | null {
    if (this.trialPhase === 'running') return null;
    return { type: 'set_mode', t: this.clock(), mode };
  }

  startTrial(): OutboundMessage {
    return { type: 'start_trial', t: this.clock() };
  }
}
