/** Operator input capture on the surface manifold (z, s, phi).
 *
 * The pointer joystick maps drag displacement onto the unrolled view's
 * axes: horizontal drag pushes along the arc (s), vertical drag along the
 * cylinder axis (z), and a ring around the pad twists the tool (phi).
 * Gamepad sticks map the same way. Everything is clamped to the unit
 * ball before it leaves the console.
 */

import { InputFrame, clampUnit } from "./protocol.js";

export interface SurfaceAxes {
  z: number;
  s: number;
  phi: number;
}

export const IDLE_AXES: SurfaceAxes = { z: 0, s: 0, phi: 0 };
export const EMIT_HZ = 50;

/** Pad deflection in px -> surface axes; screen y grows downward.
 * Written as 0 - x so a centered pointer reads +0, not -0. */
export function pointerAxes(dxPx: number, dyPx: number, radiusPx: number): SurfaceAxes {
  return { z: 0 - dyPx / radiusPx, s: dxPx / radiusPx, phi: 0 };
}

/** Ring twist angle -> phi axis, saturating at a quarter turn. */
export function ringAxis(angleRad: number): number {
  const v = angleRad / (Math.PI / 2);
  return Math.max(-1, Math.min(1, v));
}

const DEADZONE = 0.08;

function dead(v: number): number {
  return Math.abs(v) < DEADZONE ? 0 : v;
}

/** Standard-mapping gamepad: left stick -> (s, z), right stick x -> phi.
 * Stick up reads negative, so it is flipped to push +z. */
export function gamepadAxes(axes: readonly number[]): SurfaceAxes {
  return {
    z: dead(-(axes[1] ?? 0)),
    s: dead(axes[0] ?? 0),
    phi: dead(axes[2] ?? 0),
  };
}

export function toInputFrame(axes: SurfaceAxes, sequence: number,
                             clientTime: number): InputFrame {
  return {
    u_h: clampUnit([axes.z, axes.s, axes.phi]),
    client_time: clientTime,
    sequence,
  };
}

/** Tracks one pointer drag on the pad plus the ring twist. */
export class PointerJoystick {
  private dx = 0;
  private dy = 0;
  private ring = 0;
  private dragging = false;

  constructor(private readonly radiusPx: number) {}

  begin(xPx: number, yPx: number): void {
    this.dragging = true;
    this.move(xPx, yPx);
  }

  move(xPx: number, yPx: number): void {
    if (!this.dragging) return;
    this.dx = xPx;
    this.dy = yPx;
  }

  end(): void {
    this.dragging = false;
    this.dx = 0;
    this.dy = 0;
  }

  twist(angleRad: number): void {
    this.ring = ringAxis(angleRad);
  }

  releaseTwist(): void {
    this.ring = 0;
  }

  axes(): SurfaceAxes {
    const pad = pointerAxes(this.dx, this.dy, this.radiusPx);
    return { z: pad.z, s: pad.s, phi: this.ring };
  }
}

/** Fixed-rate emitter: samples an axes source and hands a sequenced,
 * clamped input frame to the sender. Driven by an external 50 Hz timer;
 * `tick` is exposed directly so tests can pump it without a clock. */
export class InputPump {
  private sequence = 0;

  constructor(private readonly source: () => SurfaceAxes,
              private readonly send: (frame: InputFrame) => void) {}

  tick(clientTime: number): InputFrame {
    const frame = toInputFrame(this.source(), this.sequence, clientTime);
    this.sequence += 1;
    this.send(frame);
    return frame;
  }
}
