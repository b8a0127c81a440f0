/** Console-side session state.
 *
 * Holds the newest state frame, the instruction banner and the connection
 * health. No policy math happens here: weights and likelihoods are
 * rendered exactly as streamed.
 */

import { InstructionFrame, ServerFrame, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";
export type InputDevice = "pointer-joystick" | "gamepad";

export const STALE_AFTER_S = 0.5;

export class ConsoleModel {
  status: ConnectionStatus = "connecting";
  device: InputDevice = "pointer-joystick";
  frame: StateFrame | null = null;
  banner: InstructionFrame | null = null;
  private lastFrameAt: number | null = null; // seconds, caller's clock

  opened(): void {
    this.status = "open";
  }

  closed(): void {
    this.status = "closed";
  }

  ingest(frame: ServerFrame, now: number): void {
    if (frame.type === "state") {
      this.frame = frame.payload;
      this.lastFrameAt = now;
    } else {
      this.banner = frame.payload;
    }
  }

  /** Weights as they arrived; the render layer must not rescale these. */
  alphaBars(): number[] {
    return this.frame ? [...this.frame.alpha] : [];
  }

  likelihoodBars(): number[] {
    return this.frame ? [...this.frame.likelihood] : [];
  }

  /** True once the stream has been silent for longer than the badge
   * threshold, and immediately when the socket drops. */
  isStale(now: number): boolean {
    if (this.status === "closed") return true;
    if (this.lastFrameAt === null) return this.status !== "connecting";
    return now - this.lastFrameAt > STALE_AFTER_S;
  }

  bannerText(): string {
    if (this.banner === null) return "awaiting instruction";
    return this.banner.text;
  }

  /** Mission finished when the active index walks past the target list. */
  finished(): boolean {
    return this.frame !== null &&
      this.frame.active_target >= this.frame.target_list.length;
  }

  useGamepad(available: boolean): void {
    // device loss downgrades to the pointer joystick
    this.device = available ? "gamepad" : "pointer-joystick";
  }
}
