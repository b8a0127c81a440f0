/** Wire protocol spoken by the teleoperation service.
 *
 * Frames are JSON envelopes `{"type": ..., "payload": ...}`. The console
 * only ever sends `hello` and `input`; it receives `state` and
 * `instruction`. Anything that does not match the contract is rejected
 * here so the rest of the console never sees a half-valid frame.
 */

export interface TargetEntry {
  pose: number[]; // [x y z, qw qx qy qz]
  mode: string;
}

export interface StateFrame {
  t: number;
  pose: number[];
  surface_coords: number[]; // [z, s, phi]
  twist: number[];
  alpha: number[];
  likelihood: number[];
  conditional: number[];
  prior: number[];
  active_target: number;
  target_list: TargetEntry[];
  distance_to_surface: number;
}

export interface InputFrame {
  u_h: number[]; // [z, s, phi], inside the unit ball
  client_time: number;
  sequence: number;
}

export interface HelloFrame {
  role: "operator" | "observer";
  name?: string | null;
}

export interface InstructionFrame {
  active_target: number;
  mode: string;
  text: string;
}

export type ServerFrame =
  | { type: "state"; payload: StateFrame }
  | { type: "instruction"; payload: InstructionFrame };

export class ProtocolError extends Error {}

function numbers(value: unknown, length: number | null, where: string): number[] {
  if (!Array.isArray(value)) throw new ProtocolError(`${where} must be an array`);
  if (length !== null && value.length !== length)
    throw new ProtocolError(`${where} must have length ${length}`);
  for (const v of value) {
    if (typeof v !== "number" || !Number.isFinite(v))
      throw new ProtocolError(`${where} must hold finite numbers`);
  }
  return value as number[];
}

function finite(value: unknown, where: string): number {
  if (typeof value !== "number" || !Number.isFinite(value))
    throw new ProtocolError(`${where} must be a finite number`);
  return value;
}

function parseState(payload: Record<string, unknown>): StateFrame {
  const targets = payload["target_list"];
  if (!Array.isArray(targets)) throw new ProtocolError("target_list must be an array");
  return {
    t: finite(payload["t"], "t"),
    pose: numbers(payload["pose"], 7, "pose"),
    surface_coords: numbers(payload["surface_coords"], 3, "surface_coords"),
    twist: numbers(payload["twist"], 6, "twist"),
    alpha: numbers(payload["alpha"], null, "alpha"),
    likelihood: numbers(payload["likelihood"], null, "likelihood"),
    conditional: numbers(payload["conditional"], null, "conditional"),
    prior: numbers(payload["prior"], null, "prior"),
    active_target: finite(payload["active_target"], "active_target"),
    target_list: targets.map((entry, i) => {
      if (typeof entry !== "object" || entry === null)
        throw new ProtocolError(`target_list[${i}] must be an object`);
      const record = entry as Record<string, unknown>;
      if (typeof record["mode"] !== "string")
        throw new ProtocolError(`target_list[${i}].mode must be a string`);
      return {
        pose: numbers(record["pose"], 7, `target_list[${i}].pose`),
        mode: record["mode"],
      };
    }),
    distance_to_surface: finite(payload["distance_to_surface"], "distance_to_surface"),
  };
}

function parseInstruction(payload: Record<string, unknown>): InstructionFrame {
  if (typeof payload["mode"] !== "string" || typeof payload["text"] !== "string")
    throw new ProtocolError("instruction needs string mode and text");
  return {
    active_target: finite(payload["active_target"], "active_target"),
    mode: payload["mode"],
    text: payload["text"],
  };
}

export function decodeServerFrame(text: string): ServerFrame {
  let envelope: unknown;
  try {
    envelope = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`not valid JSON: ${err}`);
  }
  if (typeof envelope !== "object" || envelope === null)
    throw new ProtocolError("envelope must be an object");
  const { type, payload } = envelope as { type?: unknown; payload?: unknown };
  if (typeof payload !== "object" || payload === null)
    throw new ProtocolError("payload must be an object");
  const record = payload as Record<string, unknown>;
  if (type === "state") return { type: "state", payload: parseState(record) };
  if (type === "instruction")
    return { type: "instruction", payload: parseInstruction(record) };
  throw new ProtocolError(`unexpected frame type '${String(type)}'`);
}

export function encodeHello(frame: HelloFrame): string {
  return JSON.stringify({
    type: "hello",
    payload: { role: frame.role, name: frame.name ?? null },
  });
}

export function encodeInput(frame: InputFrame): string {
  numbers(frame.u_h, 3, "u_h");
  return JSON.stringify({
    type: "input",
    payload: {
      u_h: frame.u_h,
      client_time: frame.client_time,
      sequence: frame.sequence,
    },
  });
}

/** Renormalize anything outside the unit ball; inputs inside pass through
 * exactly so the service stores them verbatim in the session trace. */
export function clampUnit(u: number[]): number[] {
  const norm = Math.hypot(...u);
  if (norm <= 1.0) return [...u];
  return u.map((v) => v / norm);
}
