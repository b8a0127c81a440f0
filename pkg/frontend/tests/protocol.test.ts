import { describe, expect, it } from "vitest";
import {
  ProtocolError,
  clampUnit,
  decodeServerFrame,
  encodeHello,
  encodeInput,
} from "../src/protocol.js";

const targetEntry = { pose: [0.48, 0, 0.3, 1, 0, 0, 0], mode: "horizontal" };

function statePayload(overrides: Record<string, unknown> = {}) {
  return {
    t: 0.25,
    pose: [0.3, -0.3, 0.1, 1, 0, 0, 0],
    surface_coords: [0.1, -0.31, 0.78],
    twist: [0, 0, 0, 0, 0, 0],
    alpha: [0, 0.5, 0, 0, 0, 0, 1, 0],
    likelihood: [0.1, 0.9, 0, 0, 0, 0, 0.4, 0],
    conditional: [1, 1, 1, 1, 1, 1, 1, 1],
    prior: [0.2, 0.7, 0, 0, 0, 0, 0.5, 0],
    active_target: 0,
    target_list: [targetEntry],
    distance_to_surface: 0.08,
    ...overrides,
  };
}

function stateText(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({ type: "state", payload: statePayload(overrides) });
}

describe("decodeServerFrame", () => {
  it("decodes a state frame and keeps the numbers as streamed", () => {
    const frame = decodeServerFrame(stateText());
    expect(frame.type).toBe("state");
    if (frame.type !== "state") return;
    expect(frame.payload.t).toBe(0.25);
    expect(frame.payload.alpha).toEqual([0, 0.5, 0, 0, 0, 0, 1, 0]);
    expect(frame.payload.target_list[0].mode).toBe("horizontal");
    expect(frame.payload.distance_to_surface).toBe(0.08);
  });

  it("decodes an instruction frame", () => {
    const frame = decodeServerFrame(JSON.stringify({
      type: "instruction",
      payload: { active_target: 2, mode: "vertical", text: "target 3" },
    }));
    expect(frame.type).toBe("instruction");
    if (frame.type !== "instruction") return;
    expect(frame.payload.text).toBe("target 3");
    expect(frame.payload.active_target).toBe(2);
  });

  it("rejects text that is not JSON", () => {
    expect(() => decodeServerFrame("{nope")).toThrow(ProtocolError);
  });

  it("rejects non-object envelopes", () => {
    expect(() => decodeServerFrame("42")).toThrow(ProtocolError);
    expect(() => decodeServerFrame("[1,2]")).toThrow(ProtocolError);
    expect(() => decodeServerFrame("null")).toThrow(ProtocolError);
  });

  it("rejects frame types the console never receives", () => {
    const text = JSON.stringify({
      type: "input",
      payload: { u_h: [0, 0, 0], client_time: 0, sequence: 0 },
    });
    expect(() => decodeServerFrame(text)).toThrow(ProtocolError);
    expect(() => decodeServerFrame('{"type":"state"}')).toThrow(ProtocolError);
  });

  it("rejects malformed state payloads", () => {
    expect(() => decodeServerFrame(stateText({ pose: [1, 2, 3] })))
      .toThrow(ProtocolError);
    expect(() => decodeServerFrame(stateText({ alpha: [0, "x"] })))
      .toThrow(ProtocolError);
    expect(() => decodeServerFrame(stateText({ t: "soon" })))
      .toThrow(ProtocolError);
    expect(() => decodeServerFrame(stateText({ target_list: [{ pose: [1], mode: 3 }] })))
      .toThrow(ProtocolError);
  });

  it("rejects non-finite numbers", () => {
    // 1e999 overflows to Infinity during JSON.parse
    const text = stateText().replace('"t":0.25', '"t":1e999');
    const ticked = stateText().replace('"alpha":[0,', '"alpha":[1e999,');
    expect(text).not.toBe(stateText());
    expect(ticked).not.toBe(stateText());
    expect(() => decodeServerFrame(text)).toThrow(ProtocolError);
    expect(() => decodeServerFrame(ticked)).toThrow(ProtocolError);
  });
});

describe("encoders", () => {
  it("encodes hello with an explicit null name by default", () => {
    const parsed = JSON.parse(encodeHello({ role: "operator" }));
    expect(parsed).toEqual({
      type: "hello",
      payload: { role: "operator", name: null },
    });
    const named = JSON.parse(encodeHello({ role: "observer", name: "aux" }));
    expect(named.payload).toEqual({ role: "observer", name: "aux" });
  });

  it("round-trips input frames bit for bit", () => {
    const u = [0.12345678901234567, -0.4, 1e-9];
    const text = encodeInput({ u_h: u, client_time: 1.23, sequence: 7 });
    const parsed = JSON.parse(text);
    expect(parsed.type).toBe("input");
    expect(parsed.payload.sequence).toBe(7);
    expect(parsed.payload.client_time).toBe(1.23);
    for (let i = 0; i < 3; i++) {
      expect(Object.is(parsed.payload.u_h[i], u[i])).toBe(true);
    }
  });

  it("refuses commands that are not three finite numbers", () => {
    expect(() => encodeInput({ u_h: [0, 0], client_time: 0, sequence: 0 }))
      .toThrow(ProtocolError);
    expect(() => encodeInput({ u_h: [0, NaN, 0], client_time: 0, sequence: 0 }))
      .toThrow(ProtocolError);
  });
});

describe("clampUnit", () => {
  it("passes anything inside the unit ball through untouched", () => {
    const u = [0.3, -0.4, 0.5];
    const out = clampUnit(u);
    for (let i = 0; i < 3; i++) expect(Object.is(out[i], u[i])).toBe(true);
    expect(out).not.toBe(u); // fresh array, caller's input stays usable
    expect(clampUnit([0, 0, 0])).toEqual([0, 0, 0]);
  });

  it("renormalizes anything outside onto the unit sphere", () => {
    const out = clampUnit([3, 4, 0]);
    expect(out[0]).toBeCloseTo(0.6, 12);
    expect(out[1]).toBeCloseTo(0.8, 12);
    expect(out[2]).toBe(0);
    const big = clampUnit([-5, 5, 5]);
    expect(Math.hypot(...big)).toBeCloseTo(1, 12);
    // direction preserved
    expect(big[1]).toBeCloseTo(-big[0], 12);
  });
});
