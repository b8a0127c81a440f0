/** Browser entry point: wires the socket, the input devices and the
 * canvas together. All logic lives in the imported modules; this file is
 * DOM glue only.
 */

import { EMIT_HZ, InputPump, PointerJoystick, gamepadAxes } from "./joystick.js";
import { ConsoleModel } from "./model.js";
import { decodeServerFrame, encodeHello, encodeInput } from "./protocol.js";
import { drawScene, geometryFromConfig } from "./render.js";

const nowSeconds = () => performance.now() / 1000;

async function boot(): Promise<void> {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const pad = document.getElementById("pad") as HTMLDivElement;
  const ring = document.getElementById("ring") as HTMLDivElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("canvas 2d context unavailable");

  const params = new URLSearchParams(window.location.search);
  const role = params.get("role") === "observer" ? "observer" : "operator";
  const name = params.get("name") ?? "console";

  const scenario = await fetch("/scenario").then((r) => r.json());
  const geometry = geometryFromConfig(scenario.config);

  const model = new ConsoleModel();
  const joystick = new PointerJoystick(pad.clientWidth / 2);

  const url = `${window.location.protocol === "https:" ? "wss" : "ws"}://` +
    `${window.location.host}/ws`;
  const socket = new WebSocket(url);

  socket.onopen = () => {
    model.opened();
    socket.send(encodeHello({ role, name }));
  };
  socket.onclose = () => model.closed();
  socket.onmessage = (event: MessageEvent<string>) => {
    try {
      model.ingest(decodeServerFrame(event.data), nowSeconds());
    } catch (err) {
      console.error("dropped malformed frame:", err);
    }
  };

  // pointer joystick: drag on the pad, twist on the ring
  const padCenter = () => {
    const rect = pad.getBoundingClientRect();
    return { x: rect.left + rect.width / 2, y: rect.top + rect.height / 2 };
  };
  pad.addEventListener("pointerdown", (e) => {
    pad.setPointerCapture(e.pointerId);
    const c = padCenter();
    joystick.begin(e.clientX - c.x, e.clientY - c.y);
  });
  pad.addEventListener("pointermove", (e) => {
    const c = padCenter();
    joystick.move(e.clientX - c.x, e.clientY - c.y);
  });
  pad.addEventListener("pointerup", () => joystick.end());
  pad.addEventListener("pointercancel", () => joystick.end());
  ring.addEventListener("pointerdown", (e) => ring.setPointerCapture(e.pointerId));
  ring.addEventListener("pointermove", (e) => {
    if (e.buttons === 0) return;
    const rect = ring.getBoundingClientRect();
    const cx = rect.left + rect.width / 2;
    const cy = rect.top + rect.height / 2;
    joystick.twist(Math.atan2(-(e.clientY - cy), e.clientX - cx));
  });
  ring.addEventListener("pointerup", () => joystick.releaseTwist());

  const pollAxes = () => {
    const pads = navigator.getGamepads?.() ?? [];
    const gamepad = pads.find((p) => p !== null);
    model.useGamepad(gamepad != null);
    return model.device === "gamepad" && gamepad != null
      ? gamepadAxes(gamepad.axes)
      : joystick.axes();
  };

  const pump = new InputPump(pollAxes, (frame) => {
    if (role === "operator" && socket.readyState === WebSocket.OPEN) {
      socket.send(encodeInput(frame));
    }
  });
  window.setInterval(() => pump.tick(nowSeconds()), 1000 / EMIT_HZ);

  const viewport = { width: canvas.width, height: canvas.height };
  const repaint = () => {
    drawScene(ctx, model, geometry, viewport, nowSeconds());
    window.requestAnimationFrame(repaint);
  };
  repaint();
}

boot().catch((err) => console.error("console failed to start:", err));
