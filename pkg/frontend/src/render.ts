/** Scene drawing: the cylinder unrolled into a (s, z) plane so the view
 * axes coincide with the input axes, plus the adaptation side panel.
 *
 * Geometry helpers are pure and exported for tests; drawing goes through
 * a structural subset of CanvasRenderingContext2D.
 */

import { ConsoleModel } from "./model.js";
import { StateFrame } from "./protocol.js";

export interface CylinderGeometry {
  origin: number[]; // 3
  axis: number[]; // unit, 3
  seamReference: number[]; // 3, fixes s = 0
  radius: number;
  height: number;
  standoff: number;
}

/** Pull the geometry out of the resolved scenario config document. */
export function geometryFromConfig(config: {
  cylinder: { origin: number[]; axis: number[]; seam_reference: number[];
              radius: number; height: number };
  standoff: number;
}): CylinderGeometry {
  const axis = normalize(config.cylinder.axis);
  return {
    origin: [...config.cylinder.origin],
    axis,
    seamReference: [...config.cylinder.seam_reference],
    radius: config.cylinder.radius,
    height: config.cylinder.height,
    standoff: config.standoff,
  };
}

function normalize(v: number[]): number[] {
  const n = Math.hypot(...v);
  return v.map((x) => x / n);
}

function sub(a: number[], b: number[]): number[] {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: number[], b: number[]): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function cross(a: number[], b: number[]): number[] {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function scale(v: number[], k: number): number[] {
  return [v[0] * k, v[1] * k, v[2] * k];
}

/** World position -> unrolled surface coordinates (z, s). Radial distance
 * is irrelevant on purpose: target glyphs sit where the robot's streamed
 * surface coordinates will land when the pose matches. */
export function surfaceOfPosition(geometry: CylinderGeometry,
                                  position: number[]): { z: number; s: number } {
  const rel = sub(position, geometry.origin);
  const z = dot(rel, geometry.axis);
  const radial = sub(rel, scale(geometry.axis, z));
  const e1 = normalize(sub(geometry.seamReference,
    scale(geometry.axis, dot(geometry.seamReference, geometry.axis))));
  const e2 = cross(geometry.axis, e1);
  const theta = Math.atan2(dot(radial, e2), dot(radial, e1));
  return { z, s: theta * geometry.radius };
}

// ------------------------------------------------------------------ layout

export interface Viewport {
  width: number;
  height: number;
}

export interface SceneLayout {
  plotX: number;
  plotY: number;
  plotW: number;
  plotH: number;
  panelX: number;
  panelW: number;
  sMax: number; // plot spans s in [-sMax, sMax]
  zMax: number; // and z in [0, zMax]
}

const MARGIN = 36;
const PANEL_FRACTION = 0.3;

export function layoutScene(geometry: CylinderGeometry,
                            viewport: Viewport): SceneLayout {
  const panelW = Math.floor(viewport.width * PANEL_FRACTION);
  return {
    plotX: MARGIN,
    plotY: MARGIN,
    plotW: viewport.width - panelW - 2 * MARGIN,
    plotH: viewport.height - 2 * MARGIN,
    panelX: viewport.width - panelW + MARGIN / 2,
    panelW: panelW - MARGIN,
    sMax: Math.PI * geometry.radius,
    zMax: geometry.height,
  };
}

/** Surface coordinates -> canvas pixels; s runs right, z runs up. */
export function surfaceToCanvas(layout: SceneLayout, z: number,
                                s: number): { x: number; y: number } {
  const x = layout.plotX + ((s + layout.sMax) / (2 * layout.sMax)) * layout.plotW;
  const y = layout.plotY + (1 - z / layout.zMax) * layout.plotH;
  return { x, y };
}

export interface BarRect {
  x: number;
  y: number;
  width: number;
  height: number;
  value: number;
}

/** One row per value; widths are the values themselves (expected in
 * [0, 1]) scaled to the panel, never renormalized across rows. */
export function barRects(values: number[], x: number, y: number,
                         width: number, rowHeight: number): BarRect[] {
  return values.map((value, i) => ({
    x,
    y: y + i * rowHeight,
    width: Math.max(0, Math.min(1, value)) * width,
    height: rowHeight * 0.7,
    value,
  }));
}

// ----------------------------------------------------------------- drawing

/** The slice of CanvasRenderingContext2D the scene needs. */
export interface Scene2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

const POLICY_LABELS = ["1", "2", "3", "4", "5", "6", "H", "V"];
const TARGET_R = 11;
const ROBOT_R = 7;

function drawRotationGlyph(ctx: Scene2D, x: number, y: number,
                           mode: string, length: number): void {
  ctx.beginPath();
  if (mode === "horizontal") {
    ctx.moveTo(x - length, y);
    ctx.lineTo(x + length, y);
  } else {
    ctx.moveTo(x, y - length);
    ctx.lineTo(x, y + length);
  }
  ctx.stroke();
}

function drawTargets(ctx: Scene2D, layout: SceneLayout,
                     geometry: CylinderGeometry, frame: StateFrame): void {
  frame.target_list.forEach((target, i) => {
    const coords = surfaceOfPosition(geometry, target.pose.slice(0, 3));
    const p = surfaceToCanvas(layout, coords.z, coords.s);
    const done = i < frame.active_target;
    const active = i === frame.active_target;
    ctx.strokeStyle = done ? "#4a5" : active ? "#e80" : "#888";
    ctx.lineWidth = active ? 3 : 1.5;
    ctx.beginPath();
    ctx.arc(p.x, p.y, TARGET_R, 0, 2 * Math.PI);
    ctx.stroke();
    drawRotationGlyph(ctx, p.x, p.y, target.mode, TARGET_R * 0.7);
    ctx.fillStyle = "#ccc";
    ctx.fillText(String(i + 1), p.x + TARGET_R + 3, p.y - TARGET_R - 1);
  });
}

function drawRobot(ctx: Scene2D, layout: SceneLayout, frame: StateFrame): void {
  const [z, s, phi] = frame.surface_coords;
  const p = surfaceToCanvas(layout, z, s);
  ctx.fillStyle = "#3af";
  ctx.beginPath();
  ctx.arc(p.x, p.y, ROBOT_R, 0, 2 * Math.PI);
  ctx.fill();
  // tool rotation: phi = 0 lies along s, growing toward the z axis
  const len = ROBOT_R * 2.2;
  ctx.strokeStyle = "#3af";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(p.x - Math.cos(phi) * len, p.y + Math.sin(phi) * len);
  ctx.lineTo(p.x + Math.cos(phi) * len, p.y - Math.sin(phi) * len);
  ctx.stroke();
}

function drawPanel(ctx: Scene2D, layout: SceneLayout, model: ConsoleModel): void {
  const rowH = 22;
  const alphas = model.alphaBars();
  const likelihoods = model.likelihoodBars();
  for (const [header, values, offset, color] of [
    ["policy weights", alphas, 30, "#3af"],
    ["likelihoods", likelihoods, 30 + (alphas.length + 2) * rowH, "#fa3"],
  ] as const) {
    ctx.fillStyle = "#ccc";
    ctx.fillText(header, layout.panelX, offset - 6);
    const rects = barRects(values, layout.panelX + 18, offset,
                           layout.panelW - 60, rowH);
    rects.forEach((r, i) => {
      ctx.fillStyle = "#ccc";
      ctx.fillText(POLICY_LABELS[i] ?? String(i), layout.panelX, r.y + 14);
      ctx.strokeStyle = "#555";
      ctx.strokeRect(r.x, r.y, layout.panelW - 60, r.height);
      ctx.fillStyle = color;
      ctx.fillRect(r.x, r.y, r.width, r.height);
      ctx.fillStyle = "#999";
      ctx.fillText(r.value.toFixed(2), r.x + layout.panelW - 56, r.y + 14);
    });
  }
}

export const STALE_BADGE = "STALE";

export function drawScene(ctx: Scene2D, model: ConsoleModel,
                          geometry: CylinderGeometry, viewport: Viewport,
                          now: number): void {
  const layout = layoutScene(geometry, viewport);
  ctx.fillStyle = "#181a1f";
  ctx.fillRect(0, 0, viewport.width, viewport.height);
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1;
  ctx.strokeRect(layout.plotX, layout.plotY, layout.plotW, layout.plotH);

  ctx.fillStyle = "#ccc";
  ctx.font = "14px sans-serif";
  ctx.fillText(model.bannerText(), layout.plotX, 20);

  const frame = model.frame;
  if (frame !== null) {
    drawTargets(ctx, layout, geometry, frame);
    drawRobot(ctx, layout, frame);
    drawPanel(ctx, layout, model);
    ctx.fillStyle = "#888";
    ctx.fillText(
      `t=${frame.t.toFixed(2)}s  d=${frame.distance_to_surface.toFixed(3)}m`,
      layout.plotX, viewport.height - 10);
  }

  if (model.isStale(now)) {
    ctx.fillStyle = "#c22";
    ctx.fillRect(viewport.width - 110, 8, 100, 26);
    ctx.fillStyle = "#fff";
    ctx.fillText(STALE_BADGE, viewport.width - 92, 26);
  }
}
