import { describe, expect, it } from "vitest";
import { ConsoleModel } from "../src/model.js";
import { StateFrame } from "../src/protocol.js";
import {
  STALE_BADGE,
  Scene2D,
  barRects,
  drawScene,
  geometryFromConfig,
  layoutScene,
  surfaceOfPosition,
  surfaceToCanvas,
} from "../src/render.js";

const geometry = geometryFromConfig({
  cylinder: {
    origin: [0, 0, 0],
    axis: [0, 0, 1],
    radius: 0.4,
    height: 1.0,
    seam_reference: [1, 0, 0],
  },
  standoff: 0.08,
});

const viewport = { width: 900, height: 560 };

function onSurface(thetaDeg: number, z: number, radius = 0.4): number[] {
  const theta = (thetaDeg * Math.PI) / 180;
  return [radius * Math.cos(theta), radius * Math.sin(theta), z];
}

describe("surfaceOfPosition", () => {
  it("unrolls the reference grid to hand-computed arc lengths", () => {
    // arc length s = radius * theta, seam at theta = 0
    const a = surfaceOfPosition(geometry, onSurface(60, 0.3));
    expect(a.z).toBeCloseTo(0.3, 12);
    expect(a.s).toBeCloseTo(0.41887902047863906, 12);
    const b = surfaceOfPosition(geometry, onSurface(120, 0.7));
    expect(b.z).toBeCloseTo(0.7, 12);
    expect(b.s).toBeCloseTo(0.8377580409572781, 12);
    const seam = surfaceOfPosition(geometry, onSurface(0, 0.5));
    expect(seam.s).toBeCloseTo(0, 12);
    const back = surfaceOfPosition(geometry, onSurface(-45, 0.1));
    expect(back.s).toBeCloseTo(-0.3141592653589793, 12);
  });

  it("ignores the radial distance", () => {
    const near = surfaceOfPosition(geometry, onSurface(60, 0.3, 0.4));
    const hover = surfaceOfPosition(geometry, onSurface(60, 0.3, 0.48));
    expect(hover.z).toBeCloseTo(near.z, 12);
    expect(hover.s).toBeCloseTo(near.s, 12);
  });

  it("measures z along the axis from the cylinder origin", () => {
    const shifted = geometryFromConfig({
      cylinder: {
        origin: [1, 2, 3],
        axis: [0, 0, 2], // normalized internally
        radius: 0.4,
        height: 1.0,
        seam_reference: [1, 0, 0],
      },
      standoff: 0.08,
    });
    const p = surfaceOfPosition(shifted, [1 + 0.4, 2, 3.25]);
    expect(p.z).toBeCloseTo(0.25, 12);
    expect(p.s).toBeCloseTo(0, 12);
  });
});

describe("layout", () => {
  const layout = layoutScene(geometry, viewport);

  it("spans the full unrolled circumference and height", () => {
    expect(layout.sMax).toBeCloseTo(Math.PI * 0.4, 12);
    expect(layout.zMax).toBe(1.0);
    expect(layout.plotW).toBeGreaterThan(0);
    expect(layout.panelX).toBeGreaterThan(layout.plotX + layout.plotW);
  });

  it("puts the seam in the middle, z up and s right", () => {
    const mid = surfaceToCanvas(layout, 0.5, 0);
    expect(mid.x).toBeCloseTo(layout.plotX + layout.plotW / 2, 9);
    const top = surfaceToCanvas(layout, layout.zMax, 0);
    expect(top.y).toBeCloseTo(layout.plotY, 9);
    const bottom = surfaceToCanvas(layout, 0, 0);
    expect(bottom.y).toBeCloseTo(layout.plotY + layout.plotH, 9);
    const right = surfaceToCanvas(layout, 0.5, 0.3);
    expect(right.x).toBeGreaterThan(mid.x);
  });

  it("lands the robot marker on the target glyph when coordinates agree", () => {
    const targetWorld = onSurface(60, 0.3, 0.48); // standoff pose
    const glyph = surfaceOfPosition(geometry, targetWorld);
    const glyphPx = surfaceToCanvas(layout, glyph.z, glyph.s);
    const robotPx = surfaceToCanvas(layout, 0.3, 0.41887902047863906);
    expect(robotPx.x).toBeCloseTo(glyphPx.x, 9);
    expect(robotPx.y).toBeCloseTo(glyphPx.y, 9);
  });
});

describe("barRects", () => {
  it("scales widths by value without renormalizing across rows", () => {
    const rects = barRects([1, 0.25, 0], 10, 40, 200, 22);
    expect(rects.map((r) => r.width)).toEqual([200, 50, 0]);
    expect(rects.map((r) => r.y)).toEqual([40, 62, 84]);
    expect(rects[0].height).toBeCloseTo(22 * 0.7, 12);
  });

  it("clips out-of-range values into the panel", () => {
    const rects = barRects([1.2, -0.1], 0, 0, 100, 20);
    expect(rects[0].width).toBe(100);
    expect(rects[1].width).toBe(0);
    expect(rects[0].value).toBe(1.2); // label still shows the raw number
  });
});

class RecordingScene implements Scene2D {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 0;
  font = "";
  ops: string[] = [];
  texts: string[] = [];
  fillRect(): void { this.ops.push("fillRect"); }
  strokeRect(): void { this.ops.push("strokeRect"); }
  beginPath(): void { this.ops.push("beginPath"); }
  arc(): void { this.ops.push("arc"); }
  moveTo(): void { this.ops.push("moveTo"); }
  lineTo(): void { this.ops.push("lineTo"); }
  stroke(): void { this.ops.push("stroke"); }
  fill(): void { this.ops.push("fill"); }
  fillText(text: string): void { this.texts.push(text); }
}

function frameWithTargets(): StateFrame {
  return {
    t: 1.5,
    pose: [0.3, -0.3, 0.1, 1, 0, 0, 0],
    surface_coords: [0.1, -0.31, 0.78],
    twist: [0, 0, 0, 0, 0, 0],
    alpha: [1, 0, 0, 0, 0, 0, 1, 0],
    likelihood: [0.9, 0, 0, 0, 0, 0, 0.8, 0],
    conditional: [1, 1, 1, 1, 1, 1, 1, 1],
    prior: [0.9, 0, 0, 0, 0, 0, 0.8, 0],
    active_target: 0,
    target_list: [
      { pose: [...onSurface(0, 0.3, 0.48), 1, 0, 0, 0], mode: "horizontal" },
      { pose: [...onSurface(60, 0.3, 0.48), 1, 0, 0, 0], mode: "vertical" },
    ],
    distance_to_surface: 0.08,
  };
}

describe("drawScene", () => {
  it("draws the banner, targets, robot and panel for a live frame", () => {
    const ctx = new RecordingScene();
    const model = new ConsoleModel();
    model.opened();
    model.ingest({ type: "state", payload: frameWithTargets() }, 10.0);
    drawScene(ctx, model, geometry, viewport, 10.1);
    expect(ctx.texts).toContain("awaiting instruction");
    expect(ctx.texts).toContain("policy weights");
    expect(ctx.texts).toContain("likelihoods");
    expect(ctx.texts).toContain("1.00"); // the converged weight, as streamed
    expect(ctx.texts).not.toContain(STALE_BADGE);
    // two target circles + robot dot + tool line at minimum
    expect(ctx.ops.filter((op) => op === "arc").length).toBeGreaterThanOrEqual(3);
  });

  it("stamps the badge once the stream goes quiet", () => {
    const ctx = new RecordingScene();
    const model = new ConsoleModel();
    model.opened();
    model.ingest({ type: "state", payload: frameWithTargets() }, 10.0);
    drawScene(ctx, model, geometry, viewport, 11.0);
    expect(ctx.texts).toContain(STALE_BADGE);
  });

  it("still paints a banner before the first frame", () => {
    const ctx = new RecordingScene();
    const model = new ConsoleModel();
    drawScene(ctx, model, geometry, viewport, 0);
    expect(ctx.texts).toContain("awaiting instruction");
    expect(ctx.texts).not.toContain(STALE_BADGE);
  });
});
