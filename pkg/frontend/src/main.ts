/** DOM wiring: two drawing panels, one submit flow, verdict rendering.
 *
 * All logic that matters is in the imported modules; this file only
 * connects them to the page.
 */

import { health, predict, PredictImages } from "./api.js";
import {
  CANVAS_SIZE,
  clampPoint,
  clearStrokes,
  DrawingSession,
  extendStroke,
  hasInk,
  newSession,
  setTemplate,
  startStroke,
  Template,
} from "./model.js";
import { encodePng } from "./png.js";
import { rasterize } from "./raster.js";
import { verdictView } from "./view.js";

const GUIDE_COLOR = "#cfcfcf";
const INK_COLOR = "#000000";
const INK_WIDTH = 3;

interface Panel {
  type: Template;
  session: DrawingSession;
  canvas: HTMLCanvasElement;
  upload: HTMLInputElement;
  uploadedFile: File | null;
  drawing: boolean;
  startedAt: number;
}

const baseUrl =
  new URLSearchParams(window.location.search).get("service") ?? "";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function drawGuide(ctx: CanvasRenderingContext2D, template: Template): void {
  ctx.save();
  ctx.strokeStyle = GUIDE_COLOR;
  ctx.lineWidth = 2;
  ctx.beginPath();
  if (template === "spiral") {
    const cx = CANVAS_SIZE / 2;
    const cy = CANVAS_SIZE / 2;
    for (let i = 0; i <= 720; i++) {
      const theta = (i / 720) * 6 * Math.PI;
      const r = 8 + theta * 10.5;
      const x = cx + r * Math.cos(theta);
      const y = cy + r * Math.sin(theta);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
  } else {
    const margin = 32;
    const span = CANVAS_SIZE - 2 * margin;
    for (let i = 0; i <= 600; i++) {
      const x = margin + (i / 600) * span;
      const y =
        CANVAS_SIZE / 2 +
        96 * Math.sin(((x - margin) / span) * 3 * 2 * Math.PI);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
  }
  ctx.stroke();
  ctx.restore();
}

function redraw(panel: Panel): void {
  const ctx = panel.canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);
  drawGuide(ctx, panel.session.template);
  ctx.strokeStyle = INK_COLOR;
  ctx.fillStyle = INK_COLOR;
  ctx.lineWidth = INK_WIDTH;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  for (const stroke of panel.session.strokes) {
    if (stroke.length === 0) continue;
    if (stroke.length === 1) {
      ctx.beginPath();
      ctx.arc(stroke[0].x, stroke[0].y, INK_WIDTH / 2, 0, 2 * Math.PI);
      ctx.fill();
      continue;
    }
    ctx.beginPath();
    ctx.moveTo(stroke[0].x, stroke[0].y);
    for (let i = 1; i < stroke.length; i++) {
      ctx.lineTo(stroke[i].x, stroke[i].y);
    }
    ctx.stroke();
  }
}

function canvasPoint(panel: Panel, ev: PointerEvent) {
  const rect = panel.canvas.getBoundingClientRect();
  const sx = CANVAS_SIZE / rect.width;
  const sy = CANVAS_SIZE / rect.height;
  return clampPoint(
    (ev.clientX - rect.left) * sx,
    (ev.clientY - rect.top) * sy,
    Math.round(performance.now() - panel.startedAt),
  );
}

function panelHasContent(panel: Panel): boolean {
  return panel.uploadedFile !== null || hasInk(panel.session);
}

function makePanel(type: Template): Panel {
  const panel: Panel = {
    type,
    session: newSession(type),
    canvas: $(`${type}-canvas`) as HTMLCanvasElement,
    upload: $(`${type}-upload`) as HTMLInputElement,
    uploadedFile: null,
    drawing: false,
    startedAt: performance.now(),
  };

  panel.canvas.addEventListener("pointerdown", (ev) => {
    panel.drawing = true;
    panel.canvas.setPointerCapture(ev.pointerId);
    startStroke(panel.session, canvasPoint(panel, ev));
    redraw(panel);
    syncControls();
  });
  panel.canvas.addEventListener("pointermove", (ev) => {
    if (!panel.drawing) return;
    extendStroke(panel.session, canvasPoint(panel, ev));
    redraw(panel);
  });
  const stop = () => {
    panel.drawing = false;
  };
  panel.canvas.addEventListener("pointerup", stop);
  panel.canvas.addEventListener("pointercancel", stop);

  $(`${type}-clear`).addEventListener("click", () => {
    clearStrokes(panel.session);
    panel.uploadedFile = null;
    panel.upload.value = "";
    redraw(panel);
    syncControls();
  });

  $(`${type}-toggle-guide`).addEventListener("click", () => {
    setTemplate(
      panel.session,
      panel.session.template === "spiral" ? "wave" : "spiral",
    );
    redraw(panel);
  });

  panel.upload.addEventListener("change", () => {
    panel.uploadedFile = panel.upload.files?.[0] ?? null;
    syncControls();
  });

  redraw(panel);
  return panel;
}

function exportPanel(panel: Panel): Uint8Array | File | null {
  if (panel.uploadedFile) return panel.uploadedFile;
  if (!hasInk(panel.session)) return null;
  return encodePng(rasterize(panel.session.strokes), CANVAS_SIZE, CANVAS_SIZE);
}

const panels: Panel[] = [];
let inFlight = false;

function syncControls(): void {
  const submit = $("submit") as HTMLButtonElement;
  const any = panels.some(panelHasContent);
  submit.disabled = inFlight || !any;
  $("submit-hint").textContent = any
    ? ""
    : "Draw or upload at least one image to submit.";
}

function showBanner(message: string, retryable: boolean): void {
  const banner = $("banner");
  banner.textContent = retryable
    ? `${message} — check the service and try again.`
    : message;
  banner.classList.remove("hidden");
}

function hideBanner(): void {
  $("banner").classList.add("hidden");
}

function renderVerdict(view: ReturnType<typeof verdictView>): void {
  $("verdict").classList.remove("hidden");
  $("verdict-label").textContent = view.label;
  $("verdict-confidence").textContent = view.confidencePct;
  $("verdict-source").textContent = `decided by the ${view.winningSource}`;
  const bars = $("verdict-bars");
  bars.innerHTML = "";
  for (const row of view.bars) {
    const div = document.createElement("div");
    div.className = "bar-row";
    div.innerHTML =
      `<span class="bar-name">${row.source}</span>` +
      `<span class="bar-track"><span class="bar-fill" ` +
      `style="width:${row.parkinsonWidth}%"></span></span>` +
      `<span class="bar-pct">parkinson ${row.parkinsonPct}</span>`;
    bars.appendChild(div);
  }
}

async function onSubmit(): Promise<void> {
  if (inFlight) return;
  const images: PredictImages = {};
  for (const panel of panels) {
    const data = exportPanel(panel);
    if (data) images[panel.type] = data;
  }
  if (!images.spiral && !images.wave) return;

  inFlight = true;
  hideBanner();
  syncControls();
  try {
    const outcome = await predict(baseUrl, images);
    if (outcome.ok) {
      renderVerdict(verdictView(outcome.verdict));
    } else {
      showBanner(
        `${outcome.error.code}: ${outcome.error.message}`,
        outcome.retryable,
      );
    }
  } finally {
    inFlight = false;
    syncControls();
  }
}

async function checkHealth(): Promise<void> {
  const dot = $("health");
  try {
    const h = await health(baseUrl);
    dot.textContent =
      h.status === "ok" ? "service online" : `service: ${h.status}`;
    dot.className = h.status === "ok" ? "health ok" : "health bad";
  } catch {
    dot.textContent = "service unreachable";
    dot.className = "health bad";
  }
}

export function start(): void {
  panels.push(makePanel("spiral"), makePanel("wave"));
  $("submit").addEventListener("click", () => {
    void onSubmit();
  });
  syncControls();
  void checkHealth();
}

start();
