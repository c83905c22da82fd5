/** Drawing-session state: strokes on a fixed-size square canvas. */

export const CANVAS_SIZE = 512;

export type Template = "spiral" | "wave";

export interface StrokePoint {
  x: number;
  y: number;
  /** milliseconds since the session started */
  t: number;
}

export type Stroke = StrokePoint[];

export interface DrawingSession {
  template: Template;
  strokes: Stroke[];
}

export function newSession(template: Template): DrawingSession {
  return { template, strokes: [] };
}

/** Keep a point inside the canvas; out-of-range input is clamped. */
export function clampPoint(x: number, y: number, t: number): StrokePoint {
  const clip = (v: number) => Math.min(CANVAS_SIZE, Math.max(0, v));
  return { x: clip(x), y: clip(y), t };
}

export function startStroke(session: DrawingSession, p: StrokePoint): void {
  session.strokes.push([p]);
}

export function extendStroke(session: DrawingSession, p: StrokePoint): void {
  if (session.strokes.length === 0) {
    startStroke(session, p);
    return;
  }
  session.strokes[session.strokes.length - 1].push(p);
}

export function clearStrokes(session: DrawingSession): void {
  session.strokes = [];
}

/** Switching the guide template never touches the strokes. */
export function setTemplate(session: DrawingSession, t: Template): void {
  session.template = t;
}

export function hasInk(session: DrawingSession): boolean {
  return session.strokes.some((s) => s.length > 0);
}
