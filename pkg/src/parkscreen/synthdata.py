"""Procedural generation of spiral/wave screening drawings.

Produces a labeled corpus with the same on-disk layout the loader
expects (`root/<type>/<class>/*.png`), for development, testing and
calibration in environments where no scanned drawing corpus is
available. Healthy drawings are smooth pen traces with ordinary
low-frequency hand wobble; parkinsonian drawings superimpose a
high-frequency tremor displacement perpendicular to the pen path. The
tremor severity distributions of the two classes overlap on purpose, so
a classifier cannot reach perfect accuracy on this corpus.

Every image is generated from its own counter-derived RNG stream, so a
corpus is a pure function of (seed, per_class, size) regardless of
generation order.
"""

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import CLASS_ORDER, DRAWING_TYPES

SUPERSAMPLE = 2

# Tremor displacement, in pixels at the final image scale. The healthy
# distribution hugs zero; the parkinson one is clearly away from it, but
# their tails cross so a fraction of drawings is genuinely ambiguous.
HEALTHY_TREMOR_SIGMA = 0.20
PD_TREMOR_MEAN = 1.50
PD_TREMOR_SIGMA = 0.45
PD_TREMOR_RANGE = (0.40, 2.80)
TREMOR_WAVELENGTH = (3.0, 6.5)


def sample_severity(rng, label):
    """Draw a tremor amplitude (px) for one image of the given class."""
    if label == "healthy":
        return float(abs(rng.normal(0.0, HEALTHY_TREMOR_SIGMA)))
    lo, hi = PD_TREMOR_RANGE
    return float(np.clip(rng.normal(PD_TREMOR_MEAN, PD_TREMOR_SIGMA), lo, hi))


def _resample(pts, step):
    """Re-space a polyline to uniform arc-length steps.

    Returns (points, cumulative arc length at each point).
    """
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n = max(int(s[-1] / step) + 1, 2)
    u = np.linspace(0.0, s[-1], n)
    x = np.interp(u, s, pts[:, 0])
    y = np.interp(u, s, pts[:, 1])
    return np.stack([x, y], axis=1), u


def _unit_normals(pts):
    g = np.gradient(pts, axis=0)
    norm = np.maximum(np.hypot(g[:, 0], g[:, 1]), 1e-9)
    t = g / norm[:, None]
    return np.stack([-t[:, 1], t[:, 0]], axis=1)


def _hand_wobble(rng, s):
    """Slow, class-independent displacement every drawer produces."""
    out = np.zeros_like(s)
    for _ in range(2):
        lam = rng.uniform(40.0, 120.0)
        amp = rng.uniform(0.4, 1.6)
        phase = rng.uniform(0.0, 2 * np.pi)
        out += amp * np.sin(2 * np.pi * s / lam + phase)
    return out


def _tremor(rng, s, severity):
    """High-frequency displacement; amplitude is the class signal."""
    lam = rng.uniform(*TREMOR_WAVELENGTH)
    p1 = rng.uniform(0.0, 2 * np.pi)
    p2 = rng.uniform(0.0, 2 * np.pi)
    env_lam = rng.uniform(60.0, 160.0)
    env_phase = rng.uniform(0.0, 2 * np.pi)
    if severity <= 0.0:
        return np.zeros_like(s)
    env = 1.0 + 0.4 * np.sin(2 * np.pi * s / env_lam + env_phase)
    wave = (np.sin(2 * np.pi * s / lam + p1)
            + 0.6 * np.sin(2 * np.pi * s / (lam / 2.3) + p2))
    return severity * env * wave


def _spiral_path(rng, size):
    cx, cy = size / 2 + rng.uniform(-7.0, 7.0, size=2)
    turns = rng.uniform(2.3, 3.2)
    theta_max = 2 * np.pi * turns
    radius = rng.uniform(0.30, 0.40) * size
    growth = rng.uniform(0.9, 1.1)
    phi0 = rng.uniform(0.0, 2 * np.pi)
    theta = np.linspace(0.0, theta_max, 2400)
    r = radius * (theta / theta_max) ** growth
    x = cx + r * np.cos(theta + phi0)
    y = cy + r * np.sin(theta + phi0)
    return np.stack([x, y], axis=1)


def _wave_path(rng, size):
    x0 = rng.uniform(0.06, 0.12) * size
    x1 = size - rng.uniform(0.06, 0.12) * size
    base = rng.uniform(0.40, 0.60) * size
    drift = rng.uniform(-0.10, 0.10)
    cycles = rng.uniform(2.5, 4.2)
    amp = rng.uniform(0.09, 0.16) * size
    sharp = rng.uniform(0.65, 1.0)
    phase = rng.uniform(0.0, 2 * np.pi)
    x = np.linspace(x0, x1, 1600)
    u = 2 * np.pi * cycles * (x - x0) / (x1 - x0) + phase
    w = np.sin(u)
    y = base + drift * (x - x0) + amp * np.sign(w) * np.abs(w) ** sharp
    return np.stack([x, y], axis=1)


def draw_image(drawing_type, rng, size, severity):
    """Rasterize one drawing: white paper, dark pen stroke."""
    if drawing_type == "spiral":
        path = _spiral_path(rng, size)
    elif drawing_type == "wave":
        path = _wave_path(rng, size)
    else:
        raise ValueError(f"unknown drawing type {drawing_type!r}")
    pts, s = _resample(path, 0.8)
    disp = _hand_wobble(rng, s) + _tremor(rng, s, severity)
    pts = pts + disp[:, None] * _unit_normals(pts)
    np.clip(pts, 2.0, size - 2.0, out=pts)

    bg = int(rng.integers(250, 256))
    ink = int(rng.integers(8, 60))
    jit = rng.integers(-6, 7, size=3)
    color = tuple(int(np.clip(ink + j, 0, 255)) for j in jit)
    width = max(1, int(round(rng.uniform(1.6, 2.4) * SUPERSAMPLE)))

    canvas = Image.new("RGB", (size * SUPERSAMPLE,) * 2, (bg,) * 3)
    pen = ImageDraw.Draw(canvas)
    pen.line([tuple(p) for p in pts * SUPERSAMPLE], fill=color,
             width=width, joint="curve")
    canvas = canvas.resize((size, size), Image.BILINEAR)

    out = np.asarray(canvas, dtype=np.float32)
    out += rng.normal(0.0, 1.2, size=out.shape).astype(np.float32)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


def generate_image(drawing_type, label, rng, size=256):
    """One labeled drawing; severity drawn from the class distribution."""
    return draw_image(drawing_type, rng, size, sample_severity(rng, label))


def generate_corpus(root, per_class=51, size=256, seed=42,
                    types=DRAWING_TYPES):
    """Write a full corpus tree under `root`; returns per-type counts."""
    root = Path(root)
    summary = {}
    for ti, drawing_type in enumerate(types):
        counts = {}
        for li, label in enumerate(CLASS_ORDER):
            out_dir = root / drawing_type / label
            out_dir.mkdir(parents=True, exist_ok=True)
            for i in range(per_class):
                rng = np.random.default_rng([seed, ti, li, i])
                arr = generate_image(drawing_type, label, rng, size)
                Image.fromarray(arr).save(out_dir / f"{label}_{i:03d}.png")
            counts[label] = per_class
        summary[drawing_type] = counts
    return summary
