"""Pretrain the five backbone feature extractors on a procedural corpus.

The transfer-learning pipeline assumes each backbone ships with weights
learned on a broad image corpus. This tool produces those weights
reproducibly inside the repo: it renders a 12-class corpus of synthetic
stroke patterns (hatching, grids, rings, blobs, smooth and jittered
arcs, zigzags, smooth and jittered sinusoids, dots, dashes, checkers)
on white paper at 64x64, trains every backbone end to end on it, and
saves the feature-extractor weights as package data.

The pattern classes never include the screening task itself; they exist
to give the convolution stacks generic stroke statistics: orientation,
curvature, stroke width, dash/dot rhythm and jitter frequency.

Usage:
    python3 tools/pretrain_backbones.py [--backbones all|id,id,...]
        [--epochs 12] [--seed 7] [--per-class 280] [--out DIR]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from parkscreen import nn  # noqa: E402
from parkscreen.backbones import (  # noqa: E402
    BACKBONE_IDS, build_backbone, params_digest, save_weights,
)

SIZE = 64
SS = 2
N_CLASSES = 12


def _canvas(rng):
    bg = int(rng.integers(248, 256))
    img = Image.new("L", (SIZE * SS, SIZE * SS), bg)
    return img, ImageDraw.Draw(img)


def _ink(rng):
    return int(rng.integers(0, 70))


def _finish(rng, img):
    img = img.resize((SIZE, SIZE), Image.BILINEAR)
    a = np.asarray(img, dtype=np.float32)
    a += rng.normal(0.0, 2.0, a.shape).astype(np.float32)
    a = np.clip(a, 0, 255).astype(np.uint8)
    return np.repeat(a[:, :, None], 3, axis=2)


def _polyline(draw, pts, ink, width):
    draw.line([tuple(p) for p in pts], fill=ink, width=width, joint="curve")


def _jitter(rng, pts, amp, lam):
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    g = np.gradient(pts, axis=0)
    n = np.maximum(np.hypot(g[:, 0], g[:, 1]), 1e-9)
    normals = np.stack([-g[:, 1] / n, g[:, 0] / n], axis=1)
    ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)
    d = amp * (np.sin(2 * np.pi * s / lam + ph1)
               + 0.5 * np.sin(2 * np.pi * s / (lam / 2.1) + ph2))
    return pts + d[:, None] * normals


def _arc_points(rng):
    p0 = rng.uniform(6, SIZE - 6, 2)
    p1 = rng.uniform(6, SIZE - 6, 2)
    c = (p0 + p1) / 2 + rng.uniform(-18, 18, 2)
    t = np.linspace(0, 1, 240)[:, None]
    return ((1 - t) ** 2) * p0 + 2 * (1 - t) * t * c + (t ** 2) * p1


def _sine_points(rng):
    y0 = rng.uniform(12, SIZE - 12)
    x = np.linspace(rng.uniform(2, 8), SIZE - rng.uniform(2, 8), 260)
    amp = rng.uniform(4, 12)
    cyc = rng.uniform(1.5, 4.0)
    ph = rng.uniform(0, 2 * np.pi)
    y = y0 + amp * np.sin(2 * np.pi * cyc * (x - x[0]) / (x[-1] - x[0]) + ph)
    return np.stack([x, y], axis=1)


def pat_hatch(rng):
    img, d = _canvas(rng)
    ang = rng.uniform(0, np.pi)
    gap = rng.uniform(5, 12) * SS
    w = int(rng.integers(1, 3)) * SS
    ink = _ink(rng)
    dx, dy = np.cos(ang), np.sin(ang)
    for k in range(-30, 31):
        off = k * gap
        p0 = (SIZE * SS / 2 - dy * off - dx * 200, SIZE * SS / 2 + dx * off - dy * 200)
        p1 = (p0[0] + dx * 400, p0[1] + dy * 400)
        d.line([p0, p1], fill=ink, width=w)
    return _finish(rng, img)


def pat_grid(rng):
    img, d = _canvas(rng)
    ang = rng.uniform(0, np.pi / 2)
    gap = rng.uniform(6, 14) * SS
    ink = _ink(rng)
    for base in (ang, ang + np.pi / 2):
        dx, dy = np.cos(base), np.sin(base)
        for k in range(-25, 26):
            off = k * gap
            p0 = (SIZE * SS / 2 - dy * off - dx * 200, SIZE * SS / 2 + dx * off - dy * 200)
            p1 = (p0[0] + dx * 400, p0[1] + dy * 400)
            d.line([p0, p1], fill=ink, width=SS)
    return _finish(rng, img)


def pat_rings(rng):
    img, d = _canvas(rng)
    c = rng.uniform(0.35, 0.65, 2) * SIZE * SS
    step = rng.uniform(4, 9) * SS
    ink = _ink(rng)
    r = rng.uniform(2, 5) * SS
    while r < SIZE * SS * 0.7:
        d.ellipse([c[0] - r, c[1] - r, c[0] + r, c[1] + r],
                  outline=ink, width=SS * int(rng.integers(1, 3)))
        r += step
    return _finish(rng, img)


def pat_blob(rng):
    img, d = _canvas(rng)
    for _ in range(int(rng.integers(1, 4))):
        c = rng.uniform(10, SIZE - 10, 2) * SS
        rx, ry = rng.uniform(4, 14, 2) * SS
        d.ellipse([c[0] - rx, c[1] - ry, c[0] + rx, c[1] + ry], fill=_ink(rng))
    return _finish(rng, img)


def pat_arc_smooth(rng):
    img, d = _canvas(rng)
    for _ in range(int(rng.integers(2, 5))):
        _polyline(d, _arc_points(rng) * SS, _ink(rng), SS * int(rng.integers(1, 3)))
    return _finish(rng, img)


def pat_arc_jitter(rng):
    img, d = _canvas(rng)
    for _ in range(int(rng.integers(2, 5))):
        pts = _jitter(rng, _arc_points(rng), rng.uniform(0.8, 2.2),
                      rng.uniform(2.5, 6.0))
        _polyline(d, pts * SS, _ink(rng), SS * int(rng.integers(1, 3)))
    return _finish(rng, img)


def pat_zigzag(rng):
    img, d = _canvas(rng)
    y0 = rng.uniform(10, SIZE - 10)
    amp = rng.uniform(4, 12)
    period = rng.uniform(6, 16)
    x = np.arange(3, SIZE - 3, period / 2)
    y = y0 + amp * np.where(np.arange(len(x)) % 2 == 0, 1, -1)
    pts = np.stack([x, y], axis=1)
    _polyline(d, pts * SS, _ink(rng), SS * int(rng.integers(1, 3)))
    return _finish(rng, img)


def pat_sine_smooth(rng):
    img, d = _canvas(rng)
    for _ in range(int(rng.integers(1, 3))):
        _polyline(d, _sine_points(rng) * SS, _ink(rng), SS * int(rng.integers(1, 3)))
    return _finish(rng, img)


def pat_sine_jitter(rng):
    img, d = _canvas(rng)
    for _ in range(int(rng.integers(1, 3))):
        pts = _jitter(rng, _sine_points(rng), rng.uniform(0.8, 2.2),
                      rng.uniform(2.5, 6.0))
        _polyline(d, pts * SS, _ink(rng), SS * int(rng.integers(1, 3)))
    return _finish(rng, img)


def pat_dots(rng):
    img, d = _canvas(rng)
    ink = _ink(rng)
    for _ in range(int(rng.integers(15, 50))):
        c = rng.uniform(3, SIZE - 3, 2) * SS
        r = rng.uniform(1.0, 2.5) * SS
        d.ellipse([c[0] - r, c[1] - r, c[0] + r, c[1] + r], fill=ink)
    return _finish(rng, img)


def pat_dashes(rng):
    img, d = _canvas(rng)
    ink = _ink(rng)
    for _ in range(int(rng.integers(3, 7))):
        pts = _arc_points(rng)
        seg = rng.uniform(4, 9)
        gap = rng.uniform(3, 7)
        dist = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        on = (dist % (seg + gap)) < seg
        run = []
        for p, keep in zip(pts, on):
            if keep:
                run.append(p)
            elif len(run) > 1:
                _polyline(d, np.asarray(run) * SS, ink, SS)
                run = []
            else:
                run = []
        if len(run) > 1:
            _polyline(d, np.asarray(run) * SS, ink, SS)
    return _finish(rng, img)


def pat_checker(rng):
    img, d = _canvas(rng)
    cell = rng.uniform(5, 12) * SS
    ox, oy = rng.uniform(0, cell, 2)
    ink = _ink(rng)
    nx = int(SIZE * SS / cell) + 2
    for i in range(nx):
        for j in range(nx):
            if (i + j) % 2 == 0:
                x0, y0 = i * cell - ox, j * cell - oy
                d.rectangle([x0, y0, x0 + cell, y0 + cell], fill=ink)
    return _finish(rng, img)


PATTERNS = [pat_hatch, pat_grid, pat_rings, pat_blob, pat_arc_smooth,
            pat_arc_jitter, pat_zigzag, pat_sine_smooth, pat_sine_jitter,
            pat_dots, pat_dashes, pat_checker]
assert len(PATTERNS) == N_CLASSES


def make_corpus(per_class, seed):
    n = per_class * N_CLASSES
    x = np.empty((n, SIZE, SIZE, 3), np.float32)
    y = np.empty(n, np.int64)
    k = 0
    for ci, pat in enumerate(PATTERNS):
        for i in range(per_class):
            rng = np.random.default_rng([seed, ci, i])
            x[k] = pat(rng).astype(np.float32) / 127.5 - 1.0
            y[k] = ci
            k += 1
    return x, y


def train_backbone(backbone_id, xtr, ytr, xva, yva, epochs, seed, lr=2e-3,
                   batch=64, patience=3):
    net, feat = build_backbone(backbone_id, seed=seed)
    rng = np.random.default_rng([seed, 999])
    full = nn.Sequential([net, nn.GlobalAvgPool(),
                          nn.Dense(feat, N_CLASSES, rng=rng)])
    opt = nn.Adam(full.params(), lr=lr)
    best_acc, best_state, wait = -1.0, None, 0
    for epoch in range(1, epochs + 1):
        t0 = time.time()
        order = np.random.default_rng([seed, epoch]).permutation(len(xtr))
        tot_loss = tot_hit = 0
        for i in range(0, len(order), batch):
            idx = order[i:i + batch]
            logits = full(xtr[idx], training=True)
            loss, dlogits, probs = nn.cross_entropy(logits, ytr[idx])
            opt.zero_grad()
            full.backward(dlogits)
            opt.step()
            tot_loss += loss * len(idx)
            tot_hit += int((probs.argmax(1) == ytr[idx]).sum())
        va_hit = 0
        for i in range(0, len(xva), batch):
            va_hit += int((full(xva[i:i + batch]).argmax(1) == yva[i:i + batch]).sum())
        acc = va_hit / len(xva)
        print(f"  epoch {epoch:2d}: train_loss={tot_loss / len(xtr):.4f} "
              f"train_acc={tot_hit / len(xtr):.4f} val_acc={acc:.4f} "
              f"({time.time() - t0:.1f}s)", flush=True)
        if acc > best_acc:
            best_acc, best_state, wait = acc, net.state(), 0
        else:
            wait += 1
            if wait >= patience:
                break
    net.load_state(best_state)
    return net, best_acc, epoch


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--backbones", default="all")
    ap.add_argument("--epochs", type=int, default=18)
    ap.add_argument("--patience", type=int, default=3)
    ap.add_argument("--per-class", type=int, default=280)
    ap.add_argument("--val-per-class", type=int, default=40)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve()
                    .parents[1] / "src/parkscreen/backbones/pretrained")
    args = ap.parse_args(argv)

    ids = BACKBONE_IDS if args.backbones == "all" else tuple(
        args.backbones.split(","))
    print(f"building corpus: {N_CLASSES} classes x "
          f"{args.per_class}+{args.val_per_class} images @ {SIZE}px",
          flush=True)
    xtr, ytr = make_corpus(args.per_class, args.seed)
    xva, yva = make_corpus(args.val_per_class, args.seed + 1)
    args.out.mkdir(parents=True, exist_ok=True)

    for bid in ids:
        print(f"[{bid}]", flush=True)
        t0 = time.time()
        net, acc, epochs_run = train_backbone(
            bid, xtr, ytr, xva, yva, args.epochs, args.seed,
            patience=args.patience)
        meta = {
            "backbone": bid,
            "corpus": "procedural-strokes-v1",
            "image_size": SIZE,
            "classes": N_CLASSES,
            "per_class": args.per_class,
            "epochs_run": epochs_run,
            "val_accuracy": round(acc, 4),
            "seed": args.seed,
            "norm": "signed_unit",
            "digest": params_digest(net),
        }
        path = args.out / f"{bid}.npz"
        save_weights(net, path, meta)
        print(f"  saved {path.name}: val_acc={acc:.4f} "
              f"({time.time() - t0:.0f}s total)", flush=True)


if __name__ == "__main__":
    main()
