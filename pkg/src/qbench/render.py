"""Deterministic image output: PGM/PNG rasters and hand-written SVG."""
from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np
from PIL import Image


def to_gray(values, vmax: float = 1.0) -> np.ndarray:
    """8-bit grayscale with value 0 -> white and value vmax -> black; NaN -> white."""
    v = np.nan_to_num(np.asarray(values, dtype=float) / vmax, nan=0.0)
    v = np.clip(v, 0.0, 1.0)
    # the small offset keeps exact ties (e.g. p = 0.5) stable under last-bit noise
    return np.floor(255 * (1 - v) + 0.5 + 1e-9).clip(0, 255).astype(np.uint8)


def upscale(img: np.ndarray, factor: int) -> np.ndarray:
    return np.kron(img, np.ones((factor, factor), dtype=img.dtype)) if factor > 1 else img


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def pgm_bytes(img: np.ndarray) -> bytes:
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def write_gray(path_stem, img: np.ndarray) -> list:
    """Write <stem>.pgm and <stem>.png; returns the paths."""
    stem = Path(path_stem)
    pgm = stem.with_suffix(".pgm")
    png = stem.with_suffix(".png")
    _atomic_write(pgm, pgm_bytes(img))
    import io
    buf = io.BytesIO()
    Image.fromarray(img, mode="L").save(buf, format="PNG", optimize=False, compress_level=9)
    _atomic_write(png, buf.getvalue())
    return [pgm, png]


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def grid_image(grid, scale: int = 8) -> np.ndarray:
    return upscale(to_gray(grid), scale)


def bell_heatmap_image(matrix, scale: int = 24) -> np.ndarray:
    return upscale(to_gray(matrix, 1.5), scale)


def matinv_image(darkness, scale: int = 16) -> np.ndarray:
    return upscale(to_gray(darkness), scale)


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".") if x != 0 else "0"


class Svg:
    def __init__(self, width: int, height: int):
        self.w, self.h = width, height
        self.items = []

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0, opacity=1.0):
        self.items.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                          f'stroke="{stroke}" stroke-width="{_fmt(width)}" stroke-opacity="{_fmt(opacity)}"/>')

    def polyline(self, pts, stroke="black", width=1.0, closed=True, dash=None):
        tag = "polygon" if closed else "polyline"
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<{tag} points="{coords}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_fmt(width)}"{extra}/>')

    def circle(self, x, y, r, fill="black"):
        self.items.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{fill}"/>')

    def rect(self, x, y, w, h, fill="black", stroke="none"):
        self.items.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
                          f'fill="{fill}" stroke="{stroke}"/>')

    def text(self, x, y, s, size=10, anchor="middle"):
        s = str(s).replace("&", "&amp;").replace("<", "&lt;")
        self.items.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
                          f'text-anchor="{anchor}" font-family="sans-serif">{s}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f'<rect width="{self.w}" height="{self.h}" fill="white"/>', *self.items, "</svg>\n"])

    def save(self, path) -> Path:
        _atomic_write(Path(path), self.render().encode())
        return Path(path)


def _plane_mapper(points, size: int, pad: int = 20):
    pts = np.asarray(points)
    span = max(np.max(np.abs(pts.real)), np.max(np.abs(pts.imag)), 1e-12) * 1.1
    half = (size - 2 * pad) / 2

    def m(z):
        return size / 2 + half * z.real / span, size / 2 - half * z.imag / span

    return m


def line_drawing_svg(target, estimate, path, size: int = 320) -> Path:
    svg = Svg(size, size)
    target = np.asarray(target)
    estimate = np.asarray(estimate)
    m = _plane_mapper(np.concatenate([target, estimate]), size)
    svg.polyline([m(z) for z in target], stroke="#888888", width=2, dash="6,3")
    svg.polyline([m(z) for z in estimate], stroke="black", width=1.5)
    for z in estimate:
        svg.circle(*m(z), 2.5)
    return svg.save(path)


def platonic_svg(result, path, size: int = 400) -> Path:
    """Expected trajectory tree in grey; measured endpoints joined to their parents."""
    from .bench.platonic import expected_trajectory

    svg = Svg(size, size)
    pad = 20
    half = (size - 2 * pad) / 2

    def m(y, z):
        return size / 2 + half * y, size / 2 - half * z

    svg.polyline([m(math.cos(t), math.sin(t)) for t in np.linspace(0, 2 * np.pi, 96, endpoint=False)],
                 stroke="#cccccc")
    for (bases, outs), meas in zip(result.labels, result.measured):
        traj = expected_trajectory(bases, outs, result.strength)
        for a, b in zip(traj[:-1], traj[1:]):
            svg.line(*m(a[1], a[2]), *m(b[1], b[2]), stroke="#bbbbbb", width=0.6)
        parent = traj[-2]
        svg.line(*m(parent[1], parent[2]), *m(meas[0], meas[1]), stroke="black", width=0.8)
        svg.circle(*m(meas[0], meas[1]), 1.6)
    return svg.save(path)


def bar_chart_svg(labels, values, path, title="", width=480, height=300) -> Path:
    svg = Svg(width, height)
    n = max(len(values), 1)
    vmax = max([v for v in values if np.isfinite(v)] + [1e-12])
    bw = (width - 60) / n
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = 0 if not np.isfinite(v) else (height - 80) * v / vmax
        x = 40 + i * bw
        svg.rect(x + 4, height - 40 - h, bw - 8, h, fill="#444444")
        svg.text(x + bw / 2, height - 24, lab, size=10)
        svg.text(x + bw / 2, height - 44 - h, f"{v:.3g}", size=9)
    svg.text(width / 2, 18, title, size=12)
    return svg.save(path)


def scatter_fit_svg(points, errors, fit, path, width=480, height=320) -> Path:
    """Score versus 1/sqrt(N) with the fitted line."""
    svg = Svg(width, height)
    xs = np.array([1 / math.sqrt(p[0]) for p in points])
    ys = np.array([p[1] for p in points])
    xmax = max(xs.max(), 1e-12) * 1.05
    ymax = max((ys + np.asarray(errors)).max(), fit.n_d + fit.n_s * xmax, 1e-12) * 1.1

    def m(x, y):
        return 50 + (width - 70) * x / xmax, height - 40 - (height - 70) * y / ymax

    svg.line(*m(0, 0), *m(xmax, 0))
    svg.line(*m(0, 0), *m(0, ymax))
    svg.line(*m(0, fit.n_d), *m(xmax, fit.n_d + fit.n_s * xmax), stroke="#888888", width=1.5)
    for x, y, e in zip(xs, ys, errors):
        svg.line(*m(x, y - e), *m(x, y + e))
        svg.circle(*m(x, y), 3)
    svg.text(width / 2, height - 10, "1/sqrt(N)", size=11)
    svg.text(width / 2, 18, f"n_s = {fit.n_s:.4g}, n_d = {fit.n_d:.4g}", size=12)
    return svg.save(path)
