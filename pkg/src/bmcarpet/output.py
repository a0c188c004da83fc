"""Deterministic CSV, minimal SVG and binary PGM writers with atomic replacement."""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_value(v) -> str:
    """12 significant digits, '.' decimal, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        text = f"{v:.12g}"
        return "0" if text == "-0" else text
    return str(v)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write to a temporary file beside ``path`` and rename over it."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def csv_bytes(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_bytes(path, csv_bytes(header, rows))


def svg_plot(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    x_label: str,
    y_label: str,
    title: str = "",
) -> bytes:
    """One polyline per series on a 1000 x 700 viewBox, with axes, tick labels and a legend."""
    width, height = 1000, 700
    left, right, top, bottom = 90, 30, 50, 70
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    if not ok.any():
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    else:
        x0, x1 = float(xs[ok].min()), float(xs[ok].max())
        y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    colors = ("#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="14">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
    ]
    for t in np.linspace(x0, x1, 6):
        out.append(f'<text x="{px(t):.2f}" y="{height - bottom + 20}" text-anchor="middle">{t:.4g}</text>')
    for t in np.linspace(y0, y1, 6):
        out.append(f'<text x="{left - 8}" y="{py(t) + 5:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{(left + width - right) / 2}" y="{height - 20}" text-anchor="middle">{x_label}</text>')
    out.append(
        f'<text x="22" y="{(top + height - bottom) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 22 {(top + height - bottom) / 2})">{y_label}</text>'
    )
    if title:
        out.append(f'<text x="{width / 2}" y="30" text-anchor="middle">{title}</text>')
    for k, (name, sx, sy) in enumerate(series):
        color = colors[k % len(colors)]
        pts = " ".join(
            f"{px(a):.2f},{py(b):.2f}" for a, b in zip(sx, sy) if a is not None and b is not None and np.isfinite(a) and np.isfinite(b)
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        out.append(f'<text x="{width - right - 10}" y="{top + 20 * (k + 1)}" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def write_svg(path: str | Path, *args, **kwargs) -> None:
    atomic_write_bytes(path, svg_plot(*args, **kwargs))


def pgm_bytes(image: np.ndarray) -> bytes:
    """Binary P5, maxval 255, rows top to bottom."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("PGM needs a 2-d array")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    atomic_write_bytes(path, pgm_bytes(image))
