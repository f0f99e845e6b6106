"""Deterministic rendering of graphs and dual graphs over images.

SVG is the primary output (byte-identical for identical inputs; no
timestamps). Edge strokes map log2(saliency) linearly onto [black, white]
over a configurable range, clamped; zero saliency clamps to the dark end
instead of dropping the edge so flat-region structure stays visible.
"""
from __future__ import annotations

import base64
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .dual import DualGraph
from .graph import Graph
from .image import Image

BACKGROUNDS = ("image", "white")


@dataclass(frozen=True)
class RenderSpec:
    log_range: tuple[float, float] = (-15.0, 0.0)  # log2 saliency units
    stroke_width: float = 1.0
    background: str = "image"

    def __post_init__(self):
        lo, hi = self.log_range
        if not lo < hi:
            raise ValueError("log_range must satisfy lo < hi")
        if self.background not in BACKGROUNDS:
            raise ValueError(f"unknown background {self.background!r}")


def saliency_gray_levels(saliency: np.ndarray, log_range: tuple[float, float]) -> np.ndarray:
    """8-bit gray level per saliency: log2, clamped to log_range, lo=black."""
    lo, hi = log_range
    s = np.asarray(saliency, dtype=np.float64)
    with np.errstate(divide="ignore"):
        v = np.where(s > 0.0, np.log2(np.maximum(s, np.finfo(float).tiny)), -np.inf)
    frac = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    return np.round(frac * 255.0).astype(np.int64)


def _edge_segments(g) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    if isinstance(g, DualGraph):
        return g.node_positions, g.edges, g.edge_saliency
    if isinstance(g, Graph):
        return g.nodes, g.edges, None
    raise TypeError(f"cannot render object of type {type(g).__name__}")


def _image_data_uri(img: Image) -> str:
    lo, hi = img.intensity_range
    span = hi - lo if hi > lo else 1.0
    data = np.round((img.data - lo) / span * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(data, "L").save(buf, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def render_svg(img: Image, g, spec: RenderSpec | None = None) -> str:
    """Render a Graph or DualGraph to an SVG 1.1 string.

    Exactly one stroke element per edge. Primal graphs (no saliency) render
    with black strokes.
    """
    spec = spec or RenderSpec()
    if img.ndim != 2:
        raise ValueError("rendering supports 2-D images only")
    h, w = img.dims
    positions, edges, saliency = _edge_segments(g)
    hi = np.array(img.dims, dtype=np.float64) - 1.0
    if len(positions) and (positions.min() < 0.0 or np.any(positions.max(axis=0) > hi)):
        raise ValueError("graph coordinates must lie within the image extent")
    if saliency is None:
        levels = np.zeros(len(edges), dtype=np.int64)
    else:
        levels = saliency_gray_levels(saliency, spec.log_range)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
    ]
    if spec.background == "image":
        parts.append(
            f'<image x="0" y="0" width="{w}" height="{h}" '
            f'preserveAspectRatio="none" href="{_image_data_uri(img)}"/>'
        )
    else:
        parts.append(f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>')
    sw = f"{spec.stroke_width:.3f}"
    for (i, j), level in zip(edges, levels):
        p, q = positions[i], positions[j]
        color = f"rgb({level},{level},{level})"
        parts.append(
            f'<line x1="{p[1]:.3f}" y1="{p[0]:.3f}" x2="{q[1]:.3f}" y2="{q[0]:.3f}" '
            f'stroke="{color}" stroke-width="{sw}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def render_png(img: Image, g, spec: RenderSpec | None = None, path=None, dpi: int = 100) -> None:
    """Rasterize the same scene with matplotlib."""
    from matplotlib.collections import LineCollection
    from matplotlib.figure import Figure

    spec = spec or RenderSpec()
    positions, edges, saliency = _edge_segments(g)
    h, w = img.dims
    fig = Figure(figsize=(w / dpi, h / dpi), dpi=dpi)
    ax = fig.add_axes([0, 0, 1, 1])
    ax.set_axis_off()
    if spec.background == "image":
        ax.imshow(img.data, cmap="gray", interpolation="nearest")
    else:
        ax.set_facecolor("white")
    # matplotlib draws in (x=col, y=row)
    segs = positions[edges][:, :, ::-1]
    if saliency is None:
        colors = [(0.0, 0.0, 0.0)] * len(edges)
    else:
        levels = saliency_gray_levels(saliency, spec.log_range) / 255.0
        colors = [(v, v, v) for v in levels]
    ax.add_collection(LineCollection(segs, colors=colors, linewidths=spec.stroke_width))
    ax.set_xlim(-0.5, w - 0.5)
    ax.set_ylim(h - 0.5, -0.5)
    fig.savefig(Path(path), dpi=dpi)


def render_graph(img: Image, g, spec: RenderSpec | None = None, path=None, png_path=None, dpi: int = 100) -> None:
    """Write the SVG render; optionally also a rasterized PNG."""
    if path is None:
        raise ValueError("an output path is required")
    Path(path).write_text(render_svg(img, g, spec))
    if png_path is not None:
        render_png(img, g, spec, png_path, dpi=dpi)
