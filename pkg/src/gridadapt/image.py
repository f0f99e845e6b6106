"""Scalar image container with multilinear sampling, synthetic shapes and I/O.

Coordinates follow array index order: component ``i`` of a coordinate vector
indexes axis ``i`` of the data array, so for 2-D images a point is
``(row, col)``.
"""
from __future__ import annotations

import itertools
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


class Image:
    """Immutable d-dimensional scalar image.

    Intensities at fractional coordinates are obtained by multilinear
    interpolation of the 2^d surrounding grid samples; values at integer grid
    points are exact.
    """

    def __init__(self, data):
        data = np.array(data, dtype=np.float64)
        if data.ndim < 1 or data.size == 0:
            raise ValueError("image data must be a non-empty array")
        data.setflags(write=False)
        self.data = data
        self.intensity_range = (float(data.min()), float(data.max()))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def intensity_span(self) -> float:
        lo, hi = self.intensity_range
        return hi - lo

    def sample_many(self, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at an (N, d) array of coordinates."""
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[None, :]
        d = self.data.ndim
        if pts.ndim != 2 or pts.shape[1] != d:
            raise ValueError(f"expected (N, {d}) coordinates, got shape {pts.shape}")
        shape = np.array(self.data.shape)
        for ax in range(d):
            lo = pts[:, ax].min() if len(pts) else 0.0
            hi = pts[:, ax].max() if len(pts) else 0.0
            if lo < 0.0 or hi > shape[ax] - 1:
                bad = lo if lo < 0.0 else hi
                raise ValueError(
                    f"coordinate {bad} outside extent [0, {shape[ax] - 1}] on axis {ax}"
                )
        base = np.floor(pts).astype(np.int64)
        np.minimum(base, np.maximum(shape - 2, 0), out=base)
        frac = pts - base
        corners = np.empty((len(pts), 2**d))
        for k, corner in enumerate(itertools.product((0, 1), repeat=d)):
            idx = tuple(
                np.minimum(base[:, ax] + c, shape[ax] - 1) for ax, c in enumerate(corner)
            )
            corners[:, k] = self.data[idx]
        # reduce one axis at a time; lerp keeps constants and grid values exact
        for ax in range(d - 1, -1, -1):
            lo = corners[:, 0::2]
            corners = lo + frac[:, ax : ax + 1] * (corners[:, 1::2] - lo)
        return corners[:, 0]

    def sample(self, x) -> float:
        """Multilinear interpolation at a single coordinate vector."""
        return float(self.sample_many(np.asarray(x, dtype=np.float64)[None, :])[0])


class SyntheticShape(str, Enum):
    DIAG = "diag"
    FLAT = "flat"
    CORNER = "corner"
    CIRCLE = "circle"
    VERTICAL = "vertical"
    DONUT = "donut"


# Canonical geometry, fixed so golden tests stay stable: circle radius
# 0.30*size and donut radii (0.15, 0.35)*size, both centred; flat/vertical
# boundaries at size//2; diag splits along the anti-diagonal; corner is the
# top-left quadrant.
CIRCLE_RADIUS_FRACTION = 0.30
DONUT_RADII_FRACTION = (0.15, 0.35)


def shape_mask(shape: SyntheticShape | str, size: int) -> np.ndarray:
    """Boolean foreground mask of a canonical binary test shape."""
    shape = SyntheticShape(shape)
    if size < 16:
        raise ValueError("size must be >= 16 pixels")
    r, c = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    if shape is SyntheticShape.FLAT:
        return r < size // 2
    if shape is SyntheticShape.VERTICAL:
        return c < size // 2
    if shape is SyntheticShape.DIAG:
        return r + c < size
    if shape is SyntheticShape.CORNER:
        return (r < size // 2) & (c < size // 2)
    ctr = (size - 1) / 2.0
    rad = np.hypot(r - ctr, c - ctr)
    if shape is SyntheticShape.CIRCLE:
        return rad < CIRCLE_RADIUS_FRACTION * size
    return (DONUT_RADII_FRACTION[0] * size <= rad) & (rad < DONUT_RADII_FRACTION[1] * size)


def generate_synthetic(
    shape: SyntheticShape | str,
    size: int,
    noise_sigma_pct: float = 0.0,
    seed: int = 0,
) -> Image:
    """Binary shape image with optional additive centred Gaussian noise.

    ``noise_sigma_pct`` is the noise standard deviation as a fraction of the
    maximum clean intensity. Noise is not clamped, so noisy sample values may
    fall outside the clean [0, 1] range; detectors must accept this.
    Deterministic for a fixed seed.
    """
    if not 0.0 <= noise_sigma_pct <= 1.0:
        raise ValueError("noise_sigma_pct must be in [0, 1]")
    clean = shape_mask(shape, size).astype(np.float64)
    if noise_sigma_pct > 0.0:
        rng = np.random.default_rng(seed)
        clean = clean + rng.normal(0.0, noise_sigma_pct * clean.max(), clean.shape)
    return Image(clean)


def ground_truth_contour(shape: SyntheticShape | str, size: int) -> np.ndarray:
    """Boolean contour mask of the clean shape.

    Marks foreground pixels with at least one differing 4-neighbour (one-sided
    boundary, so a straight boundary is one pixel wide and a circle of radius
    r has on the order of 2*pi*r contour pixels).
    """
    mask = shape_mask(shape, size)
    padded = np.pad(mask, 1, mode="edge")
    diff = np.zeros_like(mask)
    core = tuple(slice(1, -1) for _ in range(mask.ndim))
    for ax in range(mask.ndim):
        for off in (-1, 1):
            diff |= np.roll(padded, off, axis=ax)[core] != mask
    return mask & diff


def _to_uint8(img: Image) -> np.ndarray:
    d = img.data
    if d.ndim != 2:
        raise ValueError("only 2-D images can be written")
    if np.all((d >= 0) & (d <= 255)) and np.all(d == np.round(d)):
        return d.astype(np.uint8)
    lo, hi = img.intensity_range
    if hi == lo:
        return np.zeros(d.shape, np.uint8)
    return np.round((d - lo) / (hi - lo) * 255.0).astype(np.uint8)


def _format_from_suffix(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return "pgm"
    if suffix == ".png":
        return "png"
    raise ValueError(f"cannot infer image format from suffix {suffix!r}")


def save_image(img: Image, path, fmt: str | None = None) -> None:
    """Write an 8-bit graymap (P5/P2) or grayscale PNG.

    Data already integral in [0, 255] is written verbatim; anything else is
    rescaled linearly from the image intensity range onto [0, 255].
    """
    path = Path(path)
    fmt = fmt or _format_from_suffix(path)
    data = _to_uint8(img)
    h, w = data.shape
    if fmt == "pgm":
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        path.write_bytes(header + data.tobytes())
    elif fmt == "pgm-ascii":
        lines = "\n".join(" ".join(str(v) for v in row) for row in data)
        path.write_text(f"P2\n{w} {h}\n255\n{lines}\n")
    elif fmt == "png":
        PILImage.fromarray(data, "L").save(path)
    else:
        raise ValueError(f"unsupported image format {fmt!r}")


def _strip_pgm_comments(raw: bytes) -> bytes:
    out = []
    for line in raw.split(b"\n"):
        hash_pos = line.find(b"#")
        out.append(line if hash_pos < 0 else line[:hash_pos])
    return b"\n".join(out)


def _load_pgm(path: Path) -> Image:
    raw = path.read_bytes()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a portable graymap (magic {magic!r})")
    if magic == b"P2":
        tokens = _strip_pgm_comments(raw).split()
        w, h, maxval = (int(t) for t in tokens[1:4])
        if maxval > 255:
            raise ValueError(f"{path}: unsupported graymap bit depth (maxval {maxval})")
        pixels = np.array([int(t) for t in tokens[4:]], dtype=np.float64)
        if pixels.size != w * h:
            raise ValueError(f"{path}: expected {w * h} pixels, found {pixels.size}")
        return Image(pixels.reshape(h, w))
    # P5: parse header token-wise, pixel data starts after one whitespace byte
    pos, vals = 2, []
    while len(vals) < 3:
        if pos >= len(raw):
            raise ValueError(f"{path}: truncated graymap header")
        ch = raw[pos : pos + 1]
        if ch.isspace():
            pos += 1
            continue
        if ch == b"#":
            nl = raw.find(b"\n", pos)
            pos = len(raw) if nl < 0 else nl + 1
            continue
        end = pos
        while end < len(raw) and not raw[end : end + 1].isspace():
            end += 1
        vals.append(raw[pos:end])
        pos = end
    w, h, maxval = (int(v) for v in vals)
    if maxval > 255:
        raise ValueError(f"{path}: unsupported graymap bit depth (maxval {maxval})")
    pos += 1
    pixels = np.frombuffer(raw[pos : pos + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ValueError(f"{path}: expected {w * h} pixels, found {pixels.size}")
    return Image(pixels.reshape(h, w).astype(np.float64))


def _load_png(path: Path) -> Image:
    with PILImage.open(path) as im:
        if im.mode in ("I", "I;16", "F"):
            raise ValueError(f"{path}: unsupported PNG bit depth (mode {im.mode})")
        if im.mode != "L":
            # colour inputs reduce to Rec. 601 luminance
            im = im.convert("L")
        return Image(np.asarray(im, dtype=np.float64))


def load_image(path, fmt: str | None = None) -> Image:
    """Read a PGM (P2/P5) or PNG image as a scalar Image."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    fmt = fmt or _format_from_suffix(path)
    if fmt in ("pgm", "pgm-ascii"):
        return _load_pgm(path)
    if fmt == "png":
        return _load_png(path)
    raise ValueError(f"unsupported image format {fmt!r}")
