"""
Image and polyline export.

The field image has one pixel per grid cell (row 0 at the top): Fatou
components get a hue from their id, brightness follows δ̂, Julia-suspect
cells are black. Images are binary PPM (P6) with a YAML sidecar that records
the GridSpec, so a pixel can be mapped back to the sphere.
"""

import logging
import os

import numpy as np
import yaml

from .data import TOOL_NAME, TOOL_VERSION

logger = logging.getLogger(__name__)

GOLDEN_RATIO_CONJUGATE = 0.6180339887498949
MIN_BRIGHTNESS = 0.35
SATURATION = 0.65

OVERLAY_COLORS = {
    "continuum": (255, 255, 255),
    "path": (255, 40, 40),
    "boundary": (40, 255, 40),
}


def hsv_to_rgb(h, s, v):
    """Vectorized HSV → RGB, all channels in [0, 1]."""
    h = np.asarray(h, dtype=float) % 1.0
    s = np.broadcast_to(np.asarray(s, dtype=float), h.shape)
    v = np.broadcast_to(np.asarray(v, dtype=float), h.shape)
    i = np.floor(h * 6.0).astype(int) % 6
    frac = h * 6.0 - np.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    choices = [
        np.stack([v, t, p], -1),
        np.stack([q, v, p], -1),
        np.stack([p, v, t], -1),
        np.stack([p, q, v], -1),
        np.stack([t, p, v], -1),
        np.stack([v, p, q], -1),
    ]
    out = np.zeros(h.shape + (3,))
    for k, rgb in enumerate(choices):
        out[i == k] = rgb[i == k]
    return out


def field_image(grid_field):
    """uint8 RGB array (N, N, 3) for a classified field."""
    comp = grid_field.component
    hue = (comp * GOLDEN_RATIO_CONJUGATE) % 1.0
    if grid_field.has_distance:
        delta = grid_field.delta_hat
        top = float(delta[comp >= 0].max()) if np.any(comp >= 0) else 1.0
        level = np.sqrt(np.clip(delta / (top or 1.0), 0.0, 1.0))
        value = MIN_BRIGHTNESS + (1.0 - MIN_BRIGHTNESS) * level
    else:
        value = np.ones(comp.shape)
    rgb = hsv_to_rgb(hue, SATURATION, value)
    rgb[comp < 0] = 0.0
    return np.round(rgb * 255.0).astype(np.uint8)


def overlay(image, spec, points, color=OVERLAY_COLORS["continuum"]):
    """Paint the cells containing `points` (off-grid points are ignored)."""
    rows, cols, valid = spec.cells_of(np.asarray(points, dtype=complex).ravel())
    out = image.copy()
    out[rows[valid], cols[valid]] = color
    return out


def write_ppm(path, image):
    """Binary P6 PPM from a uint8 (height, width, 3) array."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    height, width = image.shape[:2]
    header = b"P6\n%d %d\n255\n" % (width, height)
    with open(path, "wb") as f:
        f.write(header)
        f.write(image.tobytes())
    logger.debug("wrote %s (%dx%d)", path, width, height)


def read_ppm(path):
    """Inverse of write_ppm for files it produced."""
    with open(path, "rb") as f:
        data = f.read()
    magic, dims, maxval, body = data.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise ValueError("%s is not an 8-bit P6 image" % path)
    width, height = (int(v) for v in dims.split())
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)


def write_sidecar(path, spec, extra=None):
    meta = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "chart": spec.chart,
        "center": [spec.center.real, spec.center.imag],
        "half_width": float(spec.half_width),
        "resolution": spec.resolution,
        "pixel": "row i, column j -> chart point (cx - hw + (j + 1/2) 2hw/N, cy + hw - (i + 1/2) 2hw/N)",
    }
    if extra:
        meta.update(extra)
    with open(path, "w") as f:
        f.write(yaml.safe_dump(meta, sort_keys=True))


def write_csv(path, points):
    """One `re,im` line per point; ∞ is written as `inf,inf`."""
    lines = []
    for z in np.asarray(points, dtype=complex).ravel():
        if np.isfinite(z):
            lines.append("%r,%r" % (float(z.real), float(z.imag)))
        else:
            lines.append("inf,inf")
    with open(path, "w") as f:
        f.write("\n".join(lines) + ("\n" if lines else ""))


def render_field(out_dir, grid_field, name="field", overlays=()):
    """
    Write <name>.ppm and <name>.yml into out_dir; `overlays` is a sequence of
    (kind, points) painted in order with OVERLAY_COLORS[kind].
    """
    os.makedirs(out_dir, exist_ok=True)
    image = field_image(grid_field)
    for kind, points in overlays:
        image = overlay(image, grid_field.spec, points, OVERLAY_COLORS[kind])
    ppm = os.path.join(out_dir, name + ".ppm")
    write_ppm(ppm, image)
    write_sidecar(
        os.path.join(out_dir, name + ".yml"),
        grid_field.spec,
        {"components": grid_field.n_components, "overlays": [kind for kind, _ in overlays]},
    )
    return ppm
