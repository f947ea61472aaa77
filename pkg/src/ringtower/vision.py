"""Per-frame tower and ring localization.

All functions are pure: they take immutable pixel arrays and return fresh
boolean masks, so frames can be processed in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .model import DetectorConfig, Rect, ValidationError

#: 4-connectivity structuring element for component labeling.
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def rgb_to_hsv(pixels: np.ndarray) -> np.ndarray:
    """Convert RGB (0-255) to hexcone HSV with h in [0, 180), s and v in [0, 255].

    v is the max channel; s is 0 where v is 0; h is 0 where the pixel is gray.
    Accepts any (..., 3) array and returns float64 of the same shape.
    """
    rgb = np.asarray(pixels)
    if rgb.shape[-1] != 3:
        raise ValidationError("rgb_to_hsv: last axis must hold RGB triples")
    r = np.asarray(rgb[..., 0], dtype=np.float64)
    g = np.asarray(rgb[..., 1], dtype=np.float64)
    b = np.asarray(rgb[..., 2], dtype=np.float64)
    v = np.maximum(np.maximum(r, g), b)
    delta = v - np.minimum(np.minimum(r, g), b)

    safe_v = np.where(v > 0, v, 1.0)
    s = np.where(v > 0, 255.0 * delta / safe_v, 0.0)

    # sextant hue, then scaled onto [0, 180): 30 units per 60 degrees
    safe = np.where(delta > 0, delta, 1.0)
    h = np.where(
        v == r,
        np.mod((g - b) / safe, 6.0),
        np.where(v == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    )
    h = np.where(delta > 0, 30.0 * h, 0.0)

    out = np.empty(rgb.shape, dtype=np.float64)
    out[..., 0] = h
    out[..., 1] = s
    out[..., 2] = v
    return out


def filter_small_components(mask: np.ndarray, min_px: int) -> np.ndarray:
    """Drop 4-connected components smaller than min_px pixels."""
    if not mask.any():
        return mask.copy()
    labeled, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    sizes = np.bincount(labeled.ravel())
    keep = sizes >= min_px
    keep[0] = False
    return keep[labeled]


def tower_mask(pixels: np.ndarray, config: DetectorConfig) -> np.ndarray:
    """Pixels matching the tower color thresholds, small components removed."""
    hsv = rgb_to_hsv(pixels)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    mask = (h >= config.hue_min) & (h <= config.hue_max) & (s >= config.sat_min) & (v <= config.val_max)
    return filter_small_components(mask, config.min_blob_px)


def restrict_roi(mask: np.ndarray, roi: Rect) -> np.ndarray:
    """Clear every pixel outside the rectangle."""
    height, width = mask.shape
    if not roi.fits_in(width, height):
        raise ValidationError(f"roi {roi} outside {width}x{height} mask")
    out = np.zeros_like(mask)
    out[roi.y:roi.y2, roi.x:roi.x2] = mask[roi.y:roi.y2, roi.x:roi.x2]
    return out


def ring_mask(pixels: np.ndarray, tower: np.ndarray, config: DetectorConfig) -> np.ndarray:
    """Dark ring pixels near the tower.

    Keeps pixels with value at most val_max_ring, in components of at least
    min_ring_px pixels, and within max_ring_tower_dist_px (Chebyshev) of a
    tower pixel. An empty result is valid: the ring may be fully occluded.
    """
    if pixels.shape[:2] != tower.shape:
        raise ValidationError("ring_mask: frame and tower mask sizes differ")
    v = np.max(pixels, axis=-1)  # the HSV value channel
    dark = v <= config.val_max_ring
    dark = filter_small_components(dark, config.min_ring_px)
    if not tower.any():
        return np.zeros_like(dark)
    dist = ndimage.distance_transform_cdt(~tower, metric="chessboard")
    return dark & (dist <= config.max_ring_tower_dist_px)


def ring_centroid(mask: np.ndarray) -> Optional[tuple[float, float]]:
    """Mean (x, y) of the set pixels, or None for an empty mask."""
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return None
    return float(xs.mean()), float(ys.mean())


@dataclass(frozen=True)
class Blob:
    """One connected component of a mask."""

    size: int
    bbox: Rect
    centroid: tuple[float, float]


def blobs(mask: np.ndarray) -> list[Blob]:
    """4-connected components, largest first."""
    labeled, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    out = []
    for slc, label in zip(ndimage.find_objects(labeled), range(1, n + 1)):
        component = labeled[slc] == label
        ys, xs = np.nonzero(component)
        out.append(
            Blob(
                size=int(component.sum()),
                bbox=Rect(
                    x=slc[1].start,
                    y=slc[0].start,
                    width=slc[1].stop - slc[1].start,
                    height=slc[0].stop - slc[0].start,
                ),
                centroid=(float(xs.mean() + slc[1].start), float(ys.mean() + slc[0].start)),
            )
        )
    out.sort(key=lambda blob: -blob.size)
    return out
