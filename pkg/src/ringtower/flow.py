"""Dense Horn-Schunck optical flow between consecutive frames.

The classical global formulation: brightness-constancy plus an
alpha^2-weighted smoothness term, minimized by Jacobi iterations. Spatial
derivatives are centered differences of the two-frame mean image, the
temporal derivative is the forward difference, and every stencil clamps at
the image border. Results are deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ValidationError

#: Neighbor-averaging kernel of the Horn-Schunck iteration.
HS_KERNEL = np.array(
    [[1 / 12, 1 / 6, 1 / 12],
     [1 / 6, 0.0, 1 / 6],
     [1 / 12, 1 / 6, 1 / 12]],
    dtype=np.float64,
)

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


@dataclass(frozen=True)
class FlowField:
    """Per-pixel velocities in pixels/frame-pair, plus their magnitude."""

    vx: np.ndarray
    vy: np.ndarray
    magnitude: np.ndarray


def to_grayscale(pixels: np.ndarray) -> np.ndarray:
    """Luminance 0.299 R + 0.587 G + 0.114 B."""
    return (np.asarray(pixels, dtype=np.float32) @ GRAY_WEIGHTS.astype(np.float32)).astype(np.float32)


def _centered_gradient(image: np.ndarray, axis: int) -> np.ndarray:
    # centered difference; replicated edges make the stencil clamp there
    padded = np.pad(image, [(1, 1) if ax == axis else (0, 0) for ax in range(2)], mode="edge")
    if axis == 0:
        return (padded[2:, :] - padded[:-2, :]) / np.float32(2.0)
    return (padded[:, 2:] - padded[:, :-2]) / np.float32(2.0)


def horn_schunck(
    prev: np.ndarray,
    next: np.ndarray,
    alpha: float = 1.0,
    iterations: int = 10,
) -> FlowField:
    """Estimate flow from ``prev`` to ``next``.

    Both inputs may be RGB (converted to luminance internally) or already
    grayscale. Raises on size mismatch or a non-positive iteration count.
    """
    if iterations < 1:
        raise ValidationError("horn_schunck: iterations must be at least 1")
    if prev.shape[:2] != next.shape[:2]:
        raise ValidationError("horn_schunck: frame sizes differ")
    im1 = to_grayscale(prev) if prev.ndim == 3 else np.asarray(prev, dtype=np.float32)
    im2 = to_grayscale(next) if next.ndim == 3 else np.asarray(next, dtype=np.float32)

    mean = (im1 + im2) / np.float32(2.0)
    fx = _centered_gradient(mean, axis=1)
    fy = _centered_gradient(mean, axis=0)
    ft = im2 - im1

    u = np.zeros_like(im1)
    v = np.zeros_like(im1)
    denom = np.float32(alpha * alpha) + fx * fx + fy * fy
    for _ in range(iterations):
        u_avg = _neighbor_average(u)
        v_avg = _neighbor_average(v)
        gradient_term = (fx * u_avg + fy * v_avg + ft) / denom
        u = u_avg - fx * gradient_term
        v = v_avg - fy * gradient_term

    return FlowField(vx=u, vy=v, magnitude=np.hypot(u, v))


def _neighbor_average(a: np.ndarray) -> np.ndarray:
    """Weighted 8-neighbor average (HS_KERNEL) with clamped edges."""
    p = np.pad(a, 1, mode="edge")
    edges = p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
    corners = p[:-2, :-2] + p[:-2, 2:] + p[2:, :-2] + p[2:, 2:]
    return edges * np.float32(1 / 6) + corners * np.float32(1 / 12)


def flow_into_mask_sum(field: FlowField, mask: np.ndarray) -> float:
    """Sum of flow magnitudes over the mask pixels."""
    if field.magnitude.shape != mask.shape:
        raise ValidationError("flow_into_mask_sum: field and mask sizes differ")
    return float(field.magnitude[mask].sum(dtype=np.float64))
