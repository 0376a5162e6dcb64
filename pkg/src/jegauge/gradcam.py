"""Class activation maps from exported layer activations and gradients.

Works entirely from files: the model runtime dumps the feature maps of a
convolution layer (K channel maps of h x w) plus either the final
fully-connected row for a class (CAM) or the gradients of that class
score with respect to the feature maps (Grad-CAM). Channel weights for
Grad-CAM are the global average of each gradient map; with spatially
constant gradients the two constructions agree exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError


def check_stack(stack: np.ndarray, name: str = "stack") -> np.ndarray:
    """Validate a (K, h, w) float stack of channel maps."""
    arr = np.asarray(stack)
    if arr.ndim != 3:
        raise DimensionError(f"{name}: expected (K, h, w), got shape {arr.shape}")
    if any(e < 1 for e in arr.shape):
        raise DimensionError(f"{name}: empty extent in shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: values must be finite")
    return arr.astype(np.float32, copy=False)


def compute_cam(activations: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """ReLU of the channel-weighted sum of activation maps.

    ``weights`` is the length-K fully-connected row for the class of
    interest; output is (h, w) float32, nonnegative.
    """
    a = check_stack(activations, "activations")
    w = np.asarray(weights, dtype=np.float32)
    if w.ndim != 1 or w.shape[0] != a.shape[0]:
        raise DimensionError(
            f"weights: expected length {a.shape[0]}, got shape {w.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights: values must be finite")
    raw = np.tensordot(w, a, axes=1)
    return np.maximum(raw, 0.0).astype(np.float32)


def compute_gradcam(activations: np.ndarray, gradients: np.ndarray) -> np.ndarray:
    """Gradient-weighted activation map.

    Channel weights are the spatial mean of each gradient map (global
    average pooling); the weighted sum is rectified. Output (h, w)
    float32, nonnegative.
    """
    a = check_stack(activations, "activations")
    g = check_stack(gradients, "gradients")
    if a.shape != g.shape:
        raise DimensionError(
            f"activations {a.shape} and gradients {g.shape} must match"
        )
    alphas = g.mean(axis=(1, 2), dtype=np.float64).astype(np.float32)
    return compute_cam(a, alphas)


def normalize_map(raw: np.ndarray) -> np.ndarray:
    """Min-max scale a map to [0, 1]; a constant map becomes all zeros."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"map: expected 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("map: values must be finite")
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.zeros(arr.shape, dtype=np.float32)
    out = (arr - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def upsample_bilinear(m: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize a 2-d map with half-pixel-centered bilinear sampling."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"map: expected non-empty 2-d array, got shape {arr.shape}")
    if width < 1 or height < 1:
        raise DimensionError(f"target extents must be >= 1, got {width}x{height}")
    h, w = arr.shape

    def axis_coords(n_out, n_in):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        i0 = np.floor(src).astype(np.intp)
        i1 = np.minimum(i0 + 1, n_in - 1)
        return i0, i1, src - i0

    y0, y1, fy = axis_coords(height, h)
    x0, x1, fx = axis_coords(width, w)
    fy = fy[:, None]
    fx = fx[None, :]
    top = arr[np.ix_(y0, x0)] * (1 - fx) + arr[np.ix_(y0, x1)] * fx
    bot = arr[np.ix_(y1, x0)] * (1 - fx) + arr[np.ix_(y1, x1)] * fx
    return (top * (1 - fy) + bot * fy).astype(np.float32)


def render_colormap(m: np.ndarray) -> np.ndarray:
    """Render a [0, 1] saliency map with the classic jet ramp.

    r(v) = clamp(1.5 - |4v - 3|), g(v) = clamp(1.5 - |4v - 2|),
    b(v) = clamp(1.5 - |4v - 1|), each clamped to [0, 1], scaled to 255
    and rounded half-up, so renders are bit-reproducible.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"map: expected 2-d array, got shape {arr.shape}")
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValidationError("map: values must be finite")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(
            f"map: values must lie in [0, 1], got [{arr.min()}, {arr.max()}]"
        )
    v4 = 4.0 * arr
    channels = [np.clip(1.5 - np.abs(v4 - c), 0.0, 1.0) for c in (3.0, 2.0, 1.0)]
    rgb = np.stack(channels, axis=-1)
    return np.floor(rgb * 255.0 + 0.5).astype(np.uint8)
