"""Classical reference convolution.

The convolution here is the index-aligned product-sum (cross-correlation)
between a kernel and each window of the image; the kernel is never flipped.
Padding fills a zero border.  Output size per axis is
``(n + 2*padding - l) // stride + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePatchError, ShapeError

KERNELS = {
    "edge_detection": np.array([[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]], dtype=float),
    "gaussian_blur": np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=float) / 16,
    "sharpen": np.array([[0, -1, 0], [-1, 5, -1], [0, -1, 0]], dtype=float),
    "emboss": np.array([[-2, -1, 0], [-1, 1, 1], [0, 1, 2]], dtype=float),
    "box_blur": np.ones((3, 3)) / 9,
}


@dataclass(frozen=True, eq=False)
class Window:
    """An ``l x m`` slice of the (padded) image anchored at output cell ``anchor``."""

    anchor: tuple[int, int]
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ConvResult:
    grid: np.ndarray
    stride: int
    padding: int


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Per-window overlaps plus what is needed to map them back to conv units."""

    grid: np.ndarray
    stride: int
    padding: int
    method: str
    norm_factors: np.ndarray
    kernel_norm: float
    kernel: np.ndarray = field(repr=False)
    s: int | None = None
    shots: int | None = None


def builtin_kernel(name: str) -> np.ndarray:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    try:
        return KERNELS[key].copy()
    except KeyError:
        raise KeyError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def _as_2d(image) -> np.ndarray:
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError(f"expected a single-channel 2-D image, got shape {arr.shape}")
    return arr


def output_shape(image_shape, kernel_shape, stride: int = 1, padding: int = 0) -> tuple[int, int]:
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ValueError(f"padding must be >= 0, got {padding}")
    out = []
    for n, k in zip(image_shape[:2], kernel_shape[:2]):
        span = n + 2 * padding
        if k > span:
            raise ShapeError(
                f"kernel {tuple(kernel_shape)} larger than padded image "
                f"{tuple(d + 2 * padding for d in image_shape[:2])}"
            )
        out.append((span - k) // stride + 1)
    return out[0], out[1]


def extract_windows(image, l: int, m: int, stride: int = 1, padding: int = 0) -> list[Window]:
    """Windows in row-major anchor order."""
    img = _as_2d(image)
    rows, cols = output_shape(img.shape, (l, m), stride, padding)
    padded = np.pad(img, padding) if padding else img
    windows = []
    for j in range(rows):
        for k in range(cols):
            r, c = j * stride, k * stride
            windows.append(Window((j, k), padded[r : r + l, c : c + m].copy()))
    return windows


def classical_conv(image, kernel, stride: int = 1, padding: int = 0) -> ConvResult:
    kern = _as_2d(kernel)
    img = _as_2d(image)
    rows, cols = output_shape(img.shape, kern.shape, stride, padding)
    grid = np.zeros((rows, cols))
    for win in extract_windows(img, *kern.shape, stride, padding):
        grid[win.anchor] = np.sum(win.values * kern)
    return ConvResult(grid, stride, padding)


def window_norms(image, kernel_shape, stride: int = 1, padding: int = 0) -> np.ndarray:
    img = _as_2d(image)
    rows, cols = output_shape(img.shape, kernel_shape, stride, padding)
    norms = np.zeros((rows, cols))
    for win in extract_windows(img, *kernel_shape[:2], stride, padding):
        norms[win.anchor] = np.linalg.norm(win.values)
    return norms


def normalized_reference(image, kernel, stride: int = 1, padding: int = 0) -> ConvResult:
    """Convolution divided by the window and kernel norms; zero windows give 0."""
    kern = _as_2d(kernel)
    k_norm = float(np.linalg.norm(kern))
    if k_norm == 0.0:
        raise DegeneratePatchError("kernel is identically zero")
    conv = classical_conv(image, kern, stride, padding)
    norms = window_norms(image, kern.shape, stride, padding)
    grid = np.zeros_like(conv.grid)
    nz = norms > 0
    grid[nz] = conv.grid[nz] / (norms[nz] * k_norm)
    return ConvResult(np.clip(grid, -1.0, 1.0), stride, padding)


def rescale_map(fm: FeatureMap) -> ConvResult:
    """Undo the normalization: value * window norm * kernel norm."""
    return ConvResult(fm.grid * fm.norm_factors * fm.kernel_norm, fm.stride, fm.padding)


def per_channel(fn, image, *args, **kwargs) -> list:
    """Apply a single-channel operation to every channel of an ``(H, W, C)`` image."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim == 2:
        return [fn(arr, *args, **kwargs)]
    return [fn(arr[..., c], *args, **kwargs) for c in range(arr.shape[-1])]
