"""Small built-in test images and the toy two-class training set."""

from __future__ import annotations

import numpy as np


def gradient(size: int = 8) -> np.ndarray:
    """Diagonal ramp from 1 to 2*size-1; strictly positive."""
    r, c = np.indices((size, size))
    return (r + c + 1).astype(float)


def checkerboard(size: int = 8, cell: int = 2) -> np.ndarray:
    r, c = np.indices((size, size))
    return np.where((r // cell + c // cell) % 2 == 0, 200.0, 30.0)


def disk(size: int = 8) -> np.ndarray:
    r, c = np.indices((size, size))
    center = (size - 1) / 2
    inside = (r - center) ** 2 + (c - center) ** 2 <= (size / 2.6) ** 2
    return np.where(inside, 220.0, 0.0)


IMAGES = {"gradient": gradient, "checkerboard": checkerboard, "disk": disk}


def bundled_image(name: str, size: int = 8) -> np.ndarray:
    try:
        return IMAGES[name](size)
    except KeyError:
        raise KeyError(f"unknown bundled image {name!r}; choose from {sorted(IMAGES)}") from None


def bright_side_dataset(n_per_class: int = 10, size: int = 6, seed: int = 0):
    """Images bright on the left half (label 0) or the right half (label 1).

    Pixels are 0.9..1.0 on the bright half and 0.1..0.2 on the dark half.
    """
    rng = np.random.default_rng(seed)
    half = size // 2
    images, labels = [], []
    for label in (0, 1):
        for _ in range(n_per_class):
            img = 0.1 + 0.1 * rng.random((size, size))
            bright = slice(0, half) if label == 0 else slice(half, size)
            img[:, bright] += 0.8
            images.append(img)
            labels.append(label)
    return np.array(images), np.array(labels)
