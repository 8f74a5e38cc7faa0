"""Gradients of the normalized overlap and a toy trainable-kernel classifier.

For a window ``a`` and kernel ``w`` the normalized overlap is

    G(w) = <a, w> / (|a| |w|)

and its gradient with respect to the kernel weights is

    dG/dw_i = a_i / (|a| |w|) - G w_i / |w|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolution import extract_windows
from .encoding import encode
from .errors import DegeneratePatchError
from .overlap import hadamard_overlap


@dataclass(frozen=True, eq=False)
class GradReport:
    value: float
    analytic: np.ndarray
    finite_difference: np.ndarray

    @property
    def max_abs_deviation(self) -> float:
        return float(np.max(np.abs(self.analytic - self.finite_difference)))


def overlap_gradient(window, kernel) -> tuple[float, np.ndarray]:
    """Normalized overlap and its gradient w.r.t. the flattened kernel."""
    a = np.asarray(window, dtype=float).reshape(-1)
    w = np.asarray(kernel, dtype=float).reshape(-1)
    wn = float(np.linalg.norm(w))
    an = float(np.linalg.norm(a))
    if wn == 0.0:
        raise DegeneratePatchError("kernel is identically zero")
    if an == 0.0:
        return 0.0, np.zeros_like(w)
    g = float(a @ w) / (an * wn)
    return g, a / (an * wn) - g * w / wn**2


def _circuit_overlap(window, kernel) -> float:
    return hadamard_overlap(encode(window), encode(kernel)).overlap


def grad_check(kernel, window, epsilon: float = 1e-5) -> GradReport:
    """Compare the analytic gradient with central differences of the simulated overlap."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    kernel = np.asarray(kernel, dtype=float)
    window = np.asarray(window, dtype=float)
    value, analytic = overlap_gradient(window, kernel)
    fd = np.zeros(kernel.size)
    flat = kernel.reshape(-1)
    for i in range(flat.size):
        step = np.zeros_like(flat)
        step[i] = epsilon
        up = _circuit_overlap(window, (flat + step).reshape(kernel.shape))
        down = _circuit_overlap(window, (flat - step).reshape(kernel.shape))
        fd[i] = (up - down) / (2 * epsilon)
    return GradReport(value, analytic, fd)


def _window_stack(images, kernel_shape, stride):
    """(n_images, n_windows, l*m) array of flattened windows."""
    return np.array(
        [[w.values.reshape(-1) for w in extract_windows(img, *kernel_shape, stride)] for img in images]
    )


def _features(windows, w):
    """Normalized overlaps and their kernel gradients for every window."""
    wn = np.linalg.norm(w)
    an = np.linalg.norm(windows, axis=-1)
    safe = np.where(an > 0, an, 1.0)
    g = np.where(an > 0, windows @ w / (safe * wn), 0.0)
    dg = windows / (safe * wn)[..., None] - g[..., None] * w / wn**2
    dg = np.where((an > 0)[..., None], dg, 0.0)
    return g, dg


@dataclass
class ToyModel:
    kernel: np.ndarray
    head: np.ndarray
    bias: float = 0.0


def _loss_and_grads(model, windows, labels):
    kshape = model.kernel.shape
    g, dg = _features(windows, model.kernel.reshape(-1))
    logits = g @ model.head + model.bias
    # log(1 + e^z) - y z, written stably
    loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))
    resid = (1.0 / (1.0 + np.exp(-logits)) - labels) / len(labels)
    acc = float(np.mean((logits > 0) == (labels == 1)))
    grad_head = g.T @ resid
    grad_bias = float(resid.sum())
    grad_kernel = np.einsum("n,nf,nfk->k", resid, np.broadcast_to(model.head, g.shape), dg)
    return loss, acc, grad_head, grad_bias, grad_kernel.reshape(kshape)


def train_toy(
    images,
    labels,
    kernel_shape=(3, 3),
    stride: int = 1,
    lr: float = 0.5,
    iterations: int = 200,
    seed: int = 0,
):
    """Gradient descent on a kernel + logistic head over normalized-overlap features.

    Returns ``(trace, model)`` where ``trace`` is a list of
    ``(iteration, loss, accuracy)`` evaluated before each update.
    """
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if images.size == 0 or len(images) == 0:
        raise ValueError("training set is empty")
    if len(images) != len(labels):
        raise ValueError(f"{len(images)} images but {len(labels)} labels")
    windows = _window_stack(images, kernel_shape, stride)
    rng = np.random.default_rng(seed)
    model = ToyModel(
        kernel=rng.normal(size=kernel_shape),
        head=np.zeros(windows.shape[1]),
    )
    trace = []
    for it in range(iterations):
        loss, acc, gh, gb, gk = _loss_and_grads(model, windows, labels)
        trace.append((it, loss, acc))
        model.head = model.head - lr * gh
        model.bias = model.bias - lr * gb
        model.kernel = model.kernel - lr * gk
    loss, acc, *_ = _loss_and_grads(model, windows, labels)
    trace.append((iterations, loss, acc))
    return trace, model
