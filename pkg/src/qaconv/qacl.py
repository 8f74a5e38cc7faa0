"""Phase-estimation layer built on the Hadamard-test ansatz.

For one window/kernel pair the ansatz ``U_phi`` prepares

    |phi> = sin(theta) |0>|mu> + cos(theta) |1>|v>,   sin^2(theta) = P(0),

and the iterate ``U = U_phi G U_phi^dagger (Z x I)`` (``G`` reflects about
|0...0>) has eigenvalues ``exp(+-2i theta)`` on the two components of |phi>.
Phase estimation with ``s`` bits therefore peaks at bins ``y`` and
``2^s - y`` with ``y ~ 2^s theta / pi``; folding and taking ``-cos(2 theta)``
recovers the signed overlap.

The layer runs one independent phase estimation per window.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import core_sim as cs
from .convolution import FeatureMap, extract_windows, output_shape
from .core_sim import UnitaryMatrix
from .encoding import EncodedPatch, encode
from .errors import CapacityError, DegeneratePatchError, ShapeError
from .overlap import estimate, qaco_circuit

DEFAULT_QPE_BITS = 8


@dataclass(frozen=True, eq=False)
class IterateOperator:
    u: UnitaryMatrix
    state_prep: UnitaryMatrix
    theta_truth: float

    @property
    def n_qubits(self) -> int:
        return self.u.n_qubits


@dataclass(frozen=True, eq=False)
class PhaseReadout:
    s: int
    distribution: np.ndarray
    peak_bin: int
    shots: int | None = None
    counts: np.ndarray | None = None

    @property
    def folded_bin(self) -> int:
        return min(self.peak_bin, 2**self.s - self.peak_bin)

    @property
    def decoded_theta(self) -> float:
        return math.pi * self.folded_bin / 2**self.s

    @property
    def decoded_overlap(self) -> float:
        return -math.cos(2.0 * self.decoded_theta)


def _embed(gate: UnitaryMatrix, targets, n_qubits: int) -> np.ndarray:
    """Full-register matrix of ``gate`` acting on contiguous leading ``targets``."""
    targets = list(targets)
    if targets != list(range(len(targets))):
        raise ValueError("only leading contiguous targets are supported")
    rest = n_qubits - len(targets)
    return np.kron(gate.matrix, np.eye(2**rest))


def build_state_prep(window: EncodedPatch, kernel: EncodedPatch) -> UnitaryMatrix:
    """The whole Hadamard-test ansatz as one (N+1)-qubit unitary."""
    n = window.n_qubits + 1
    u = np.eye(2**n, dtype=complex)
    for gate, targets in qaco_circuit(window, kernel):
        u = _embed(gate, targets, n) @ u
    return UnitaryMatrix(u, atol=1e-10)


def build_reflection(n_qubits: int) -> UnitaryMatrix:
    """``I - 2|0...0><0...0|``."""
    if n_qubits < 1:
        raise ValueError("reflection needs at least one qubit")
    diag = np.ones(2**n_qubits)
    diag[0] = -1.0
    return UnitaryMatrix(np.diag(diag))


def build_iterate(window: EncodedPatch, kernel: EncodedPatch) -> IterateOperator:
    u_phi = build_state_prep(window, kernel)
    n = u_phi.n_qubits
    z_first = cs.kron(cs.Z, cs.identity(n - 1))
    u = cs.compose(
        cs.compose(u_phi, build_reflection(n)),
        cs.compose(cs.adjoint(u_phi), z_first),
    )
    p0 = float(np.sum(np.abs(u_phi.matrix[: 2 ** (n - 1), 0]) ** 2))
    theta = math.asin(math.sqrt(min(max(p0, 0.0), 1.0)))
    return IterateOperator(u, u_phi, theta)


def _powers(u: np.ndarray, count: int) -> list[np.ndarray]:
    """``[u, u^2, u^4, ...]`` by repeated squaring."""
    out = [u]
    for _ in range(count - 1):
        out.append(out[-1] @ out[-1])
    return out


def qpe_estimate(
    iterate: IterateOperator, s: int = DEFAULT_QPE_BITS, shots: int | None = None, seed: int = 0
) -> PhaseReadout:
    """Phase estimation of ``iterate.u`` started from ``U_phi |0...0>``.

    Phase qubit ``q`` (0 = most significant) controls ``U^(2^(s-1-q))``, so the
    measured register value ``y`` approximates ``2^s * phase / (2 pi)``.
    """
    if not 1 <= s <= 10:
        raise CapacityError(f"qpe_bits must be in 1..10, got {s}")
    n_data = iterate.n_qubits
    total = s + n_data
    if total > cs.MAX_QUBITS:
        raise CapacityError(
            f"phase estimation needs s + N + 1 = {s} + {n_data} = {total} qubits, "
            f"limit is {cs.MAX_QUBITS}"
        )
    data = list(range(s, total))
    psi = cs.make_register(total)
    psi = cs.apply_unitary(psi, iterate.state_prep, data)
    for q in range(s):
        psi = cs.apply_unitary(psi, cs.H, [q])
    powers = _powers(iterate.u.matrix, s)
    for q in range(s):
        cu = cs.controlled_embed(UnitaryMatrix(powers[s - 1 - q], atol=None), control_on=1)
        psi = cs.apply_unitary(psi, cu, [q] + data)
    psi = cs.apply_unitary(psi, cs.inverse_qft(s), range(s))
    dist = cs.register_probabilities(psi, range(s))

    if shots is None:
        # np.argmax returns the first maximum, i.e. ties go to the smaller bin
        return PhaseReadout(s, dist, int(np.argmax(np.round(dist, 12))))
    counts = cs.sample_distribution(dist, shots, seed)
    return PhaseReadout(s, counts / shots, int(np.argmax(counts)), shots, counts)


def window_seed(seed: int, row: int, col: int) -> int:
    """Deterministic per-window seed, independent of evaluation order."""
    return int(np.random.SeedSequence([seed, row, col]).generate_state(1)[0])


def _kernel_patch(kernel) -> tuple[np.ndarray, EncodedPatch]:
    kern = np.asarray(kernel, dtype=float)
    if kern.ndim != 2:
        raise ShapeError(f"kernel must be 2-D, got shape {kern.shape}")
    if not np.any(kern):
        raise DegeneratePatchError("kernel is identically zero")
    return kern, encode(kern)


def _map_windows(image, kernel, stride, padding, evaluate, workers):
    """Run ``evaluate(window_values, kernel_patch, anchor)`` over every window."""
    img = np.asarray(image, dtype=float)
    kern, k_patch = _kernel_patch(kernel)
    rows, cols = output_shape(img.shape, kern.shape, stride, padding)
    grid = np.zeros((rows, cols))
    norms = np.zeros((rows, cols))
    todo = []
    for win in extract_windows(img, *kern.shape, stride, padding):
        norm = float(np.linalg.norm(win.values))
        norms[win.anchor] = norm
        if norm > 0.0:
            todo.append(win)

    def run(win):
        return win.anchor, evaluate(encode(win.values), k_patch, win.anchor)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, todo))
    else:
        results = [run(w) for w in todo]
    for anchor, value in results:
        grid[anchor] = value
    return grid, norms, kern, k_patch


def qacl_layer(
    image,
    kernel,
    stride: int = 1,
    padding: int = 0,
    s: int = DEFAULT_QPE_BITS,
    shots: int | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> FeatureMap:
    """Decoded overlaps for every window; all-zero windows are 0."""

    def evaluate(w_patch, k_patch, anchor):
        it = build_iterate(w_patch, k_patch)
        return qpe_estimate(it, s, shots, window_seed(seed, *anchor)).decoded_overlap

    grid, norms, kern, k_patch = _map_windows(image, kernel, stride, padding, evaluate, workers)
    return FeatureMap(grid, stride, padding, "qpe", norms, k_patch.norm_factor, kern, s=s, shots=shots)


def overlap_map(
    image,
    kernel,
    method: str = "hadamard",
    stride: int = 1,
    padding: int = 0,
    shots: int | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> FeatureMap:
    """Per-window overlaps from one of the direct estimators (no phase estimation)."""

    def evaluate(w_patch, k_patch, anchor):
        return estimate(method, w_patch, k_patch, shots, window_seed(seed, *anchor)).overlap

    grid, norms, kern, k_patch = _map_windows(image, kernel, stride, padding, evaluate, workers)
    return FeatureMap(grid, stride, padding, method, norms, k_patch.norm_factor, kern, shots=shots)
