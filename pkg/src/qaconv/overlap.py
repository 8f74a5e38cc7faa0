"""Overlap estimation between an encoded window and an encoded kernel.

Three circuits are available:

* ``hadamard`` -- ancilla-controlled loaders (the adjoint-convolution ansatz).
  P(0) = (1 + <kernel|window>) / 2, so the signed overlap is 2 P(0) - 1.
* ``swap`` -- both states prepared on separate registers, controlled swaps.
  P(0) = (1 + |<kernel|window>|^2) / 2.
* ``adjoint`` -- load the window, unload the kernel, read |0...0>.
  P(0...0) = |<kernel|window>|^2.

Every estimator runs in exact mode (``shots=None``) or samples ``shots``
measurements with an explicit ``seed``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

from . import core_sim as cs
from .core_sim import StateVector, UnitaryMatrix
from .encoding import EncodedPatch, synth_amp_unitary
from .errors import CapacityError, ShapeError

METHODS = ("hadamard", "swap", "adjoint")


@dataclass(frozen=True)
class OverlapEstimate:
    method: str
    p0: float
    overlap: float
    shots: int | None  # None means exact
    std_error: float

    @property
    def exact(self) -> bool:
        return self.shots is None


def _check_compatible(window: EncodedPatch, kernel: EncodedPatch) -> int:
    if window.n_qubits != kernel.n_qubits:
        raise ShapeError(
            f"window uses {window.n_qubits} qubits but kernel uses {kernel.n_qubits}"
        )
    return window.n_qubits


def loaders(window: EncodedPatch, kernel: EncodedPatch) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """Amplitude-loading unitaries for (window, kernel)."""
    _check_compatible(window, kernel)
    return synth_amp_unitary(window), synth_amp_unitary(kernel)


def qaco_circuit(window: EncodedPatch, kernel: EncodedPatch) -> list[tuple[UnitaryMatrix, list[int]]]:
    """Gate list of the Hadamard-test ansatz on N+1 qubits (ancilla = qubit 0)."""
    n = _check_compatible(window, kernel)
    amp_w, amp_k = loaders(window, kernel)
    every = list(range(n + 1))
    return [
        (cs.H, [0]),
        (cs.controlled_embed(amp_w, control_on=1), every),
        (cs.controlled_embed(amp_k, control_on=0), every),
        (cs.H, [0]),
    ]


def qaco_state(window: EncodedPatch, kernel: EncodedPatch) -> StateVector:
    n = _check_compatible(window, kernel)
    psi = cs.make_register(n + 1)
    for gate, targets in qaco_circuit(window, kernel):
        psi = cs.apply_unitary(psi, gate, targets)
    return psi


def _finish(method: str, p0: float, shots: int | None, seed: int) -> OverlapEstimate:
    """Turn an exact probability into an estimate, sampling if requested."""
    if shots is not None:
        outcome = cs.sample_counts(p0, shots, seed)
        p0 = outcome.estimated_p0
        p_err = outcome.std_error
    else:
        p_err = 0.0
    if method == "adjoint":
        return OverlapEstimate(method, p0, p0, shots, p_err)
    return OverlapEstimate(method, p0, 2.0 * p0 - 1.0, shots, 2.0 * p_err)


def hadamard_overlap(window, kernel, shots: int | None = None, seed: int = 0) -> OverlapEstimate:
    p0 = cs.prob_ancilla_zero(qaco_state(window, kernel), 0)
    return _finish("hadamard", p0, shots, seed)


def swap_state(window: EncodedPatch, kernel: EncodedPatch) -> StateVector:
    """Swap-test state on 2N+1 qubits: ancilla, window register, kernel register."""
    n = _check_compatible(window, kernel)
    total = 2 * n + 1
    if total > cs.MAX_QUBITS:
        raise CapacityError(f"swap test needs {total} qubits, limit is {cs.MAX_QUBITS}")
    amp_w, amp_k = loaders(window, kernel)
    first = list(range(1, n + 1))
    second = list(range(n + 1, 2 * n + 1))
    psi = cs.make_register(total)
    if n:
        psi = cs.apply_unitary(psi, amp_w, first)
        psi = cs.apply_unitary(psi, amp_k, second)
    psi = cs.apply_unitary(psi, cs.H, [0])
    cswap = cs.controlled_embed(cs.SWAP, control_on=1)
    for a, b in zip(first, second):
        psi = cs.apply_unitary(psi, cswap, [0, a, b])
    return cs.apply_unitary(psi, cs.H, [0])


def swap_overlap(window, kernel, shots: int | None = None, seed: int = 0) -> OverlapEstimate:
    p0 = cs.prob_ancilla_zero(swap_state(window, kernel), 0)
    return _finish("swap", p0, shots, seed)


def adjoint_state(window: EncodedPatch, kernel: EncodedPatch) -> StateVector:
    """Apply the window loader, then the inverse of the kernel loader."""
    n = _check_compatible(window, kernel)
    amp_w, amp_k = loaders(window, kernel)
    if n == 0:
        # scalar patches: a one-qubit register with the loaders on nothing
        return cs.make_register(1)
    psi = cs.make_register(n)
    psi = cs.apply_unitary(psi, amp_w, range(n))
    return cs.apply_unitary(psi, cs.adjoint(amp_k), range(n))


def adjoint_overlap(window, kernel, shots: int | None = None, seed: int = 0) -> OverlapEstimate:
    p0 = cs.prob_all_zero(adjoint_state(window, kernel))
    return _finish("adjoint", p0, shots, seed)


ESTIMATORS = {
    "hadamard": hadamard_overlap,
    "swap": swap_overlap,
    "adjoint": adjoint_overlap,
}


def estimate(method: str, window, kernel, shots: int | None = None, seed: int = 0) -> OverlapEstimate:
    try:
        fn = ESTIMATORS[method]
    except KeyError:
        raise ValueError(f"unknown overlap method {method!r}; choose from {METHODS}") from None
    return fn(window, kernel, shots=shots, seed=seed)


def relative_error(p0_hat: float, exact_overlap: float) -> float:
    """``|F_hat - F| / |F_hat|`` with ``F_hat = 2 p0_hat - 1``.

    This is the error column convention used when reporting the shot
    convergence of the Hadamard test; it is infinite when ``F_hat`` is 0.
    """
    f_hat = 2.0 * p0_hat - 1.0
    if f_hat == 0:
        return math.inf
    return abs(f_hat - exact_overlap) / abs(f_hat)
