"""Dense state-vector simulator.

Qubit 0 is the most significant bit of a basis index, i.e. the top wire of a
circuit diagram.  A 3-qubit basis state |q0 q1 q2> lives at index
``4*q0 + 2*q1 + q2``.

Random sampling uses numpy's ``default_rng`` (PCG64 bit generator), whose
stream is fixed for a given seed across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import CapacityError, InvariantError, ShapeError

MAX_QUBITS = 20

NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.shape[0] != 2**self.n_qubits:
            raise ShapeError(
                f"{amps.shape[0]} amplitudes cannot describe {self.n_qubits} qubits"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvariantError(f"state has squared norm {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if not _is_power_of_two(amps.shape[0]):
            raise ShapeError(f"length {amps.shape[0]} is not a power of two")
        return cls(amps.shape[0].bit_length() - 1, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __len__(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square complex matrix acting on ``n_qubits`` qubits.

    Construction checks ``U^dagger U = I`` entrywise to ``atol``; pass
    ``atol=None`` to skip the check for matrices that are unitary by
    construction (products of verified factors).
    """

    matrix: np.ndarray
    atol: float | None = UNITARY_ATOL

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {m.shape}")
        if not _is_power_of_two(m.shape[0]):
            raise ShapeError(f"dimension {m.shape[0]} is not a power of two")
        if self.atol is not None:
            dev = unitarity_deviation(m)
            if dev > self.atol:
                raise InvariantError(f"matrix is not unitary (max |U'U - I| = {dev:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return compose(self, other)


def unitarity_deviation(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


SQRT1_2 = 1 / math.sqrt(2)
I2 = UnitaryMatrix(np.eye(2))
H = UnitaryMatrix(np.array([[1, 1], [1, -1]]) * SQRT1_2)
X = UnitaryMatrix(np.array([[0, 1], [1, 0]]))
Z = UnitaryMatrix(np.array([[1, 0], [0, -1]]))
SWAP = UnitaryMatrix(np.eye(4)[[0, 2, 1, 3]])


def identity(n_qubits: int) -> UnitaryMatrix:
    return UnitaryMatrix(np.eye(2**n_qubits))


def kron(*factors: UnitaryMatrix) -> UnitaryMatrix:
    """Tensor product; the first factor acts on the most significant qubits."""
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f.matrix)
    return UnitaryMatrix(out, atol=None)


def make_register(n_qubits: int) -> StateVector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(
            f"register of {n_qubits} qubits outside supported range 1..{MAX_QUBITS}"
        )
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_unitary(state: StateVector, u: UnitaryMatrix, targets) -> StateVector:
    """Apply ``u`` to the listed qubits of ``state``.

    ``targets[0]`` is the most significant qubit of ``u``'s own index space.
    """
    targets = [int(t) for t in targets]
    n = state.n_qubits
    k = len(targets)
    if u.dim != 2**k:
        raise ShapeError(f"unitary of dim {u.dim} cannot act on {k} target qubits")
    if len(set(targets)) != k:
        raise ShapeError(f"target qubits {targets} are not distinct")
    if any(t < 0 or t >= n for t in targets):
        raise ShapeError(f"targets {targets} outside a {n}-qubit register")

    psi = state.amplitudes.reshape((2,) * n)
    gate = u.matrix.reshape((2,) * (2 * k))
    # contract the gate's input legs with the target axes, then restore order
    out = np.tensordot(gate, psi, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return StateVector(n, out.reshape(-1))


def controlled_embed(u: UnitaryMatrix, control_on: int = 1) -> UnitaryMatrix:
    """Block-diagonal controlled version of ``u`` with the control as qubit 0."""
    if control_on not in (0, 1):
        raise ValueError(f"control_on must be 0 or 1, got {control_on!r}")
    if unitarity_deviation(u.matrix) > 1e-10:
        raise InvariantError("controlled_embed needs a unitary input")
    d = u.dim
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    eye = np.eye(d)
    if control_on == 1:
        out[:d, :d] = eye
        out[d:, d:] = u.matrix
    else:
        out[:d, :d] = u.matrix
        out[d:, d:] = eye
    return UnitaryMatrix(out, atol=None)


def compose(u_last: UnitaryMatrix, u_first: UnitaryMatrix) -> UnitaryMatrix:
    """Matrix product ``u_last @ u_first`` (``u_first`` acts first)."""
    if u_last.dim != u_first.dim:
        raise ShapeError(f"cannot compose dims {u_last.dim} and {u_first.dim}")
    return UnitaryMatrix(u_last.matrix @ u_first.matrix, atol=None)


def adjoint(u: UnitaryMatrix) -> UnitaryMatrix:
    return UnitaryMatrix(u.matrix.conj().T, atol=None)


def _dft(s: int, sign: int) -> UnitaryMatrix:
    if not 1 <= s <= 10:
        raise CapacityError(f"Fourier register of {s} qubits outside 1..10")
    d = 2**s
    jk = np.outer(np.arange(d), np.arange(d))
    return UnitaryMatrix(np.exp(sign * 2j * np.pi * jk / d) / math.sqrt(d), atol=None)


def qft(s: int) -> UnitaryMatrix:
    return _dft(s, +1)


def inverse_qft(s: int) -> UnitaryMatrix:
    """Inverse DFT on ``s`` qubits, entry (j, k) = 2^(-s/2) exp(-2 pi i jk / 2^s)."""
    return _dft(s, -1)


def prob_ancilla_zero(state: StateVector, qubit: int = 0) -> float:
    """Probability that measuring ``qubit`` yields 0."""
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise ShapeError(f"qubit {qubit} outside a {n}-qubit register")
    probs = state.probabilities.reshape((2,) * n)
    p0 = float(np.take(probs, 0, axis=qubit).sum())
    return min(max(p0, 0.0), 1.0)


def prob_all_zero(state: StateVector) -> float:
    return float(abs(state.amplitudes[0]) ** 2)


def register_probabilities(state: StateVector, qubits) -> np.ndarray:
    """Marginal distribution over the basis states of ``qubits`` (in the given order)."""
    n = state.n_qubits
    qubits = list(qubits)
    probs = state.probabilities.reshape((2,) * n)
    rest = tuple(q for q in range(n) if q not in qubits)
    marginal = probs.sum(axis=rest) if rest else probs
    # sum() keeps the surviving axes in ascending order; reorder to ``qubits``
    order = sorted(qubits)
    marginal = np.transpose(marginal, [order.index(q) for q in qubits])
    return marginal.reshape(-1)


@dataclass(frozen=True)
class ShotOutcome:
    shots: int
    zero_count: int

    @property
    def estimated_p0(self) -> float:
        return self.zero_count / self.shots

    @property
    def std_error(self) -> float:
        p = self.estimated_p0
        return math.sqrt(p * (1 - p) / self.shots)


def _check_shots(shots: int) -> None:
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")


def sample_counts(p0: float, shots: int, seed: int) -> ShotOutcome:
    """Draw the number of zero outcomes in ``shots`` measurements."""
    if not -1e-12 <= p0 <= 1 + 1e-12:
        raise ValueError(f"p0={p0!r} is not a probability")
    _check_shots(shots)
    p0 = min(max(float(p0), 0.0), 1.0)
    rng = np.random.default_rng(seed)
    return ShotOutcome(int(shots), int(rng.binomial(int(shots), p0)))


def sample_distribution(probs, shots: int, seed: int) -> np.ndarray:
    """Multinomial counts over the outcomes of ``probs``."""
    _check_shots(shots)
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    return rng.multinomial(int(shots), p)
