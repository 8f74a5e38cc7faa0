"""Amplitude encoding of image windows and kernels.

A real ``l x m`` matrix is flattened row-major, divided by its Euclidean norm
and zero-padded to ``2**N`` entries with ``N = ceil(log2(l*m))``.  The
resulting unit vector is loaded by an orthogonal matrix whose first column
is that vector, so applying it to |0...0> prepares the encoded state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_sim import UnitaryMatrix
from .errors import CapacityError, DegeneratePatchError, InvariantError

UNIT_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class EncodedPatch:
    """Quantum-normalized, zero-padded amplitudes plus the removed norm."""

    n_qubits: int
    amplitudes: np.ndarray
    norm_factor: float
    shape: tuple[int, int]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float, copy=True)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def size(self) -> int:
        """Number of classical values carried (``l * m``)."""
        return self.shape[0] * self.shape[1]


def _values(matrix) -> np.ndarray:
    values = getattr(matrix, "values", matrix)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    return arr


def n_qubits_for(size: int) -> int:
    """Smallest N with ``size <= 2**N``."""
    if size < 1:
        raise ValueError("size must be positive")
    return (size - 1).bit_length()


def flatten(matrix) -> np.ndarray:
    """Row-major flattening: element (r, c) goes to index ``r*m + c``."""
    return _values(matrix).reshape(-1).copy()


def unflatten(seq, shape) -> np.ndarray:
    return np.asarray(seq, dtype=float).reshape(shape)


def quantum_normalize(seq) -> tuple[np.ndarray, float]:
    seq = np.asarray(seq, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(seq))
    if norm == 0.0:
        raise DegeneratePatchError("cannot normalize an all-zero sequence")
    return seq / norm, norm


def pad_to_register(seq, n_qubits: int) -> np.ndarray:
    seq = np.asarray(seq, dtype=float).reshape(-1)
    dim = 2**n_qubits
    if seq.shape[0] > dim:
        raise CapacityError(f"{seq.shape[0]} values do not fit in {n_qubits} qubits")
    out = np.zeros(dim)
    out[: seq.shape[0]] = seq
    return out


def encode(matrix) -> EncodedPatch:
    arr = _values(matrix)
    unit, norm = quantum_normalize(flatten(arr))
    n = n_qubits_for(arr.size)
    return EncodedPatch(n, pad_to_register(unit, n), norm, arr.shape)


def synth_amp_unitary(patch: EncodedPatch | np.ndarray) -> UnitaryMatrix:
    """Real orthogonal matrix whose first column is the patch amplitudes.

    Uses the Householder reflection that swaps ``e0`` and the target vector.
    """
    v = np.asarray(getattr(patch, "amplitudes", patch), dtype=float).reshape(-1)
    if abs(float(v @ v) - 1.0) > UNIT_ATOL * 10:
        raise InvariantError(f"amplitudes have squared norm {float(v @ v)!r}, expected 1")
    dim = v.shape[0]
    w = -v.copy()
    tail = float(v[1:] @ v[1:])
    # 1 - v0 cancels when v0 ~ 1; use (1 - v0^2) / (1 + v0) there instead
    w[0] = tail / (1.0 + v[0]) if v[0] > 0 else 1.0 - v[0]
    ww = float(w @ w)
    if ww < 1e-30:
        return UnitaryMatrix(np.eye(dim))
    refl = np.eye(dim) - (2.0 / ww) * np.outer(w, w)
    return UnitaryMatrix(refl, atol=1e-10)


def frobenius(a, b) -> float:
    """Elementwise product-sum of two equal-shape matrices."""
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def normalized_overlap(window, kernel) -> float:
    """Classical value of the encoded-state inner product."""
    return float(encode(window).amplitudes @ encode(kernel).amplitudes)

