"""Simulation of the quantum adjoint convolution operation and layer.

Window/kernel patches are amplitude encoded, their overlap is read from a
Hadamard test (or swap test / adjoint circuit), and phase estimation lifts
the Hadamard-test ansatz to a whole convolutional layer.  Every quantum
result can be checked against the classical normalized convolution.
"""

from .convolution import (
    ConvResult,
    FeatureMap,
    builtin_kernel,
    classical_conv,
    extract_windows,
    normalized_reference,
    rescale_map,
)
from .encoding import EncodedPatch, encode, synth_amp_unitary
from .errors import (
    CapacityError,
    DegeneratePatchError,
    InvariantError,
    ParseError,
    QaconvError,
    ShapeError,
)
from .overlap import OverlapEstimate, adjoint_overlap, hadamard_overlap, qaco_state, swap_overlap
from .qacl import build_iterate, overlap_map, qacl_layer, qpe_estimate

__version__ = "0.1.0"
