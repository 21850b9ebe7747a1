"""State-vector simulation of teleportation-based quantum error correction."""

from .channels import ErasureMode, ErrorKind, ErrorSpec, NoiseModel
from .circuit import Circuit, GateOp, simulate, statevector, unitary_of

__version__ = "0.1.0"
