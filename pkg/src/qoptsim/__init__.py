"""Linear-optics simulation of photons in time-frequency wavepackets."""
from .circuit import CircuitBuilder, CircuitError, DetectorSpec
from .device import BellKind, QODevice
from .engine import Core, SimConfig, run
from .fock_state import FockState, LevelIndex, enumerate_kets, make_state
from .kernels import BACKEND
from .outcomes import density_matrix, distribution, postselect, purity
from .packet_model import PacketDescriptor, PacketTable, Shape, build_overlap_matrix

__version__ = "0.1.0"
