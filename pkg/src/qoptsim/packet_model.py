"""Wavepacket shapes, their pairwise overlaps and the packet table.

Packet conventions (time and frequency in consistent dimensionless units)::

    P(t) = K(t) exp(-i f (t - t0))

    gaussian:     K(t) = sqrt(w) / pi**0.25 * exp(-(t - t0)**2 w**2 / 2)
    exponential:  K(t) = sqrt(2 / w) * exp(-(t - t0) / w)   for t >= t0, else 0

For Gaussians ``w`` is the spectral width; for exponentials it is the decay
time. Overlaps are <P_a|P_b> = integral of conj(P_a(t)) P_b(t) dt.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

DEDUP_TOLERANCE = 1e-9
MAX_PACKETS = 40


class Shape(str, enum.Enum):
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class PacketDescriptor:
    index: int
    t0: float
    f0: float
    w: float

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError(f"packet width must be positive, got {self.w}")

    def matches(self, t: float, f: float, w: float, tol: float = DEDUP_TOLERANCE) -> bool:
        return abs(self.t0 - t) <= tol and abs(self.f0 - f) <= tol and abs(self.w - w) <= tol


def overlap_gaussian(a: PacketDescriptor, b: PacketDescriptor) -> complex:
    """Closed-form overlap of two Gaussian packets."""
    wa2, wb2 = a.w ** 2, b.w ** 2
    total = wa2 + wb2
    time_coef = 0.5 * wa2 * wb2 / total
    freq_coef = 0.5 / total
    phase = (wa2 * b.f0 + wb2 * a.f0) / total
    norm = math.sqrt(2.0) * math.sqrt(a.w * b.w) / math.sqrt(total)
    dt = a.t0 - b.t0
    df = a.f0 - b.f0
    return norm * math.exp(-time_coef * dt * dt - freq_coef * df * df) * complex(
        math.cos(phase * dt), -math.sin(phase * dt))


def overlap_exponential(a: PacketDescriptor, b: PacketDescriptor) -> complex:
    """Closed-form overlap of two one-sided exponential packets.

    With s = max(t_a, t_b), g = 1/w_a + 1/w_b and df = f_a - f_b::

        2 / (sqrt(w_a w_b) (g - i df))
          * exp(-(s - t_a)/w_a - (s - t_b)/w_b)
          * exp(i df s - i f_a t_a + i f_b t_b)
    """
    start = max(a.t0, b.t0)
    rate = 1.0 / a.w + 1.0 / b.w
    df = a.f0 - b.f0
    decay = math.exp(-(start - a.t0) / a.w - (start - b.t0) / b.w)
    phase = df * start - a.f0 * a.t0 + b.f0 * b.t0
    return 2.0 / (math.sqrt(a.w * b.w) * complex(rate, -df)) * decay * complex(
        math.cos(phase), math.sin(phase))


def envelope(shape: Shape | str, p: PacketDescriptor, t):
    """Real envelope K(t) of a packet, vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    if Shape(shape) is Shape.GAUSSIAN:
        return math.sqrt(p.w) / math.pi ** 0.25 * np.exp(-((t - p.t0) * p.w) ** 2 / 2.0)
    x = (t - p.t0) / p.w
    return np.where(x >= 0, math.sqrt(2.0 / p.w) * np.exp(-np.maximum(x, 0.0)), 0.0)


def wavefunction(shape: Shape | str, p: PacketDescriptor, t):
    t = np.asarray(t, dtype=float)
    return envelope(shape, p, t) * np.exp(-1j * p.f0 * (t - p.t0))


_OVERLAPS = {Shape.GAUSSIAN: overlap_gaussian, Shape.EXPONENTIAL: overlap_exponential}


def overlap(shape: Shape | str, a: PacketDescriptor, b: PacketDescriptor) -> complex:
    return _OVERLAPS[Shape(shape)](a, b)


@dataclass
class PacketTable:
    """Wavepacket definitions for one period, replicated across periods.

    ``packets`` holds the period-0 descriptors (``n_t`` of them). Packet
    ``p * n_t + k`` is descriptor ``k`` shifted by ``p * period_length``.
    """

    shape: Shape = Shape.GAUSSIAN
    n_periods: int = 1
    period_length: float = 0.0
    max_packets: int = MAX_PACKETS
    packets: list[PacketDescriptor] = field(default_factory=list)

    def __post_init__(self):
        self.shape = Shape(self.shape)
        if self.n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        if self.n_periods > 1 and not self.period_length > 0:
            raise ValueError("period_length must be positive when n_periods > 1")

    @property
    def n_t(self) -> int:
        return len(self.packets)

    @property
    def n_packets(self) -> int:
        return self.n_t * self.n_periods

    def def_packet(self, n: int, t: float, f: float, w: float) -> int:
        """Register a packet and return its base (period-0) index.

        An existing descriptor with the same (t, f, w) is reused. ``n`` is a
        suggestion: new packets always take the next free base index.
        """
        for p in self.packets:
            if p.matches(t, f, w):
                return p.index
        if (self.n_t + 1) * self.n_periods > self.max_packets:
            raise ValueError(f"packet table full ({self.max_packets} packets)")
        idx = self.n_t
        self.packets.append(PacketDescriptor(idx, float(t), float(f), float(w)))
        return idx

    def split_time(self, t: float) -> tuple[float, int]:
        """Split an absolute time into (time within period, period number)."""
        if self.n_periods == 1:
            return t, 0
        period = math.floor((t + DEDUP_TOLERANCE) / self.period_length)
        if not 0 <= period < self.n_periods:
            raise ValueError(f"time {t} lies outside the {self.n_periods} declared periods")
        return t - period * self.period_length, period

    def global_index(self, base: int, period: int = 0) -> int:
        if not 0 <= base < self.n_t or not 0 <= period < self.n_periods:
            raise IndexError(f"packet ({base}, period {period}) out of range")
        return period * self.n_t + base

    def descriptor(self, index: int) -> PacketDescriptor:
        """Descriptor of a global packet index, including its period shift."""
        period, base = divmod(index, self.n_t)
        p = self.packets[base]
        return PacketDescriptor(index, p.t0 + period * self.period_length, p.f0, p.w)

    def reordered(self, order: list[int]) -> PacketTable:
        """Copy with base descriptors permuted; ``order[new] = old``."""
        packets = [PacketDescriptor(i, self.packets[o].t0, self.packets[o].f0, self.packets[o].w)
                   for i, o in enumerate(order)]
        return PacketTable(self.shape, self.n_periods, self.period_length, self.max_packets, packets)

    def records(self) -> list[dict]:
        return [{"shape": self.shape.value, "t": p.t0, "f": p.f0, "w": p.w} for p in self.packets]


def build_overlap_matrix(table: PacketTable, period_only: bool = False) -> np.ndarray:
    """Hermitian overlap matrix over all packets of the table.

    Packets in different periods get an exact zero. With ``period_only`` the
    result is the n_t x n_t block of period 0.
    """
    if not table.packets:
        raise ValueError("packet table is empty")
    n_t = table.n_t
    block = np.eye(n_t, dtype=complex)
    for i in range(n_t):
        for j in range(i + 1, n_t):
            s = overlap(table.shape, table.packets[i], table.packets[j])
            block[i, j] = s
            block[j, i] = s.conjugate()
    if period_only or table.n_periods == 1:
        return block
    return np.kron(np.eye(table.n_periods), block)
