"""Photon-level device: declare photons and Bell pairs, then the circuit.

Photon times are absolute. With several periods declared, a photon at time
``t`` is placed in period ``floor(t / period_length)`` and its packet is
registered at the time within that period, so photons created in later
periods can meet delayed ones. Circuit elements are recorded and replayed
after the emitter when the device is sent to the circuit, which happens
automatically once every channel has a detector.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitBuilder, CircuitError
from .fock_state import FockState, LevelIndex, make_state
from .packet_model import PacketTable, Shape

H, V = 0, 1


class BellKind(str, enum.Enum):
    PHI_PLUS = "p"
    PHI_MINUS = "m"
    PSI_PLUS = "s"
    PSI_MINUS = "a"

    @classmethod
    def parse(cls, value) -> BellKind:
        if isinstance(value, cls):
            return value
        aliases = {"phi+": "p", "phiplus": "p", "phi-": "m", "phiminus": "m",
                   "psi+": "s", "psiplus": "s", "psi-": "a", "psiminus": "a"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class PhotonBundle:
    count: int
    ch: int
    pol: int
    t: float
    f: float
    w: float
    packet: int  # base packet index
    period: int


# a pending ket maps (ch, pol, base packet, period) -> photon count
_Key = tuple[tuple[tuple[int, int, int, int], int], ...]


def _add_to_key(key: _Key, slot: tuple[int, int, int, int], n: int) -> _Key:
    counts = dict(key)
    counts[slot] = counts.get(slot, 0) + n
    return tuple(sorted((s, c) for s, c in counts.items() if c))


class QODevice:
    def __init__(self, n_ch: int, n_pol: int = 1, shape: Shape | str = Shape.GAUSSIAN,
                 n_periods: int = 1, period_length: float = 0.0, order: str = "insertion",
                 epsilon: float | None = None, row_norm_bound: float | None = None):
        if n_ch < 1 or n_pol not in (1, 2):
            raise ValueError("need at least one channel and one or two polarizations")
        if order not in ("insertion", "time"):
            raise ValueError("order must be 'insertion' or 'time'")
        self.n_ch = n_ch
        self.n_pol = n_pol
        self.table = PacketTable(Shape(shape), n_periods, period_length)
        self.order = order
        self._builder_opts = {k: v for k, v in
                              (("epsilon", epsilon), ("row_norm_bound", row_norm_bound)) if v is not None}
        self.bundles: list[PhotonBundle] = []
        self._pending: dict[_Key, complex] = {(): 1.0 + 0j}
        self._elements: list[tuple[str, tuple]] = []
        self._detectors: list[tuple[int, int | None]] = []
        self.builder: CircuitBuilder | None = None
        self.input_state: FockState | None = None
        self._remap: list[int] | None = None

    @property
    def sent(self) -> bool:
        return self.builder is not None

    def _check_open(self):
        if self.sent:
            raise CircuitError("device already sent to the circuit")

    def _check_mode(self, ch: int, pol: int):
        if not 0 <= ch < self.n_ch:
            raise IndexError(f"channel {ch} out of range [0, {self.n_ch})")
        if not 0 <= pol < self.n_pol:
            raise IndexError(f"polarization {pol} out of range [0, {self.n_pol})")

    def def_packet(self, t: float, f: float, w: float) -> tuple[int, int]:
        """Register a packet at absolute time ``t``; returns (base index, period)."""
        t_in, period = self.table.split_time(t)
        base = self.table.def_packet(self.table.n_t, t_in, f, w)
        return base, period

    # Input preparation ---------------------------------------------------

    def add_photons(self, n: int, ch: int, pol: int, t: float, f: float, w: float) -> int:
        """Add ``n`` photons (``n`` may be 0) in one packet; returns the packet index."""
        self._check_open()
        if n < 0:
            raise ValueError("photon count must be non-negative")
        self._check_mode(ch, pol)
        base, period = self.def_packet(t, f, w)
        self.bundles.append(PhotonBundle(n, ch, pol, t, f, w, base, period))
        if n:
            slot = (ch, pol, base, period)
            self._pending = {_add_to_key(k, slot, n): a for k, a in self._pending.items()}
        return base

    def add_bell_pair(self, ch1: int, ch2: int, kind="p", phase: float = 0.0,
                      t1: float = 0.0, f1: float = 1.0, w1: float = 1.0,
                      t2: float = 0.0, f2: float = 1.0, w2: float = 1.0) -> tuple[int, int]:
        """Tensor a polarization Bell pair onto the input.

        Phi+/- = (|HH> +/- e^{i phase} |VV>)/sqrt(2) and Psi+/- likewise with
        |HV>, |VH>; ``phase`` is in radians.
        """
        self._check_open()
        if self.n_pol != 2:
            raise CircuitError("Bell pairs need two polarization modes")
        if ch1 == ch2:
            raise CircuitError("Bell pair needs two distinct channels")
        self._check_mode(ch1, 0)
        self._check_mode(ch2, 0)
        kind = BellKind.parse(kind)
        b1, p1 = self.def_packet(t1, f1, w1)
        b2, p2 = self.def_packet(t2, f2, w2)
        self.bundles.append(PhotonBundle(1, ch1, -1, t1, f1, w1, b1, p1))
        self.bundles.append(PhotonBundle(1, ch2, -1, t2, f2, w2, b2, p2))

        sign = -1.0 if kind in (BellKind.PHI_MINUS, BellKind.PSI_MINUS) else 1.0
        second = sign * np.exp(1j * phase)
        if kind in (BellKind.PHI_PLUS, BellKind.PHI_MINUS):
            pols = [((H, H), 1.0), ((V, V), second)]
        else:
            pols = [((H, V), 1.0), ((V, H), second)]
        pending: dict[_Key, complex] = {}
        for key, amp in self._pending.items():
            for (q1, q2), c in pols:
                k = _add_to_key(_add_to_key(key, (ch1, q1, b1, p1), 1), (ch2, q2, b2, p2), 1)
                pending[k] = pending.get(k, 0j) + amp * c / math.sqrt(2.0)
        self._pending = pending
        return b1, b2

    # Circuit elements ----------------------------------------------------

    def beamsplitter(self, ch1: int, ch2: int, theta_deg: float, phi_deg: float):
        self._check_open()
        self._elements.append(("beamsplitter", (ch1, ch2, theta_deg, phi_deg)))

    def phase_shifter(self, ch: int, phi_deg: float):
        self._check_open()
        self._elements.append(("phase_shifter", (ch, phi_deg)))

    def delay(self, ch: int):
        self._check_open()
        if self.table.n_periods < 2:
            raise CircuitError("delay needs at least two periods (no room to delay)")
        self._elements.append(("delay", (ch,)))

    def detector(self, ch: int, cond: int | None = None):
        self._check_open()
        if not 0 <= ch < self.n_ch:
            raise IndexError(f"channel {ch} out of range [0, {self.n_ch})")
        if any(c == ch for c, _ in self._detectors):
            raise CircuitError(f"channel {ch} already has a detector")
        self._detectors.append((ch, cond))
        if len(self._detectors) == self.n_ch:
            self.send_to_circuit()

    # Finalization ----------------------------------------------------------

    def packet_level(self, bundle: int | PhotonBundle, pol: int | None = None) -> int:
        """Flat level of a photon bundle after sending (optionally overriding pol)."""
        if not self.sent:
            raise CircuitError("levels are only fixed once the device is sent")
        b = self.bundles[bundle] if isinstance(bundle, int) else bundle
        base = self._remap[b.packet]
        packet = self.table.global_index(base, b.period)
        return self.builder.levels.level_of(b.ch, b.pol if pol is None else pol, packet)

    def send_to_circuit(self) -> FockState:
        """Fix the packet table, build circuit and input state."""
        self._check_open()
        if not self.table.packets:
            raise CircuitError("no wavepackets defined")
        if self.order == "time":
            order = sorted(range(self.table.n_t), key=lambda k: self.table.packets[k].t0)
            self.table = self.table.reordered(order)
            remap = [0] * len(order)
            for new, old in enumerate(order):
                remap[old] = new
        else:
            remap = list(range(self.table.n_t))
        self._remap = remap

        levels = LevelIndex(self.n_ch, self.n_pol, self.table.n_packets)
        builder = CircuitBuilder(levels, self.table.n_periods, **self._builder_opts)
        builder.emitter_from_table(self.table)
        for name, args in self._elements:
            getattr(builder, name)(*args)

        entries = []
        for key, amp in self._pending.items():
            occ = [0] * levels.size
            for (ch, pol, base, period), count in key:
                occ[levels.level_of(ch, pol, self.table.global_index(remap[base], period))] += count
            entries.append((amp, occ))
        self.input_state = make_state(levels, entries)
        self.builder = builder
        for ch, cond in self._detectors:
            builder.detector(ch, cond)
        return self.input_state
