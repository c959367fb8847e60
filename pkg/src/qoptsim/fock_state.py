"""Multi-level bosonic states.

A level is a flat index over (channel, polarization, packet) with the packet
index innermost::

    level = ((ch * n_pol) + pol) * n_packets + packet

A :class:`FockState` is an immutable list of kets (amplitude, occupation
vector) kept in descending lexicographic order of the occupation vectors, so
``|2,0>`` comes before ``|1,1>`` and ``|0,2>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

PRUNE_THRESHOLD = 1e-14
MAX_PHOTONS = 12
POL_LABELS = "HV"


@dataclass(frozen=True)
class LevelIndex:
    n_ch: int
    n_pol: int = 1
    n_packets: int = 1

    def __post_init__(self):
        if self.n_ch < 1 or self.n_pol < 1 or self.n_packets < 1:
            raise ValueError(f"level dimensions must be positive: {self}")

    @property
    def size(self) -> int:
        return self.n_ch * self.n_pol * self.n_packets

    def level_of(self, ch: int, pol: int = 0, packet: int = 0) -> int:
        if not (0 <= ch < self.n_ch and 0 <= pol < self.n_pol and 0 <= packet < self.n_packets):
            raise IndexError(f"(ch={ch}, pol={pol}, packet={packet}) out of range for {self}")
        return (ch * self.n_pol + pol) * self.n_packets + packet

    def tuple_of(self, level: int) -> tuple[int, int, int]:
        if not 0 <= level < self.size:
            raise IndexError(f"level {level} out of range [0, {self.size})")
        rest, packet = divmod(level, self.n_packets)
        ch, pol = divmod(rest, self.n_pol)
        return ch, pol, packet

    def channel_levels(self, ch: int) -> list[int]:
        """All levels that belong to channel ``ch``."""
        start = self.level_of(ch, 0, 0)
        return list(range(start, start + self.n_pol * self.n_packets))

    def channel_of_levels(self) -> np.ndarray:
        return np.arange(self.size) // (self.n_pol * self.n_packets)


def level_of(levels: LevelIndex, ch: int, pol: int, packet: int) -> int:
    return levels.level_of(ch, pol, packet)


def tuple_of(levels: LevelIndex, flat: int) -> tuple[int, int, int]:
    return levels.tuple_of(flat)


def render_ket(levels: LevelIndex, occupation: Sequence[int], channels: Iterable[int] | None = None) -> str:
    """Render an occupation vector as ``| H(0)0, V(2)3 >``.

    Empty levels are omitted and a level holding n photons is listed n times.
    ``channels`` restricts the rendering to those channels.
    """
    keep = None if channels is None else set(channels)
    parts = []
    for level, count in enumerate(occupation):
        if not count:
            continue
        ch, pol, packet = levels.tuple_of(level)
        if keep is not None and ch not in keep:
            continue
        parts.extend([f"{POL_LABELS[pol] if pol < 2 else pol}({packet}){ch}"] * int(count))
    return "| " + ", ".join(parts) + " >" if parts else "| >"


class FockState:
    """Superposition of occupation-number kets over an indexed level set."""

    __slots__ = ("levels", "_kets")

    def __init__(self, levels: LevelIndex, kets: dict[tuple[int, ...], complex] | None = None,
                 prune: float = 0.0):
        self.levels = levels
        kets = kets or {}
        ordered = sorted(kets.items(), key=lambda kv: kv[0], reverse=True)
        self._kets = tuple((occ, complex(amp)) for occ, amp in ordered if abs(amp) > prune)

    def __iter__(self) -> Iterator[tuple[complex, tuple[int, ...]]]:
        for occ, amp in self._kets:
            yield amp, occ

    def __len__(self) -> int:
        return len(self._kets)

    def __repr__(self) -> str:
        body = " + ".join(f"({amp:.4g}){render_ket(self.levels, occ)}" for amp, occ in self)
        return f"FockState({body or '0'})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FockState) and self.levels == other.levels and self._kets == other._kets

    @property
    def occupations(self) -> list[tuple[int, ...]]:
        return [occ for occ, _ in self._kets]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([amp for _, amp in self._kets], dtype=complex)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return dict(self._kets)

    def entries(self) -> list[tuple[complex, tuple[int, ...]]]:
        return list(self)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self.as_dict().get(tuple(occupation), 0j)

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.occupations}

    def norm2(self) -> float:
        return norm2(self)

    def normalized(self) -> FockState:
        n = np.sqrt(self.norm2())
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero state")
        return FockState(self.levels, {occ: amp / n for occ, amp in self._kets})

    def scaled(self, factor: complex) -> FockState:
        return FockState(self.levels, {occ: amp * factor for occ, amp in self._kets})

    def __add__(self, other: FockState) -> FockState:
        if self.levels != other.levels:
            raise ValueError("cannot add states over different level sets")
        merged = self.as_dict()
        for occ, amp in other._kets:
            merged[occ] = merged.get(occ, 0j) + amp
        return FockState(self.levels, merged)

    def render(self) -> list[tuple[str, complex]]:
        return [(render_ket(self.levels, occ), amp) for amp, occ in self]


def make_state(levels: LevelIndex, entries: Iterable[tuple[complex, Sequence[int]]],
               prune: float = 0.0) -> FockState:
    """Build a state from (amplitude, occupation) pairs, merging duplicates."""
    kets: dict[tuple[int, ...], complex] = {}
    for amp, occ in entries:
        occ = tuple(int(x) for x in occ)
        if len(occ) != levels.size:
            raise ValueError(f"occupation vector has length {len(occ)}, expected {levels.size}")
        if any(x < 0 for x in occ):
            raise ValueError(f"negative occupation in {occ}")
        kets[occ] = kets.get(occ, 0j) + complex(amp)
    return FockState(levels, kets, prune=prune)


def norm2(state: FockState) -> float:
    return float(sum(abs(amp) ** 2 for amp, _ in state))


def _compositions(n: int, d: int) -> Iterator[tuple[int, ...]]:
    # weak compositions of n into d parts, descending lexicographic order
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, d - 1):
            yield (first,) + rest


def count_kets(n_photons: int, d: int) -> int:
    return comb(n_photons + d - 1, n_photons)


def enumerate_kets(levels: LevelIndex | int, n_photons: int, restriction=None) -> list[tuple[int, ...]]:
    """All occupation vectors with ``n_photons`` photons over the levels.

    ``restriction`` is either a mapping ``{channel: required photon count}``
    or a predicate on the occupation vector. Unfiltered output has
    C(n + d - 1, n) entries.
    """
    if n_photons < 0:
        raise ValueError("photon number must be non-negative")
    if isinstance(levels, LevelIndex):
        d = levels.size
    else:
        d, levels = int(levels), None
    kets = list(_compositions(n_photons, d))
    if restriction is None:
        return kets
    if callable(restriction):
        return [k for k in kets if restriction(k)]
    if levels is None:
        raise ValueError("channel restrictions need a LevelIndex")
    groups = {ch: levels.channel_levels(ch) for ch in restriction}
    return [k for k in kets
            if all(sum(k[i] for i in groups[ch]) == want for ch, want in restriction.items())]
