"""Measurement post-processing of output states.

Channels with a conditioned detector are measured: kets failing a condition
are discarded and the remaining kets are split into incoherent branches by
the full (polarization, packet) content of the measured channels. Density
matrices are taken over a chosen set of surviving channels; everything else
is traced out incoherently.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuit import DetectorSpec
from .fock_state import FockState, LevelIndex, render_ket
from .linalg import hermitian_eig

PROBABILITY_FLOOR = 1e-12
BASIS_FLOOR = 1e-9


@dataclass
class Branch:
    signature: tuple[tuple[int, int], ...]  # (level, count) pairs of measured channels
    state: FockState  # renormalized
    weight: float


@dataclass
class Distribution:
    levels: LevelIndex
    channels: tuple[int, ...]
    resolution: str  # "channel" or "level"
    probabilities: dict[tuple[int, ...], float] = field(default_factory=dict)

    def label(self, pattern: tuple[int, ...]) -> str:
        if self.resolution == "level":
            return render_ket(self.levels, pattern, self.channels)
        return "| " + ", ".join(str(n) for n in pattern) + " >"

    @property
    def entries(self) -> dict[str, float]:
        return {self.label(p): v for p, v in self.probabilities.items()}

    def get(self, pattern: Sequence[int], default: float = 0.0) -> float:
        return self.probabilities.get(tuple(pattern), default)

    def total(self) -> float:
        return float(sum(self.probabilities.values()))


@dataclass
class DensityMatrix:
    levels: LevelIndex
    channels: tuple[int, ...]
    basis: list[tuple[int, ...]]  # occupation vectors restricted to ``channels``' levels
    matrix: np.ndarray
    probability: float = 1.0  # post-selection success probability

    @property
    def labels(self) -> list[str]:
        return [render_ket(self.levels, occ, self.channels) for occ in self.basis]

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eig(self.matrix)[0]

    def to_text(self, digits: int = 4) -> str:
        labels = self.labels
        width = max(len(s) for s in labels) if labels else 0
        rows = []
        for lab, row in zip(labels, self.matrix):
            vals = " ".join(f"{x.real: .{digits}f}" for x in row)
            rows.append(f" {lab:<{width}} {vals}")
        return "\n".join(rows)


def _conditions(detectors: Iterable[DetectorSpec]) -> dict[int, int]:
    return {d.channel: d.condition for d in detectors if d.condition is not None}


def postselect(output: FockState, detectors: Iterable[DetectorSpec]) -> list[Branch]:
    """Incoherent branches of ``output`` that satisfy every detector condition."""
    levels = output.levels
    conds = _conditions(detectors)
    measured = sorted(lv for ch in conds for lv in levels.channel_levels(ch))
    groups: dict[tuple, dict[tuple[int, ...], complex]] = defaultdict(dict)
    for amp, occ in output:
        if any(sum(occ[lv] for lv in levels.channel_levels(ch)) != want for ch, want in conds.items()):
            continue
        key = tuple((lv, occ[lv]) for lv in measured if occ[lv])
        groups[key][occ] = amp
    branches = []
    for key in sorted(groups, reverse=True):
        kets = groups[key]
        weight = float(sum(abs(a) ** 2 for a in kets.values()))
        if weight <= 0:
            continue
        scale = 1.0 / np.sqrt(weight)
        branches.append(Branch(key, FockState(levels, {o: a * scale for o, a in kets.items()}), weight))
    return branches


def distribution(output: FockState, detectors: Iterable[DetectorSpec] = (),
                 channels: Sequence[int] | None = None, resolution: str = "channel",
                 renormalize: bool = False) -> Distribution:
    """Probabilities of measured patterns after post-selection.

    ``resolution="channel"`` groups by photon count per channel;
    ``"level"`` keeps every (polarization, packet) level of the channels.
    Without renormalization the probabilities are joint with the
    post-selection event, so an unconditioned distribution sums to the
    output norm.
    """
    levels = output.levels
    detectors = list(detectors)
    if channels is None:
        channels = tuple(range(levels.n_ch))
    channels = tuple(channels)
    if resolution not in ("channel", "level"):
        raise ValueError("resolution must be 'channel' or 'level'")
    probs: dict[tuple[int, ...], float] = defaultdict(float)
    for br in postselect(output, detectors):
        for amp, occ in br.state:
            p = abs(amp) ** 2 * br.weight
            if resolution == "channel":
                pattern = tuple(sum(occ[lv] for lv in levels.channel_levels(ch)) for ch in channels)
            else:
                keep = set(channels)
                pattern = tuple(n if levels.tuple_of(lv)[0] in keep else 0 for lv, n in enumerate(occ))
            probs[pattern] += p
    total = sum(probs.values())
    if renormalize and total > 0:
        probs = {k: v / total for k, v in probs.items()}
    kept = {k: float(v) for k, v in sorted(probs.items(), reverse=True) if v > PROBABILITY_FLOOR}
    return Distribution(levels, channels, resolution, kept)


def marginal(dist: Distribution, channels: Sequence[int]) -> Distribution:
    """Sum a channel-resolved distribution down to a subset of its channels."""
    if dist.resolution != "channel":
        raise ValueError("marginals are defined for channel-resolved distributions")
    pos = [dist.channels.index(ch) for ch in channels]
    probs: dict[tuple[int, ...], float] = defaultdict(float)
    for pattern, p in dist.probabilities.items():
        probs[tuple(pattern[i] for i in pos)] += p
    return Distribution(dist.levels, tuple(channels), "channel",
                        dict(sorted(probs.items(), reverse=True)))


def level_probability(output: FockState, required: Iterable[int]) -> float:
    """Probability that every listed level holds at least one photon."""
    req = list(required)
    return float(sum(abs(a) ** 2 for a, occ in output if all(occ[lv] > 0 for lv in req)))


def density_matrix(branches: list[Branch], channels: Sequence[int],
                   trace_packets: bool = False) -> DensityMatrix:
    """Density matrix over ``channels`` mixing all branches by weight.

    Within a branch, kets that differ outside ``channels`` are orthogonal
    records and add incoherently. ``trace_packets`` also traces out the
    packet index of the kept channels (exact when each kept channel holds at
    most one photon).
    """
    if not branches:
        raise ValueError("no post-selected branches: conditioning on an impossible event")
    levels = branches[0].state.levels
    channels = tuple(sorted(channels))
    kept = [lv for ch in channels for lv in levels.channel_levels(ch)]
    kept_set = set(kept)
    others = [lv for lv in range(levels.size) if lv not in kept_set]

    # record -> {kept configuration (full length vector) -> amplitude}
    records: dict[tuple, dict[tuple[int, ...], complex]] = defaultdict(dict)
    for b_idx, br in enumerate(branches):
        scale = np.sqrt(br.weight)
        for amp, occ in br.state:
            record = (b_idx, tuple(occ[lv] for lv in others))
            config = [occ[lv] if lv in kept_set else 0 for lv in range(levels.size)]
            if trace_packets:
                packets = []
                for lv in kept:
                    if config[lv]:
                        ch, pol, pkt = levels.tuple_of(lv)
                        packets.append((ch, pkt, config[lv]))
                        config[lv] = 0
                        config[levels.level_of(ch, pol, 0)] += occ[lv]
                record = record + (tuple(sorted(packets)),)
            config = tuple(config)
            vec = records[record]
            vec[config] = vec.get(config, 0j) + amp * scale

    basis = sorted({c for vec in records.values() for c in vec}, reverse=True)
    index = {c: i for i, c in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for vec in records.values():
        v = np.zeros(len(basis), dtype=complex)
        for c, a in vec.items():
            v[index[c]] = a
        rho += np.outer(v, v.conj())
    trace = float(np.trace(rho).real)
    if trace <= 0:
        raise ValueError("all branch weights are zero")
    # drop configurations with negligible population (tails of far-apart packets)
    keep = np.flatnonzero(np.diag(rho).real > BASIS_FLOOR * trace)
    rho = rho[np.ix_(keep, keep)] / float(np.trace(rho[np.ix_(keep, keep)]).real)
    basis = [basis[i] for i in keep]
    return DensityMatrix(levels, channels, basis, rho, probability=float(sum(b.weight for b in branches)))


def purity(rho: DensityMatrix | np.ndarray) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.trace(m @ m).real)
