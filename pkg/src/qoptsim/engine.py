"""Output amplitudes of a circuit for a given input state.

Two cores are available:

* ``direct``: substitutes every input creation operator by its image
  sum_k U[k, j] a_k^dagger and expands the product, merging terms by
  occupation vector as it goes.
* ``permanent``: each output amplitude is perm(U[rows, cols]) divided by
  sqrt(prod n_j! prod m_k!), with rows/cols repeated by occupation.

Both handle non-unitary circuit matrices (emitters, delays); photons
dropped by a delay simply lower the output norm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .fock_state import PRUNE_THRESHOLD, FockState, LevelIndex, count_kets, enumerate_kets

MAX_DIRECT_PHOTONS = 8
MAX_OUTPUT_KETS = 10_000_000


class Core(str, enum.Enum):
    DIRECT = "direct"
    PERMANENT = "permanent"


@dataclass
class SimConfig:
    core: Core = Core.DIRECT
    # None means the full output distribution
    restricted_kets: list[Sequence[int]] | None = None
    prune: float = PRUNE_THRESHOLD

    def __post_init__(self):
        self.core = Core(self.core)


def _matrix(circuit) -> np.ndarray:
    return np.asarray(getattr(circuit, "total", circuit), dtype=complex)


def _photon_columns(occ: Sequence[int]) -> list[int]:
    return [j for j, n in enumerate(occ) for _ in range(n)]


def _fact_prod(occ: Sequence[int]) -> int:
    out = 1
    for n in occ:
        out *= math.factorial(n)
    return out


def direct_ket(u: np.ndarray, occ: Sequence[int]) -> dict[tuple[int, ...], complex]:
    """Expand the image of one input ket; returns normalized output amplitudes."""
    n = sum(occ)
    if n > MAX_DIRECT_PHOTONS:
        raise ValueError(f"direct core limited to {MAX_DIRECT_PHOTONS} photons, got {n}")
    d = u.shape[0]
    # polynomial in the output creation operators: monomial exponents -> coefficient
    poly: dict[tuple[int, ...], complex] = {(0,) * d: 1.0 + 0j}
    for j in _photon_columns(occ):
        column = u[:, j]
        targets = np.flatnonzero(column)
        nxt: dict[tuple[int, ...], complex] = {}
        for mono, coef in poly.items():
            for k in targets:
                m = list(mono)
                m[k] += 1
                m = tuple(m)
                nxt[m] = nxt.get(m, 0j) + coef * column[k]
        poly = nxt
    in_norm = math.sqrt(_fact_prod(occ))
    return {mono: coef * math.sqrt(_fact_prod(mono)) / in_norm for mono, coef in poly.items()}


def run_direct(circuit, state: FockState, prune: float = PRUNE_THRESHOLD) -> FockState:
    u = _matrix(circuit)
    out: dict[tuple[int, ...], complex] = {}
    for amp, occ in state:
        for mono, a in direct_ket(u, occ).items():
            out[mono] = out.get(mono, 0j) + amp * a
    return FockState(state.levels, out, prune=prune)


def run_permanent(circuit, input_ket: Sequence[int], output_ket: Sequence[int]) -> complex:
    """Transition amplitude <output| U |input> for single kets."""
    u = _matrix(circuit)
    if len(input_ket) != u.shape[1] or len(output_ket) != u.shape[0]:
        raise ValueError("ket length does not match the circuit dimension")
    if sum(input_ket) != sum(output_ket):
        return 0j
    cols = _photon_columns(input_ket)
    perm = kernels.ket_permanents(u, np.asarray(cols, dtype=np.int64),
                                  np.asarray([output_ket], dtype=np.int64))[0]
    return complex(perm / math.sqrt(_fact_prod(input_ket) * _fact_prod(output_ket)))


def _reachable_levels(u: np.ndarray, state: FockState) -> np.ndarray:
    used = np.zeros(u.shape[1], dtype=bool)
    for _, occ in state:
        used |= np.asarray(occ) > 0
    return np.flatnonzero(np.any(u[:, used] != 0, axis=1))


def _permanent_outputs(u: np.ndarray, state: FockState, outputs: np.ndarray) -> np.ndarray:
    amps = np.zeros(len(outputs), dtype=complex)
    if not len(outputs):
        return amps
    out_norm = np.sqrt([float(_fact_prod(o)) for o in outputs])
    sizes = outputs.sum(axis=1)
    for amp, occ in state:
        n = sum(occ)
        mask = sizes == n
        if not mask.any():
            continue
        cols = np.asarray(_photon_columns(occ), dtype=np.int64)
        perms = kernels.ket_permanents(u, cols, outputs[mask])
        amps[mask] += amp * perms / (out_norm[mask] * math.sqrt(_fact_prod(occ)))
    return amps


def run_permanent_state(circuit, state: FockState, outputs=None,
                        prune: float = PRUNE_THRESHOLD) -> FockState:
    """Permanent core over a whole input state.

    Without ``outputs`` every ket over the reachable levels is evaluated for
    each photon number present in the input.
    """
    u = _matrix(circuit)
    d = u.shape[0]
    if outputs is None:
        reach = _reachable_levels(u, state)
        rows = []
        for n in sorted(state.photon_numbers()):
            if count_kets(n, max(len(reach), 1)) > MAX_OUTPUT_KETS:
                raise ValueError("output space too large for a full distribution")
            for sub in enumerate_kets(max(len(reach), 1), n):
                full = np.zeros(d, dtype=np.int64)
                full[reach] = sub[:len(reach)]
                rows.append(full)
        outputs = np.asarray(rows, dtype=np.int64).reshape(-1, d)
    else:
        outputs = np.asarray([list(o) for o in outputs], dtype=np.int64).reshape(-1, d)
    amps = _permanent_outputs(u, state, outputs)
    return FockState(state.levels, {tuple(int(x) for x in o): a for o, a in zip(outputs, amps)},
                     prune=prune)


def run(circuit, state: FockState, cfg: SimConfig | None = None) -> FockState:
    """Simulate ``state`` through ``circuit`` (a CircuitBuilder or a matrix)."""
    cfg = cfg or SimConfig()
    if cfg.restricted_kets is not None:
        for k in cfg.restricted_kets:
            if len(k) != state.levels.size:
                raise ValueError(f"restricted ket {tuple(k)} has wrong length")
    if cfg.core is Core.PERMANENT:
        return run_permanent_state(circuit, state, cfg.restricted_kets, cfg.prune)
    out = run_direct(circuit, state, prune=cfg.prune)
    if cfg.restricted_kets is None:
        return out
    full = out.as_dict()
    wanted = {tuple(int(x) for x in k) for k in cfg.restricted_kets}
    return FockState(state.levels, {k: full.get(k, 0j) for k in wanted}, prune=cfg.prune)
