"""Circuit matrix construction.

``total[k, j]`` is the coefficient of the output creation operator of level
``k`` in the image of the input creation operator of level ``j``. Every
element left-multiplies the running total, so elements act on the input in
the order they are declared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock_state import LevelIndex
from .linalg import DEFAULT_EPSILON, modified_cholesky
from .packet_model import PacketTable, build_overlap_matrix

ROW_NORM_BOUND = 1e-6


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorSpec:
    channel: int
    condition: int | None = None


@dataclass
class CircuitBuilder:
    levels: LevelIndex
    n_periods: int = 1
    epsilon: float = DEFAULT_EPSILON
    row_norm_bound: float = ROW_NORM_BOUND
    total: np.ndarray = field(init=False)
    detectors: list[DetectorSpec] = field(default_factory=list)
    emitter_applied: bool = False
    coefficients: np.ndarray | None = None
    row_norm_error: float = 0.0

    def __post_init__(self):
        if self.n_periods < 1 or self.levels.n_packets % self.n_periods:
            raise CircuitError(
                f"{self.levels.n_packets} packets cannot be split into {self.n_periods} periods")
        self.total = np.eye(self.levels.size, dtype=complex)

    @property
    def n_t(self) -> int:
        return self.levels.n_packets // self.n_periods

    @property
    def sealed(self) -> bool:
        return len(self.detectors) == self.levels.n_ch

    def _check_channel(self, ch: int):
        if not 0 <= ch < self.levels.n_ch:
            raise CircuitError(f"channel {ch} out of range [0, {self.levels.n_ch})")

    def apply(self, element: np.ndarray):
        """Left-compose an arbitrary d x d element matrix."""
        if element.shape != self.total.shape:
            raise CircuitError(f"element shape {element.shape} does not match {self.total.shape}")
        if self.sealed:
            raise CircuitError("circuit is sealed; no elements may follow the last detector")
        self.total = element @ self.total

    # Element matrices ----------------------------------------------------

    def beamsplitter_matrix(self, ch1: int, ch2: int, theta_deg: float, phi_deg: float) -> np.ndarray:
        self._check_channel(ch1)
        self._check_channel(ch2)
        if ch1 == ch2:
            raise CircuitError("beamsplitter needs two distinct channels")
        theta, phi = math.radians(theta_deg), math.radians(phi_deg)
        c, s = math.cos(theta), math.sin(theta)
        m = np.eye(self.levels.size, dtype=complex)
        for a, b in zip(self.levels.channel_levels(ch1), self.levels.channel_levels(ch2)):
            m[a, a] = c
            m[a, b] = -np.exp(1j * phi) * s
            m[b, a] = np.exp(-1j * phi) * s
            m[b, b] = c
        return m

    def phase_shifter_matrix(self, ch: int, phi_deg: float) -> np.ndarray:
        self._check_channel(ch)
        m = np.eye(self.levels.size, dtype=complex)
        idx = self.levels.channel_levels(ch)
        m[idx, idx] = np.exp(1j * math.radians(phi_deg))
        return m

    def emitter_matrix(self, g) -> np.ndarray:
        """Emitter for Gram-Schmidt coefficients ``g[i, j]`` (input packet i onto
        orthonormal packet j), repeated over channels, polarizations and periods."""
        g = np.asarray(g, dtype=complex)
        if g.shape != (self.n_t, self.n_t):
            raise CircuitError(f"coefficient matrix must be {self.n_t}x{self.n_t}, got {g.shape}")
        if np.max(np.abs(np.triu(g, 1)), initial=0.0) > 1e-12:
            raise CircuitError("Gram-Schmidt coefficient matrix must be lower triangular")
        # column i of the packet block is the image of input packet i
        packet_block = np.kron(np.eye(self.n_periods), g.T)
        return np.kron(np.eye(self.levels.n_ch * self.levels.n_pol), packet_block)

    def delay_matrix(self, ch: int) -> np.ndarray:
        self._check_channel(ch)
        if self.n_periods < 2:
            raise CircuitError("delay needs at least two periods (no room to delay)")
        n_t, n_d = self.n_t, self.levels.n_packets
        shift = np.eye(n_d, k=-n_t, dtype=complex)
        m = np.eye(self.levels.size, dtype=complex)
        for pol in range(self.levels.n_pol):
            start = self.levels.level_of(ch, pol, 0)
            m[start:start + n_d, start:start + n_d] = shift
        return m

    # Circuit operations --------------------------------------------------

    def beamsplitter(self, ch1: int, ch2: int, theta_deg: float, phi_deg: float):
        self.apply(self.beamsplitter_matrix(ch1, ch2, theta_deg, phi_deg))

    def phase_shifter(self, ch: int, phi_deg: float):
        self.apply(self.phase_shifter_matrix(ch, phi_deg))

    def emitter_from_coeffs(self, g):
        if self.emitter_applied:
            raise CircuitError("emitter already applied")
        self.apply(self.emitter_matrix(g))
        self.coefficients = np.asarray(g, dtype=complex)
        self.emitter_applied = True

    def emitter_from_overlap(self, s):
        """Emitter from the single-period overlap matrix ``s``.

        The Cholesky factor L of s satisfies s[i, j] = sum_k L[i, k] conj(L[j, k]),
        while Gram-Schmidt coefficients obey <P_i|P_j> = sum_k conj(c[i, k]) c[j, k],
        hence c = conj(L).
        """
        s = np.asarray(s, dtype=complex)
        try:
            low, err = modified_cholesky(s, self.epsilon)
        except np.linalg.LinAlgError as exc:
            raise CircuitError(f"overlap matrix could not be factored: {exc}") from exc
        self.row_norm_error = err
        if err > self.row_norm_bound:
            raise CircuitError(
                f"Gram-Schmidt row-norm error {err:.3e} exceeds {self.row_norm_bound:.1e}; "
                "try declaring a different leading wavepacket")
        self.emitter_from_coeffs(low.conj())

    def emitter_from_table(self, table: PacketTable) -> list[int]:
        if table.n_t != self.n_t or table.n_periods != self.n_periods:
            raise CircuitError("packet table does not match the circuit's packet dimensions")
        self.emitter_from_overlap(build_overlap_matrix(table, period_only=True))
        return [p.index for p in table.packets]

    def delay(self, ch: int):
        if not self.emitter_applied:
            raise CircuitError("delay requires the emitter to be applied first")
        self.apply(self.delay_matrix(ch))

    def detector(self, ch: int, cond: int | None = None):
        self._check_channel(ch)
        if any(d.channel == ch for d in self.detectors):
            raise CircuitError(f"channel {ch} already has a detector")
        if cond is not None and cond < 0:
            raise CircuitError("detector condition must be a non-negative photon count")
        self.detectors.append(DetectorSpec(ch, cond))

    def is_unitary(self, atol: float = 1e-10) -> bool:
        return np.allclose(self.total.conj().T @ self.total, np.eye(self.levels.size), atol=atol)
