"""Fock-space linear algebra for few-photon interferometry.

Provides occupation-number states, basis enumeration for a fixed photon
number, permanent-based transition amplitudes, state evolution under mode
unitaries and truncated coherent states.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FockState",
    "FockBasis",
    "StateVector",
    "ModeUnitary",
    "CoherentState",
    "enumerate_basis",
    "permanent",
    "permanent_naive",
    "transition_amplitude",
    "evolve",
    "basis_state_vector",
    "coherent_output_probabilities",
]

UNITARITY_TOL = 1e-12
COHERENT_TAIL_TOL = 1e-8


@dataclass(frozen=True, order=True)
class FockState:
    """Occupation numbers per optical mode, e.g. (1, 1, 1) or (2, 0, 1, 1)."""

    occupations: tuple[int, ...]

    def __init__(self, occupations: Iterable[int]):
        occ = tuple(int(n) for n in occupations)
        if any(n < 0 for n in occ):
            raise ValueError(f"negative occupation in {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def mode_count(self) -> int:
        return len(self.occupations)

    @property
    def total(self) -> int:
        return sum(self.occupations)

    def __iter__(self):
        return iter(self.occupations)

    def __getitem__(self, mode: int) -> int:
        return self.occupations[mode]

    def __str__(self) -> str:
        return "|" + ",".join(str(n) for n in self.occupations) + ">"


def _compositions(total: int, parts: int):
    """All compositions of `total` into `parts` parts, lexicographic descending."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


class FockBasis:
    """Ordered basis of all m-mode states with a fixed total photon number."""

    def __init__(self, mode_count: int, photon_number: int):
        if mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        if photon_number < 0:
            raise ValueError("photon_number must be >= 0")
        self.mode_count = mode_count
        self.photon_number = photon_number
        self.states: tuple[FockState, ...] = tuple(
            FockState(occ) for occ in _compositions(photon_number, mode_count)
        )
        self._index = {s: i for i, s in enumerate(self.states)}
        expected = math.comb(photon_number + mode_count - 1, mode_count - 1)
        assert len(self.states) == expected

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def index(self, state: FockState) -> int:
        return self._index[state]

    def occupation_matrix(self) -> np.ndarray:
        """Integer array of shape (len(basis), mode_count)."""
        return np.array([s.occupations for s in self.states], dtype=np.int64)

    def __repr__(self) -> str:
        return f"FockBasis(m={self.mode_count}, N={self.photon_number}, size={len(self)})"


@lru_cache(maxsize=None)
def enumerate_basis(mode_count: int, photon_number: int) -> FockBasis:
    """Basis of all compositions of photon_number over mode_count modes."""
    return FockBasis(mode_count, photon_number)


class ModeUnitary:
    """m x m unitary acting on the mode creation operators."""

    def __init__(self, matrix: Sequence[Sequence[complex]] | np.ndarray):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got shape {mat.shape}")
        residual = np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max()
        if residual > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
        mat.setflags(write=False)
        self.matrix = mat

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def unitarity_residual(self) -> float:
        m = self.matrix
        return float(np.abs(m.conj().T @ m - np.eye(self.dimension)).max())

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeUnitary) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())

    def __repr__(self) -> str:
        return f"ModeUnitary(dimension={self.dimension})"


class StateVector:
    """Complex amplitudes over a fixed (m, N) Fock basis."""

    def __init__(self, basis: FockBasis, amplitudes: Sequence[complex] | np.ndarray):
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (len(basis),):
            raise ValueError(f"expected {len(basis)} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        self.basis = basis
        self.amplitudes = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, state: FockState) -> complex:
        return complex(self.amplitudes[self.basis.index(state)])

    def probability(self, state: FockState) -> float:
        return abs(self.amplitude(state)) ** 2

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def basis_state_vector(basis: FockBasis, state: FockState) -> StateVector:
    amps = np.zeros(len(basis), dtype=complex)
    amps[basis.index(state)] = 1.0
    return StateVector(basis, amps)


class CoherentState:
    """Multimode coherent state |alpha_1, ..., alpha_m> with a Fock cutoff.

    The truncation keeps total photon numbers up to ``truncation``; the
    Poisson tail beyond it must stay below 1e-8.
    """

    def __init__(self, alphas: Sequence[complex], truncation: int | None = None):
        self.alphas = tuple(complex(a) for a in alphas)
        self.mean_photons = float(sum(abs(a) ** 2 for a in self.alphas))
        if truncation is None:
            truncation = self._default_truncation(self.mean_photons)
        self.truncation = int(truncation)
        tail = self._poisson_tail(self.mean_photons, self.truncation)
        if tail > COHERENT_TAIL_TOL:
            raise ValueError(
                f"truncation {self.truncation} leaves Poisson tail {tail:.3e} "
                f"above {COHERENT_TAIL_TOL}"
            )

    @property
    def mode_count(self) -> int:
        return len(self.alphas)

    @staticmethod
    def _poisson_tail(mean: float, cutoff: int) -> float:
        if mean == 0.0:
            return 0.0
        # P(X > cutoff) for X ~ Poisson(mean), summed in log space
        k = np.arange(cutoff + 1)
        logp = -mean + k * np.log(mean) - np.array([math.lgamma(n + 1) for n in k])
        return float(max(0.0, 1.0 - np.exp(logp).sum()))

    @classmethod
    def _default_truncation(cls, mean: float) -> int:
        n = max(8, int(mean))
        while cls._poisson_tail(mean, n) > COHERENT_TAIL_TOL:
            n += 1
        return n

    def __repr__(self) -> str:
        return f"CoherentState(alphas={self.alphas}, truncation={self.truncation})"


def permanent(matrix) -> complex:
    """Matrix permanent by Ryser's inclusion-exclusion with Gray-code updates.

    The empty 0 x 0 matrix has permanent 1.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    cols = [a[:, j] for j in range(n)]
    rowsum = np.zeros(n, dtype=complex)
    total = 0 + 0j
    parity = 1
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1  # index of the bit toggled by Gray code
        gray ^= 1 << j
        if gray & (1 << j):
            rowsum += cols[j]
        else:
            rowsum -= cols[j]
        parity = -parity
        total += parity * rowsum.prod()
    if n % 2:
        total = -total
    return complex(total)


def permanent_naive(matrix) -> complex:
    """n!-term expansion of the permanent; slow oracle for testing."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    total = 0 + 0j
    for perm in itertools.permutations(range(n)):
        prod = 1 + 0j
        for i, j in enumerate(perm):
            prod *= a[i, j]
        total += prod
    return complex(total)


def _repeat_indices(occupations: Sequence[int]) -> list[int]:
    out: list[int] = []
    for mode, count in enumerate(occupations):
        out.extend([mode] * count)
    return out


def transition_amplitude(U: ModeUnitary, input: FockState, output: FockState) -> complex:
    """<output| U |input> for bosonic Fock states.

    Equals perm(U_ST) / sqrt(prod s_i! prod t_j!) where U_ST repeats row i
    t_i times (output occupations t) and column j s_j times (input
    occupations s).
    """
    if input.mode_count != output.mode_count or input.mode_count != U.dimension:
        raise ValueError("mode counts of unitary, input and output must agree")
    if input.total != output.total:
        raise ValueError(
            f"photon number not conserved: input {input.total}, output {output.total}"
        )
    rows = _repeat_indices(output.occupations)
    cols = _repeat_indices(input.occupations)
    sub = U.matrix[np.ix_(rows, cols)] if rows else np.zeros((0, 0), dtype=complex)
    norm = 1.0
    for n in input.occupations:
        norm *= math.factorial(n)
    for n in output.occupations:
        norm *= math.factorial(n)
    return permanent(sub) / math.sqrt(norm)


@lru_cache(maxsize=256)
def _transition_matrix(U: ModeUnitary, mode_count: int, photon_number: int) -> np.ndarray:
    basis = enumerate_basis(mode_count, photon_number)
    mat = np.empty((len(basis), len(basis)), dtype=complex)
    for i, out in enumerate(basis):
        for j, inp in enumerate(basis):
            mat[i, j] = transition_amplitude(U, inp, out)
    return mat


def evolve(U: ModeUnitary, state: StateVector) -> StateVector:
    """Apply a mode unitary to a state vector on the fixed-N basis."""
    basis = state.basis
    if U.dimension != basis.mode_count:
        raise ValueError("unitary dimension does not match basis mode count")
    mat = _transition_matrix(U, basis.mode_count, basis.photon_number)
    return StateVector(basis, mat @ state.amplitudes)


def coherent_output_probabilities(
    U: ModeUnitary, input: CoherentState, outcome: FockState
) -> float:
    """Probability of a photon-number outcome for a coherent-state input.

    A mode unitary maps coherent states to coherent states, beta = U alpha,
    so the outcome statistics are independent Poissonians per mode.
    """
    if input.mode_count != U.dimension or outcome.mode_count != U.dimension:
        raise ValueError("mode counts must agree")
    beta = U.matrix @ np.array(input.alphas)
    prob = 1.0
    for b, n in zip(beta, outcome.occupations):
        w = abs(b) ** 2
        prob *= math.exp(-w) * w**n / math.factorial(n)
    return float(prob)
