"""Classical and quantum Fisher information for Fock and coherent probes.

The unknown phase acts as e^{-i n phi} on one mode between the two
splitter layers, so the generator is the photon-number operator on that
mode and the quantum Fisher information of a pure probe is 4 Var(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .devices import InterferometerSpec
from .fock import (
    CoherentState,
    FockState,
    StateVector,
    basis_state_vector,
    enumerate_basis,
    evolve,
)
from .fringes import fringe_scan

__all__ = [
    "PROBABILITY_FLOOR",
    "FourierTable",
    "ProbeSpec",
    "probe_state",
    "number_moments",
    "qfi_fock",
    "qfi_coherent",
    "sector_occupation_covariance",
    "fourier_table",
    "cfi_photon_counting",
    "cfi_from_table",
]

# below this probability a fringe is treated as (locally) vanishing and the
# Fisher term switches to its second-order Taylor limit
PROBABILITY_FLOOR = 1e-12


def _phase_mode(spec: InterferometerSpec, phase_mode: int | None) -> int:
    if phase_mode is None:
        return spec.modes_with_role("unknown")[0]
    if not 1 <= phase_mode <= spec.mode_count:
        raise ValueError(f"phase mode {phase_mode} out of range for {spec.mode_count} modes")
    return phase_mode


def probe_state(spec: InterferometerSpec, input_state: FockState) -> StateVector:
    """State after the first splitter, on which the phase is imprinted."""
    basis = enumerate_basis(spec.mode_count, input_state.total)
    return evolve(spec.splitter(), basis_state_vector(basis, input_state))


def number_moments(state: StateVector, mode: int) -> tuple[float, float]:
    """(mean, variance) of the photon number on a 1-based mode."""
    occ = state.basis.occupation_matrix()[:, mode - 1]
    p = state.probabilities()
    mean = float(p @ occ)
    return mean, float(p @ (occ * occ) - mean**2)


def qfi_fock(
    spec: InterferometerSpec, input_state: FockState, phase_mode: int | None = None
) -> float:
    """Quantum Fisher information 4 Var(n_mode) of a Fock probe."""
    mode = _phase_mode(spec, phase_mode)
    _, var = number_moments(probe_state(spec, input_state), mode)
    return 4.0 * var


def sector_occupation_covariance(
    gammas: np.ndarray, total: int, modes: tuple[int, ...]
) -> np.ndarray:
    """Covariance matrix of photon numbers on 1-based ``modes`` in the
    normalized N-photon component of a multimode coherent state."""
    basis = enumerate_basis(len(gammas), total)
    occ = basis.occupation_matrix()
    # |amp|^2 proportional to prod |gamma_i|^(2 n_i) / n_i!, in log space
    logmag = np.where(np.abs(gammas) > 0.0, 2.0 * np.log(np.clip(np.abs(gammas), 1e-300, None)), -1e300)
    logfact = np.array([math.lgamma(n + 1) for n in range(total + 1)])
    logp = occ @ logmag - logfact[occ].sum(axis=1)
    p = np.exp(logp - logp.max())
    p /= p.sum()
    n = occ[:, [m - 1 for m in modes]].astype(float)
    mean = p @ n
    return (n * p[:, None]).T @ n - np.outer(mean, mean)


def qfi_coherent(
    spec: InterferometerSpec,
    input_state: CoherentState,
    phase_mode: int | None = None,
    reference: bool = True,
) -> float:
    """Quantum Fisher information of a coherent probe.

    With an external phase reference the probe stays pure and the
    information is 4 |beta|^2 on the phase mode. Without one, the state is
    averaged over a common input phase, which dephases it into orthogonal
    total-photon-number sectors; the generator preserves each sector, so
    the information is the Poisson mixture of the per-sector values.
    """
    mode = _phase_mode(spec, phase_mode)
    if input_state.mode_count != spec.mode_count:
        raise ValueError("coherent input mode count does not match the device")
    S = spec.splitter().matrix
    gammas = S @ np.asarray(input_state.alphas)
    if reference:
        return float(4.0 * abs(gammas[mode - 1]) ** 2)
    nbar = input_state.mean_photons
    if nbar == 0.0:
        return 0.0
    cutoff = input_state.truncation
    k = np.arange(cutoff + 1)
    logw = -nbar + k * np.log(nbar) - np.array([math.lgamma(n + 1) for n in k])
    weights = np.exp(logw)
    total = 0.0
    for N in range(1, cutoff + 1):
        total += weights[N] * 4.0 * sector_occupation_covariance(gammas, N, (mode,))[0, 0]
    return float(total)


PROBE_KINDS = ("fock", "coherent_with_reference", "coherent_phase_averaged")


@dataclass(frozen=True)
class ProbeSpec:
    """A probe class for the Fisher-information comparisons.

    Fock and coherent probes are compared at matched photon budgets; the
    report records both conventions (equal total input photons and equal
    mean photons on the phase-shifter mode) explicitly.
    """

    kind: str
    input: FockState | CoherentState
    spec: InterferometerSpec

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise ValueError(f"probe kind must be one of {PROBE_KINDS}, got {self.kind!r}")
        is_coherent = isinstance(self.input, CoherentState)
        if (self.kind == "fock") == is_coherent:
            raise ValueError(f"probe kind {self.kind!r} does not match input type")
        if self.input.mode_count != self.spec.mode_count:
            raise ValueError("input mode count does not match the device")

    def qfi(self, phase_mode: int | None = None) -> float:
        if self.kind == "fock":
            return qfi_fock(self.spec, self.input, phase_mode)
        return qfi_coherent(
            self.spec, self.input, phase_mode, reference=self.kind == "coherent_with_reference"
        )

    def normalization(self, phase_mode: int | None = None) -> dict:
        """Photon budget of the probe under both comparison conventions."""
        mode = _phase_mode(self.spec, phase_mode)
        if self.kind == "fock":
            total = float(self.input.total)
            probe = probe_state(self.spec, self.input)
            on_mode, _ = number_moments(probe, mode)
        else:
            total = self.input.mean_photons
            gammas = self.spec.splitter().matrix @ np.asarray(self.input.alphas)
            on_mode = float(abs(gammas[mode - 1]) ** 2)
        return {"total_photons": total, "mean_photons_on_phase_mode": on_mode}


# ---------------------------------------------------------------------------
# classical Fisher information from exact fringe Fourier series


@dataclass(frozen=True)
class FourierTable:
    """Cosine series of every output pattern's fringe for one input.

    probabilities/derivatives evaluate p, p', p'' exactly from the series;
    ``outcomes`` lists the full output basis in a fixed order.
    """

    outcomes: tuple[FockState, ...]
    amplitudes: np.ndarray  # (n_outcomes, N+1)
    offsets: np.ndarray

    @property
    def harmonics(self) -> int:
        return self.amplitudes.shape[1] - 1

    def _eval(self, phis, order: int) -> np.ndarray:
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        k = np.arange(self.harmonics + 1)
        arg = k[None, :, None] * phis[None, None, :] - self.offsets[:, :, None]
        if order == 0:
            term = np.cos(arg)
        elif order == 1:
            term = -k[None, :, None] * np.sin(arg)
        else:
            term = -(k**2)[None, :, None] * np.cos(arg)
        return np.einsum("ok,okp->op", self.amplitudes, term)

    def probabilities(self, phis) -> np.ndarray:
        return self._eval(phis, 0)

    def derivatives(self, phis) -> np.ndarray:
        return self._eval(phis, 1)

    def second_derivatives(self, phis) -> np.ndarray:
        return self._eval(phis, 2)

    def vanishing(self) -> np.ndarray:
        """Mask of outcomes whose fringe is identically zero."""
        return self.amplitudes.max(axis=1) < PROBABILITY_FLOOR


@lru_cache(maxsize=64)
def fourier_table(spec: InterferometerSpec, input_state: FockState) -> FourierTable:
    """Exact per-outcome Fourier series, from simulated fringes."""
    basis = enumerate_basis(spec.mode_count, input_state.total)
    amps = []
    offs = []
    outcomes = tuple(basis)
    for outcome in outcomes:
        pattern = fringe_scan(spec, input_state, outcome)
        amps.append([a for _, a, _ in pattern.fourier])
        offs.append([d for _, _, d in pattern.fourier])
    return FourierTable(outcomes, np.array(amps), np.array(offs))


def cfi_from_table(table: FourierTable, phis) -> np.ndarray:
    """I(phi) = sum over outcomes of p'^2 / p, with Taylor limits at zeros.

    A nonnegative fringe can only touch zero to even order, so where p
    falls below the floor the term's limit is 2 p''; identically zero
    fringes contribute nothing.
    """
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    p = table.probabilities(phis)
    dp = table.derivatives(phis)
    ddp = table.second_derivatives(phis)
    dead = table.vanishing()[:, None]
    small = p < PROBABILITY_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(small, 2.0 * ddp, dp * dp / np.where(small, 1.0, p))
    term = np.where(dead, 0.0, term)
    return term.sum(axis=0)


def cfi_photon_counting(
    spec: InterferometerSpec,
    input_state: FockState,
    phis,
    phase_mode: int | None = None,
) -> np.ndarray:
    """Classical Fisher information of photon counting versus phase."""
    mode = _phase_mode(spec, phase_mode)
    if mode != spec.modes_with_role("unknown")[0]:
        raise ValueError("fringe tables are defined for the spec's unknown-phase mode")
    return cfi_from_table(fourier_table(spec, input_state), phis)
