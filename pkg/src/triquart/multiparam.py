"""Simultaneous estimation of several internal phases.

Each unknown phase acts as e^{-i n_mu lambda_mu} on its own mode between
the splitter layers; the generators are commuting diagonal number
operators on the fixed-photon-number Fock basis, the splitter input mode
k1 serving as the implicit phase reference. For a pure probe the quantum
Fisher information matrix is 4 Cov(G), cross-checked here against the
symmetric-logarithmic-derivative trace formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .devices import InterferometerSpec
from .fisher import probe_state, sector_occupation_covariance
from .fock import CoherentState, FockState

__all__ = [
    "QfiMatrix",
    "SldOperator",
    "BoundReport",
    "generator_diagonals",
    "qfim_pure",
    "sld_pure",
    "weak_commutativity",
    "bounds",
    "qfim_coherent",
]

_SLD_CROSSCHECK_TOL = 1e-9


@dataclass(frozen=True)
class QfiMatrix:
    """Quantum Fisher information matrix with its probe provenance."""

    entries: np.ndarray
    phase_modes: tuple[int, ...]
    probe: str
    degenerate: bool = False

    def symmetry_residual(self) -> float:
        return float(np.abs(self.entries - self.entries.T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())


@dataclass(frozen=True)
class SldOperator:
    matrix: np.ndarray
    phase_mode: int

    def hermiticity_residual(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


@dataclass(frozen=True)
class BoundReport:
    """Per-parameter and total quantum Cramer-Rao bounds for M repetitions."""

    per_parameter: tuple[float, ...]  # deltas, sqrt((H^-1)_mumu / M)
    total_variance: float  # Tr[H^-1] / M
    effective_qfi: tuple[float, ...]  # 1 / (H^-1)_mumu
    M: int


def _check_modes(spec: InterferometerSpec, phase_modes: Sequence[int]) -> tuple[int, ...]:
    modes = tuple(int(m) for m in phase_modes)
    if not modes:
        raise ValueError("need at least one phase mode")
    if len(set(modes)) != len(modes):
        raise ValueError(f"phase modes must be distinct, got {modes}")
    for m in modes:
        if not 1 <= m <= spec.mode_count:
            raise ValueError(f"phase mode {m} out of range for {spec.mode_count} modes")
    return modes


def generator_diagonals(
    spec: InterferometerSpec, input_state: FockState, phase_modes: Sequence[int]
) -> np.ndarray:
    """Diagonals of the commuting number-operator generators, one row per
    phase mode, on the fixed-N basis of the device."""
    modes = _check_modes(spec, phase_modes)
    probe = probe_state(spec, input_state)
    occ = probe.basis.occupation_matrix()
    return occ[:, [m - 1 for m in modes]].T.astype(float)


def _probe_and_generators(spec, input_state, phase_modes):
    modes = _check_modes(spec, phase_modes)
    probe = probe_state(spec, input_state)
    gens = probe.basis.occupation_matrix()[:, [m - 1 for m in modes]].T.astype(float)
    return modes, probe, gens


def _qfim_covariance(probe, gens) -> np.ndarray:
    p = probe.probabilities()
    mean = gens @ p
    second = (gens * p[None, :]) @ gens.T
    return 4.0 * (second - np.outer(mean, mean))


def _sld_zero(psi: np.ndarray, gen: np.ndarray) -> np.ndarray:
    # L0 = 2[(-i G)|psi><psi| + |psi><psi|(i G)] for the pure probe
    gpsi = gen * psi
    outer = np.outer(gpsi, psi.conj())
    return 2.0j * (outer.conj().T - outer)


def _evolution_phase(gens: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.exp(-1j * (values @ gens))


def qfim_pure(
    spec: InterferometerSpec,
    input_state: FockState,
    phase_modes: Sequence[int],
) -> QfiMatrix:
    """QFI matrix 4 Cov(G_mu, G_nu) of a Fock probe, SLD-cross-checked.

    Commuting generators make the matrix independent of the parameter
    point, so it is evaluated once at lambda = 0.
    """
    modes, probe, gens = _probe_and_generators(spec, input_state, phase_modes)
    H = _qfim_covariance(probe, gens)
    if input_state.total == 0:
        return QfiMatrix(H, modes, f"fock {input_state}", degenerate=True)

    psi = probe.amplitudes
    slds = [_sld_zero(psi, g) for g in gens]
    rho = np.outer(psi, psi.conj())
    H_sld = np.empty_like(H)
    for a, La in enumerate(slds):
        for b, Lb in enumerate(slds):
            H_sld[a, b] = np.trace(rho @ (La @ Lb + Lb @ La)).real / 2.0
    mismatch = np.abs(H - H_sld).max()
    if mismatch > _SLD_CROSSCHECK_TOL:
        raise AssertionError(
            f"covariance and SLD-trace QFI matrices disagree by {mismatch:.3e}"
        )
    return QfiMatrix(H, modes, f"fock {input_state}")


def sld_pure(
    spec: InterferometerSpec,
    input_state: FockState,
    phase_mode: int,
    parameters: Mapping[int, float] | None = None,
) -> SldOperator:
    """Symmetric logarithmic derivative L_mu = U_lambda L_0mu U_lambda^dag.

    ``parameters`` maps phase modes to their lambda values; omitted modes
    sit at zero, so the default is the L_0mu operator itself.
    """
    parameters = dict(parameters or {})
    all_modes = _check_modes(spec, tuple(parameters) or (phase_mode,))
    if phase_mode not in all_modes:
        all_modes = _check_modes(spec, all_modes + (phase_mode,))
    _, probe, gens = _probe_and_generators(spec, input_state, all_modes)
    values = np.array([parameters.get(m, 0.0) for m in all_modes])
    g_mu = gens[all_modes.index(phase_mode)]
    L0 = _sld_zero(probe.amplitudes, g_mu)
    u = _evolution_phase(gens, values)
    L = (u[:, None] * L0) * u.conj()[None, :]
    return SldOperator(L, phase_mode)


def weak_commutativity(
    spec: InterferometerSpec,
    input_state: FockState,
    phase_modes: Sequence[int],
    parameters: Mapping[int, float] | None = None,
) -> complex:
    """Tr[rho_lambda [L_mu, L_nu]], the multiparameter attainability check.

    Returns the largest-magnitude trace over parameter pairs (there is
    only one pair for the two-phase devices); identically zero for a
    single parameter.
    """
    modes = _check_modes(spec, phase_modes)
    if len(modes) == 1:
        return 0j
    parameters = dict(parameters or {})
    _, probe, gens = _probe_and_generators(spec, input_state, modes)
    values = np.array([parameters.get(m, 0.0) for m in modes])
    u = _evolution_phase(gens, values)
    psi = u * probe.amplitudes
    rho = np.outer(psi, psi.conj())
    slds = [
        (u[:, None] * _sld_zero(probe.amplitudes, g)) * u.conj()[None, :] for g in gens
    ]
    worst = 0j
    for a in range(len(slds)):
        for b in range(a + 1, len(slds)):
            comm = slds[a] @ slds[b] - slds[b] @ slds[a]
            val = complex(np.trace(rho @ comm))
            if abs(val) > abs(worst):
                worst = val
    return worst


def bounds(H: QfiMatrix, M: int) -> BoundReport:
    """Quantum Cramer-Rao bounds for M independent repetitions."""
    if M < 1:
        raise ValueError("M must be a positive number of measurements")
    evals, evecs = np.linalg.eigh(H.entries)
    if evals.min() <= 1e-10:
        null = evecs[:, int(np.argmin(evals))]
        direction = ", ".join(f"{c:+.3f}" for c in null)
        raise ValueError(
            f"QFI matrix is singular: parameter direction ({direction}) over "
            f"modes {H.phase_modes} carries no information"
        )
    inv = np.linalg.inv(H.entries)
    diag = np.diag(inv)
    return BoundReport(
        per_parameter=tuple(math.sqrt(d / M) for d in diag),
        total_variance=float(np.trace(inv) / M),
        effective_qfi=tuple(1.0 / d for d in diag),
        M=int(M),
    )


def qfim_coherent(
    spec: InterferometerSpec,
    input_state: CoherentState,
    phase_modes: Sequence[int],
    reference: bool = True,
) -> QfiMatrix:
    """QFI matrix of a coherent probe, with or without a phase reference.

    With a reference the transformed state stays a product of coherent
    modes, whose photon numbers are independent: the matrix is diagonal
    with entries 4 |beta_mu|^2. Without one, phase averaging dephases the
    probe into fixed-N sectors and the matrix is the Poisson mixture of
    per-sector 4 Cov(n_mu, n_nu).
    """
    modes = _check_modes(spec, phase_modes)
    if input_state.mode_count != spec.mode_count:
        raise ValueError("coherent input mode count does not match the device")
    gammas = spec.splitter().matrix @ np.asarray(input_state.alphas)
    label = "coherent, phase reference" if reference else "coherent, phase averaged"
    if reference:
        H = np.diag([4.0 * abs(gammas[m - 1]) ** 2 for m in modes])
        return QfiMatrix(H, modes, label, degenerate=input_state.mean_photons == 0.0)
    nbar = input_state.mean_photons
    H = np.zeros((len(modes), len(modes)))
    if nbar == 0.0:
        return QfiMatrix(H, modes, label, degenerate=True)
    k = np.arange(input_state.truncation + 1)
    logw = -nbar + k * np.log(nbar) - np.array([math.lgamma(n + 1) for n in k])
    weights = np.exp(logw)
    for N in range(1, input_state.truncation + 1):
        H += weights[N] * 4.0 * sector_occupation_covariance(gammas, N, modes)
    return QfiMatrix(H, modes, label)
