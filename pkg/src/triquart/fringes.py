"""Output photon-number distributions versus phase, Fourier decomposition,
N-fold visibilities and the optimized classical visibility bound."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .devices import InterferometerSpec, mz_unitary
from .fock import (
    FockState,
    basis_state_vector,
    enumerate_basis,
    evolve,
    transition_amplitude,
)

__all__ = [
    "FringePattern",
    "VisibilityReport",
    "fringe_probabilities",
    "fringe_scan",
    "n_fold_visibility",
    "closed_form_check",
    "closed_form",
    "tabulated_outcomes",
    "outcome_classes",
    "coherent_nfold_visibility",
    "classical_visibility_bound",
    "BoundResult",
    "reference_classical_bounds",
    "visibility_survey",
]


@dataclass(frozen=True)
class FringePattern:
    """Probability-vs-phase samples of one output pattern plus its cosine series."""

    outcome: FockState
    phis: np.ndarray
    probabilities: np.ndarray
    # one (k, amplitude, offset) triple per harmonic, k = 0..N
    fourier: tuple[tuple[int, float, float], ...]

    @property
    def samples(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.phis.tolist(), self.probabilities.tolist()))

    def reconstruct(self, phis=None) -> np.ndarray:
        x = self.phis if phis is None else np.asarray(phis, dtype=float)
        out = np.zeros_like(x)
        for k, amp, delta in self.fourier:
            out += amp * np.cos(k * x - delta)
        return out

    def amplitude(self, k: int) -> float:
        for kk, amp, _ in self.fourier:
            if kk == k:
                return amp
        return 0.0


@dataclass(frozen=True)
class VisibilityReport:
    outcome: FockState
    n_fold_visibility: float
    classical_bound: float | None = None
    nonclassical: bool | None = None


def fringe_probabilities(
    spec: InterferometerSpec,
    input_state: FockState,
    outcome: FockState,
    phis,
    psi: float = 0.0,
) -> np.ndarray:
    """Exact |<outcome| U(phi) |input>|^2 at each phase value."""
    if input_state.total != outcome.total:
        raise ValueError(
            f"photon number mismatch: input {input_state.total}, outcome {outcome.total}"
        )
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    out = np.empty(phis.shape)
    for i, phi in enumerate(phis):
        U = mz_unitary(spec, float(phi), psi)
        out[i] = abs(transition_amplitude(U, input_state, outcome)) ** 2
    return out


def _fourier_series(probs: np.ndarray, n_harmonics: int):
    """Cosine-series coefficients from samples on a uniform [0, 2pi) grid.

    Returns (k, A_k, delta_k) with A_k >= 0 and delta_k in [0, 2pi); exact
    for a finite cosine series when the grid has more than 2*k_max points.
    """
    P = len(probs)
    spectrum = np.fft.rfft(probs)
    coeffs = []
    for k in range(n_harmonics + 1):
        if k == 0:
            amp = float(spectrum[0].real) / P
            delta = 0.0
        else:
            # p_n = A cos(k phi_n - delta) contributes (A P / 2) e^{-i delta}
            # to the k-th DFT bin, so delta is minus the bin's angle
            c = 2.0 * spectrum[k] / P
            amp = float(abs(c))
            delta = float(-np.angle(c)) % (2.0 * np.pi) if amp > 1e-15 else 0.0
        coeffs.append((k, amp, delta))
    return tuple(coeffs)


def fringe_scan(
    spec: InterferometerSpec,
    input_state: FockState,
    outcome: FockState,
    n_points: int = 720,
) -> FringePattern:
    """Scan one output pattern over a uniform [0, 2pi) grid and decompose it.

    The grid must resolve all harmonics of an N-photon input (n_points >=
    2N+1).
    """
    N = input_state.total
    if n_points < 2 * N + 1:
        raise ValueError(f"need at least {2 * N + 1} grid points for {N} photons")
    phis = 2.0 * np.pi * np.arange(n_points) / n_points
    probs = fringe_probabilities(spec, input_state, outcome, phis)
    return FringePattern(outcome, phis, probs, _fourier_series(probs, N))


def n_fold_visibility(pattern: FringePattern) -> VisibilityReport:
    """V = |A_N / A_0| with N the outcome's photon total."""
    N = pattern.outcome.total
    a0 = pattern.amplitude(0)
    if a0 <= 1e-15:
        raise ValueError("degenerate pattern: DC Fourier amplitude is zero")
    return VisibilityReport(pattern.outcome, pattern.amplitude(N) / a0)


# ---------------------------------------------------------------------------
# closed-form fringe table

_SQ3 = math.sqrt(3.0)


def _p3_111(phi):
    return (
        29.0 / 81.0
        - 24.0 / 81.0 * np.cos(phi + np.pi / 3.0)
        - 12.0 / 81.0 * np.cos(2.0 * phi - np.pi / 3.0)
        + 16.0 / 81.0 * np.cos(3.0 * phi)
    )


def _p3_210(phi):
    return 4.0 / 81.0 * (1.0 - np.cos(3.0 * phi))


def _p3_300(phi):
    return (
        28.0 / 243.0
        - 24.0 / 243.0 * np.cos(phi - 2.0 * np.pi / 3.0)
        + 12.0 / 243.0 * np.cos(2.0 * phi - np.pi / 3.0)
        + 8.0 / 243.0 * np.cos(3.0 * phi)
    )


def _p4_1111(phi):
    return (
        167.0
        + 168.0 * np.cos(phi)
        + 108.0 * np.cos(2.0 * phi)
        + 24.0 * np.cos(3.0 * phi)
        + 45.0 * np.cos(4.0 * phi)
    ) / 512.0


def _p4_2200(phi):
    return (
        (47.0 + 60.0 * np.cos(phi) + 21.0 * np.cos(2.0 * phi))
        * np.sin(phi / 2.0) ** 4
        / 128.0
    )


def _p4_3100(phi):
    return 3.0 * np.sin(phi) ** 4 / 128.0


def _p4_4000(phi):
    return 3.0 * (5.0 + 3.0 * np.cos(phi)) * np.sin(phi / 2.0) ** 6 / 64.0


def _p4_2011(phi):
    return (17.0 + 15.0 * np.cos(2.0 * phi)) * np.sin(phi) ** 2 / 256.0


# keyed by (splitter kind, occupations sorted descending); every index
# permutation of a tabulated pattern shares its formula
_CLOSED_FORMS = {
    ("tritter", (1, 1, 1)): _p3_111,
    ("tritter", (2, 1, 0)): _p3_210,
    ("tritter", (3, 0, 0)): _p3_300,
    ("quarter", (1, 1, 1, 1)): _p4_1111,
    ("quarter", (2, 2, 0, 0)): _p4_2200,
    ("quarter", (3, 1, 0, 0)): _p4_3100,
    ("quarter", (4, 0, 0, 0)): _p4_4000,
    ("quarter", (2, 1, 1, 0)): _p4_2011,
}


def tabulated_outcomes(kind: str) -> tuple[tuple[int, ...], ...]:
    """Outcome signatures with a closed-form fringe, bunched patterns first."""
    return tuple(sorted((occ for k, occ in _CLOSED_FORMS if k == kind), reverse=True))


def closed_form(spec: InterferometerSpec, outcome: FockState):
    key = (spec.splitter_kind, tuple(sorted(outcome.occupations, reverse=True)))
    if key not in _CLOSED_FORMS:
        raise ValueError(f"no tabulated closed form for outcome {outcome}")
    return _CLOSED_FORMS[key]


def closed_form_check(
    outcome: FockState, spec: InterferometerSpec, n_points: int = 720
) -> float:
    """Max deviation of simulated probabilities from the tabulated formula."""
    formula = closed_form(spec, outcome)
    input_state = FockState([1] * spec.mode_count)
    phis = 2.0 * np.pi * np.arange(n_points) / n_points
    sim = fringe_probabilities(spec, input_state, outcome, phis)
    return float(np.abs(sim - formula(phis)).max())


def outcome_classes(mode_count: int, photon_number: int):
    """Group the outcome basis by descending-sorted occupation signature.

    Returns a list of (representative FockState, multiplicity).
    """
    basis = enumerate_basis(mode_count, photon_number)
    groups: dict[tuple[int, ...], list[FockState]] = {}
    for state in basis:
        groups.setdefault(tuple(sorted(state.occupations, reverse=True)), []).append(state)
    return [(FockState(sig), len(members)) for sig, members in sorted(groups.items(), reverse=True)]


# ---------------------------------------------------------------------------
# classical (coherent-input) visibility bound

RADIUS_GRID = np.arange(0.0, 3.0 + 1e-9, 0.25)  # 13 values
THETA_GRID = np.arange(0.0, 2.0 * np.pi - 1e-9, np.pi / 8.0)  # 16 values
RADIUS_CEILING = 3.0


@dataclass(frozen=True)
class BoundResult:
    outcome: FockState
    bound: float
    # one (coarse score, refined score, refined parameters) triple per restart
    restarts: tuple[tuple[float, float, tuple[float, ...]], ...]


def coherent_nfold_visibility(
    spec: InterferometerSpec, alphas: Sequence[complex], outcome: FockState
) -> float:
    """N-fold visibility of one output pattern for a coherent input.

    Uses the exact 2N+1-point discrete Fourier transform of the fringe,
    which is a degree-N cosine series in phi.
    """
    S = spec.splitter().matrix
    pm = spec.modes_with_role("unknown")[0] - 1
    alpha = np.asarray(alphas, dtype=complex)
    occ = np.asarray(outcome.occupations)
    N = int(occ.sum())
    P = 2 * N + 1
    phis = 2.0 * np.pi * np.arange(P) / P
    gamma = S @ alpha
    d = S[:, pm] * gamma[pm]
    c = S @ gamma - d
    beta = c[:, None] + d[:, None] * np.exp(-1j * phis)[None, :]
    w = np.abs(beta) ** 2
    with np.errstate(divide="ignore"):
        logq = (occ[:, None] * np.log(np.clip(w, 1e-300, None))).sum(axis=0)
    q = np.exp(logq - logq.max())
    a0 = q.mean()
    if a0 <= 0.0:
        return 0.0
    an = 2.0 * abs((q * np.exp(-1j * N * phis)).sum()) / P
    return float(an / a0)


def _pattern_search(objective, x0, steps, lower, upper, tol=1e-6):
    """Coordinate pattern search; shrinks steps by half until below tol."""
    x = np.array(x0, dtype=float)
    best = objective(x)
    steps = np.array(steps, dtype=float)
    while steps.max() > tol:
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] = np.clip(trial[i] + sign * steps[i], lower[i], upper[i])
                if trial[i] == x[i]:
                    continue
                val = objective(trial)
                if val > best + 1e-15:
                    x, best = trial, val
                    improved = True
        if not improved:
            steps *= 0.5
    return best, x


def classical_visibility_bound(
    spec: InterferometerSpec,
    outcome: FockState,
    top_k: int = 20,
    backend: str | None = None,
) -> BoundResult:
    """Maximum N-fold visibility over coherent inputs.

    Coarse grid over |alpha_i| in [0, 3] (step 0.25) and theta_i in
    [0, 2pi) (step pi/8), then deterministic pattern-search refinement from
    the best top_k grid points. Any classical state is a mixture of
    coherent states, so this bounds all classical inputs.
    """
    N = outcome.total
    if N == 0:
        raise ValueError("classical bound is undefined for the vacuum outcome")
    m = spec.mode_count
    if outcome.mode_count != m:
        raise ValueError("outcome mode count does not match the device")
    pm = spec.modes_with_role("unknown")[0] - 1
    S = spec.splitter().matrix
    scores, params = kernels.coarse_scan(
        S, pm, outcome.occupations, RADIUS_GRID, THETA_GRID, top_k=top_k, backend=backend
    )

    def objective(x):
        radii = x[:m]
        thetas = np.concatenate([[0.0], x[m : 2 * m - 1]])
        alphas = radii * np.exp(1j * thetas)
        return coherent_nfold_visibility(spec, alphas, outcome)

    lower = np.array([0.0] * m + [-np.inf] * (m - 1))
    upper = np.array([RADIUS_CEILING] * m + [np.inf] * (m - 1))
    steps = np.array([0.25] * m + [np.pi / 8.0] * (m - 1))

    restarts = []
    best = 0.0
    for coarse, row in zip(scores, params):
        if coarse < 0.0:
            continue
        x0 = np.concatenate([row[:m], row[m + 1 :]])
        refined, x = _pattern_search(objective, x0, steps, lower, upper)
        alphas_x = tuple(x[:m]) + tuple(np.concatenate([[0.0], x[m:]]))
        restarts.append((float(coarse), float(refined), alphas_x))
        best = max(best, float(coarse), float(refined))
    return BoundResult(outcome, best, tuple(restarts))


@lru_cache(maxsize=32)
def _cached_bound(spec: InterferometerSpec, outcome: FockState) -> float:
    return classical_visibility_bound(spec, outcome).bound


def reference_classical_bounds(kind: str) -> dict[tuple[int, ...], float]:
    """Frozen classical bounds shipped with the package, keyed by signature.

    Set ``TRIQUART_GOLDEN_DIR`` to a directory holding an alternative
    ``classical_bounds.json`` (e.g. one freshly written by
    ``scripts/derive_goldens.py``) to override the packaged values.
    """
    override = os.environ.get("TRIQUART_GOLDEN_DIR")
    if override:
        text = (Path(override) / "classical_bounds.json").read_text()
    else:
        text = resources.files("triquart").joinpath("data/classical_bounds.json").read_text()
    table = json.loads(text)["bounds"]
    if kind not in table:
        raise KeyError(f"no stored classical bounds for device kind {kind!r}")
    return {
        tuple(int(n) for n in sig.split(",")): float(v) for sig, v in table[kind].items()
    }


def visibility_survey(
    spec: InterferometerSpec,
    input_state: FockState,
    bounds: dict[tuple[int, ...], float] | None = None,
) -> list[VisibilityReport]:
    """Per-outcome-class visibility reports for an N-photon input.

    ``bounds`` optionally supplies precomputed classical bounds keyed by the
    descending-sorted occupation signature; missing entries are computed.
    """
    reports = []
    for rep, _mult in outcome_classes(spec.mode_count, input_state.total):
        pattern = fringe_scan(spec, input_state, rep)
        base = n_fold_visibility(pattern)
        sig = tuple(sorted(rep.occupations, reverse=True))
        if bounds is not None and sig in bounds:
            gamma = float(bounds[sig])
        else:
            gamma = _cached_bound(spec, rep)
        reports.append(
            replace(base, classical_bound=gamma, nonclassical=base.n_fold_visibility > gamma)
        )
    return reports
