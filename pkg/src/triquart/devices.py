"""Canonical multiport splitters and interferometer composition.

Phase convention: a phase shifter applies e^{-i phi} on its mode (generator
is the photon-number operator with a minus sign). All fringe formulas in
this package depend on this sign; it is fixed here once.

Mode indices are 1-based in user-facing interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .fock import ModeUnitary

__all__ = [
    "tritter",
    "quarter",
    "phase_shifter",
    "compose",
    "InterferometerSpec",
    "tritter_mz",
    "quarter_mz",
    "build_interferometer",
    "mz_unitary",
    "unitary_to_json",
]

SPLITTER_MODES = {"tritter": 3, "quarter": 4}


def tritter() -> ModeUnitary:
    """Symmetric 3-port splitter (1/sqrt 3) [[1,w,w],[w,1,w],[w,w,1]], w = e^{i 2pi/3}."""
    w = np.exp(2j * np.pi / 3)
    mat = np.full((3, 3), w, dtype=complex)
    np.fill_diagonal(mat, 1.0)
    return ModeUnitary(mat / np.sqrt(3))


def quarter() -> ModeUnitary:
    """Symmetric 4-port splitter (1/2)(2I - J); real, symmetric and involutory."""
    mat = np.eye(4) - 0.5 * np.ones((4, 4))
    return ModeUnitary(mat)


def splitter(kind: str) -> ModeUnitary:
    if kind == "tritter":
        return tritter()
    if kind == "quarter":
        return quarter()
    raise ValueError(f"unknown splitter kind {kind!r}")


def phase_shifter(mode_count: int, mode: int, phase: float) -> ModeUnitary:
    """Diagonal unitary with e^{-i phase} on the given 1-based mode."""
    if not 1 <= mode <= mode_count:
        raise ValueError(f"mode {mode} out of range 1..{mode_count}")
    diag = np.ones(mode_count, dtype=complex)
    diag[mode - 1] = np.exp(-1j * phase)
    return ModeUnitary(np.diag(diag))


def compose(*unitaries: ModeUnitary) -> ModeUnitary:
    """Product of unitaries in application order (first argument acts first)."""
    if not unitaries:
        raise ValueError("compose needs at least one unitary")
    dim = unitaries[0].dimension
    total = np.eye(dim, dtype=complex)
    for u in unitaries:
        if u.dimension != dim:
            raise ValueError("cannot compose unitaries of different dimensions")
        total = u.matrix @ total
    return ModeUnitary(total)


@dataclass(frozen=True)
class InterferometerSpec:
    """Sandwich U_splitter . U_phases . U_splitter with declared phase modes.

    ``phase_modes`` lists (mode, role) pairs with role 'unknown' or
    'feedback'; a mode may carry both roles, in which case the applied
    phase is their sum.
    """

    splitter_kind: str
    phase_modes: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if self.splitter_kind not in SPLITTER_MODES:
            raise ValueError(f"unknown splitter kind {self.splitter_kind!r}")
        m = self.mode_count
        seen = set()
        for mode, role in self.phase_modes:
            if role not in ("unknown", "feedback"):
                raise ValueError(f"unknown phase role {role!r}")
            if not 1 <= mode <= m:
                raise ValueError(f"phase mode {mode} out of range 1..{m}")
            if (mode, role) in seen:
                raise ValueError(f"duplicate phase mode declaration {(mode, role)}")
            seen.add((mode, role))

    @property
    def mode_count(self) -> int:
        return SPLITTER_MODES[self.splitter_kind]

    def splitter(self) -> ModeUnitary:
        return splitter(self.splitter_kind)

    def modes_with_role(self, role: str) -> tuple[int, ...]:
        return tuple(mode for mode, r in self.phase_modes if r == role)


def tritter_mz() -> InterferometerSpec:
    """3-mode Mach-Zehnder: unknown phase and feedback phase both on mode 3."""
    return InterferometerSpec("tritter", ((3, "unknown"), (3, "feedback")))


def quarter_mz() -> InterferometerSpec:
    """4-mode Mach-Zehnder: unknown phase and feedback phase both on mode 4."""
    return InterferometerSpec("quarter", ((4, "unknown"), (4, "feedback")))


def build_interferometer(
    spec: InterferometerSpec, phases: Mapping[tuple[int, str] | int, float]
) -> ModeUnitary:
    """Total unitary U_splitter . U_phases . U_splitter.

    ``phases`` maps each declared (mode, role) pair to a value in radians; a
    bare mode key is accepted when that mode appears under a single role.
    Phases on a mode carrying both roles add up.
    """
    total_by_mode: dict[int, float] = {}
    for mode, role in spec.phase_modes:
        if (mode, role) in phases:
            value = phases[(mode, role)]
        elif mode in phases and len([r for m, r in spec.phase_modes if m == mode]) == 1:
            value = phases[mode]
        else:
            raise ValueError(f"missing phase value for mode {mode} role {role!r}")
        total_by_mode[mode] = total_by_mode.get(mode, 0.0) + float(value)
    m = spec.mode_count
    diag = np.ones(m, dtype=complex)
    for mode, value in total_by_mode.items():
        diag[mode - 1] = np.exp(-1j * value)
    s = spec.splitter().matrix
    return ModeUnitary(s @ (diag[:, None] * s))


def mz_unitary(spec: InterferometerSpec, phi: float, psi: float = 0.0) -> ModeUnitary:
    """Convenience builder assigning phi to every 'unknown' and psi to every
    'feedback' phase mode of the spec."""
    phases: dict[tuple[int, str], float] = {}
    for mode, role in spec.phase_modes:
        phases[(mode, role)] = phi if role == "unknown" else psi
    return build_interferometer(spec, phases)


def unitary_to_json(U: ModeUnitary) -> dict:
    """Row-major re/im pair export for external verification."""
    return {
        "dimension": U.dimension,
        "rows": [[[float(z.real), float(z.imag)] for z in row] for row in U.matrix],
    }
