"""Charge-basis transmon spectrum, SQUID tuning and junction parameter conversions.

All energies are ordinary frequencies in Hz (E / h).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from cqedkit import constants as const
from cqedkit.errors import ConvergenceError, ValidationError

DEFAULT_CUTOFF = 25
CONVERGENCE_STEP = 5
CONVERGENCE_RTOL = 1e-8


@dataclass(frozen=True)
class TransmonParams:
    E_J: float
    E_C: float
    n_g: float = 0.0
    charge_cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        # E_J = 0 is the Cooper-pair-box limit and stays allowed
        if not self.E_J >= 0:
            raise ValidationError(f"E_J must be nonnegative, got {self.E_J!r}")
        if not self.E_C > 0:
            raise ValidationError(f"E_C must be positive, got {self.E_C!r}")
        if int(self.charge_cutoff) != self.charge_cutoff or self.charge_cutoff < 5:
            raise ValidationError(f"charge_cutoff must be an integer >= 5, got {self.charge_cutoff!r}")

    @property
    def ratio(self) -> float:
        return self.E_J / self.E_C


@dataclass(frozen=True)
class TransmonSpectrum:
    """Low-lying levels (Hz, relative to the ground state) and charge matrix elements."""

    levels: np.ndarray
    charge_matrix_elements: np.ndarray

    @property
    def omega_q(self) -> float:
        return float(self.levels[1] - self.levels[0])

    @property
    def alpha(self) -> float:
        return float((self.levels[2] - self.levels[1]) - (self.levels[1] - self.levels[0]))


@dataclass(frozen=True)
class SquidParams:
    """DC-SQUID: ``flux`` in units of the flux quantum, ``mutual_coupling`` in A per flux quantum."""

    E_J_max: float
    asymmetry: float = 0.0
    flux: float = 0.0
    mutual_coupling: float | None = None

    def __post_init__(self):
        if not self.E_J_max > 0:
            raise ValidationError(f"E_J_max must be positive, got {self.E_J_max!r}")
        if not 0 <= self.asymmetry < 1:
            raise ValidationError(f"asymmetry must lie in [0, 1), got {self.asymmetry!r}")
        if self.mutual_coupling is not None and not self.mutual_coupling > 0:
            raise ValidationError("mutual_coupling must be positive")


def hamiltonian(params: TransmonParams, cutoff: int | None = None) -> np.ndarray:
    """Dense charge-basis Hamiltonian on |-N>..|N> (Hz)."""
    diag, off = _tridiagonal(params, cutoff)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _tridiagonal(params, cutoff=None):
    N = params.charge_cutoff if cutoff is None else cutoff
    n = np.arange(-N, N + 1)
    diag = 4 * params.E_C * (n - params.n_g) ** 2
    off = np.full(2 * N, -params.E_J / 2)
    return diag, off


def eigenvalues(params: TransmonParams, n_levels: int = 4, cutoff: int | None = None) -> np.ndarray:
    """Lowest ``n_levels`` absolute eigenvalues, no convergence check."""
    diag, off = _tridiagonal(params, cutoff)
    if n_levels > diag.size:
        raise ConvergenceError(f"cutoff too small for {n_levels} levels")
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, n_levels - 1))


def _solve(params, n_levels, cutoff):
    diag, off = _tridiagonal(params, cutoff)
    if n_levels > diag.size:
        raise ConvergenceError(
            f"charge cutoff {cutoff} gives {diag.size} states, fewer than {n_levels} requested"
        )
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    n = np.arange(-cutoff, cutoff + 1)
    charge = vecs.T @ (n[:, None] * vecs)
    return vals, charge


def diagonalize(params: TransmonParams, n_levels: int = 6, check: bool = True) -> TransmonSpectrum:
    """Diagonalize H = 4 E_C (n - n_g)^2 - E_J/2 sum(|n><n+1| + h.c.).

    With ``check`` the spectrum is recomputed at ``charge_cutoff + 5`` and a
    :class:`ConvergenceError` is raised if any level moves by more than
    1e-8 relative (scale ``max(|E_k|, E_C)``).
    """
    N = params.charge_cutoff
    vals, charge = _solve(params, n_levels, N)
    if check:
        finer = eigenvalues(params, n_levels, N + CONVERGENCE_STEP)
        scale = np.maximum(np.abs(finer), params.E_C)
        drift = np.max(np.abs(finer - vals) / scale)
        if drift > CONVERGENCE_RTOL:
            raise ConvergenceError(
                f"charge cutoff {N} not converged for {n_levels} levels "
                f"(relative drift {drift:.2e}); increase charge_cutoff"
            )
    return TransmonSpectrum(levels=vals - vals[0], charge_matrix_elements=np.abs(charge))


def charge_operator(params: TransmonParams, n_levels: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Signed charge matrix <i|n|j> in the eigenbasis together with the levels.

    Eigenvector phases are whatever the solver returns; the coupled-system
    spectrum does not depend on them.
    """
    vals, charge = _solve(params, n_levels, params.charge_cutoff)
    return vals - vals[0], charge


def charge_dispersion(params: TransmonParams) -> float:
    """|omega_q(n_g=0) - omega_q(n_g=1/2)| in Hz."""
    at_zero = diagonalize(replace(params, n_g=0.0), n_levels=2)
    at_half = diagonalize(replace(params, n_g=0.5), n_levels=2)
    return abs(at_zero.omega_q - at_half.omega_q)


def transmon_frequency_estimate(E_J: float, E_C: float) -> float:
    """Asymptotic qubit frequency sqrt(8 E_J E_C) - E_C."""
    return np.sqrt(8 * E_J * E_C) - E_C


# --- junction conversions --------------------------------------------------

def _positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive, got {value!r}")


def lj_to_ej(L_j: float) -> float:
    """Josephson energy (Hz) of a junction with inductance ``L_j`` (H)."""
    _positive("L_j", L_j)
    return (const.PHI0 / (2 * np.pi)) ** 2 / (L_j * const.h)


def ej_to_lj(E_J: float) -> float:
    _positive("E_J", E_J)
    return (const.PHI0 / (2 * np.pi)) ** 2 / (E_J * const.h)


def lj_to_ic(L_j: float) -> float:
    """Critical current (A): I_c = Phi0 / (2 pi L_j)."""
    _positive("L_j", L_j)
    return const.PHI0 / (2 * np.pi * L_j)


def ic_to_lj(I_c: float) -> float:
    _positive("I_c", I_c)
    return const.PHI0 / (2 * np.pi * I_c)


def ej_of_flux(squid: SquidParams) -> float:
    """E_J_max * sqrt(cos^2(pi f) + d^2 sin^2(pi f)) for reduced flux f."""
    angle = np.pi * squid.flux
    return float(squid.E_J_max * np.sqrt(np.cos(angle) ** 2 + squid.asymmetry**2 * np.sin(angle) ** 2))


def flux_from_bias(current: float, mutual_coupling: float) -> float:
    """Reduced flux induced by a bias-line current (A) for a coupling in A per flux quantum."""
    _positive("mutual_coupling", mutual_coupling)
    return current / mutual_coupling
