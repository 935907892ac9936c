"""Qubit-resonator coupling, dispersive shift and EPR Kerr coefficients.

Sign conventions: ``delta = omega_q - omega_r`` internally (signed), while
reports also carry ``|delta|``. The transmon anharmonicity ``alpha`` is
negative. With H = -omega_q/2 sz + (omega_r - chi sz) a^dag a the resonator
frequency splits by 2 chi between the qubit states, and
chi = [E(e,1) - E(e,0) - E(g,1) + E(g,0)] / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from cqedkit import constants as const
from cqedkit.circuit import LomCoefficients
from cqedkit.errors import ConvergenceError, SingularityError, ValidationError
from cqedkit.transmon import SquidParams, TransmonParams, charge_operator, diagonalize, ej_of_flux, lj_to_ej

DISPERSIVE_THRESHOLD = 0.1  # g / |delta|
FOCK_STEP = 2
CHI_RTOL = 1e-4


@dataclass(frozen=True)
class CoupledSystem:
    """Transmon plus resonator (dressed frequency ``omega_r`` in Hz)."""

    transmon: TransmonParams
    omega_r: float
    lom: LomCoefficients
    resonator_levels: int = 6
    transmon_levels: int = 6

    def __post_init__(self):
        if not self.omega_r > 0:
            raise ValidationError(f"omega_r must be positive, got {self.omega_r!r}")
        if self.resonator_levels < 3:
            raise ValidationError("resonator_levels must be >= 3")
        if self.transmon_levels < 3:
            raise ValidationError("transmon_levels must be >= 3")


@dataclass(frozen=True)
class DispersiveResult:
    g: float
    delta: float
    delta_signed: float
    omega_q: float
    alpha: float
    chi_perturbative: float
    chi_exact: float
    in_dispersive_regime: bool

    @property
    def total_shift(self) -> float:
        """Full resonator pull 2|chi| between qubit states (perturbative)."""
        return 2 * abs(self.chi_perturbative)


def charge_zpf(omega_r: float, C_r: float) -> float:
    """Resonator zero-point charge sqrt(hbar w C / 2) in coulombs; ``omega_r`` in Hz."""
    return np.sqrt(const.hbar * 2 * np.pi * omega_r * C_r / 2)


def coupling_scale(system: CoupledSystem) -> float:
    """Coupling per unit transmon charge matrix element, 2e Q_zpf / (C_rt h), in Hz."""
    q_zpf = charge_zpf(system.omega_r, system.lom.C_r_eff)
    return 2 * const.e * q_zpf * system.lom.inv_C_rt / const.h


def coupling_g(system: CoupledSystem) -> float:
    """Exchange coupling g (Hz) between |0> and |1> of the transmon and one photon."""
    spectrum = diagonalize(system.transmon, n_levels=max(3, system.transmon_levels))
    n01 = spectrum.charge_matrix_elements[0, 1]
    return float(abs(coupling_scale(system)) * n01)


def chi_perturbative(g: float, delta: float, alpha: float) -> float:
    """Dispersive shift g^2 alpha / (delta (delta + alpha)).

    ``delta = omega_q - omega_r`` and ``alpha`` are signed. Raises
    :class:`SingularityError` at resonance or at the straddling point.
    """
    if delta == 0:
        raise SingularityError("qubit and resonator are resonant (delta = 0)")
    if delta + alpha == 0:
        raise SingularityError("straddling point delta = -alpha")
    return g**2 * alpha / (delta * (delta + alpha))


def chi_from_spectrum(levels, charge, omega_r, G, fock_levels) -> float:
    """Exact chi for a qubit spectrum coupled via G * n (x) (a + a^dag).

    ``levels`` are qubit energies (Hz), ``charge`` the matrix of the coupling
    operator in the qubit eigenbasis. Dressed states are labelled by their
    largest overlap with the bare product states.
    """
    levels = np.asarray(levels, dtype=float)
    if G == 0:
        return 0.0
    nq = levels.size
    a = np.diag(np.sqrt(np.arange(1, fock_levels)), 1)
    H = (
        np.kron(np.diag(levels - levels[0]), np.eye(fock_levels))
        + np.kron(np.eye(nq), omega_r * (a.T @ a))
        + G * np.kron(np.asarray(charge)[:nq, :nq], a + a.T)
    )
    energies, vectors = np.linalg.eigh(H)
    weights = np.abs(vectors) ** 2

    def dressed(qubit, photons):
        return energies[np.argmax(weights[qubit * fock_levels + photons])]

    return float(dressed(1, 1) - dressed(1, 0) - dressed(0, 1) + dressed(0, 0)) / 2


def chi_exact(system: CoupledSystem) -> float:
    """Dispersive shift from diagonalizing the full coupled Hamiltonian.

    Transmon levels and charge matrix come from the charge-basis solution,
    the coupling keeps the complete charge-charge term (no rotating-wave
    approximation). The result is recomputed with two more photon and
    transmon levels; a relative change above 1e-4 raises ConvergenceError.
    """
    G = coupling_scale(system)
    if G == 0:
        return 0.0

    def run(nq, nf):
        levels, charge = charge_operator(system.transmon, n_levels=nq)
        return chi_from_spectrum(levels, charge, system.omega_r, G, nf)

    nq, nf = system.transmon_levels, system.resonator_levels
    chi = run(nq, nf)
    finer = run(nq + FOCK_STEP, nf + FOCK_STEP)
    if abs(finer - chi) > CHI_RTOL * abs(finer) + 1e-9 * system.omega_r:
        raise ConvergenceError(
            f"chi not converged at {nq} transmon x {nf} Fock levels "
            f"({chi:.6g} vs {finer:.6g} Hz); increase resonator_levels"
        )
    return finer


def chi_multilevel(system: CoupledSystem) -> float:
    """Second-order chi summed over all transmon levels, counter-rotating terms included.

    Unlike :func:`chi_perturbative` this uses the actual charge matrix
    elements rather than harmonic-oscillator ratios, so it tracks
    :func:`chi_exact` to O(g^4).
    """
    G = coupling_scale(system)
    levels, charge = charge_operator(system.transmon, n_levels=system.transmon_levels + FOCK_STEP)
    w = system.omega_r

    def photon_pull(i):
        total = 0.0
        for j in range(levels.size):
            if j == i:
                continue
            d = levels[i] - levels[j]
            total += (G * charge[i, j]) ** 2 * (1 / (d + w) + 1 / (d - w))
        return total

    return (photon_pull(1) - photon_pull(0)) / 2


def analyze(system: CoupledSystem) -> DispersiveResult:
    spectrum = diagonalize(system.transmon, n_levels=max(3, system.transmon_levels))
    g = float(abs(coupling_scale(system)) * spectrum.charge_matrix_elements[0, 1])
    delta = spectrum.omega_q - system.omega_r
    try:
        chi_p = chi_perturbative(g, delta, spectrum.alpha)
    except SingularityError:
        chi_p = float("nan")
    dispersive = bool(np.isfinite(chi_p)) and g < DISPERSIVE_THRESHOLD * abs(delta)
    return DispersiveResult(
        g=g,
        delta=abs(delta),
        delta_signed=delta,
        omega_q=spectrum.omega_q,
        alpha=spectrum.alpha,
        chi_perturbative=chi_p,
        chi_exact=chi_exact(system),
        in_dispersive_regime=dispersive,
    )


def readout_resolvable(chi: float, kappa: float) -> bool:
    """True when the full dispersive pull 2|chi| exceeds the linewidth kappa."""
    return 2 * abs(chi) > kappa


# --- energy participation ---------------------------------------------------

@dataclass(frozen=True)
class EprInput:
    mode_freqs: tuple
    participations: tuple
    E_J: float
    names: tuple = ()

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.mode_freqs)
        parts = tuple(float(p) for p in self.participations)
        object.__setattr__(self, "mode_freqs", freqs)
        object.__setattr__(self, "participations", parts)
        if len(freqs) != len(parts):
            raise ValidationError("mode_freqs and participations differ in length")
        if any(not 0 <= p <= 1.2 for p in parts):
            raise ValidationError(f"participations must lie in [0, 1.2]: {parts}")
        if any(f <= 0 for f in freqs):
            raise ValidationError("mode frequencies must be positive")
        if not self.E_J > 0:
            raise ValidationError("E_J must be positive")
        names = tuple(self.names) or tuple(f"mode{i}" for i in range(len(freqs)))
        if len(names) != len(freqs):
            raise ValidationError("names and mode_freqs differ in length")
        object.__setattr__(self, "names", names)


@dataclass(frozen=True)
class KerrMatrix:
    names: tuple
    chi: np.ndarray

    @property
    def anharmonicities(self) -> np.ndarray:
        return np.diag(self.chi) / 2

    def cross(self, m: str, n: str) -> float:
        return float(self.chi[self.names.index(m), self.names.index(n)])


def kerr_from_epr(epr: EprInput) -> KerrMatrix:
    """chi_mn = f_m f_n p_m p_n / (4 E_J), everything in Hz; alpha_m = chi_mm / 2."""
    f = np.asarray(epr.mode_freqs)
    p = np.asarray(epr.participations)
    fp = f * p
    return KerrMatrix(names=epr.names, chi=np.outer(fp, fp) / (4 * epr.E_J))


def load_epr(doc: dict) -> EprInput:
    """EPR document: ``{"E_J_GHz": ..., "modes": [{"name", "freq_GHz", "p"}, ...]}``.

    ``L_j_nH`` may be given instead of ``E_J_GHz``.
    """
    try:
        modes = doc["modes"]
        if "E_J_GHz" in doc:
            E_J = float(doc["E_J_GHz"]) * const.GHz
        else:
            E_J = lj_to_ej(float(doc["L_j_nH"]) * const.nH)
        return EprInput(
            mode_freqs=[float(m["freq_GHz"]) * const.GHz for m in modes],
            participations=[float(m["p"]) for m in modes],
            E_J=E_J,
            names=[m.get("name", f"mode{i}") for i, m in enumerate(modes)],
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed EPR document: {exc!r}") from exc


# --- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    parameter: float
    E_J: float
    omega_q: float
    g: float
    delta: float
    delta_signed: float
    chi_perturbative: float
    chi_exact: float
    flagged: bool


def sweep_chi_vs_detuning(
    system: CoupledSystem,
    lj_grid: Sequence[float] | None = None,
    flux_grid: Sequence[float] | None = None,
    asymmetry: float = 0.0,
) -> list[SweepRow]:
    """Evaluate chi along a junction-inductance grid (H) or a SQUID flux grid (flux quanta).

    For a flux grid the system's E_J is the zero-flux maximum. Rows outside
    the dispersive regime (g/|delta| > 0.1, or singular) are flagged, not dropped.
    """
    if (lj_grid is None) == (flux_grid is None):
        raise ValidationError("give exactly one of lj_grid or flux_grid")
    grid = list(lj_grid if lj_grid is not None else flux_grid)
    if not grid:
        raise ValidationError("sweep grid is empty")
    rows = []
    for value in grid:
        if lj_grid is not None:
            E_J = lj_to_ej(value)
        else:
            E_J = ej_of_flux(SquidParams(system.transmon.E_J, asymmetry, value))
        point = replace(system, transmon=replace(system.transmon, E_J=E_J))
        try:
            result = analyze(point)
        except ConvergenceError:
            rows.append(SweepRow(float(value), E_J, *([float("nan")] * 6), flagged=True))
            continue
        rows.append(
            SweepRow(
                parameter=float(value),
                E_J=E_J,
                omega_q=result.omega_q,
                g=result.g,
                delta=result.delta,
                delta_signed=result.delta_signed,
                chi_perturbative=result.chi_perturbative,
                chi_exact=result.chi_exact,
                flagged=not result.in_dispersive_regime,
            )
        )
    return rows
