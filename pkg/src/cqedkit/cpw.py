"""Coplanar-waveguide resonator: impedance, quarter-wave frequency, lumped model and Q conversions.

The impedance uses the zero-thickness, infinite-substrate conformal mapping
with complete elliptic integrals evaluated by the arithmetic-geometric mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cqedkit import constants as const
from cqedkit.errors import ValidationError

SILICON_EPS_R = 11.45


def agm(a: float, b: float, rtol: float = 1e-15) -> float:
    """Arithmetic-geometric mean of two nonnegative numbers."""
    if a < 0 or b < 0:
        raise ValidationError("agm needs nonnegative arguments")
    for _ in range(64):
        if abs(a - b) <= rtol * max(a, b):
            break
        a, b = (a + b) / 2, math.sqrt(a * b)
    return (a + b) / 2


def ellipk_agm(k: float) -> float:
    """Complete elliptic integral of the first kind K(k) for modulus 0 <= k < 1."""
    if not 0 <= k < 1:
        raise ValidationError(f"modulus must lie in [0, 1), got {k!r}")
    return math.pi / (2 * agm(1.0, math.sqrt(1 - k * k)))


@dataclass(frozen=True)
class CpwGeometry:
    """Lengths in meters."""

    trace_width: float
    gap: float
    length: float
    substrate_eps_r: float = SILICON_EPS_R
    substrate_thickness: float | None = None

    def __post_init__(self):
        for name in ("trace_width", "gap", "length"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be positive, got {value!r}")
        if not self.substrate_eps_r >= 1:
            raise ValidationError(f"substrate_eps_r must be >= 1, got {self.substrate_eps_r!r}")


@dataclass(frozen=True)
class ResonatorElectrical:
    Z0: float
    eps_eff: float
    f_bare: float
    C_lumped: float
    f_loaded: float | None = None


@dataclass(frozen=True)
class QualityFactors:
    """Q factors of a resonator at ``f_r`` (Hz). ``Q_c`` may be complex (mismatched notch)."""

    Q_l: float
    Q_c: complex
    Q_i: float
    f_r: float

    @property
    def kappa(self) -> float:
        return kappa_of(self.Q_l, self.f_r)

    @property
    def T1(self) -> float:
        return q_to_t1(self.Q_l, self.f_r)

    def consistency_error(self) -> float:
        """Relative violation of 1/Q_l = 1/Q_i + Re(1/Q_c)."""
        lhs = 1 / self.Q_l
        return abs(lhs - (1 / self.Q_i + (1 / complex(self.Q_c)).real)) / lhs


def cpw_impedance(geom: CpwGeometry) -> tuple[float, float]:
    """(Z0 in ohms, effective permittivity) of the coplanar line."""
    k = geom.trace_width / (geom.trace_width + 2 * geom.gap)
    k_prime = math.sqrt(1 - k * k)
    eps_eff = (1 + geom.substrate_eps_r) / 2
    Z0 = 30 * math.pi / math.sqrt(eps_eff) * ellipk_agm(k_prime) / ellipk_agm(k)
    return Z0, eps_eff


def quarter_wave_frequency(geom: CpwGeometry) -> float:
    _, eps_eff = cpw_impedance(geom)
    return const.c / (4 * geom.length * math.sqrt(eps_eff))


def lumped_equivalent(f: float, Z0: float) -> float:
    """Capacitance of the parallel LC equivalent of a lambda/4 line near resonance."""
    if f <= 0 or Z0 <= 0:
        raise ValidationError("frequency and impedance must be positive")
    return math.pi / (4 * (2 * math.pi * f) * Z0)


def loaded_frequency(electrical: ResonatorElectrical, C_couplings) -> float:
    """First-order capacitive loading: f_bare * sqrt(C / (C + sum(C_couplings)))."""
    extra = float(np.sum(C_couplings))
    if extra < 0:
        raise ValidationError("coupling capacitances must be nonnegative")
    return electrical.f_bare * math.sqrt(electrical.C_lumped / (electrical.C_lumped + extra))


def resonator_electrical(geom: CpwGeometry, C_couplings=()) -> ResonatorElectrical:
    Z0, eps_eff = cpw_impedance(geom)
    f_bare = quarter_wave_frequency(geom)
    bare = ResonatorElectrical(Z0, eps_eff, f_bare, lumped_equivalent(f_bare, Z0))
    return ResonatorElectrical(Z0, eps_eff, f_bare, bare.C_lumped, loaded_frequency(bare, C_couplings))


def q_to_t1(Q: float, f: float) -> float:
    """Energy decay time Q / (2 pi f) in seconds."""
    if Q <= 0 or f <= 0:
        raise ValidationError("Q and f must be positive")
    return Q / (2 * math.pi * f)


def t1_to_q(T1: float, f: float) -> float:
    if T1 <= 0 or f <= 0:
        raise ValidationError("T1 and f must be positive")
    return 2 * math.pi * f * T1


def kappa_of(Q_l: float, f_r: float) -> float:
    """Linewidth f_r / Q_l in Hz."""
    if Q_l <= 0 or f_r <= 0:
        raise ValidationError("Q_l and f_r must be positive")
    return f_r / Q_l
