"""Repeated Ramsey (QND) detection of photons stored in a cavity.

A qubit in (|g> + |e>)/sqrt(2) picks up the relative phase 2 n xi t from n
stored photons. A second pi/2 pulse, inverse of the first, maps the phase to
P_e = (1 - cos phi)/2, so an empty cavity ideally never clicks. Photon
number is assumed constant over the N repetitions (ideal QND, no cavity
decay); a photon is declared when at least k of N readouts return e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from cqedkit.errors import ValidationError

MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class QndProtocol:
    """``xi`` in rad/s; ``readout_error_ge`` = P(read e | g), ``readout_error_eg`` = P(read g | e)."""

    xi: float
    interrogation_time: float
    n_photons: int = 1
    repetitions: int = 1
    readout_error_ge: float = 0.0
    readout_error_eg: float = 0.0
    threshold: int | None = None

    def __post_init__(self):
        if self.n_photons < 0 or int(self.n_photons) != self.n_photons:
            raise ValidationError("n_photons must be a nonnegative integer")
        if self.repetitions < 1 or int(self.repetitions) != self.repetitions:
            raise ValidationError("repetitions must be an integer >= 1")
        for name in ("readout_error_ge", "readout_error_eg"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise ValidationError(f"{name} must lie in [0, 1], got {p!r}")
        if self.interrogation_time < 0:
            raise ValidationError("interrogation_time must be nonnegative")
        k = self.repetitions if self.threshold is None else self.threshold
        if not 1 <= k <= self.repetitions:
            raise ValidationError(f"threshold must satisfy 1 <= k <= N, got k={k}, N={self.repetitions}")
        object.__setattr__(self, "threshold", int(k))


@dataclass(frozen=True)
class DetectionStats:
    p_click_dark: float
    p_click: float
    false_positive_rate: float
    detection_efficiency: float
    shots: int | None = None
    seed: int | None = None
    fp_ci: tuple | None = None
    efficiency_ci: tuple | None = None


def accumulated_phase(protocol: QndProtocol, n_photons: int | None = None) -> tuple[float, float]:
    """(unwrapped phase 2 n xi t, same phase reduced to [0, 2 pi))."""
    n = protocol.n_photons if n_photons is None else n_photons
    phi = 2 * n * protocol.xi * protocol.interrogation_time
    return phi, phi % (2 * math.pi)


def ramsey_probability(phi) -> float:
    """Excited-state probability after the closing pi/2 pulse."""
    return (1 - np.cos(phi)) / 2


def click_probability(protocol: QndProtocol, n_photons: int) -> float:
    """Per-shot probability of reading e, readout errors included."""
    p_e = float(ramsey_probability(accumulated_phase(protocol, n_photons)[0]))
    return p_e * (1 - protocol.readout_error_eg) + (1 - p_e) * protocol.readout_error_ge


def at_least_k(p: float, N: int, k: int) -> float:
    """P(X >= k) for X ~ Binomial(N, p), summed term by term."""
    return math.fsum(math.comb(N, j) * p**j * (1 - p) ** (N - j) for j in range(k, N + 1))


def detection_statistics(protocol: QndProtocol) -> DetectionStats:
    N, k = protocol.repetitions, protocol.threshold
    p_dark = click_probability(protocol, 0)
    p_signal = click_probability(protocol, protocol.n_photons)
    return DetectionStats(
        p_click_dark=p_dark,
        p_click=p_signal,
        false_positive_rate=at_least_k(p_dark, N, k),
        detection_efficiency=at_least_k(p_signal, N, k),
    )


def _simulate(rng, protocol, n_photons, shots):
    """Number of shots (out of ``shots``) declaring a photon."""
    N, k = protocol.repetitions, protocol.threshold
    p_e = float(ramsey_probability(accumulated_phase(protocol, n_photons)[0]))
    hits = 0
    remaining = shots
    while remaining:
        m = min(remaining, MC_CHUNK)
        excited = rng.random((m, N)) < p_e
        flip = np.where(excited, protocol.readout_error_eg, protocol.readout_error_ge)
        read_e = excited ^ (rng.random((m, N)) < flip)
        hits += int(np.count_nonzero(read_e.sum(axis=1) >= k))
        remaining -= m
    return hits


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def run_monte_carlo(protocol: QndProtocol, shots: int, seed: int = 0) -> DetectionStats:
    """Seeded shot-by-shot simulation: Ramsey outcome, then readout flips, per repetition.

    Dark-count and signal runs draw from one generator, dark first.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    fp_hits = _simulate(rng, protocol, 0, shots)
    det_hits = _simulate(rng, protocol, protocol.n_photons, shots)
    return DetectionStats(
        p_click_dark=click_probability(protocol, 0),
        p_click=click_probability(protocol, protocol.n_photons),
        false_positive_rate=fp_hits / shots,
        detection_efficiency=det_hits / shots,
        shots=shots,
        seed=seed,
        fp_ci=wilson_interval(fp_hits, shots),
        efficiency_ci=wilson_interval(det_hits, shots),
    )


def binomial_sigma(p: float, shots: int) -> float:
    return math.sqrt(p * (1 - p) / shots)
