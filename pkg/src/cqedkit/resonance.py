"""Notch-type S21 resonance model, synthetic traces and circle-fit extraction of Q factors.

Model (notch / side-coupled resonator with impedance mismatch ``phi``)::

    S21(f) = a e^{i alpha} e^{-2 pi i f tau} [1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2 i Q_l (f/f_r - 1))]

and 1/Q_i = 1/Q_l - cos(phi)/|Q_c|.

The fit pipeline:

1. cable delay from the phase slope on the trace edges, polished by
   minimizing the circle residual;
2. algebraic (Kasa) circle fit of the delay-corrected data, refined geometrically;
3. phase-vs-frequency arctangent fit around the circle center for f_r, Q_l;
4. off-resonant point -> a, alpha; normalized circle -> |Q_c|, phi;
5. Q_i from the combination formula;
6. optional complex least-squares refinement of all seven parameters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import least_squares, minimize_scalar

from cqedkit.errors import FitError, InvalidFitError, NotAResonanceError, ValidationError

MIN_POINTS = 30
EDGE_FRACTION = 0.1
DIP_SIGMAS = 6.0
MIN_LINEWIDTHS = 3.0


@dataclass(frozen=True)
class NotchModel:
    f_r: float
    Q_l: float
    Q_c: float
    phi: float = 0.0
    a: float = 1.0
    alpha_env: float = 0.0
    tau: float = 0.0

    @property
    def inv_Q_i(self) -> float:
        return 1 / self.Q_l - math.cos(self.phi) / self.Q_c

    @property
    def Q_i(self) -> float:
        inv = self.inv_Q_i
        return math.inf if inv == 0 else 1 / inv

    @property
    def is_valid(self) -> bool:
        return self.f_r > 0 and self.Q_l > 0 and self.Q_c > 0 and self.inv_Q_i > 0

    @classmethod
    def from_internal(cls, f_r, Q_i, Q_c, phi=0.0, **env) -> "NotchModel":
        """Build from internal and coupling Q instead of loaded Q."""
        Q_l = 1 / (1 / Q_i + math.cos(phi) / Q_c)
        return cls(f_r=f_r, Q_l=Q_l, Q_c=Q_c, phi=phi, **env)


@dataclass(frozen=True)
class S21Trace:
    freqs: np.ndarray
    values: np.ndarray
    power_dbm: float | None = None

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)
        if freqs.ndim != 1 or freqs.shape != values.shape:
            raise ValidationError("freqs and values must be 1-D arrays of equal length")
        if freqs.size < MIN_POINTS:
            raise ValidationError(f"trace needs at least {MIN_POINTS} points, got {freqs.size}")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(values))):
            raise ValidationError("trace contains non-finite samples")
        if np.any(np.diff(freqs) <= 0):
            raise ValidationError("frequencies must be strictly increasing")


@dataclass(frozen=True)
class ResonanceFitResult:
    model: NotchModel
    Q_i: float
    stderr: dict = field(default_factory=dict)
    residual_rms: float = float("nan")
    radial_residual_rms: float = float("nan")
    power_dbm: float | None = None

    def as_row(self) -> dict:
        row = {"power_dbm": self.power_dbm, **asdict(self.model), "Q_i": self.Q_i}
        row.update({f"{k}_err": v for k, v in self.stderr.items()})
        row["residual_rms"] = self.residual_rms
        return row


def model_eval(model: NotchModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    env = model.a * np.exp(1j * model.alpha_env) * np.exp(-2j * np.pi * f * model.tau)
    x = f / model.f_r - 1
    return env * (1 - (model.Q_l / model.Q_c) * np.exp(1j * model.phi) / (1 + 2j * model.Q_l * x))


def synthesize_trace(model: NotchModel, freqs, noise_sigma: float = 0.0, seed=None,
                     power_dbm: float | None = None) -> S21Trace:
    """Model values plus complex Gaussian noise of std ``noise_sigma`` per quadrature."""
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be nonnegative")
    values = model_eval(model, freqs)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * (rng.standard_normal(values.size) + 1j * rng.standard_normal(values.size))
    return S21Trace(np.asarray(freqs, dtype=float), values, power_dbm)


def resonance_frequencies(f_r: float, Q_l: float, n: int = 10001, max_angle: float = 0.95 * np.pi) -> np.ndarray:
    """Sweep points spaced uniformly in angle around the resonance circle.

    f = f_r (1 + tan(theta/2) / (2 Q_l)) for theta in [-max_angle, max_angle];
    ``max_angle = 0.95 pi`` spans about +-12.7 linewidths.
    """
    theta = np.linspace(-max_angle, max_angle, n)
    return f_r * (1 + np.tan(theta / 2) / (2 * Q_l))


def noise_for_snr(snr_db: float, a: float = 1.0) -> float:
    """Per-quadrature noise std giving an amplitude SNR of ``snr_db`` for baseline ``a``."""
    return a * 10 ** (-snr_db / 20)


# --- circle geometry --------------------------------------------------------

def fit_circle(z: np.ndarray, refine: bool = True) -> tuple[complex, float]:
    """Least-squares circle through complex points: algebraic fit, then geometric polish."""
    x, y = z.real, z.imag
    A = np.column_stack([x, y, np.ones_like(x)])
    (D, E, F), *_ = np.linalg.lstsq(A, x**2 + y**2, rcond=None)
    xc, yc = D / 2, E / 2
    r = math.sqrt(max(F + xc**2 + yc**2, 0.0))
    if refine and r > 0:
        sol = least_squares(lambda p: np.hypot(x - p[0], y - p[1]) - p[2], [xc, yc, r], method="lm")
        xc, yc, r = sol.x
    return complex(xc, yc), abs(float(r))


def _circle_rms(z):
    center, r = fit_circle(z, refine=False)
    return float(np.sqrt(np.mean((np.abs(z - center) - r) ** 2)))


def _edges(n):
    m = max(3, int(EDGE_FRACTION * n))
    return np.r_[0:m], np.r_[n - m:n]


def edge_delay(freqs: np.ndarray, values: np.ndarray) -> float:
    """Cable delay from the mean unwrapped-phase slope of the two trace edges."""
    phase = np.unwrap(np.angle(values))
    lo, hi = _edges(freqs.size)
    slopes = [np.polyfit(freqs[idx], phase[idx], 1)[0] for idx in (lo, hi)]
    return -float(np.mean(slopes)) / (2 * np.pi)


def estimate_delay(freqs: np.ndarray, values: np.ndarray, tau0: float | None = None) -> float:
    """Edge-slope delay polished by minimizing the circle-fit residual of the corrected data."""
    if tau0 is None:
        tau0 = edge_delay(freqs, values)
    span = freqs[-1] - freqs[0]
    f0 = freqs[0]

    def cost(tau):
        return _circle_rms(values * np.exp(2j * np.pi * (freqs - f0) * tau))

    # extra windings sit about 1/span apart and each is a local minimum of the
    # cost; scan a half-winding window, then polish around the best sample
    grid = tau0 + np.linspace(-0.5, 0.5, 41) / span
    best = grid[int(np.argmin([cost(t) for t in grid]))]
    step = 1 / (40 * span)
    sol = minimize_scalar(cost, bounds=(best - step, best + step), method="bounded",
                          options={"xatol": 1e-6 / span})
    return float(sol.x)


def _check_dip(z):
    lo, hi = _edges(z.size)
    idx = np.r_[lo, hi]
    t = np.arange(z.size)
    baseline = np.polyval(np.polyfit(t[idx], z.real[idx], 1), t) + 1j * np.polyval(
        np.polyfit(t[idx], z.imag[idx], 1), t
    )
    # point-to-point differences see the noise but hardly the smooth resonance
    sigma = float(np.sqrt(np.mean(np.abs(np.diff(z)) ** 2) / 2))
    peak = float(np.max(np.abs(z - baseline)))
    if not peak > DIP_SIGMAS * sigma:
        raise NotAResonanceError(
            f"no resonance found: largest excursion {peak:.3g} vs noise {sigma:.3g}"
        )


def _phase_fit(freqs, z_centered):
    """Fit theta0 + 2 arctan(2 Q_l (1 - f/f_r)) to the angle about the circle center."""
    theta = np.unwrap(np.angle(z_centered))
    window = max(3, freqs.size // 50)
    smooth = uniform_filter1d(theta, window, mode="nearest")
    slope = np.gradient(smooth, freqs)
    i0 = int(np.argmax(np.abs(slope)))
    f_guess = freqs[i0]
    Q_guess = max(abs(slope[i0]) * f_guess / 4, 10.0)
    theta_guess = smooth[i0]

    def resid(p):
        th0, logq, df = p
        fr = f_guess * (1 + df)
        model = th0 + 2 * np.arctan(2 * np.exp(logq) * (1 - freqs / fr))
        return np.angle(np.exp(1j * (theta - model)))

    best = None
    for q in (Q_guess, 0.3 * Q_guess, 3 * Q_guess):
        sol = least_squares(resid, [theta_guess, math.log(q), 0.0],
                            x_scale=[1.0, 1.0, 1 / q], method="lm")
        if best is None or sol.cost < best.cost:
            best = sol
    th0, logq, df = best.x
    return float(th0), float(math.exp(logq)), float(f_guess * (1 + df))


def circle_fit_seed(trace: S21Trace) -> NotchModel:
    """Steps 1-5: closed-form-ish estimate of every model parameter."""
    f, s = trace.freqs, trace.values
    f0 = f[0]
    tau0 = edge_delay(f, s)
    # judge the dip before the delay polish, which can wind pure noise into a ring
    _check_dip(s * np.exp(2j * np.pi * (f - f0) * tau0))
    tau = estimate_delay(f, s, tau0)
    z = s * np.exp(2j * np.pi * (f - f0) * tau)
    center, radius = fit_circle(z)
    theta0, Q_l, f_r = _phase_fit(f, z - center)
    off_res = center + radius * np.exp(1j * (theta0 + np.pi))
    # delay was referenced to f0; move the phase reference to f = 0
    env = off_res * np.exp(2j * np.pi * f0 * tau)
    cn = center / off_res
    rn = radius / abs(off_res)
    return NotchModel(
        f_r=f_r,
        Q_l=Q_l,
        Q_c=Q_l / (2 * rn),
        phi=float(np.angle(1 - cn)),
        a=float(abs(off_res)),
        alpha_env=float(np.angle(env)),
        tau=tau,
    )


# --- complex least squares --------------------------------------------------

def _refine(trace: S21Trace, seed: NotchModel):
    f, s = trace.freqs, trace.values
    span = f[-1] - f[0]
    f_mid = 0.5 * (f[0] + f[-1])
    q0 = seed.Q_l
    # envelope phase is referenced to mid-band so it decorrelates from tau
    alpha_mid = seed.alpha_env - 2 * np.pi * f_mid * seed.tau

    def unpack(u):
        f_r = seed.f_r * (1 + u[0] / q0)
        Q_l, Q_c = q0 * u[1], seed.Q_c * u[2]
        tau = seed.tau + u[6] / (2 * np.pi * span)
        return f_r, Q_l, Q_c, tau

    def resid(u):
        f_r, Q_l, Q_c, tau = unpack(u)
        env = u[4] * np.exp(1j * (u[5] - 2 * np.pi * (f - f_mid) * tau))
        d = env * (1 - (Q_l / Q_c) * np.exp(1j * u[3]) / (1 + 2j * Q_l * (f / f_r - 1))) - s
        return np.concatenate([d.real, d.imag])

    u0 = np.array([0.0, 1.0, 1.0, seed.phi, seed.a, alpha_mid, 0.0])
    sol = least_squares(resid, u0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    u = sol.x
    f_r, Q_l, Q_c, tau = unpack(u)
    alpha_env = float(np.angle(np.exp(1j * (u[5] + 2 * np.pi * f_mid * tau))))
    model = NotchModel(f_r=f_r, Q_l=Q_l, Q_c=Q_c, phi=float(u[3]), a=float(u[4]),
                       alpha_env=alpha_env, tau=tau)

    dof = max(sol.fun.size - u.size, 1)
    s2 = float(sol.fun @ sol.fun) / dof
    try:
        cov_u = np.linalg.inv(sol.jac.T @ sol.jac) * s2
    except np.linalg.LinAlgError:
        cov_u = np.full((u.size, u.size), np.nan)
    T = np.diag([seed.f_r / q0, q0, seed.Q_c, 1.0, 1.0, 1.0, 1 / (2 * np.pi * span)])
    T[5, 6] = f_mid / span
    cov = T @ cov_u @ T.T
    names = ["f_r", "Q_l", "Q_c", "phi", "a", "alpha_env", "tau"]
    stderr = {n: float(np.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(names)}
    # delta method on 1/Q_i = 1/Q_l - cos(phi)/Q_c
    Q_i = model.Q_i
    grad = np.zeros(7)
    grad[1] = Q_i**2 / Q_l**2
    grad[2] = -(Q_i**2) * math.cos(model.phi) / Q_c**2
    grad[3] = -(Q_i**2) * math.sin(model.phi) / Q_c
    stderr["Q_i"] = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    return model, stderr


def _radial_rms(trace: S21Trace, m: NotchModel) -> float:
    f = trace.freqs
    env = m.a * np.exp(1j * m.alpha_env) * np.exp(-2j * np.pi * f * m.tau)
    zn = trace.values / env
    d = m.Q_l / m.Q_c
    center = 1 - 0.5 * d * np.exp(1j * m.phi)
    return float(m.a * np.sqrt(np.mean((np.abs(zn - center) - 0.5 * d) ** 2)))


def fit_resonance(trace: S21Trace, initial_guess: NotchModel | None = None,
                  refine: bool = True) -> ResonanceFitResult:
    """Extract f_r, Q_l, |Q_c|, phi, Q_i and the environment from a notch trace.

    ``initial_guess`` replaces the circle-fit seed for the least-squares
    refinement. Raises :class:`NotAResonanceError` when no dip stands out of
    the noise and :class:`InvalidFitError` for a negative internal Q.
    """
    seed = initial_guess if initial_guess is not None else circle_fit_seed(trace)
    if not (seed.Q_l > 0 and seed.Q_c > 0 and seed.f_r > 0):
        raise InvalidFitError("circle fit produced nonpositive quality factors", asdict(seed))
    if refine:
        model, stderr = _refine(trace, seed)
    else:
        model, stderr = seed, {}
    if model.Q_c < 0:
        model = replace(model, Q_c=-model.Q_c, phi=model.phi + np.pi)
    model = replace(model, phi=float(np.angle(np.exp(1j * model.phi))))
    if not model.Q_l > 0 or not model.inv_Q_i > 0:
        raise InvalidFitError(
            f"fit implies nonpositive internal Q (1/Q_i = {model.inv_Q_i:.3g})", asdict(model)
        )
    span = trace.freqs[-1] - trace.freqs[0]
    linewidths = span * model.Q_l / model.f_r
    if linewidths < MIN_LINEWIDTHS:
        raise FitError(f"trace spans only {linewidths:.2f} linewidths (need {MIN_LINEWIDTHS:g})")
    resid = model_eval(model, trace.freqs) - trace.values
    return ResonanceFitResult(
        model=model,
        Q_i=model.Q_i,
        stderr=stderr,
        residual_rms=float(np.sqrt(np.mean(np.abs(resid) ** 2))),
        radial_residual_rms=_radial_rms(trace, model),
        power_dbm=trace.power_dbm,
    )


# --- power sweeps -----------------------------------------------------------

@dataclass(frozen=True)
class PowerSweepRow:
    power_dbm: float
    Q_i: float
    Q_c: float
    f_r: float


@dataclass(frozen=True)
class PowerSweepResult:
    rows: list
    failures: list

    @property
    def max_row(self) -> PowerSweepRow | None:
        return max(self.rows, key=lambda r: r.Q_i) if self.rows else None


def batch_power_sweep(traces) -> PowerSweepResult:
    """Fit every trace; failures are collected as (index, power, message) and skipped."""
    rows, failures = [], []
    for i, trace in enumerate(traces):
        try:
            res = fit_resonance(trace)
        except FitError as exc:
            failures.append((i, trace.power_dbm, str(exc)))
            continue
        power = float("nan") if trace.power_dbm is None else trace.power_dbm
        rows.append(PowerSweepRow(power, res.Q_i, res.model.Q_c, res.model.f_r))
    rows.sort(key=lambda r: r.power_dbm)
    return PowerSweepResult(rows, failures)


# --- trace files ------------------------------------------------------------

def read_trace(path, polar: bool = False, power_dbm: float | None = None) -> S21Trace:
    """Read a CSV trace with columns ``freq_Hz,re,im`` (or ``freq_Hz,mag_dB,phase_rad`` if ``polar``)."""
    # open here so a missing file reports its own name
    with open(Path(path)) as fh:
        try:
            data = np.genfromtxt(fh, delimiter=",", names=True)
        except ValueError as exc:
            raise ValidationError(f"cannot parse trace {path}: {exc}") from exc
    names = data.dtype.names or ()
    try:
        freqs = np.asarray(data["freq_Hz"], dtype=float)
        if polar or "mag_dB" in names:
            values = 10 ** (data["mag_dB"] / 20) * np.exp(1j * data["phase_rad"])
        else:
            values = data["re"] + 1j * data["im"]
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"trace {path} lacks required columns: {exc}") from exc
    return S21Trace(freqs, values, power_dbm)


def write_trace(path, trace: S21Trace) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_Hz", "re", "im"])
        for f, v in zip(trace.freqs, trace.values):
            writer.writerow([repr(float(f)), repr(float(v.real)), repr(float(v.imag))])
