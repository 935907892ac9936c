"""Acceptance gate: one PASS/FAIL line per criterion at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or add ``-s`` to see them inline.
"""

import math
import time

import numpy as np
import pytest
from conftest import DATA, record

from cqedkit import cli
from cqedkit.circuit import LomCoefficients
from cqedkit.config import load_config
from cqedkit.constants import GHz, MHz, e, fF, h, nH, um, mm
from cqedkit.cpw import CpwGeometry, cpw_impedance, lumped_equivalent
from cqedkit.dispersive import (
    CoupledSystem,
    EprInput,
    analyze,
    charge_zpf,
    chi_multilevel,
    kerr_from_epr,
    sweep_chi_vs_detuning,
)
from cqedkit.pipeline import coupled_system, quantize
from cqedkit.qnd import QndProtocol, binomial_sigma, detection_statistics, run_monte_carlo
from cqedkit.resonance import NotchModel, fit_resonance, noise_for_snr, resonance_frequencies, synthesize_trace
from cqedkit.transmon import TransmonParams, charge_dispersion, diagonalize, eigenvalues, lj_to_ej, lj_to_ic

SESSION_START = time.perf_counter()
CONFIG = DATA / "device_config.json"


def within(value, target, rel):
    return abs(value / target - 1) <= rel


def test_1_reference_lom_reproduction():
    start = time.perf_counter()
    r = quantize(load_config(CONFIG))
    elapsed = time.perf_counter() - start
    checks = {
        "E_J/E_C": (r["EJ_over_EC"], 79.44, 0.05),
        "omega_q/2pi": (r["omega_q_GHz"], 4.970, 0.05),
        "|alpha|/2pi": (abs(r["alpha_MHz"]), 227.81, 0.10),
        "chi/2pi": (abs(r["chi_pert_MHz"]), 0.558, 0.15),
    }
    ok = all(within(v, t, tol) for v, t, tol in checks.values()) and elapsed < 10
    detail = ", ".join(f"{k}={v:.4g} vs {t} ({100 * (v / t - 1):+.1f}%)" for k, (v, t, _) in checks.items())
    detail += f"; chi_exact={abs(r['chi_exact_MHz']):.4g} MHz; {elapsed:.2f} s"
    assert record(1, "LOM reproduction of the reference device", ok, detail)


def test_2_junction_conversion():
    I_c = lj_to_ic(10 * nH) * 1e9
    assert record(2, "L_j = 10 nH -> I_c", within(I_c, 33.0, 0.005), f"I_c = {I_c:.3f} nA")


def test_3_epr_kerr():
    kerr = kerr_from_epr(EprInput(
        mode_freqs=(4.878 * GHz, 5.988 * GHz), participations=(1.0839, 9.05e-4),
        E_J=lj_to_ej(10 * nH), names=("qubit", "resonator"),
    ))
    alpha = kerr.anharmonicities[0] / MHz
    chi = kerr.cross("qubit", "resonator") / MHz
    ok = within(alpha, 213.80, 1e-3) and within(chi, 0.438, 1e-3)
    assert record(3, "EPR Kerr formula", ok, f"alpha = {alpha:.3f} MHz, chi_qr = {chi:.4f} MHz")


def test_4_cpw_impedance():
    Z0, _ = cpw_impedance(CpwGeometry(15 * um, 9 * um, 4.689 * mm, substrate_eps_r=11.45))
    C = lumped_equivalent(5.988 * GHz, Z0) / fF
    ok = abs(Z0 - 50) <= 1.5 and within(C, 404.07, 0.05)
    assert record(4, "CPW impedance and lambda/4 capacitance", ok, f"Z0 = {Z0:.2f} ohm, C = {C:.1f} fF")


def random_dispersive_grid(n=20, seed=2024):
    """Transmon/resonator points with g/|delta| < 0.1 and |delta + alpha| > 10 g."""
    rng = np.random.default_rng(seed)
    C_r = 414 * fF
    points = []
    while len(points) < n:
        E_C = rng.uniform(0.18, 0.30) * GHz
        transmon = TransmonParams(E_J=rng.uniform(50, 150) * E_C, E_C=E_C)
        spec = diagonalize(transmon, n_levels=3)
        delta = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0) * GHz
        omega_r = spec.omega_q - delta
        g = rng.uniform(0.02, 0.08) * abs(delta)
        if abs(delta + spec.alpha) < 10 * g or omega_r < 1 * GHz:
            continue
        n01 = spec.charge_matrix_elements[0, 1]
        C_rt = 2 * e * charge_zpf(omega_r, C_r) * n01 / (g * h)
        lom = LomCoefficients(C_t_eff=e**2 / (2 * E_C * h), C_r_eff=C_r, C_rt_eff=C_rt)
        points.append(CoupledSystem(transmon, omega_r, lom))
    return points


def test_5_oracle_equivalence():
    worst = cross = 0.0
    for system in random_dispersive_grid():
        r = analyze(system)
        assert r.g / r.delta < 0.1
        worst = max(worst, abs(r.chi_perturbative / r.chi_exact - 1))
        # second order over all levels: tells a formula gap from an oracle bug
        cross = max(cross, abs(chi_multilevel(system) / r.chi_exact - 1))
    equivalence = worst <= 0.05

    system = coupled_system(load_config(CONFIG))
    rows = sweep_chi_vs_detuning(system, lj_grid=np.linspace(8, 14, 25) * nH)
    alpha = abs(analyze(system).alpha)
    far = sorted((r for r in rows if r.delta > alpha), key=lambda r: r.delta)
    monotone = all(
        abs(getattr(a, key)) > abs(getattr(b, key))
        for key in ("chi_perturbative", "chi_exact")
        for a, b in zip(far, far[1:])
    )
    detail = (f"max |chi_pert/chi_exact - 1| = {100 * worst:.1f}% over 20 points "
              f"(multilevel vs exact {100 * cross:.1f}%); sweep monotone = {monotone} over {len(far)} rows")
    assert record(5, "chi_perturbative vs chi_exact oracle, chi(delta) shape", equivalence and monotone, detail)


def test_6_transmon_diagonalization():
    drift = 0.0
    for ratio in np.linspace(10, 200, 20):
        p = TransmonParams(E_J=ratio * 0.2 * GHz, E_C=0.2 * GHz)
        coarse, fine = eigenvalues(p, 4, cutoff=20), eigenvalues(p, 4, cutoff=30)
        drift = max(drift, float(np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), p.E_C))))
    p = TransmonParams(E_J=80 * 0.2 * GHz, E_C=0.2 * GHz, charge_cutoff=30)
    dispersion = charge_dispersion(p) / diagonalize(p).omega_q
    ok = drift < 1e-9 and dispersion < 1e-8
    detail = f"cutoff drift = {drift:.1e}; dispersion/omega_q = {dispersion:.2e} at E_J/E_C = 80"
    assert record(6, "cutoff convergence and charge dispersion", ok, detail)


def test_7_s21_round_trip():
    truth = NotchModel.from_internal(5.4e9, 9.2e5, 1e5, phi=0.1, a=1.0, alpha_env=0.4, tau=40e-9)
    f = resonance_frequencies(truth.f_r, truth.Q_l, n=10001)
    sigma = noise_for_snr(40, truth.a)
    single = fit_resonance(synthesize_trace(truth, f, sigma, seed=0))
    round_trip = (
        within(single.Q_i, 9.2e5, 0.01)
        and within(single.model.Q_c, 1e5, 0.01)
        and within(single.model.f_r, truth.f_r, 1e-7)
    )
    q_i = [fit_resonance(synthesize_trace(truth, f, sigma, seed=s)).Q_i for s in range(100)]
    bias = np.mean(q_i) / 9.2e5 - 1
    ok = round_trip and abs(bias) < 0.005
    detail = (f"Q_i {100 * (single.Q_i / 9.2e5 - 1):+.2f}%, Q_c {100 * (single.model.Q_c / 1e5 - 1):+.2f}%, "
              f"f_r {single.model.f_r / truth.f_r - 1:+.1e}; 100-seed bias {100 * bias:+.3f}%")
    assert record(7, "S21 round trip at SNR 40 dB", ok, detail)


def test_8_qnd_statistics():
    eps, shots = 0.1, 10**6
    worst = 0.0
    for N in range(1, 6):
        p = QndProtocol(xi=math.pi / 2, interrogation_time=1.0, repetitions=N, readout_error_ge=eps)
        fp = detection_statistics(p).false_positive_rate
        mc = run_monte_carlo(p, shots, seed=100 + N).false_positive_rate
        worst = max(worst, abs(mc - fp) / binomial_sigma(fp, shots))
    logs = [
        math.log(detection_statistics(
            QndProtocol(xi=math.pi / 2, interrogation_time=1.0, repetitions=N, readout_error_ge=eps)
        ).false_positive_rate)
        for N in range(1, 11)
    ]
    slope, intercept = np.polyfit(np.arange(1, 11), logs, 1)
    linear = abs(slope - math.log(eps)) < 1e-9 and abs(intercept) < 1e-9
    ok = worst < 3 and linear
    detail = f"max MC deviation {worst:.2f} sigma (N = 1..5, 1e6 shots); log FP slope {slope:.6f}"
    assert record(8, "QND false-positive statistics", ok, detail)


@pytest.mark.runs_last
def test_9_runtime(tmp_path, capsys):
    start = time.perf_counter()
    commands = [
        ["quantize", CONFIG, "--csv", tmp_path / "q.csv"],
        ["sweep", CONFIG, "--csv", tmp_path / "s.csv"],
        ["cpw", "--config", CONFIG],
        ["fit-s21", DATA / "synthetic_trace.csv"],
        ["qnd", "--config", CONFIG, "--shots", "100000"],
    ]
    codes = [cli.main([str(a) for a in argv]) for argv in commands]
    capsys.readouterr()
    pipeline = time.perf_counter() - start
    total = time.perf_counter() - SESSION_START
    ok = codes == [0] * len(codes) and total < 300
    detail = f"suite so far + pipeline = {total:.1f} s (pipeline {pipeline:.1f} s)"
    assert record(9, "full suite under 5 minutes", ok, detail)
