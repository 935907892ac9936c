"""End-to-end pipelines behind the CLI subcommands.

Reports are flat dicts with the unit in each key, so they serialize to JSON
and CSV unchanged.
"""

from __future__ import annotations

import json
from dataclasses import replace

from cqedkit import constants as const
from cqedkit.circuit import build_matrices, load_netlist, reduce_to_lom
from cqedkit.config import ProjectConfig
from cqedkit.cpw import CpwGeometry, kappa_of, resonator_electrical
from cqedkit.dispersive import (
    CoupledSystem,
    analyze,
    kerr_from_epr,
    load_epr,
    readout_resolvable,
    sweep_chi_vs_detuning,
)
from cqedkit.errors import ValidationError
from cqedkit.qnd import QndProtocol, detection_statistics, run_monte_carlo
from cqedkit.resonance import ResonanceFitResult
from cqedkit.transmon import SquidParams, TransmonParams, ej_of_flux

SWEEP_COLUMNS = ("delta_GHz", "chi_pert_MHz", "chi_exact_MHz", "flag")
QND_COLUMNS = ("N", "k", "FP_analytic", "FP_mc", "eff_analytic", "eff_mc", "ci_lo", "ci_hi")


def coupled_system(config: ProjectConfig) -> CoupledSystem:
    if config.netlist is None:
        raise ValidationError("config has no netlist")
    if config.junction is None:
        raise ValidationError("config has no junction parameterization")
    if config.omega_r_GHz is None:
        raise ValidationError("config needs resonator.omega_r_GHz (dressed resonator frequency)")
    netlist = load_netlist(config.netlist)
    lom = reduce_to_lom(build_matrices(netlist), config.qubit_node, config.resonator_node, config.drive_node)
    E_J = config.junction.E_J
    flux = config.squid.reduced_flux
    if flux != 0 or config.squid.asymmetry != 0:
        E_J = ej_of_flux(SquidParams(E_J, config.squid.asymmetry, flux))
    transmon = TransmonParams(E_J=E_J, E_C=lom.E_C, n_g=config.n_g, charge_cutoff=config.charge_cutoff)
    return CoupledSystem(transmon=transmon, omega_r=config.omega_r_GHz * const.GHz, lom=lom,
                         resonator_levels=config.fock_levels)


def quantize(config: ProjectConfig) -> dict:
    system = coupled_system(config)
    result = analyze(system)
    lom = system.lom
    report = {
        "E_J_GHz": system.transmon.E_J / const.GHz,
        "E_C_MHz": lom.E_C / const.MHz,
        "EJ_over_EC": system.transmon.E_J / lom.E_C,
        "omega_q_GHz": result.omega_q / const.GHz,
        "alpha_MHz": result.alpha / const.MHz,
        "omega_r_GHz": system.omega_r / const.GHz,
        "g_MHz": result.g / const.MHz,
        "delta_GHz": result.delta / const.GHz,
        "delta_signed_GHz": result.delta_signed / const.GHz,
        "chi_pert_MHz": result.chi_perturbative / const.MHz,
        "chi_exact_MHz": result.chi_exact / const.MHz,
        "two_chi_MHz": result.total_shift / const.MHz,
        "dispersive": result.in_dispersive_regime,
        "C_t_fF": lom.C_t_eff / const.fF,
        "C_r_fF": lom.C_r_eff / const.fF,
        "C_rt_fF": lom.C_rt_eff / const.fF,
        "beta_t": lom.beta_t,
        "beta_r": lom.beta_r,
    }
    if config.resonator_Q_l is not None:
        kappa = kappa_of(config.resonator_Q_l, system.omega_r)
        report["kappa_MHz"] = kappa / const.MHz
        report["readout_resolvable"] = readout_resolvable(result.chi_perturbative, kappa)
    if config.epr is not None:
        with open(config.epr) as fh:
            kerr = kerr_from_epr(load_epr(json.load(fh)))
        for i, name in enumerate(kerr.names):
            report[f"epr_alpha_{name}_MHz"] = kerr.anharmonicities[i] / const.MHz
        for i, m in enumerate(kerr.names):
            for j in range(i + 1, len(kerr.names)):
                report[f"epr_chi_{m}_{kerr.names[j]}_MHz"] = kerr.chi[i, j] / const.MHz
    return report


def sweep(config: ProjectConfig) -> list[dict]:
    if config.sweep is None:
        raise ValidationError("config has no sweep section")
    system = coupled_system(config)
    spec = config.sweep
    if spec.kind == "L_j_nH":
        rows = sweep_chi_vs_detuning(system, lj_grid=[v * const.nH for v in spec.values])
    else:
        system = replace(system, transmon=replace(system.transmon, E_J=config.junction.E_J))
        rows = sweep_chi_vs_detuning(system, flux_grid=spec.values, asymmetry=config.squid.asymmetry)
    scale = const.nH if spec.kind == "L_j_nH" else 1.0
    return [
        {
            "delta_GHz": r.delta / const.GHz,
            "chi_pert_MHz": r.chi_perturbative / const.MHz,
            "chi_exact_MHz": r.chi_exact / const.MHz,
            "flag": int(r.flagged),
            spec.kind: r.parameter / scale,
            "omega_q_GHz": r.omega_q / const.GHz,
            "g_MHz": r.g / const.MHz,
        }
        for r in rows
    ]


def cpw_report(geom: CpwGeometry, couplings_fF=()) -> dict:
    el = resonator_electrical(geom, [c * const.fF for c in couplings_fF])
    return {
        "Z0_ohm": el.Z0,
        "eps_eff": el.eps_eff,
        "f_bare_GHz": el.f_bare / const.GHz,
        "C_lumped_fF": el.C_lumped / const.fF,
        "f_loaded_GHz": el.f_loaded / const.GHz,
    }


def fit_report(result: ResonanceFitResult) -> dict:
    m = result.model
    err = result.stderr
    return {
        "power_dbm": result.power_dbm,
        "f_r_GHz": m.f_r / const.GHz,
        "f_r_err_Hz": err.get("f_r"),
        "Q_l": m.Q_l,
        "Q_l_err": err.get("Q_l"),
        "Q_c": m.Q_c,
        "Q_c_err": err.get("Q_c"),
        "Q_i": result.Q_i,
        "Q_i_err": err.get("Q_i"),
        "phi_rad": m.phi,
        "a": m.a,
        "alpha_env_rad": m.alpha_env,
        "tau_ns": m.tau * 1e9,
        "residual_rms": result.residual_rms,
    }


def qnd_rows(protocol: QndProtocol, repetitions, shots: int = 0, seed: int = 0,
             threshold: int | None = None) -> list[dict]:
    """One row per repetition count; ``threshold`` None means unanimity (k = N)."""
    rows = []
    for N in repetitions:
        k = N if threshold is None else threshold
        p = replace(protocol, repetitions=N, threshold=k)
        exact = detection_statistics(p)
        row = {
            "N": N, "k": k,
            "FP_analytic": exact.false_positive_rate,
            "FP_mc": None, "eff_analytic": exact.detection_efficiency,
            "eff_mc": None, "ci_lo": None, "ci_hi": None,
        }
        if shots:
            mc = run_monte_carlo(p, shots, seed)
            row.update(FP_mc=mc.false_positive_rate, eff_mc=mc.detection_efficiency,
                       ci_lo=mc.fp_ci[0], ci_hi=mc.fp_ci[1])
        rows.append(row)
    return rows
