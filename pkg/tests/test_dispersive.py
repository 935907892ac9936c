import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqedkit.circuit import Capacitor, CircuitNetlist, LomCoefficients, build_matrices, reduce_to_lom
from cqedkit.constants import GHz, MHz, fF, nH
from cqedkit.dispersive import (
    CoupledSystem,
    EprInput,
    analyze,
    chi_exact,
    chi_from_spectrum,
    chi_multilevel,
    chi_perturbative,
    coupling_g,
    kerr_from_epr,
    load_epr,
    readout_resolvable,
    sweep_chi_vs_detuning,
)
from cqedkit.errors import SingularityError, ValidationError
from cqedkit.transmon import TransmonParams, lj_to_ej

OMEGA_R = 5.988 * GHz


@pytest.fixture(scope="module")
def reference_system(device_lom):
    transmon = TransmonParams(E_J=lj_to_ej(10 * nH), E_C=device_lom.E_C)
    return CoupledSystem(transmon=transmon, omega_r=OMEGA_R, lom=device_lom)


def lom_for(c_g):
    net = CircuitNetlist(
        nodes=("g", "q", "r"), ground="g",
        capacitors=[
            Capacitor("q", "g", 89.4 * fF), Capacitor("r", "g", 410.5 * fF),
            Capacitor("q", "r", c_g * fF),
        ],
    )
    return reduce_to_lom(build_matrices(net), "q", "r")


def test_decoupled_has_zero_g_and_chi():
    lom = LomCoefficients(C_t_eff=93e-15, C_r_eff=414e-15, C_rt_eff=np.inf)
    system = CoupledSystem(TransmonParams(E_J=16 * GHz, E_C=0.2 * GHz), OMEGA_R, lom)
    assert coupling_g(system) == 0.0
    assert chi_exact(system) == 0.0
    assert chi_perturbative(0.0, -1 * GHz, -0.2 * GHz) == 0.0


def test_two_level_limit():
    g, delta = 50 * MHz, 1 * GHz
    assert chi_perturbative(g, delta, -1e12 * GHz) == pytest.approx(g**2 / delta, rel=1e-9)


def test_singular_points():
    with pytest.raises(SingularityError):
        chi_perturbative(50 * MHz, 0.0, -0.2 * GHz)
    with pytest.raises(SingularityError):
        chi_perturbative(50 * MHz, 0.2 * GHz, -0.2 * GHz)


def test_reference_chi_perturbative(reference_system):
    result = analyze(reference_system)
    assert abs(result.chi_perturbative) / MHz == pytest.approx(0.558, rel=0.15)
    assert result.in_dispersive_regime
    assert result.delta_signed < 0
    assert result.delta == -result.delta_signed


def test_reference_chi_exact(reference_system):
    assert abs(chi_exact(reference_system)) / MHz == pytest.approx(0.558, rel=0.15)


def test_exact_matches_perturbative_at_one_ghz(reference_system):
    result = analyze(reference_system)
    assert result.delta / GHz == pytest.approx(1.0, abs=0.01)
    assert result.g / result.delta < 0.1
    assert result.chi_exact == pytest.approx(result.chi_perturbative, rel=0.05)


def test_exact_matches_multilevel_perturbation(reference_system):
    # second order with the true charge matrix elements and counter-rotating terms
    assert chi_exact(reference_system) == pytest.approx(chi_multilevel(reference_system), rel=0.02)


def test_g_scales_with_coupling_capacitance():
    transmon = TransmonParams(E_J=lj_to_ej(10 * nH), E_C=0.2 * GHz)
    g1 = coupling_g(CoupledSystem(transmon, OMEGA_R, lom_for(2.0)))
    g2 = coupling_g(CoupledSystem(transmon, OMEGA_R, lom_for(4.0)))
    assert g2 / g1 == pytest.approx(2.0, rel=0.10)


def test_harmonic_qubit_has_no_shift():
    # two linearly coupled oscillators: normal modes add, so chi vanishes
    n = 14
    w_q = 5.0 * GHz
    levels = w_q * np.arange(n)
    x = np.diag(np.sqrt(np.arange(1, n)), 1)
    charge = x + x.T
    chi = chi_from_spectrum(levels, charge, OMEGA_R, 20 * MHz, 14)
    assert abs(chi) < 1e-6 * MHz


def test_readout_flag_at_operating_point(reference_system):
    result = analyze(reference_system)
    assert readout_resolvable(0.558 * MHz, 0.60 * MHz)
    assert readout_resolvable(result.chi_perturbative, 0.60 * MHz)
    assert not readout_resolvable(0.2 * MHz, 0.60 * MHz)


def test_coupled_system_validation(device_lom):
    transmon = TransmonParams(E_J=16 * GHz, E_C=0.2 * GHz)
    with pytest.raises(ValidationError):
        CoupledSystem(transmon, 0.0, device_lom)
    with pytest.raises(ValidationError):
        CoupledSystem(transmon, OMEGA_R, device_lom, resonator_levels=2)


# --- EPR ----------------------------------------------------------------------

def device_epr():
    return EprInput(
        mode_freqs=(4.878 * GHz, 5.988 * GHz), participations=(1.0839, 9.05e-4),
        E_J=lj_to_ej(10 * nH), names=("qubit", "resonator"),
    )


def test_epr_reference_inversion():
    kerr = kerr_from_epr(device_epr())
    assert kerr.anharmonicities[0] / MHz == pytest.approx(213.8, rel=1e-3)
    assert kerr.cross("qubit", "resonator") / MHz == pytest.approx(0.438, rel=1e-3)


def test_epr_zero_participation():
    epr = EprInput(mode_freqs=(5 * GHz, 6 * GHz), participations=(0, 0), E_J=10 * GHz)
    assert not np.any(kerr_from_epr(epr).chi)


def test_epr_validation():
    with pytest.raises(ValidationError):
        EprInput(mode_freqs=(5 * GHz,), participations=(1.3,), E_J=10 * GHz)
    with pytest.raises(ValidationError):
        EprInput(mode_freqs=(5 * GHz, 6 * GHz), participations=(0.5,), E_J=10 * GHz)


def test_epr_document(data_dir):
    import json

    epr = load_epr(json.loads((data_dir / "device_epr.json").read_text()))
    assert epr.names == ("qubit", "resonator")
    assert epr.E_J == pytest.approx(lj_to_ej(10 * nH))
    with pytest.raises(ValidationError):
        load_epr({"modes": [{"name": "q", "freq_GHz": 5, "p": 1}]})


@settings(max_examples=50)
@given(
    p=st.lists(st.floats(0, 1.0), min_size=1, max_size=4),
    lam=st.floats(0.1, 1.2),
)
def test_epr_symmetry_and_scaling(p, lam):
    freqs = [4 * GHz + i * GHz for i in range(len(p))]
    base = kerr_from_epr(EprInput(freqs, p, 15 * GHz)).chi
    assert np.array_equal(base, base.T)
    scaled = kerr_from_epr(EprInput(freqs, [lam * x for x in p], 15 * GHz)).chi
    np.testing.assert_allclose(np.diag(scaled), lam**2 * np.diag(base), rtol=1e-12)


# --- sweeps -------------------------------------------------------------------

def test_sweep_single_point_matches_analyze(reference_system):
    (row,) = sweep_chi_vs_detuning(reference_system, lj_grid=[10 * nH])
    result = analyze(reference_system)
    assert row.chi_exact == result.chi_exact
    assert row.chi_perturbative == result.chi_perturbative
    assert row.delta == result.delta


def test_sweep_monotone_and_flagged(reference_system):
    grid = np.linspace(8, 14, 25) * nH
    rows = sweep_chi_vs_detuning(reference_system, lj_grid=grid)
    assert len(rows) == grid.size
    far = [r for r in rows if r.delta > abs(analyze(reference_system).alpha)]
    deltas = [r.delta for r in far]
    assert all(a < b for a, b in zip(deltas, deltas[1:]))
    for key in ("chi_perturbative", "chi_exact"):
        chis = [abs(getattr(r, key)) for r in far]
        assert all(a > b for a, b in zip(chis, chis[1:]))
    for r in rows:
        assert r.flagged == (r.g / r.delta > 0.1)


def test_flux_sweep(reference_system):
    rows = sweep_chi_vs_detuning(reference_system, flux_grid=[0.0, 0.1, 0.2])
    assert rows[0].E_J == reference_system.transmon.E_J
    assert rows[0].E_J > rows[1].E_J > rows[2].E_J
    # lower E_J pushes the qubit further below the resonator
    assert rows[0].delta < rows[1].delta < rows[2].delta


def test_sweep_grid_validation(reference_system):
    with pytest.raises(ValidationError):
        sweep_chi_vs_detuning(reference_system)
    with pytest.raises(ValidationError):
        sweep_chi_vs_detuning(reference_system, lj_grid=[], flux_grid=[0.0])
    with pytest.raises(ValidationError):
        sweep_chi_vs_detuning(reference_system, lj_grid=[])
