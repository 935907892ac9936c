"""Lumped-circuit quantization and readout analysis for transmon/resonator chips."""

from cqedkit.circuit import (
    CircuitNetlist,
    LomCoefficients,
    MaxwellMatrices,
    build_matrices,
    load_netlist,
    reduce_to_lom,
)
from cqedkit.cpw import CpwGeometry, cpw_impedance, lumped_equivalent, quarter_wave_frequency
from cqedkit.dispersive import (
    CoupledSystem,
    DispersiveResult,
    EprInput,
    chi_exact,
    chi_perturbative,
    coupling_g,
    kerr_from_epr,
)
from cqedkit.qnd import QndProtocol, detection_statistics, run_monte_carlo
from cqedkit.resonance import NotchModel, S21Trace, fit_resonance, model_eval, synthesize_trace
from cqedkit.transmon import SquidParams, TransmonParams, diagonalize, ej_of_flux, lj_to_ej

__version__ = "0.1.0"
