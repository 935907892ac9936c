"""Project configuration document (JSON, ``schema_version`` 1).

Paths inside the document are resolved relative to the document itself.
Numeric fields carry their unit in the key name (GHz, MHz, fF, nH, nA, um, mm, us).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cqedkit import constants as const
from cqedkit.cpw import SILICON_EPS_R, CpwGeometry
from cqedkit.errors import ValidationError
from cqedkit.transmon import ic_to_lj, lj_to_ej

SCHEMA_VERSION = 1
JUNCTION_KEYS = ("L_j_nH", "I_c_nA", "E_J_GHz")


@dataclass(frozen=True)
class Junction:
    """Exactly one parameterization; ``E_J`` resolves it to Hz."""

    L_j_nH: float | None = None
    I_c_nA: float | None = None
    E_J_GHz: float | None = None

    def __post_init__(self):
        given = [k for k in JUNCTION_KEYS if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValidationError(f"junction needs exactly one of {JUNCTION_KEYS}, got {given or 'none'}")

    @property
    def E_J(self) -> float:
        if self.E_J_GHz is not None:
            return self.E_J_GHz * const.GHz
        if self.L_j_nH is not None:
            return lj_to_ej(self.L_j_nH * const.nH)
        return lj_to_ej(ic_to_lj(self.I_c_nA * 1e-9))


@dataclass(frozen=True)
class SquidSettings:
    asymmetry: float = 0.0
    flux: float = 0.0
    mutual_mA_per_flux: float | None = None
    bias_mA: float | None = None

    @property
    def reduced_flux(self) -> float:
        if self.bias_mA is not None:
            if self.mutual_mA_per_flux is None:
                raise ValidationError("bias_mA needs mutual_mA_per_flux")
            return self.bias_mA / self.mutual_mA_per_flux
        return self.flux


@dataclass(frozen=True)
class SweepSpec:
    """Grid over junction inductance (``L_j_nH``) or SQUID flux (``flux``)."""

    kind: str
    values: tuple

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        kinds = [k for k in ("L_j_nH", "flux") if k in doc]
        if len(kinds) != 1:
            raise ValidationError("sweep needs exactly one of 'L_j_nH' or 'flux'")
        kind = kinds[0]
        grid = doc[kind]
        if isinstance(grid, dict):
            values = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"]))
        else:
            values = np.asarray(grid, dtype=float)
        if values.size == 0:
            raise ValidationError("sweep grid is empty")
        return cls(kind, tuple(float(v) for v in values))


@dataclass(frozen=True)
class ProjectConfig:
    netlist: Path | None = None
    junction: Junction | None = None
    qubit_node: str = "qubit"
    resonator_node: str = "resonator"
    drive_node: str | None = None
    omega_r_GHz: float | None = None
    resonator_Q_l: float | None = None
    geometry: CpwGeometry | None = None
    squid: SquidSettings = field(default_factory=SquidSettings)
    epr: Path | None = None
    sweep: SweepSpec | None = None
    qnd: dict = field(default_factory=dict)
    charge_cutoff: int = 25
    fock_levels: int = 6
    n_g: float = 0.0
    output_dir: Path | None = None


def geometry_from_dict(doc: dict) -> CpwGeometry:
    return CpwGeometry(
        trace_width=float(doc["w_um"]) * const.um,
        gap=float(doc["s_um"]) * const.um,
        length=float(doc["length_mm"]) * const.mm,
        substrate_eps_r=float(doc.get("eps_r", SILICON_EPS_R)),
        substrate_thickness=(float(doc["thickness_um"]) * const.um if "thickness_um" in doc else None),
    )


def config_from_dict(doc: dict, base: Path = Path(".")) -> ProjectConfig:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")

    def path(key):
        value = doc.get(key)
        return None if value is None else (base / value)

    try:
        resonator = doc.get("resonator", {})
        numerics = doc.get("numerics", {})
        return ProjectConfig(
            netlist=path("netlist"),
            junction=Junction(**doc["junction"]) if "junction" in doc else None,
            qubit_node=doc.get("qubit_node", "qubit"),
            resonator_node=doc.get("resonator_node", "resonator"),
            drive_node=doc.get("drive_node"),
            omega_r_GHz=resonator.get("omega_r_GHz"),
            resonator_Q_l=resonator.get("Q_l"),
            geometry=geometry_from_dict(resonator["geometry"]) if "geometry" in resonator else None,
            squid=SquidSettings(**doc.get("squid", {})),
            epr=path("epr"),
            sweep=SweepSpec.from_dict(doc["sweep"]) if "sweep" in doc else None,
            qnd=dict(doc.get("qnd", {})),
            charge_cutoff=int(numerics.get("charge_cutoff", 25)),
            fock_levels=int(numerics.get("fock_levels", 6)),
            n_g=float(numerics.get("n_g", 0.0)),
            output_dir=path("output_dir"),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed config: {exc!r}") from exc


def load_config(path) -> ProjectConfig:
    path = Path(path)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc, path.parent)
