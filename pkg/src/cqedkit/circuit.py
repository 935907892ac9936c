"""Lumped-element netlist, Maxwell matrices and reduction to effective LOM coefficients.

The qubit/resonator Hamiltonian

    H = Q_t^2 / (2 C_t) - E_J cos(phi) + Q_r^2 / (2 C_r) + phi_r^2 / (2 L_r)
        + Q_t Q_r / C_rt + (beta_t Q_t + beta_r Q_r) V(t)

follows from the Legendre transform of the circuit Lagrangian: the inverse of
the Maxwell capacitance matrix, M = C^-1, gives 1/C_t = M[q, q],
1/C_r = M[r, r], 1/C_rt = M[q, r]. Drive ports are capacitors to an AC
voltage source; they load the node like a capacitor to ground and enter the
Hamiltonian through beta = M @ c_drive.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cqedkit import constants as const
from cqedkit.errors import DegenerateMatrixError, ValidationError


@dataclass(frozen=True)
class Capacitor:
    a: str
    b: str
    C: float
    name: str = ""


@dataclass(frozen=True)
class JosephsonElement:
    a: str
    b: str
    L_j: float
    C_j: float
    is_squid: bool = False
    name: str = ""


@dataclass(frozen=True)
class Inductor:
    a: str
    b: str
    L: float
    name: str = ""


@dataclass(frozen=True)
class DrivePort:
    node: str
    C: float
    name: str = ""


@dataclass(frozen=True)
class CircuitNetlist:
    """Lumped circuit in SI units. ``ground`` must be one of ``nodes``."""

    nodes: tuple[str, ...]
    ground: str
    capacitors: tuple[Capacitor, ...] = ()
    josephson_elements: tuple[JosephsonElement, ...] = ()
    linear_inductors: tuple[Inductor, ...] = ()
    drive_ports: tuple[DrivePort, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        for attr in ("capacitors", "josephson_elements", "linear_inductors", "drive_ports"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        self.validate()

    @property
    def active_nodes(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if n != self.ground)

    def validate(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValidationError(f"duplicate node names in {self.nodes}")
        if self.ground not in self.nodes:
            raise ValidationError(f"ground node {self.ground!r} not among nodes")
        known = set(self.nodes)

        def check_nodes(kind, *names):
            for n in names:
                if n not in known:
                    raise ValidationError(f"{kind} references unknown node {n!r}")

        def check_positive(kind, label, value):
            if not np.isfinite(value) or value <= 0:
                where = f"{kind} {label}" if label else kind
                raise ValidationError(f"{where} has nonpositive value {value!r}")

        for cap in self.capacitors:
            check_nodes("capacitor", cap.a, cap.b)
            if cap.a == cap.b:
                raise ValidationError(f"capacitor {cap.name} is shorted on node {cap.a!r}")
            check_positive("capacitor", cap.name, cap.C)
        for jj in self.josephson_elements:
            check_nodes("josephson element", jj.a, jj.b)
            check_positive("josephson element", jj.name, jj.L_j)
            check_positive("josephson element", jj.name, jj.C_j)
        for ind in self.linear_inductors:
            check_nodes("inductor", ind.a, ind.b)
            check_positive("inductor", ind.name, ind.L)
        for port in self.drive_ports:
            check_nodes("drive port", port.node)
            if port.node == self.ground:
                raise ValidationError("drive port cannot attach to ground")
            check_positive("drive port", port.name, port.C)


@dataclass(frozen=True)
class MaxwellMatrices:
    """Capacitance and inverse-inductance matrices on the active nodes.

    ``drive`` maps node name to the coupling capacitance of a drive port on it.
    """

    node_order: tuple[str, ...]
    C: np.ndarray
    Linv: np.ndarray
    drive: dict = field(default_factory=dict)

    def index(self, node: str) -> int:
        try:
            return self.node_order.index(node)
        except ValueError:
            raise ValidationError(f"node {node!r} is not an active node ({self.node_order})") from None


@dataclass(frozen=True)
class LomCoefficients:
    """Effective capacitances (F) and drive couplings of the reduced two-mode circuit.

    ``C_rt_eff`` is ``inf`` for a decoupled circuit; use ``inv_C_rt`` for arithmetic.
    """

    C_t_eff: float
    C_r_eff: float
    C_rt_eff: float
    beta_t: float = 0.0
    beta_r: float = 0.0

    @property
    def inv_C_rt(self) -> float:
        return 0.0 if np.isinf(self.C_rt_eff) else 1.0 / self.C_rt_eff

    @property
    def E_C(self) -> float:
        """Charging energy e^2 / (2 C_t) in Hz."""
        return const.e**2 / (2 * self.C_t_eff) / const.h


def _stamp(matrix, index, a, b, value):
    ia, ib = index.get(a), index.get(b)
    if ia is not None:
        matrix[ia, ia] += value
    if ib is not None:
        matrix[ib, ib] += value
    if ia is not None and ib is not None:
        matrix[ia, ib] -= value
        matrix[ib, ia] -= value


def _unreachable_nodes(netlist: CircuitNetlist) -> list[str]:
    # ports are capacitors to AC ground, so they count as a path
    adjacency = {n: set() for n in netlist.nodes}
    edges = [(c.a, c.b) for c in netlist.capacitors]
    edges += [(j.a, j.b) for j in netlist.josephson_elements]
    edges += [(p.node, netlist.ground) for p in netlist.drive_ports]
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen = {netlist.ground}
    queue = deque([netlist.ground])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return [n for n in netlist.active_nodes if n not in seen]


def build_matrices(netlist: CircuitNetlist) -> MaxwellMatrices:
    """Assemble the Maxwell capacitance and inverse-inductance matrices.

    Junction parasitic capacitances are stamped like ordinary capacitors.
    Junction inductances are left out of ``Linv``; they are the nonlinear
    element handled by the transmon spectrum.
    """
    missing = _unreachable_nodes(netlist)
    if missing:
        raise DegenerateMatrixError(
            f"node {missing[0]!r} has no capacitive path to ground", node=missing[0]
        )
    order = netlist.active_nodes
    index = {n: i for i, n in enumerate(order)}
    size = len(order)
    C = np.zeros((size, size))
    Linv = np.zeros((size, size))
    for cap in netlist.capacitors:
        _stamp(C, index, cap.a, cap.b, cap.C)
    for jj in netlist.josephson_elements:
        _stamp(C, index, jj.a, jj.b, jj.C_j)
    drive = {}
    for port in netlist.drive_ports:
        _stamp(C, index, port.node, netlist.ground, port.C)
        drive[port.node] = drive.get(port.node, 0.0) + port.C
    for ind in netlist.linear_inductors:
        _stamp(Linv, index, ind.a, ind.b, 1.0 / ind.L)
    return MaxwellMatrices(node_order=order, C=C, Linv=Linv, drive=drive)


def _inverse_capacitance(matrices: MaxwellMatrices) -> np.ndarray:
    C = matrices.C
    eigvals, eigvecs = np.linalg.eigh(C)
    scale = np.max(np.abs(np.diag(C))) if C.size else 0.0
    if scale <= 0 or eigvals[0] <= 1e-12 * scale:
        null = eigvecs[:, 0]
        node = matrices.node_order[int(np.argmax(np.abs(null)))]
        raise DegenerateMatrixError(f"capacitance matrix is singular at node {node!r}", node=node)
    return np.linalg.inv(C)


def reduce_to_lom(
    matrices: MaxwellMatrices,
    qubit_node: str,
    resonator_node: str,
    drive_node: str | None = None,
) -> LomCoefficients:
    """Invert the capacitance matrix and read off the effective coefficients.

    ``beta_t`` and ``beta_r`` are the qubit/resonator components of
    ``C^-1 @ c_drive`` where ``c_drive`` holds the port capacitance of
    ``drive_node``; both are zero if no drive node is given.
    """
    q = matrices.index(qubit_node)
    r = matrices.index(resonator_node)
    if q == r:
        raise ValidationError("qubit and resonator nodes must differ")
    M = _inverse_capacitance(matrices)
    beta_t = beta_r = 0.0
    if drive_node is not None:
        d = matrices.index(drive_node)
        if drive_node not in matrices.drive:
            raise ValidationError(f"node {drive_node!r} has no drive port")
        c_drive = np.zeros(len(matrices.node_order))
        c_drive[d] = matrices.drive[drive_node]
        beta = M @ c_drive
        beta_t, beta_r = float(beta[q]), float(beta[r])
    m_qr = M[q, r]
    # block-diagonal C gives an exactly zero off-diagonal inverse entry
    C_rt = np.inf if m_qr == 0 else 1.0 / float(m_qr)
    return LomCoefficients(
        C_t_eff=1.0 / float(M[q, q]),
        C_r_eff=1.0 / float(M[r, r]),
        C_rt_eff=C_rt,
        beta_t=beta_t,
        beta_r=beta_r,
    )


def netlist_from_lom(lom: LomCoefficients, qubit="qubit", resonator="resonator", ground="ground"):
    """Two-node netlist whose reduction reproduces ``lom`` (drive terms dropped)."""
    M = np.array([[1 / lom.C_t_eff, lom.inv_C_rt], [lom.inv_C_rt, 1 / lom.C_r_eff]])
    C = np.linalg.inv(M)
    caps = [
        Capacitor(qubit, ground, C[0, 0] + C[0, 1], "c_qubit"),
        Capacitor(resonator, ground, C[1, 1] + C[0, 1], "c_resonator"),
    ]
    if C[0, 1] != 0:
        caps.append(Capacitor(qubit, resonator, -C[0, 1], "c_coupling"))
    return CircuitNetlist(nodes=(ground, qubit, resonator), ground=ground, capacitors=caps)


# --- file format -----------------------------------------------------------

def netlist_from_dict(doc: dict) -> CircuitNetlist:
    """Build a netlist from the JSON document layout (fF and nH in the file).

    Layout::

        {"schema_version": 1,
         "nodes": ["ground", "qubit", "resonator"], "ground": "ground",
         "capacitors": [{"a": "qubit", "b": "ground", "C_fF": 87.4, "name": "c_s"}],
         "josephson": [{"a": "qubit", "b": "ground", "L_j_nH": 10, "C_j_fF": 2, "squid": true}],
         "inductors": [{"a": "resonator", "b": "ground", "L_nH": 1.7}],
         "ports": [{"node": "qubit", "C_fF": 0.2, "name": "c_d"}]}
    """
    try:
        nodes = list(doc["nodes"])
        ground = doc.get("ground")
        if ground is None:
            grounds = [n for n in nodes if n.lower() in ("ground", "gnd")]
            if len(grounds) != 1:
                raise ValidationError("netlist must name exactly one ground node")
            ground = grounds[0]
        caps = [
            Capacitor(c["a"], c["b"], float(c["C_fF"]) * const.fF, c.get("name", ""))
            for c in doc.get("capacitors", [])
        ]
        jjs = [
            JosephsonElement(
                j["a"], j["b"], float(j["L_j_nH"]) * const.nH,
                float(j["C_j_fF"]) * const.fF,
                bool(j.get("squid", False)), j.get("name", ""),
            )
            for j in doc.get("josephson", [])
        ]
        inds = [
            Inductor(i["a"], i["b"], float(i["L_nH"]) * const.nH, i.get("name", ""))
            for i in doc.get("inductors", [])
        ]
        ports = [
            DrivePort(p["node"], float(p["C_fF"]) * const.fF, p.get("name", ""))
            for p in doc.get("ports", [])
        ]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed netlist document: {exc!r}") from exc
    return CircuitNetlist(
        nodes=nodes, ground=ground, capacitors=caps, josephson_elements=jjs,
        linear_inductors=inds, drive_ports=ports,
    )


def load_netlist(path) -> CircuitNetlist:
    with open(Path(path)) as fh:
        return netlist_from_dict(json.load(fh))
