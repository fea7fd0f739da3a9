"""Gate-level simulation of the ancilla-assisted Ramsey interferometer.

Register order is system (x) ancilla throughout, so the 4x4 basis is
|s a> = |00>, |01>, |10>, |11> with the system index first.

Circuit: rho_sys (x) |0><0|_A -> Hadamard on A -> G1(u) -> U(t) (x) 1 -> G2(u),
then the ancilla coherence is read out. ``gB_simplified`` replaces U(t) by
U_B(t) = exp(-i t Omega X/2) and G2(u) by G_B(u); for the rotating-drive
family both variants give the same readout.

Readout: the ancilla coherence 2<0|rho_A|1> equals G(u). Each quadrature is
measured in its own run: a basis change on the ancilla followed by <Z>. The
x setting uses a Hadamard (giving <X> = Re G); the y setting uses S then
Hadamard, which measures -Y in the textbook Pauli convention and yields Im G.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidVariant, NonFinite
from .protocol import (
    DriveParams, InitialState, WorkProtocol, h_matrix, plus_minus,
)
from .qmath import I2, SX, SZ, Observable, dagger
from .traces import CharFnTrace

VARIANTS = ("g2_full", "gB_simplified")

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S_GATE = np.diag([1, 1j])
READOUT_BASIS_CHANGE = {"x": HADAMARD, "y": HADAMARD @ S_GATE}
_READOUT_OBS: dict = {}


def _finite(u):
    if not np.isfinite(u):
        raise NonFinite("gate duration u must be finite")


def controlled(a0: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """a0 (x) |0><0| + a1 (x) |1><1| with the ancilla as the second factor.

    Same as two np.kron calls, built by filling the interleaved blocks.
    """
    n = a0.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[0::2, 0::2] = a0
    out[1::2, 1::2] = a1
    return out


def gate_g1(u: float, h0: Observable) -> np.ndarray:
    """exp(-i u H0) (x) |0><0| + 1 (x) |1><1|."""
    _finite(u)
    return controlled(h0.expm(u), np.eye(h0.dim))


def gate_g2(u: float, ht: Observable) -> np.ndarray:
    """1 (x) |0><0| + exp(-i u H_t) (x) |1><1|."""
    _finite(u)
    return controlled(np.eye(ht.dim), ht.expm(u))


def gate_gB(u: float, h0: Observable) -> np.ndarray:
    """1 (x) |0><0| + exp(-i u H0) (x) |1><1|."""
    return gate_g2(u, h0)


def u_b(drive: DriveParams, t: float) -> np.ndarray:
    b = 0.5 * drive.omega_rabi * t
    return math.cos(b) * I2 - 1j * math.sin(b) * SX


@dataclass(frozen=True)
class AncillaReadout:
    sx: float
    sy: float

    @property
    def g(self) -> complex:
        return complex(self.sx, self.sy)


@dataclass(frozen=True)
class CircuitSpec:
    u: float
    proto: WorkProtocol
    rho_system: InitialState
    variant: str = "g2_full"
    drive: DriveParams | None = None

    def __post_init__(self):
        _finite(self.u)
        if self.u < 0:
            raise ValueError("gate duration u must be non-negative")
        if self.variant not in VARIANTS:
            raise InvalidVariant(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "gB_simplified":
            if self.drive is None:
                raise InvalidVariant("gB_simplified needs the drive parameters")
            if (np.linalg.norm(self.proto.h0.matrix - h_matrix(self.drive, 0.0)) > 1e-12
                    or np.linalg.norm(self.proto.ht.matrix - h_matrix(self.drive, self.proto.time)) > 1e-12):
                raise InvalidVariant("gB_simplified only applies to the rotating-drive protocol")


def circuit_unitaries(spec: CircuitSpec) -> list[np.ndarray]:
    """Gate sequence in application order (Hadamard first)."""
    proto = spec.proto
    n = proto.dim
    had = np.kron(np.eye(n), HADAMARD)
    if spec.variant == "g2_full":
        evo, last = proto.u_t, gate_g2(spec.u, proto.ht)
    else:
        evo, last = u_b(spec.drive, proto.time), gate_gB(spec.u, proto.h0)
    return [had, gate_g1(spec.u, proto.h0), controlled(evo, evo), last]


def circuit_states(spec: CircuitSpec) -> list[np.ndarray]:
    """Global density matrix before the first gate and after each gate."""
    rho = controlled(spec.rho_system.rho, np.zeros_like(spec.rho_system.rho))
    states = [rho]
    for g in circuit_unitaries(spec):
        rho = g @ rho @ dagger(g)
        states.append(rho)
    return states


def measure_quadrature(rho_global: np.ndarray, setting: str) -> float:
    """<Z> on the ancilla after the basis change for ``setting`` ('x' or 'y')."""
    b = READOUT_BASIS_CHANGE[setting]
    n = rho_global.shape[0] // 2
    # Heisenberg picture: Tr(B rho B^dagger Z) = Tr(rho B^dagger Z B)
    obs = _READOUT_OBS.get((n, setting))
    if obs is None:
        obs = _READOUT_OBS[(n, setting)] = np.kron(np.eye(n), dagger(b) @ SZ @ b)
    return float(np.real(np.sum(obs.T * rho_global)))


def ancilla_state(rho_global: np.ndarray) -> np.ndarray:
    n = rho_global.shape[0] // 2
    r = rho_global.reshape(n, 2, n, 2)
    return np.einsum("iaib->ab", r)


def run_circuit(spec: CircuitSpec) -> AncillaReadout:
    final = circuit_states(spec)[-1]
    return AncillaReadout(measure_quadrature(final, "x"), measure_quadrature(final, "y"))


def circuit_trace(proto: WorkProtocol, rho: InitialState, u_values, variant="g2_full",
                  drive: DriveParams | None = None) -> CharFnTrace:
    u_values = np.asarray(u_values, dtype=float)
    vals = [run_circuit(CircuitSpec(float(u), proto, rho, variant, drive)).g for u in u_values]
    return CharFnTrace(u_values, np.array(vals), "circuit")


def tpm_via_mixture(proto: WorkProtocol, u_values, variant="g2_full",
                    drive: DriveParams | None = None) -> CharFnTrace:
    """Average of the |+> and |-> runs, i.e. the trace of the dephased state."""
    plus, minus = plus_minus(proto.h0)
    rp = InitialState(np.outer(plus, plus.conj()), "plus")
    rm = InitialState(np.outer(minus, minus.conj()), "minus")
    a = circuit_trace(proto, rp, u_values, variant, drive)
    b = circuit_trace(proto, rm, u_values, variant, drive)
    return CharFnTrace(a.u_values, 0.5 * (a.values + b.values), "mixture")


__all__ = [
    "AncillaReadout", "CircuitSpec", "VARIANTS", "ancilla_state", "circuit_states",
    "circuit_trace", "circuit_unitaries", "gate_g1", "gate_g2", "gate_gB",
    "measure_quadrature", "run_circuit", "tpm_via_mixture", "u_b",
]
