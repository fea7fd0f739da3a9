"""Pulse-level model of the electron-nuclear spin pair that runs the interferometer.

Two qubits, electron first (it is the system), nuclear second (the ancilla).

* electron: |0> = m_S = 0, |1> = m_S = -1
* nuclear:  |0> = m_I = 0, |1> = m_I = +1

The interaction in the doubly rotating frame is

    H_I = (A/4) (Z (x) 1 + 1 (x) Z - Z (x) Z) = A/4 - A |11><11|

so only |m_S=-1, m_I=+1> is shifted. The spins start in |m_S=0, m_I=+1>.
The logical ancilla of the circuit has |0>_A = |m_I=+1>, i.e. it is the
nuclear qubit relabelled by X. Nuclear rotations in :class:`Pulse` are
expressed in the physical nuclear basis; the decomposition checks use the
logical ancilla.

Rotations follow the Bloch-sphere convention R_w(phi) = exp(-i phi sigma_w / 2).
With that convention the conditional gates of the circuit are reproduced
exactly (up to a global phase) when the system Hamiltonian is written in the
frame H0' = (A/omega) H0 = (A/2)(cos(theta) Z + sin(theta) X):

    G1(u) = R_y^e(theta) R_z^A(uA/2) exp(-iu H_I) R_y^e(-theta)
    GB(u) = R_y^e(theta2) R_z^e(-uA) R_z^A(uA/2) exp(-iu H_I) R_y^e(-theta2)

with theta2 = theta + pi. A circuit duration u therefore needs a free
evolution of u * omega / |A|.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidPulse, NonFinite
from .interferometer import AncillaReadout
from .protocol import DriveParams, InitialState, basis_states, propagator_generic
from .qmath import (
    I2, I4, P0, P1, SX, SY, SZ, dagger, frobenius_distance_up_to_phase, partial_trace,
    rotation, ry, rz, unitarity_error,
)

TARGETS = ("electron", "nuclear", "free")
RABI_N_RATIO_LIMIT = 0.05
# experimental hyperfine constant and drive Rabi frequency, both in MHz
EXP_A_MHZ = -2.16
EXP_RABI_MHZ = 875 / 39

# logical ancilla = X-relabelled nuclear qubit
_X_N = np.kron(I2, SX)


@dataclass(frozen=True)
class NvParams:
    """Hyperfine constant, Rabi frequencies, detuning and the two tilt angles.

    ``theta`` defaults to arctan(Omega_e / delta) and ``theta2`` to theta + pi.
    Overriding ``theta2`` is meant for negative controls only.
    """

    A: float
    rabi_e: float
    rabi_n: float
    delta: float
    theta: float | None = None
    theta2: float | None = None

    def __post_init__(self):
        vals = (self.A, self.rabi_e, self.rabi_n, self.delta)
        if not all(np.isfinite(v) for v in vals):
            raise NonFinite("NV parameters must be finite")
        if self.A == 0:
            raise ValueError("hyperfine constant A must be nonzero")
        if self.rabi_e <= 0 or self.rabi_n <= 0:
            raise ValueError("Rabi frequencies must be positive")
        if self.theta is None:
            object.__setattr__(self, "theta", math.atan2(self.rabi_e, self.delta))
        if self.theta2 is None:
            object.__setattr__(self, "theta2", self.theta + math.pi)
        if self.rabi_n / abs(self.A) > RABI_N_RATIO_LIMIT:
            warnings.warn(
                f"nuclear Rabi frequency is {self.rabi_n / abs(self.A):.3g} |A|; "
                f"selective pulses assume <= {RABI_N_RATIO_LIMIT}",
                stacklevel=2,
            )

    @property
    def omega(self) -> float:
        return math.hypot(self.rabi_e, self.delta)

    @property
    def drive(self) -> DriveParams:
        return DriveParams(self.rabi_e, self.delta)

    @classmethod
    def from_drive(cls, drive: DriveParams, A: float | None = None,
                   rabi_n: float | None = None) -> "NvParams":
        """NV parameters matching ``drive``; A defaults to the experimental ratio A/Omega."""
        if A is None:
            A = drive.omega_rabi * EXP_A_MHZ / EXP_RABI_MHZ
        if rabi_n is None:
            rabi_n = 0.02 * abs(A)
        return cls(A, drive.omega_rabi, rabi_n, drive.delta)

    @classmethod
    def paper(cls) -> "NvParams":
        """rad/us units: A = -2 pi 2.16, Omega = 2 pi 875/39, delta = sqrt(3) Omega."""
        return cls.from_drive(DriveParams.paper(), A=2 * math.pi * EXP_A_MHZ)


@dataclass(frozen=True)
class Pulse:
    target: str
    axis: float | None = None
    angle: float | None = None
    duration: float = 0.0
    selective: bool = False

    def __post_init__(self):
        if self.target not in TARGETS:
            raise InvalidPulse(f"target must be one of {TARGETS}, got {self.target!r}")
        if not np.isfinite(self.duration) or self.duration < 0:
            raise InvalidPulse("duration must be finite and >= 0")
        if self.target == "free":
            if self.axis is not None or self.angle is not None or self.selective:
                raise InvalidPulse("free evolution has no axis, angle or selectivity")
        else:
            if self.axis is None or self.angle is None:
                raise InvalidPulse(f"{self.target} pulse needs an axis and an angle")
            if not (np.isfinite(self.axis) and np.isfinite(self.angle)):
                raise InvalidPulse("axis and angle must be finite")
            if self.target == "nuclear" and not self.selective:
                raise InvalidPulse("nuclear pulses are always selective (Omega_n << |A|)")
            if self.target == "electron" and self.selective:
                raise InvalidPulse("electron pulses are non-selective")

    def as_row(self) -> str:
        ax = "-" if self.axis is None else repr(float(self.axis))
        an = "-" if self.angle is None else repr(float(self.angle))
        return f"{self.target}\t{ax}\t{an}\t{float(self.duration)!r}\t{int(self.selective)}"


def h_interaction(A: float) -> np.ndarray:
    return (A / 4) * (np.kron(SZ, I2) + np.kron(I2, SZ) - np.kron(SZ, SZ))


def _free(A: float, duration: float) -> np.ndarray:
    # H_I is diagonal, so the exponential is elementwise
    return np.diag(np.exp(-1j * duration * np.diag(h_interaction(A))))


def selective_duration(angle: float, params: NvParams) -> float:
    """Shortest even multiple of 2 pi/|A| that is at least |angle|/Omega_n."""
    period = 2 * math.pi / abs(params.A)
    k = math.ceil(abs(angle) / params.rabi_n / (2 * period))
    return 2 * max(k, 1) * period


def pulse_unitary(p: Pulse, params: NvParams, finite_electron: bool = False) -> np.ndarray:
    """Two-qubit unitary of one pulse.

    Electron pulses are instantaneous unless ``finite_electron`` is set, in
    which case H_I acts together with a constant drive for ``duration``.
    A selective nuclear pulse rotates the nuclear spin inside m_S = 0 while
    the m_S = -1 block evolves under H_I for the pulse duration.
    """
    if p.target == "free":
        return _free(params.A, p.duration)
    r = rotation(p.axis, p.angle)
    if p.target == "electron":
        if not finite_electron or p.duration == 0:
            return np.kron(r, I2)
        rate = p.angle / p.duration
        drive = 0.5 * rate * (math.cos(p.axis) * SX + math.sin(p.axis) * SY)
        h = h_interaction(params.A) + np.kron(drive, I2)
        return propagator_generic(lambda s: h, p.duration, 1)
    phase0 = np.exp(-1j * p.duration * params.A / 4)
    return np.kron(P0, phase0 * r) + np.kron(P1, I2) @ _free(params.A, p.duration)


# --- decomposition checks -------------------------------------------------

def _logical(op: np.ndarray) -> np.ndarray:
    """Express a logical-ancilla operator in the physical nuclear basis."""
    return _X_N @ op @ _X_N


def _h0_frame(params: NvParams) -> np.ndarray:
    th = params.theta
    return 0.5 * params.A * (math.cos(th) * SZ + math.sin(th) * SX)


def _expm_qubit(h: np.ndarray, s: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * s * w)) @ dagger(v)


def g1_target(u: float, params: NvParams) -> np.ndarray:
    """G1(u) for H0' = (A/2)(cos th Z + sin th X), physical nuclear basis."""
    e = _expm_qubit(_h0_frame(params), u)
    return _logical(np.kron(e, P0) + np.kron(I2, P1))


def gB_target(u: float, params: NvParams) -> np.ndarray:
    e = _expm_qubit(_h0_frame(params), u)
    return _logical(np.kron(I2, P0) + np.kron(e, P1))


def _rz_ancilla(angle: float) -> np.ndarray:
    return _logical(np.kron(I2, rz(angle)))


def g1_decomposed(u: float, params: NvParams) -> np.ndarray:
    th = params.theta
    ry_e = lambda a: np.kron(ry(a), I2)  # noqa: E731
    return ry_e(th) @ _rz_ancilla(u * params.A / 2) @ _free(params.A, u) @ ry_e(-th)


def gB_decomposed(u: float, params: NvParams, drop_electron_gates: bool = False) -> np.ndarray:
    th2 = params.theta2
    ry_e = lambda a: np.kron(ry(a), I2)  # noqa: E731
    core = _rz_ancilla(u * params.A / 2) @ _free(params.A, u) @ ry_e(-th2)
    if drop_electron_gates:
        return core
    return ry_e(th2) @ np.kron(rz(-u * params.A), I2) @ core


def verify_g1_decomposition(u: float, params: NvParams) -> float:
    if u < 0:
        raise ValueError("u must be >= 0")
    return frobenius_distance_up_to_phase(g1_decomposed(u, params), g1_target(u, params))


@dataclass(frozen=True)
class GBCheck:
    distance: float
    reduced_state_gap: float


def verify_gB_decomposition(u: float, params: NvParams, rho: np.ndarray | None = None) -> GBCheck:
    """(a) distance of the full decomposition to GB; (b) nuclear reduced-state gap
    between the full decomposition and the one without the trailing electron gates.

    ``rho`` is the two-qubit input for check (b); by default a generic
    entangled-capable state (|+y>_e and the ancilla in |+>).
    """
    if u < 0:
        raise ValueError("u must be >= 0")
    full = gB_decomposed(u, params)
    dist = frobenius_distance_up_to_phase(full, gB_target(u, params))
    if rho is None:
        psi = np.kron(np.array([1, 1j]) / math.sqrt(2), np.array([1, 1]) / math.sqrt(2))
        rho = np.outer(psi, psi.conj())
    short = gB_decomposed(u, params, drop_electron_gates=True)
    a = partial_trace(full @ rho @ dagger(full), keep=1)
    b = partial_trace(short @ rho @ dagger(short), keep=1)
    return GBCheck(dist, float(np.linalg.norm(a - b)))


# --- sequence compilation --------------------------------------------------

def free_time(u: float, params: NvParams) -> float:
    """Free-evolution time that realises circuit duration ``u``."""
    return u * params.omega / abs(params.A)


def readout_phase(u: float, params: NvParams) -> float:
    """Nuclear phase from the two skipped R_z^A(tau A/2) gates, tau = free_time(u)."""
    return free_time(u, params) * params.A


def _prep_rotation(psi: np.ndarray) -> tuple[float, float]:
    """(axis, angle) with rotation(axis, angle)|0> equal to psi up to phase."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    beta = 2 * math.atan2(abs(psi[1]), abs(psi[0]))
    if abs(psi[1]) < 1e-15:
        return math.pi / 2, 0.0
    rel = np.angle(psi[1]) - (np.angle(psi[0]) if abs(psi[0]) > 1e-15 else 0.0)
    # rotation(axis, b)|0> = cos(b/2)|0> - i e^{i axis} sin(b/2)|1>
    return float(rel + math.pi / 2), beta


def _same_axis(a: float, b: float) -> float | None:
    """+1 / -1 if the axes agree / are opposite, otherwise None."""
    d = (a - b) % (2 * math.pi)
    if min(d, 2 * math.pi - d) < 1e-12:
        return 1.0
    if abs(d - math.pi) < 1e-12:
        return -1.0
    return None


def _electron(axis: float, angle: float, params: NvParams) -> Pulse:
    # a 2 pi electron rotation is -1 on the whole register, so wrap to [-pi, pi)
    angle = (angle + math.pi) % (2 * math.pi) - math.pi
    return Pulse("electron", axis, angle, abs(angle) / params.rabi_e)


def _nuclear(axis: float, angle: float, params: NvParams) -> Pulse:
    return Pulse("nuclear", axis, angle, selective_duration(angle, params), True)


def compile_sequence(u: float, t: float, params: NvParams, quadrature: str = "x",
                     psi: np.ndarray | None = None, compensate: bool = True) -> list[Pulse]:
    """Pulse list for one point (u, t) and one readout quadrature.

    ``psi`` is the electron's pure initial state (default |+>). With
    ``compensate=False`` the readout axis ignores the hyperfine phase; that is
    only useful as a negative control.
    """
    for v in (u, t):
        if not np.isfinite(v):
            raise NonFinite("u and t must be finite")
    if u < 0 or t < 0:
        raise ValueError("u and t must be >= 0")
    if quadrature not in ("x", "y"):
        raise ValueError("quadrature must be 'x' or 'y'")
    if psi is None:
        psi = basis_states(params.drive)[0]
    flip_1 = math.pi if params.A < 0 else 0.0
    flip_b = 0.0 if params.A < 0 else math.pi
    th1 = params.theta + flip_1
    th2 = params.theta2 - math.pi + flip_b
    tau = free_time(u, params)
    y = math.pi / 2

    seq = [_nuclear(-y, math.pi / 2, params)]  # logical R_y(pi/2) on the ancilla
    axis, beta = _prep_rotation(psi)
    sign = _same_axis(axis, y)
    if sign is not None:
        merged = sign * beta - th1
        if abs(merged) > 0:
            seq.append(_electron(y, merged, params))
    else:
        seq += [_electron(axis, beta, params), _electron(y, -th1, params)]
    seq.append(Pulse("free", duration=tau))
    seq.append(_electron(y, th1, params))
    if t > 0:
        seq.append(_electron(0.0, params.rabi_e * t, params))
    seq.append(_electron(y, -th2, params))
    seq.append(Pulse("free", duration=tau))

    a = y if quadrature == "x" else math.pi
    if compensate:
        a += readout_phase(u, params)
    seq += [_nuclear(a, math.pi / 2, params), _electron(0.0, math.pi, params),
            _nuclear(a, math.pi / 2, params)]
    return seq


def initial_state() -> np.ndarray:
    """|m_S=0, m_I=+1><...| in qubit labels."""
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0
    return np.outer(psi, psi.conj())


def sequence_unitary(pulses, params: NvParams, finite_electron: bool = False) -> np.ndarray:
    u = I4.copy()
    for p in pulses:
        u = pulse_unitary(p, params, finite_electron) @ u
    return u


def nuclear_signal(rho: np.ndarray) -> float:
    """p(m_I=+1) - p(m_I=0), the population contrast read through the electron."""
    return float(np.real(np.trace(rho @ np.kron(I2, -SZ))))


def run_sequence(pulses, params: NvParams, rho0: np.ndarray | None = None,
                 finite_electron: bool = False) -> tuple[float, np.ndarray]:
    """Apply ``pulses`` to ``rho0``; returns (signal, final state)."""
    rho = initial_state() if rho0 is None else np.asarray(rho0, dtype=complex)
    for p in pulses:
        g = pulse_unitary(p, params, finite_electron)
        rho = g @ rho @ dagger(g)
    return nuclear_signal(rho), rho


def simulate_sequence(pulses_x, pulses_y, params: NvParams, rho0: np.ndarray | None = None,
                      finite_electron: bool = False) -> AncillaReadout:
    """Readout from the two measurement settings (sx from the x run, sy from the y run)."""
    sx, _ = run_sequence(pulses_x, params, rho0, finite_electron)
    sy, _ = run_sequence(pulses_y, params, rho0, finite_electron)
    return AncillaReadout(sx, sy)


def pulse_readout(u: float, t: float, params: NvParams, state: InitialState | None = None,
                  compensate: bool = True, finite_electron: bool = False) -> AncillaReadout:
    """Readout for an arbitrary electron state, mixing pure-state runs by linearity."""
    if state is None:
        comps = [(1.0, None)]
    else:
        w, v = np.linalg.eigh(state.rho)
        comps = [(float(wk), v[:, k]) for k, wk in enumerate(w) if wk > 1e-15]
    sx = sy = 0.0
    for wk, psi in comps:
        px = compile_sequence(u, t, params, "x", psi, compensate)
        py = compile_sequence(u, t, params, "y", psi, compensate)
        r = simulate_sequence(px, py, params, finite_electron=finite_electron)
        sx += wk * r.sx
        sy += wk * r.sy
    return AncillaReadout(sx, sy)


def circuit_u(u_phys_free: float, params: NvParams) -> float:
    """Inverse of :func:`free_time`."""
    return u_phys_free * abs(params.A) / params.omega


def selective_block_residual(params: NvParams, angle: float = math.pi / 2,
                             duration: float | None = None) -> float:
    """|| m_S=-1 block of a selective pulse, divided by the m_S=0 block phase, - 1 ||."""
    d = selective_duration(angle, params) if duration is None else duration
    g = pulse_unitary(Pulse("nuclear", 0.0, angle, d, True), params)
    ref = np.exp(-1j * d * params.A / 4)
    return float(np.linalg.norm(g[2:, 2:] / ref - I2))


def export_pulses(pulses, path=None) -> str:
    lines = ["target\taxis\tangle\tduration\tselective"] + [p.as_row() for p in pulses]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def end_to_end_unitarity(pulses, params: NvParams) -> float:
    return unitarity_error(sequence_unitary(pulses, params))


def with_theta2(params: NvParams, theta2: float) -> NvParams:
    return replace(params, theta2=theta2)
