"""Driven-qubit work protocol.

The system Hamiltonian is a qubit driven by a field whose phase rotates at
the detuning frequency::

    H(t) = 1/2 [ Omega (cos(delta t) X + sin(delta t) Y) + delta Z ]

Its eigenvalues are +-omega/2 with omega = sqrt(Omega^2 + delta^2) at every
time, while the eigenvectors rotate about z. In the frame co-rotating with
the drive phase the Hamiltonian is static, which gives the closed-form
propagator ``exp(-i t delta Z/2) exp(-i t Omega X/2)``.

Default units are dimensionless (Omega = 1, time in 1/Omega). The ``paper``
preset reproduces the NV experiment: Omega = 2 pi * 875/39 rad/us and
delta = sqrt(3) Omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, InvalidP, InvariantViolation, NonFinite, ValidationError
from .qmath import (
    SX, SY, SZ, Observable, dagger, unitarity_error, unitary_from_hamiltonian,
)

UNITARITY_TOL = 1e-12
STEPS_PER_UNIT_PHASE = 1024


@dataclass(frozen=True)
class DriveParams:
    omega_rabi: float = 1.0
    delta: float = math.sqrt(3.0)
    omega: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.omega_rabi) and np.isfinite(self.delta)):
            raise NonFinite("drive parameters must be finite")
        if self.omega_rabi <= 0:
            raise ValidationError("omega_rabi must be positive", field="omega_rabi")
        object.__setattr__(self, "omega", math.hypot(self.omega_rabi, self.delta))

    @classmethod
    def dimensionless(cls) -> "DriveParams":
        return cls(1.0, math.sqrt(3.0))

    @classmethod
    def paper(cls) -> "DriveParams":
        om = 2 * math.pi * 875 / 39  # rad/us
        return cls(om, math.sqrt(3.0) * om)

    @classmethod
    def preset(cls, name: str) -> "DriveParams":
        try:
            return {"dimensionless": cls.dimensionless, "paper": cls.paper}[name]()
        except KeyError:
            raise ValidationError(f"unknown preset {name!r}", field="preset") from None

    @property
    def theta(self) -> float:
        """Tilt of H(0) away from the z axis, arctan(Omega/delta)."""
        return math.atan2(self.omega_rabi, self.delta)


def h_matrix(params: DriveParams, t: float) -> np.ndarray:
    if not np.isfinite(t):
        raise NonFinite("t must be finite")
    om, d = params.omega_rabi, params.delta
    return 0.5 * (om * (math.cos(d * t) * SX + math.sin(d * t) * SY) + d * SZ)


def h_of_t(params: DriveParams, t: float) -> Observable:
    return Observable(h_matrix(params, t))


def propagator_closed_form(params: DriveParams, t: float) -> np.ndarray:
    if not np.isfinite(t):
        raise NonFinite("t must be finite")
    a = 0.5 * params.delta * t
    b = 0.5 * params.omega_rabi * t
    z = np.diag([np.exp(-1j * a), np.exp(1j * a)])
    x = np.array([[math.cos(b), -1j * math.sin(b)], [-1j * math.sin(b), math.cos(b)]])
    return z @ x


def propagator_generic(h_fn: Callable[[float], object], t: float, n_steps: int) -> np.ndarray:
    """Time-ordered exponential by the exponential midpoint rule.

    ``h_fn(s)`` may return an :class:`Observable` or a Hermitian matrix.
    Later steps multiply from the left. The rule is second order in t/n_steps.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not np.isfinite(t):
        raise NonFinite("t must be finite")
    dt = t / n_steps
    u = None
    for k in range(n_steps):
        h = h_fn((k + 0.5) * dt)
        if isinstance(h, Observable):
            step = h.expm(dt)
        elif np.shape(h) == (2, 2):
            step = _expm_qubit(np.asarray(h, dtype=complex), dt)
        else:
            step = unitary_from_hamiltonian(h, dt)
        u = step if u is None else step @ u
    return u


def _expm_qubit(h: np.ndarray, s: float) -> np.ndarray:
    # exp(-i s H) for Hermitian 2x2 H = a I + n.sigma
    a = 0.5 * (h[0, 0] + h[1, 1]).real
    nx, ny, nz = h[0, 1].real, -h[0, 1].imag, 0.5 * (h[0, 0] - h[1, 1]).real
    r = math.sqrt(nx * nx + ny * ny + nz * nz)
    c = math.cos(r * s)
    sn = math.sin(r * s) / r if r > 0 else s
    return np.exp(-1j * a * s) * np.array(
        [[c - 1j * sn * nz, -1j * sn * (nx - 1j * ny)],
         [-1j * sn * (nx + 1j * ny), c + 1j * sn * nz]])


@dataclass(frozen=True)
class WorkProtocol:
    """Initial Hamiltonian, final Hamiltonian and the evolution between them."""

    h0: Observable
    ht: Observable
    u_t: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u_t, dtype=complex)
        if u.shape != self.h0.matrix.shape or self.h0.dim != self.ht.dim:
            raise DimensionMismatch("h0, ht and u_t must share one dimension")
        err = unitarity_error(u)
        if err > UNITARITY_TOL:
            raise InvariantViolation(f"u_t is not unitary (error {err:.3g})")
        u.setflags(write=False)
        object.__setattr__(self, "u_t", u)

    @property
    def dim(self) -> int:
        return self.h0.dim

    def heisenberg_final(self) -> np.ndarray:
        """U^dagger H(t) U."""
        return dagger(self.u_t) @ self.ht.matrix @ self.u_t


def make_protocol(params: DriveParams, t: float, method: str = "closed",
                  n_steps: int | None = None) -> WorkProtocol:
    """Work protocol for the driven qubit stopped at time ``t``."""
    if method == "closed":
        u = propagator_closed_form(params, t)
    elif method == "generic":
        if n_steps is None:
            n_steps = max(1, math.ceil(STEPS_PER_UNIT_PHASE * abs(params.omega_rabi * t)))
        u = propagator_generic(lambda s: h_matrix(params, s), t, n_steps)
    else:
        raise ValueError(f"unknown propagator method {method!r}")
    return WorkProtocol(h_of_t(params, 0.0), h_of_t(params, t), u, float(t))


@dataclass(frozen=True)
class InitialState:
    rho: np.ndarray
    label: str = "custom"
    p: float | None = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if not np.all(np.isfinite(rho)):
            raise NonFinite("rho has NaN or Inf entries")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValidationError("rho must have unit trace", field="rho")
        if np.linalg.norm(rho - dagger(rho)) > 1e-12:
            raise ValidationError("rho must be Hermitian", field="rho")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ValidationError("rho must be positive semidefinite", field="rho")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def is_pure(self, tol: float = 1e-12) -> bool:
        return abs(np.real(np.trace(self.rho @ self.rho)) - 1) < tol


def plus_minus(h0: Observable) -> tuple[np.ndarray, np.ndarray]:
    """(|E0> + |E1>)/sqrt2 and (|E0> - |E1>)/sqrt2 from phase-fixed eigenvectors."""
    dec = h0.spectrum
    if h0.dim != 2 or len(dec) != 2:
        raise ValidationError("|+-> need a non-degenerate qubit Hamiltonian", field="h0")
    e0, e1 = dec.vectors[0][:, 0], dec.vectors[1][:, 0]
    return (e0 + e1) / math.sqrt(2), (e0 - e1) / math.sqrt(2)


def basis_states(params: DriveParams) -> tuple[np.ndarray, np.ndarray]:
    return plus_minus(h_of_t(params, 0.0))


def make_initial_state(params: DriveParams, label: str, p: float | None = None) -> InitialState:
    """``plus``, ``minus`` or ``mixture`` (p|+><+| + (1-p)|-><-|)."""
    plus, minus = basis_states(params)
    rp, rm = np.outer(plus, plus.conj()), np.outer(minus, minus.conj())
    if label == "plus":
        return InitialState(rp, "plus")
    if label == "minus":
        return InitialState(rm, "minus")
    if label == "mixture":
        if p is None or not (0.0 <= p <= 1.0):
            raise InvalidP(f"mixture weight must lie in [0, 1], got {p!r}")
        rho = p * rp + (1 - p) * rm
        rho = 0.5 * (rho + dagger(rho))
        return InitialState(rho, "mixture", float(p))
    raise ValidationError(f"unknown state label {label!r}", field="state")


def dephase(rho, h0: Observable) -> np.ndarray:
    """Remove coherences of ``rho`` in the eigenbasis of ``h0``."""
    return sum(p @ rho @ p for p in h0.projectors)
