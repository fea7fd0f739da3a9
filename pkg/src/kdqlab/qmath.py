"""Dense complex linear algebra for one- and two-qubit operators.

Only dimensions 2 and 4 are supported. Everything here is a pure function of
its inputs; returned arrays are fresh and marked read-only where they are
cached on immutable objects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite, NotHermitian

SUPPORTED_DIMS = (2, 4)
HERMITIAN_RTOL = 1e-10
DEGENERACY_RTOL = 1e-9

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def as_matrix(a, name="matrix") -> np.ndarray:
    """Coerce ``a`` to a square complex array of a supported dimension."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in SUPPORTED_DIMS:
        raise DimensionMismatch(f"{name} must be 2x2 or 4x4, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} has NaN or Inf entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def check_hermitian(h: np.ndarray, name="operator") -> np.ndarray:
    h = as_matrix(h, name)
    norm = np.linalg.norm(h)
    if np.linalg.norm(h - dagger(h)) > HERMITIAN_RTOL * norm:
        raise NotHermitian(f"{name} is not Hermitian within {HERMITIAN_RTOL:g} (relative)")
    return 0.5 * (h + dagger(h))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first component that is non-negligible becomes real positive
    mags = np.abs(v)
    k = int(np.flatnonzero(mags > 1e-12 * mags.max())[0])
    return v * np.exp(-1j * np.angle(v[k]))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition with degenerate eigenvalues merged.

    ``eigenvalues[j]`` is paired with ``projectors[j]`` and with
    ``vectors[j]``, an (n, d_j) array of phase-fixed orthonormal columns
    spanning that eigenspace.
    """

    eigenvalues: np.ndarray
    projectors: tuple
    vectors: tuple

    def __len__(self):
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return sum(e * p for e, p in zip(self.eigenvalues, self.projectors))

    def function(self, f) -> np.ndarray:
        """Apply a scalar function spectrally: sum_j f(E_j) Pi_j."""
        return sum(f(e) * p for e, p in zip(self.eigenvalues, self.projectors))


def eig_hermitian(h) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues come out ascending. Eigenvalues closer than
    ``1e-9 * ||H||_F`` are merged into one projector, and every eigenvector is
    phase-fixed so that its first non-negligible component is real positive.
    """
    h = check_hermitian(h, "H")
    w, v = np.linalg.eigh(h)
    scale = np.linalg.norm(h)
    groups = [[0]]
    for j in range(1, len(w)):
        if w[j] - w[groups[-1][-1]] <= DEGENERACY_RTOL * scale:
            groups[-1].append(j)
        else:
            groups.append([j])

    evals, projs, vecs = [], [], []
    for g in groups:
        cols = np.stack([_fix_phase(v[:, j]) for j in g], axis=1)
        p = cols @ dagger(cols)
        cols.setflags(write=False)
        p.setflags(write=False)
        evals.append(float(np.mean(w[g])))
        projs.append(p)
        vecs.append(cols)
    evals = np.array(evals)
    evals.setflags(write=False)
    return SpectralDecomposition(evals, tuple(projs), tuple(vecs))


def unitary_from_hamiltonian(h, s: float) -> np.ndarray:
    """``exp(-i s H)`` built from the spectral decomposition of ``H``."""
    if not np.isfinite(s):
        raise NonFinite("duration must be finite")
    dec = h if isinstance(h, SpectralDecomposition) else eig_hermitian(h)
    return dec.function(lambda e: np.exp(-1j * s * e))


def frobenius_distance_up_to_phase(a, b) -> float:
    """min over phi of ||A - exp(i phi) B||_F, with phi = arg Tr(B^dagger A)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    overlap = np.trace(dagger(b) @ a)
    phase = np.exp(1j * np.angle(overlap)) if overlap != 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def unitarity_error(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])))


def kron(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def rotation(axis_phase: float, angle: float) -> np.ndarray:
    """Single-qubit rotation exp(-i angle/2 (cos(phase) X + sin(phase) Y))."""
    n = np.cos(axis_phase) * SX + np.sin(axis_phase) * SY
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * n


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def ry(angle: float) -> np.ndarray:
    return rotation(np.pi / 2, angle)


def rx(angle: float) -> np.ndarray:
    return rotation(0.0, angle)


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced 2x2 state of a two-qubit ``rho``; ``keep`` is 0 (first) or 1 (second)."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    return np.einsum("jajb->ab", r)


class Observable:
    """Hermitian operator with its spectral decomposition computed once."""

    __slots__ = ("matrix", "spectrum")

    def __init__(self, matrix):
        m = check_hermitian(matrix, "observable")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "spectrum", eig_hermitian(m))

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def projectors(self) -> tuple:
        return self.spectrum.projectors

    def expm(self, s: float) -> np.ndarray:
        """exp(-i s H)."""
        return unitary_from_hamiltonian(self.spectrum, s)

    def expect(self, rho) -> float:
        return float(np.real(np.trace(self.matrix @ rho)))

    def __repr__(self):
        return f"Observable(eigenvalues={np.round(self.eigenvalues, 12).tolist()})"
