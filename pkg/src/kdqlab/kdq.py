"""Kirkwood-Dirac quasiprobabilities of work and everything derived from them.

For an initial state rho and a protocol (H(0), H(t), U), the table entries are

    q_if = Tr(U^dagger Pi_f(t) U  Pi_i(0)  rho)

where Pi_i(0), Pi_f(t) are eigenprojectors of H(0) and H(t). The work
associated with (i, f) is W_if = E_f(t) - E_i(0). All quantities here are
computed exactly from matrices; estimates from sampled traces live in
:mod:`kdqlab.recon`.

Sign conventions: the characteristic function uses exp(+i u W). The
correlation function is ordered as <H~(t) H(0)> = Tr(H~(t) H(0) rho) with
H~(t) = U^dagger H(t) U, so Im var W = -2 Im <H~(t) H(0)> = 2 Im <H(0) H~(t)>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite
from .protocol import InitialState, WorkProtocol, dephase
from .qmath import dagger

W_MERGE_RTOL = 1e-9


def _rho(state) -> np.ndarray:
    return state.rho if isinstance(state, InitialState) else np.asarray(state, dtype=complex)


def _check_dims(rho: np.ndarray, proto: WorkProtocol):
    if rho.shape != (proto.dim, proto.dim):
        raise DimensionMismatch(f"state is {rho.shape}, protocol is {proto.dim}-dimensional")


@dataclass(frozen=True)
class QuasiprobTable:
    """Complex weights q[i, f] with their initial/final energies."""

    entries: np.ndarray
    energies_initial: np.ndarray
    energies_final: np.ndarray

    @property
    def work(self) -> np.ndarray:
        """W[i, f] = E_f(t) - E_i(0)."""
        return self.energies_final[None, :] - self.energies_initial[:, None]

    @property
    def total(self) -> complex:
        return complex(self.entries.sum())

    def marginal_initial(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def marginal_final(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    @property
    def energy_scale(self) -> float:
        spread = max(np.ptp(self.energies_initial), np.ptp(self.energies_final))
        return float(spread) if spread > 0 else 1.0


def kdq_table(rho, proto: WorkProtocol) -> QuasiprobTable:
    rho = _rho(rho)
    _check_dims(rho, proto)
    u = proto.u_t
    pulled = [dagger(u) @ pf @ u for pf in proto.ht.projectors]
    q = np.array([[np.trace(pf @ pi @ rho) for pf in pulled] for pi in proto.h0.projectors])
    return QuasiprobTable(q, np.array(proto.h0.eigenvalues), np.array(proto.ht.eigenvalues))


def tpm_table(rho, proto: WorkProtocol) -> QuasiprobTable:
    """Two-point-measurement joint probabilities p_i p(f|i)."""
    rho = _rho(rho)
    _check_dims(rho, proto)
    u = proto.u_t
    pulled = [dagger(u) @ pf @ u for pf in proto.ht.projectors]
    q = np.array([
        [np.real(np.trace(pi @ rho)) * np.real(np.trace(pf @ pi)) for pf in pulled]
        for pi in proto.h0.projectors
    ])
    return QuasiprobTable(q.astype(complex), np.array(proto.h0.eigenvalues),
                          np.array(proto.ht.eigenvalues))


def char_function_analytic(table: QuasiprobTable, u):
    """G(u) = sum_if q_if exp(i u W_if); ``u`` may be a scalar or an array."""
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise NonFinite("u must be finite")
    w = table.work.ravel()
    q = table.entries.ravel()
    g = np.exp(1j * np.multiply.outer(u_arr, w)) @ q
    return complex(g) if u_arr.ndim == 0 else g


def char_function_trace(rho, proto: WorkProtocol, u):
    """G(u) = Tr[exp(-i u H(0)) rho U^dagger exp(i u H(t)) U], matrix route."""
    rho = _rho(rho)
    _check_dims(rho, proto)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u_arr)):
        raise NonFinite("u must be finite")
    out = np.empty(u_arr.shape, dtype=complex)
    ut = proto.u_t
    for k, uk in enumerate(u_arr.ravel()):
        a = proto.h0.expm(uk)
        b = dagger(ut) @ proto.ht.expm(-uk) @ ut
        out.ravel()[k] = np.trace(a @ rho @ b)
    return complex(out[0]) if np.ndim(u) == 0 else out


def work_distribution(table: QuasiprobTable, merged: bool = True):
    """Atoms (W, weight) of P(W), sorted by W.

    With ``merged`` (default) transitions whose work agrees within
    1e-9 times the energy scale share one atom with the summed weight. With
    ``merged=False`` every (i, f) entry is returned as its own atom.
    """
    w = table.work.ravel()
    q = table.entries.ravel()
    order = np.argsort(w, kind="stable")
    atoms = [(float(w[k]), complex(q[k])) for k in order]
    if not merged:
        return atoms
    tol = W_MERGE_RTOL * table.energy_scale
    out = []
    group_w, group_q, n = atoms[0][0], atoms[0][1], 1
    for wk, qk in atoms[1:]:
        if wk - group_w / n <= tol:
            group_w += wk
            group_q += qk
            n += 1
        else:
            out.append((group_w / n, group_q))
            group_w, group_q, n = wk, qk, 1
    out.append((group_w / n, group_q))
    return out


def work_moment(table: QuasiprobTable, m: int) -> complex:
    return complex(np.sum(table.entries * table.work ** m))


@dataclass(frozen=True)
class WorkMoments:
    mean: complex
    second_moment: complex
    variance: complex

    @property
    def v_r(self) -> float:
        return float(self.variance.real)

    @property
    def v_i(self) -> float:
        return float(self.variance.imag)


def work_moments(table: QuasiprobTable) -> WorkMoments:
    mean = work_moment(table, 1)
    second = work_moment(table, 2)
    return WorkMoments(mean, second, second - mean * mean)


@dataclass(frozen=True)
class CorrelationReport:
    """Two-time energy correlations under rho.

    ``commutator_expect`` is Tr(i rho [H~(t), H(0)]), the ordering for which
    it equals Im var W and Im(corr) = -commutator_expect / 2.
    """

    corr: complex
    covariance: float
    commutator_expect: float
    var_h0: float
    var_ht: float
    mean_h0: float
    mean_ht: float


def correlation_report(rho, proto: WorkProtocol) -> CorrelationReport:
    rho = _rho(rho)
    _check_dims(rho, proto)
    h0 = proto.h0.matrix
    ht = proto.heisenberg_final()
    m0 = np.real(np.trace(h0 @ rho))
    mt = np.real(np.trace(ht @ rho))
    d0 = h0 - m0 * np.eye(proto.dim)
    dt = ht - mt * np.eye(proto.dim)
    cov = 0.5 * np.trace((d0 @ dt + dt @ d0) @ rho)
    comm = np.trace(1j * rho @ (ht @ h0 - h0 @ ht))
    return CorrelationReport(
        corr=complex(np.trace(ht @ h0 @ rho)),
        covariance=float(np.real(cov)),
        commutator_expect=float(np.real(comm)),
        var_h0=float(np.real(np.trace(d0 @ d0 @ rho))),
        var_ht=float(np.real(np.trace(dt @ dt @ rho))),
        mean_h0=float(m0),
        mean_ht=float(mt),
    )


def correlation_from_table(table: QuasiprobTable) -> complex:
    """sum_if q_if E_i(0) E_f(t), the table route to <H~(t) H(0)>."""
    return complex(np.sum(table.entries * np.outer(table.energies_initial, table.energies_final)))


def correlation_matrix(rho, proto: WorkProtocol) -> np.ndarray:
    """[[Var H(0), <dH0 dH~>], [<dH~ dH0>, Var H~(t)]] with dX = X - <X>."""
    rho = _rho(rho)
    _check_dims(rho, proto)
    n = proto.dim
    h0 = proto.h0.matrix
    ht = proto.heisenberg_final()
    d0 = h0 - np.real(np.trace(h0 @ rho)) * np.eye(n)
    dt = ht - np.real(np.trace(ht @ rho)) * np.eye(n)
    return np.array([[np.trace(rho @ d0 @ d0), np.trace(rho @ d0 @ dt)],
                     [np.trace(rho @ dt @ d0), np.trace(rho @ dt @ dt)]])


def work_operator(proto: WorkProtocol) -> np.ndarray:
    """H~(t) - H(0)."""
    return proto.heisenberg_final() - proto.h0.matrix


def work_operator_moment(rho, proto: WorkProtocol, m: int) -> complex:
    rho = _rho(rho)
    return complex(np.trace(np.linalg.matrix_power(work_operator(proto), m) @ rho))


def work_operator_report(rho, proto: WorkProtocol) -> tuple[float, float, float]:
    """(Tr(W rho), Tr(W^2 rho), Tr(W^2 rho) - Tr(W rho)^2) for the work operator."""
    rho = _rho(rho)
    _check_dims(rho, proto)
    first = work_operator_moment(rho, proto, 1).real
    second = work_operator_moment(rho, proto, 2).real
    return first, second, second - first * first


def rsur_sides(rho, proto: WorkProtocol) -> tuple[float, float]:
    """Both sides of Var H(0) Var H~(t) >= Cov^2 + (Im <H~(t) H(0)>)^2."""
    rep = correlation_report(rho, proto)
    lhs = rep.var_h0 * rep.var_ht
    rhs = rep.covariance ** 2 + rep.corr.imag ** 2
    return lhs, rhs


def rsur_scale(proto: WorkProtocol) -> float:
    """Natural magnitude of the RSUR sides: (max|E(0)| max|E(t)|)^2."""
    a = np.max(np.abs(proto.h0.eigenvalues))
    b = np.max(np.abs(proto.ht.eigenvalues))
    return float(max((a * b) ** 2, np.finfo(float).tiny))


def coherence_work(rho, proto: WorkProtocol) -> float:
    """Tr(U chi U^dagger H(t)), chi being the part of rho off-diagonal in H(0)'s basis."""
    rho = _rho(rho)
    chi = rho - dephase(rho, proto.h0)
    u = proto.u_t
    return float(np.real(np.trace(u @ chi @ dagger(u) @ proto.ht.matrix)))
