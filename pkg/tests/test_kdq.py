import math

import numpy as np
import pytest

from kdqlab.errors import DimensionMismatch, NonFinite
from kdqlab.kdq import (
    char_function_analytic, char_function_trace, coherence_work, correlation_from_table,
    correlation_matrix, correlation_report, kdq_table, rsur_scale, rsur_sides, tpm_table,
    work_distribution, work_moment, work_moments, work_operator_moment, work_operator_report,
)
from kdqlab.protocol import InitialState, WorkProtocol, make_initial_state, make_protocol
from kdqlab.qmath import Observable

import oracles
from conftest import LATTICE


def _proto(drive, omega_t):
    return make_protocol(drive, omega_t / drive.omega_rabi)


@pytest.mark.parametrize("omega_t", LATTICE)
def test_table_matches_vector_oracle(drive, plus, omega_t):
    t = omega_t / drive.omega_rabi
    proto = make_protocol(drive, t)
    ref = oracles.kdq_vectors(plus.rho, drive.omega_rabi, drive.delta, t, proto.u_t)
    assert np.max(np.abs(kdq_table(plus, proto).entries - ref)) < 1e-12


@pytest.mark.parametrize("omega_t", LATTICE)
def test_table_sums_and_marginals(drive, minus, omega_t):
    proto = _proto(drive, omega_t)
    tab = kdq_table(minus, proto)
    assert abs(tab.total - 1) < 1e-12
    born0 = [np.trace(p @ minus.rho) for p in proto.h0.projectors]
    bornt = [np.trace(p @ proto.u_t @ minus.rho @ proto.u_t.conj().T) for p in proto.ht.projectors]
    assert np.allclose(tab.marginal_initial(), born0, atol=1e-12)
    assert np.allclose(tab.marginal_final(), bornt, atol=1e-12)


def test_tpm_matches_oracle(drive, plus):
    t = 1.3
    proto = make_protocol(drive, t)
    ref = oracles.tpm_vectors(plus.rho, drive.omega_rabi, drive.delta, t, proto.u_t)
    assert np.max(np.abs(tpm_table(plus, proto).entries - ref)) < 1e-12


def test_commuting_state_gives_tpm(drive):
    proto = _proto(drive, 0.7)
    rho = 0.8 * proto.h0.projectors[0] + 0.2 * proto.h0.projectors[1]
    a, b = kdq_table(rho, proto).entries, tpm_table(rho, proto).entries
    assert np.max(np.abs(a - b)) < 1e-12
    assert np.all(a.real > -1e-12) and np.max(np.abs(a.imag)) < 1e-12


def test_dimension_mismatch(drive):
    with pytest.raises(DimensionMismatch):
        kdq_table(np.eye(4) / 4, _proto(drive, 1.0))


@pytest.mark.parametrize("omega_t", [0.0, 1.1, 7 * math.pi / 6])
def test_charfn_routes_agree(drive, plus, omega_t):
    proto = _proto(drive, omega_t)
    us = np.linspace(0, 12, 17)
    ref = oracles.charfn_expm(plus.rho, proto.h0.matrix, proto.ht.matrix, proto.u_t, us)
    assert np.max(np.abs(char_function_analytic(kdq_table(plus, proto), us) - ref)) < 1e-12
    assert np.max(np.abs(char_function_trace(plus, proto, us) - ref)) < 1e-12
    assert char_function_analytic(kdq_table(plus, proto), 0.0) == pytest.approx(1)


def test_charfn_rejects_nan(drive, plus):
    with pytest.raises(NonFinite):
        char_function_analytic(kdq_table(plus, _proto(drive, 1)), np.nan)


def test_work_distribution_merges_zero(drive, plus):
    tab = kdq_table(plus, _proto(drive, 1.0))
    atoms = work_distribution(tab)
    assert [round(w, 12) for w, _ in atoms] == [-drive.omega, 0.0, drive.omega]
    assert atoms[1][1] == pytest.approx(tab.entries[0, 0] + tab.entries[1, 1])
    assert len(work_distribution(tab, merged=False)) == 4


@pytest.mark.parametrize("omega_t", LATTICE)
def test_mean_work_closed_form(drive, plus, omega_t):
    t = omega_t / drive.omega_rabi
    m = work_moments(kdq_table(plus, make_protocol(drive, t)))
    assert abs(m.mean - oracles.mean_work_closed(drive.omega_rabi, drive.delta, t)) < 1e-12


def test_variance_identity(drive, plus):
    m = work_moments(kdq_table(plus, _proto(drive, 2.0)))
    assert m.variance == pytest.approx(m.second_moment - m.mean ** 2, abs=1e-14)


@pytest.mark.parametrize("omega_t", LATTICE)
def test_variance_real_and_imaginary_parts(drive, plus, omega_t):
    proto = _proto(drive, omega_t)
    rho = plus.rho
    m = work_moments(kdq_table(plus, proto))
    h0, ht = proto.h0.matrix, proto.heisenberg_final()
    var = lambda a: np.trace(a @ a @ rho).real - np.trace(a @ rho).real ** 2  # noqa: E731
    cov = 0.5 * np.trace((h0 @ ht + ht @ h0) @ rho).real - np.trace(h0 @ rho).real * np.trace(ht @ rho).real
    assert abs(m.v_r - (var(h0) + var(ht) - 2 * cov)) < 1e-12
    comm = np.trace(1j * rho @ (ht @ h0 - h0 @ ht)).real
    assert abs(m.v_i - comm) < 1e-12
    # the same number in every ordering that appears in the literature
    assert abs(m.v_i - 2 * np.trace(h0 @ ht @ rho).imag) < 1e-12
    assert abs(m.v_i + 2 * np.trace(ht @ h0 @ rho).imag) < 1e-12
    assert abs(m.v_i + np.trace(1j * rho @ (h0 @ ht - ht @ h0)).real) < 1e-12


def test_correlation_report(drive, plus):
    proto = _proto(drive, 2.2)
    rep = correlation_report(plus, proto)
    tab = kdq_table(plus, proto)
    assert rep.corr == pytest.approx(correlation_from_table(tab), abs=1e-13)
    assert rep.corr.imag == pytest.approx(-0.5 * rep.commutator_expect, abs=1e-13)
    assert rep.commutator_expect == pytest.approx(work_moments(tab).v_i, abs=1e-13)


@pytest.mark.parametrize("omega_t", [0.0, math.pi, 2 * math.pi])
def test_correlation_imaginary_zero(drive, plus, omega_t):
    assert abs(correlation_report(plus, _proto(drive, omega_t)).corr.imag) < 1e-12


def test_commutator_nonzero_at_pi(drive):
    proto = _proto(drive, math.pi)
    h0, ht = proto.h0.matrix, proto.heisenberg_final()
    assert np.linalg.norm(h0 @ ht - ht @ h0) > 0.1


def test_work_operator_first_two_moments(drive, plus):
    proto = _proto(drive, 1.9)
    tab = kdq_table(plus, proto)
    first, second, var = work_operator_report(plus, proto)
    m = work_moments(tab)
    assert first == pytest.approx(m.mean.real, abs=1e-12)
    assert second == pytest.approx(m.second_moment.real, abs=1e-12)
    assert var == pytest.approx(m.v_r, abs=1e-12)


def test_work_operator_third_moment_differs(drive, plus):
    gaps = [abs(work_operator_moment(plus, _proto(drive, x), 3).real
                - work_moment(kdq_table(plus, _proto(drive, x)), 3).real) for x in LATTICE]
    assert max(gaps) > 1e-3 * drive.omega ** 3


def test_rsur_pure_state_saturates(drive, plus):
    proto = _proto(drive, 11 * math.pi / 15)
    lhs, rhs = rsur_sides(plus, proto)
    assert abs(lhs - rhs) < 1e-9 * rsur_scale(proto)


def test_rsur_mixture_strict(drive):
    proto = _proto(drive, 11 * math.pi / 15)
    lhs, rhs = rsur_sides(make_initial_state(drive, "mixture", 0.4), proto)
    assert lhs > rhs + 1e-3


def test_correlation_matrix_psd(rng):
    for _ in range(50):
        h0 = Observable(oracles.random_hermitian(rng))
        ht = Observable(oracles.random_hermitian(rng))
        proto = WorkProtocol(h0, ht, oracles.random_unitary(rng))
        c = correlation_matrix(oracles.random_state(rng), proto)
        assert np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min() > -1e-12


def test_coherence_work(drive, plus):
    proto = _proto(drive, 1.4)
    kd = work_moments(kdq_table(plus, proto)).mean.real
    tp = work_moments(tpm_table(plus, proto)).mean.real
    assert kd - tp == pytest.approx(coherence_work(plus, proto), abs=1e-12)


def test_tpm_mean_of_dephased_is_zero(drive):
    rho = InitialState(np.eye(2) / 2)
    for x in LATTICE:
        assert abs(work_moments(tpm_table(rho, _proto(drive, x))).mean) < 1e-12
