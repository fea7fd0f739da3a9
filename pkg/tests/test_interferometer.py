import math

import numpy as np
import pytest
from scipy.linalg import expm

from kdqlab.errors import InvalidVariant, NonFinite
from kdqlab.interferometer import (
    CircuitSpec, ancilla_state, circuit_states, circuit_trace, gate_g1, gate_g2, gate_gB,
    measure_quadrature, run_circuit, tpm_via_mixture,
)
from kdqlab.kdq import char_function_analytic, kdq_table, work_moments
from kdqlab.protocol import InitialState, make_initial_state, make_protocol
from kdqlab.qmath import P0, P1, Observable, unitarity_error

import oracles
from conftest import LATTICE


def test_gates_identity_at_zero(drive):
    h = make_protocol(drive, 1.0)
    for g in (gate_g1(0, h.h0), gate_g2(0, h.ht), gate_gB(0, h.h0)):
        assert np.allclose(g, np.eye(4))


def test_g1_block_structure_and_spectral_oracle(drive):
    proto = make_protocol(drive, 0.0)
    u = math.pi / drive.omega
    g = gate_g1(u, proto.h0)
    ref = np.kron(expm(-1j * u * proto.h0.matrix), P0) + np.kron(np.eye(2), P1)
    assert np.linalg.norm(g - ref) < 1e-12
    # ancilla |1> block (odd indices in system (x) ancilla order) is the identity
    assert np.allclose(g[1::2, 1::2], np.eye(2))
    assert unitarity_error(g) < 1e-12


def test_g2_at_t0_equals_gB(drive):
    proto = make_protocol(drive, 0.0)
    assert np.allclose(gate_g2(1.3, proto.ht), gate_gB(1.3, proto.h0))


def test_nonfinite_u(drive):
    with pytest.raises(NonFinite):
        gate_g1(np.inf, make_protocol(drive, 0).h0)


def test_basis_labels_system_first():
    # |s=1, a=0> must be index 2
    h = Observable(np.diag([0.0, 1.0]))
    g = gate_g1(math.pi, h)
    assert g[2, 2] == pytest.approx(-1)
    assert g[3, 3] == pytest.approx(1)


def test_u_zero_reads_one(drive, plus):
    r = run_circuit(CircuitSpec(0.0, make_protocol(drive, 1.0), plus))
    assert (r.sx, r.sy) == pytest.approx((1, 0), abs=1e-14)


@pytest.mark.parametrize("omega_t", LATTICE[::3])
def test_readout_equals_charfn(drive, minus, omega_t):
    proto = make_protocol(drive, omega_t / drive.omega_rabi)
    us = np.linspace(0, 20, 23)
    ref = oracles.charfn_expm(minus.rho, proto.h0.matrix, proto.ht.matrix, proto.u_t, us)
    got = circuit_trace(proto, minus, us).values
    assert np.max(np.abs(got - ref)) < 1e-12


def test_variants_agree(drive, plus):
    proto = make_protocol(drive, 7 * math.pi / 6)
    u = 3 / drive.omega
    a = run_circuit(CircuitSpec(u, proto, plus))
    b = run_circuit(CircuitSpec(u, proto, plus, "gB_simplified", drive))
    assert abs(a.g - b.g) < 1e-12


def test_variant_errors(drive, plus):
    proto = make_protocol(drive, 1.0)
    with pytest.raises(InvalidVariant):
        CircuitSpec(1.0, proto, plus, "bogus")
    with pytest.raises(InvalidVariant):
        CircuitSpec(1.0, proto, plus, "gB_simplified")
    other = make_protocol(type(drive)(1.0, 0.5), 1.0)
    with pytest.raises(InvalidVariant):
        CircuitSpec(1.0, other, plus, "gB_simplified", drive)


def test_y_setting_reads_imaginary_part():
    # ancilla |0> + i|1>: textbook <Y> = +1, coherence 2 rho_01 = -i
    psi = np.kron([1, 0], np.array([1, 1j]) / math.sqrt(2))
    rho = np.outer(psi, psi.conj())
    assert measure_quadrature(rho, "x") == pytest.approx(0, abs=1e-15)
    assert measure_quadrature(rho, "y") == pytest.approx(-1)
    assert 2 * ancilla_state(rho)[0, 1] == pytest.approx(-1j)


def test_state_stays_normalized(drive, plus):
    for rho in circuit_states(CircuitSpec(2.0, make_protocol(drive, 1.0), plus)):
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_linearity(drive, plus, minus):
    proto = make_protocol(drive, 1.7)
    mix = make_initial_state(drive, "mixture", 0.3)
    for u in (0.4, 2.5):
        a = run_circuit(CircuitSpec(u, proto, plus)).g
        b = run_circuit(CircuitSpec(u, proto, minus)).g
        c = run_circuit(CircuitSpec(u, proto, mix)).g
        assert abs(c - (0.3 * a + 0.7 * b)) < 1e-12
        assert abs(c) <= 1 + 1e-12


def test_tpm_via_mixture(drive):
    proto = make_protocol(drive, 7 * math.pi / 6)
    us = np.linspace(0, 10, 16)
    tr = tpm_via_mixture(proto, us)
    ref = char_function_analytic(kdq_table(np.eye(2) / 2, proto), us)
    assert np.max(np.abs(tr.values - ref)) < 1e-12
    assert tr.values[0] == pytest.approx(1)
    m = work_moments(kdq_table(InitialState(np.eye(2) / 2), proto))
    assert abs(m.mean.imag) < 1e-12 and abs(m.variance.imag) < 1e-12
