import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from kdqlab.errors import InvalidPulse, NonFinite
from kdqlab.interferometer import CircuitSpec, run_circuit
from kdqlab.nvmodel import (
    NvParams, Pulse, compile_sequence, end_to_end_unitarity, export_pulses, h_interaction,
    initial_state, pulse_readout, pulse_unitary, run_sequence, selective_block_residual,
    selective_duration, simulate_sequence, verify_g1_decomposition, verify_gB_decomposition,
    with_theta2,
)
from kdqlab.protocol import make_protocol
from kdqlab.qmath import I2

import oracles


@pytest.fixture
def nv(drive):
    return NvParams.from_drive(drive)


def test_h_interaction_diagonal_enumeration():
    A = -1.3
    z = [1, -1]
    diag = [(A / 4) * (z1 + z2 - z1 * z2) for z1 in z for z2 in z]
    h = h_interaction(A)
    assert np.allclose(h, np.diag(diag))
    assert np.allclose(h_interaction(0.0), 0)
    zi = np.kron(oracles.SZ, I2)
    assert np.allclose(h @ zi, zi @ h)


def test_free_pulse_matches_expm(nv):
    p = Pulse("free", duration=3.3)
    assert np.allclose(pulse_unitary(p, nv), expm(-3.3j * h_interaction(nv.A)))


def test_electron_pi_pulse(nv):
    g = pulse_unitary(Pulse("electron", 0.0, math.pi, 1.0), nv)
    assert np.allclose(g, np.kron(-1j * oracles.SX, I2))


def test_selective_pulse_even_multiple(nv):
    assert selective_block_residual(nv) < 1e-12
    d = selective_duration(math.pi / 2, nv)
    assert (d * abs(nv.A) / (2 * math.pi)) % 2 == pytest.approx(0, abs=1e-9)
    # an off-grid duration leaves a visible phase on the m_S = -1 block
    assert selective_block_residual(nv, duration=d + 1.0) > 1e-3


def test_selective_pulse_leaves_ms_minus_one_alone(nv):
    g = pulse_unitary(Pulse("nuclear", 0.0, math.pi, selective_duration(math.pi, nv), True), nv)
    psi = np.kron([0, 1], [1, 0])  # |m_S=-1, m_I=0>
    assert abs(abs(psi @ g @ psi) - 1) < 1e-12


def test_pulse_validation():
    with pytest.raises(InvalidPulse):
        Pulse("free", axis=0.0, duration=1.0)
    with pytest.raises(InvalidPulse):
        Pulse("electron")
    with pytest.raises(InvalidPulse):
        Pulse("nuclear", 0.0, 1.0, 1.0, selective=False)
    with pytest.raises(InvalidPulse):
        Pulse("laser", 0.0, 1.0)
    with pytest.raises(InvalidPulse):
        Pulse("free", duration=-1.0)


def test_rabi_ratio_warning(drive):
    with pytest.warns(UserWarning):
        NvParams.from_drive(drive, A=1.0, rabi_n=0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        NvParams.from_drive(drive)


def test_paper_parameters():
    p = NvParams.paper()
    assert p.A == pytest.approx(-2 * math.pi * 2.16)
    assert p.theta == pytest.approx(math.pi / 6)
    assert p.theta2 == pytest.approx(p.theta + math.pi)


@pytest.mark.parametrize("A", [-0.4, 0.9])
def test_decompositions(drive, A):
    nv = NvParams.from_drive(drive, A=A)
    us = np.linspace(0, 4 * math.pi / drive.omega, 33)
    assert verify_g1_decomposition(0.0, nv) < 1e-14
    assert max(verify_g1_decomposition(u, nv) for u in us) < 1e-10
    assert verify_g1_decomposition(2 * math.pi / abs(A), nv) < 1e-10
    checks = [verify_gB_decomposition(u, nv) for u in us]
    assert max(c.distance for c in checks) < 1e-10
    assert max(c.reduced_state_gap for c in checks) < 1e-12


def test_gB_negative_control(nv, drive):
    bad = with_theta2(nv, nv.theta)
    us = np.linspace(0, 4 * math.pi / drive.omega, 33)
    assert max(verify_gB_decomposition(u, bad).distance for u in us) > 0.1


def test_zero_sequence(nv, drive, plus):
    r = pulse_readout(0.0, 0.0, nv, plus)
    assert (r.sx, r.sy) == pytest.approx((1, 0), abs=1e-12)


def test_empty_sequence_and_bare_ramsey(nv):
    # no pulses: the ancilla sits in an eigenstate, so it has no transverse coherence
    _, rho = run_sequence([], nv)
    anc = rho.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    assert abs(np.trace(anc @ oracles.SX)) < 1e-15 and abs(np.trace(anc @ oracles.SY)) < 1e-15
    # only the opening and closing nuclear pulses (a Hadamard pair): readout (1, 0)
    seq_x, seq_y = compile_sequence(0.0, 0.0, nv, "x"), compile_sequence(0.0, 0.0, nv, "y")
    bare_x, bare_y = seq_x[:1] + seq_x[-3:], seq_y[:1] + seq_y[-3:]
    assert [p.target for p in bare_x] == ["nuclear", "nuclear", "electron", "nuclear"]
    r = simulate_sequence(bare_x, bare_y, nv)
    assert (r.sx, r.sy) == pytest.approx((1, 0), abs=1e-12)


@pytest.mark.parametrize("A", [None, 0.5])
def test_sequence_matches_circuit(drive, plus, minus, A):
    nv = NvParams.from_drive(drive, A=A)
    t = 7 * math.pi / 6 / drive.omega_rabi
    proto = make_protocol(drive, t)
    for state in (plus, minus):
        for u in (3 / drive.omega, 0.7, 5.5):
            ideal = run_circuit(CircuitSpec(u, proto, state)).g
            assert abs(pulse_readout(u, t, nv, state).g - ideal) < 1e-6


def test_compensation_is_needed(drive, plus, nv):
    t = 1.0
    proto = make_protocol(drive, t)
    errs = [abs(pulse_readout(u, t, nv, plus, compensate=False).g
                - run_circuit(CircuitSpec(u, proto, plus)).g) for u in np.linspace(0.2, 6, 12)]
    assert max(errs) > 1e-2


def test_sequence_shape(nv):
    seq = compile_sequence(1.0, 1.0, nv)
    targets = [p.target for p in seq]
    assert targets[0] == "nuclear" and targets[-3:] == ["nuclear", "electron", "nuclear"]
    assert targets.count("free") == 2
    # initial-state preparation merged with the first tilt into one electron pulse
    assert targets[1:3] == ["electron", "free"]
    assert end_to_end_unitarity(seq, nv) < 1e-10


def test_trace_preserved(nv):
    rho = initial_state()
    for p in compile_sequence(2.0, 0.5, nv, "y"):
        g = pulse_unitary(p, nv)
        rho = g @ rho @ g.conj().T
        assert abs(np.trace(rho) - 1) < 1e-12


def test_compile_errors(nv):
    with pytest.raises(NonFinite):
        compile_sequence(np.nan, 1.0, nv)
    with pytest.raises(ValueError):
        compile_sequence(-1.0, 1.0, nv)


def test_export(nv):
    text = export_pulses(compile_sequence(1.0, 1.0, nv))
    lines = text.strip().split("\n")
    assert lines[0] == "target\taxis\tangle\tduration\tselective"
    assert all(len(x.split("\t")) == 5 for x in lines)


def test_finite_electron_error_scales_with_hyperfine(drive, plus):
    # finite electron pulses feel H_I while they run; the error is first order in |A| T
    t = 1.0
    ideal = run_circuit(CircuitSpec(2.0, make_protocol(drive, t), plus)).g
    errs = []
    for A in (-0.1, -0.01):
        nv = NvParams.from_drive(drive, A=A)
        errs.append(abs(pulse_readout(2.0, t, nv, plus, finite_electron=True).g - ideal))
    assert errs[0] > 1e-3
    assert errs[1] / errs[0] == pytest.approx(0.1, rel=0.2)
