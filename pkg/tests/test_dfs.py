import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnaswap.basecode import BASES, Edge, complement, encode
from dnaswap.core import CNOT, H, StateVector, X, apply_circuit, apply_gate, custom, tensor
from dnaswap.dfs import (
    PAIR_SITE,
    EnzymeSite,
    Measure,
    NoiseSector,
    audit_circuit,
    base_marginal_state,
    collective_pauli,
    dephasing_fidelity,
    joint_initial,
    lambda_of,
    lift_gate,
    lift_matrix,
    protocol_audit,
    recognition_audit,
    sector_support,
    sector_weights,
    uncompensated_fault,
    weak_dephase,
)
from dnaswap.replication import pair_for, recognition_gate, recognize, swap_protocol, v_gate

A, T, G, C = BASES
S2 = 1 / math.sqrt(2)


@pytest.mark.parametrize("bits,lam", [("000", 3), ("011", -1), ("101", -1), ("110010", 0), ("1111", -4)])
def test_lambda_of(bits, lam):
    assert lambda_of(bits) == lam


def test_sector_support_examples():
    assert sector_support(StateVector.from_terms({"011": S2, "101": -S2})) == {-1}
    assert sector_support(StateVector.from_terms({"00": S2, "11": S2})) == {2, -2}
    w = sector_weights(StateVector.from_terms({"00": S2, "11": S2}))
    assert w == pytest.approx({2: 0.5, -2: 0.5})


def test_noise_sector():
    s = NoiseSector(6, 0)
    assert s.ones == 3 and s.dimension == 20 == len(s.basis())
    assert all(lambda_of(b) == 0 for b in s.basis())
    with pytest.raises(ValueError):
        NoiseSector(3, 0)


def test_weak_dephase_examples():
    ghz = StateVector.from_terms({"00": S2, "11": S2})
    # |11> picks up exp(2i phi): orthogonal at pi/2, back in phase at pi
    out = weak_dephase(ghz, math.pi / 2)
    assert out.allclose(StateVector.from_terms({"00": S2, "11": -S2}), 1e-15)
    assert ghz.fidelity(out) == pytest.approx(0, abs=1e-15)
    assert ghz.fidelity(weak_dephase(ghz, math.pi)) == pytest.approx(1, abs=1e-15)
    zero = StateVector.from_bits("0000")
    assert np.array_equal(weak_dephase(zero, 0.7).amplitudes, zero.amplitudes)
    for b in BASES:
        s = recognize(b).state
        # single sector: a global phase only
        assert s.fidelity(weak_dephase(s, 1.234)) == pytest.approx(1, abs=1e-12)


def test_dephasing_fidelity():
    assert dephasing_fidelity(recognize(G).state, 200, 0) == pytest.approx(1, abs=1e-12)
    ghz = StateVector.from_terms({"00": S2, "11": S2})
    # mean of cos^2(phi) over a full period
    assert dephasing_fidelity(ghz, 20_000, 1) == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("base", BASES)
def test_flip_all_maps_base_to_minus_complement(base):
    s = recognize(base).state
    flipped = apply_circuit(s, [X(0), X(1), X(2)])
    assert flipped.allclose(StateVector(3, -recognize(complement(base)).state.amplitudes), 1e-12)


def test_collective_paulis():
    n = 6
    rng = np.random.default_rng(5)
    for bits in ("000000", "101100", "111111"):
        k = StateVector.from_bits(bits)
        comp = "".join("1" if b == "0" else "0" for b in bits)
        assert apply_gate(k, collective_pauli("x", n)).allclose(StateVector.from_bits(comp))
        assert apply_gate(k, collective_pauli("y", n)).equal_up_to_phase(StateVector.from_bits(comp))
        assert apply_gate(k, collective_pauli("z", n)).equal_up_to_phase(k)
    # S_z is a weak dephasing by pi
    s = StateVector.random(n, rng)
    assert apply_gate(s, collective_pauli("z", n)).allclose(weak_dephase(s, math.pi), 1e-12)
    with pytest.raises(ValueError):
        collective_pauli("q", 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), phi=st.floats(0, 2 * math.pi))
def test_dephasing_commutes_with_recognition(seed, phi):
    s = StateVector.random(3, np.random.default_rng(seed))
    u = recognition_gate((0, 1, 2))
    a = apply_gate(weak_dephase(s, phi), u)
    b = weak_dephase(apply_gate(s, u), phi)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), phi=st.floats(0, 2 * math.pi))
def test_dephasing_commutes_with_lifted_v(seed, phi):
    g = lift_gate(v_gate(), 6, PAIR_SITE)
    s = StateVector.random(6 + PAIR_SITE.k, np.random.default_rng(seed))
    a = apply_gate(weak_dephase(s, phi), g)
    b = weak_dephase(apply_gate(s, g), phi)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


# ---- enzyme site


@pytest.mark.parametrize("q,k", [(0, 1), (2, 4), (4, 8), (3, 3), (1, 5)])
def test_site_lambda(q, k):
    site = EnzymeSite(q, k)
    assert site.lam == 2 * q - k == lambda_of(site.bits)


def test_site_validation():
    with pytest.raises(ValueError):
        EnzymeSite(5, 4)
    with pytest.raises(ValueError):
        joint_initial("011011", EnzymeSite(2, 4))


@pytest.mark.parametrize("n_base,k", [(1, 2), (2, 3), (3, 4)])
def test_lift_matrix_unitary_and_number_conserving(n_base, k):
    rng = np.random.default_rng(n_base + k)
    m, _ = np.linalg.qr(rng.normal(size=(2**n_base,) * 2) + 1j * rng.normal(size=(2**n_base,) * 2))
    big = lift_matrix(m, n_base, k).toarray()
    dim = 2 ** (n_base + k)
    np.testing.assert_allclose(big.conj().T @ big, np.eye(dim), atol=1e-12)
    ones = np.array([bin(x).count("1") for x in range(dim)])
    assert np.all(np.abs(big[ones[:, None] != ones[None, :]]) < 1e-15)


def test_lifted_cnot_acts_like_cnot():
    site = EnzymeSite(2, 4)
    g = lift_gate(CNOT(0, 1), 2, site)
    for bits, expect in (("10", "11"), ("11", "10"), ("01", "01")):
        out = apply_gate(joint_initial(bits, site), g)
        marg = base_marginal_state(out, 2)
        assert marg.allclose(StateVector.from_bits(expect))
        assert sector_support(out) == {lambda_of(bits + site.bits)}


# ---- audits


def test_audit_empty_sequence():
    report = audit_circuit([], StateVector.from_bits("0101"))
    assert report.passed and report.steps == []


def test_bare_flip_flagged():
    report = audit_circuit([uncompensated_fault(0)], StateVector.from_bits("011"))
    assert not report.passed and report.first_violation == 0
    assert report.steps[0].support == [-3]
    report = audit_circuit([uncompensated_fault(1)], StateVector.from_bits("011"))
    assert report.steps[0].support == [1]


def test_audit_superposition_not_single_sector():
    assert not audit_circuit([], StateVector.from_terms({"00": S2, "11": S2})).passed


def test_audit_with_measurement():
    bell = apply_circuit(StateVector.from_bits("01"), [H(0), CNOT(0, 1)])
    report = audit_circuit([Measure(0, seed=3), X(1)], bell)
    assert report.steps[0].changed is False
    assert report.steps[1].changed is True
    assert report.as_dict()["steps"][0]["name"] == "measure[0]"


@pytest.mark.parametrize("base", BASES)
def test_recognition_audit(base):
    report, joint = recognition_audit(base)
    assert report.passed
    marg = base_marginal_state(joint, 3)
    assert marg.allclose(recognize(base).state, 1e-12)


def test_recognition_audit_fault():
    report, _ = recognition_audit(A, fault_step=0)
    assert not report.passed and report.first_violation == 0


@pytest.mark.parametrize("t,c", list(itertools.product(BASES, BASES)))
def test_protocol_audit_all_pairs(t, c):
    report, joint = protocol_audit(t, c, seed=17)
    assert report.passed, report.as_dict()
    plain, _ = swap_protocol(pair_for(t, c), 17)
    marg = base_marginal_state(joint, 6)
    assert marg is not None and marg.allclose(plain.state, 1e-10)


def test_protocol_audit_fault():
    report, _ = protocol_audit(G, C, fault_step=3)
    assert not report.passed and report.first_violation == 3


def test_pair_site_capacity():
    # every pair register must fit the pair site; the default site is too small
    for t, c in itertools.product(BASES, BASES):
        bits = encode(t, Edge.WC) + encode(c, Edge.WC)
        assert PAIR_SITE.can_host(6, bits)
    assert not EnzymeSite().can_host(6, encode(A, Edge.WC) + encode(T, Edge.WC))


def test_tensor_with_site_keeps_single_sector():
    joint = tensor(recognize(A).state, EnzymeSite().state())
    assert sector_support(joint) == {-1 + EnzymeSite().lam}
    assert custom(np.eye(2), [0]).name()
