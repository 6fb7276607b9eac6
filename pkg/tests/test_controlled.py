import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combctl.channels import (
    X,
    ChoiMatrix,
    choi_to_orthogonal_kraus,
    compose,
    depolarizing_channel,
    identity_channel,
    kraus_to_choi,
    pauli_channel,
    unitary_channel,
    validate_channel,
)
from combctl.controlled import (
    ControlledChannel,
    axioms_check,
    classical_controlled,
    coherence_norm,
    coherence_operator,
    control_block,
    controlled_two,
    controlled_unitary,
    controlled_with_K,
    flip_control,
    most_coherent_K,
)
from combctl.errors import InvalidCoherenceError
from combctl.linalg import vectorize
from combctl.sampling import haar_unitary, random_kraus

seeds = st.integers(0, 2**31 - 1)


def cu_matrix(u):
    d = u.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = np.eye(d)
    out[d:, d:] = u
    return out


def random_coherence(a, rng):
    basis = choi_to_orthogonal_kraus(a)
    beta = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    beta *= rng.uniform(0, 1) / np.linalg.norm(beta)
    return sum(b * k for b, k in zip(beta, basis.operators))


def test_controlled_unitary_matches_circuit():
    u = haar_unitary(2, 11)
    cc = controlled_with_K(unitary_channel(u), u)
    assert np.allclose(cc.choi.matrix, unitary_channel(cu_matrix(u)).matrix)
    assert np.allclose(controlled_unitary(u).choi.matrix, cc.choi.matrix)


def test_classical_control_of_unitary():
    u = haar_unitary(2, 3)
    full = unitary_channel(cu_matrix(u)).matrix.reshape((2, 2, 2, 2) * 2)
    # measuring the control kills the blocks with mismatched control labels
    keep = np.zeros((2, 2, 2, 2), dtype=bool)
    keep[0, 0, 0, 0] = keep[1, 1, 1, 1] = True
    mask = keep[:, None, :, None, :, None, :, None]
    expected = (full * mask).reshape(16, 16)
    assert np.allclose(classical_controlled(unitary_channel(u)).choi.matrix, expected)


def test_classical_control_of_identity():
    cc = classical_controlled(identity_channel(2))
    assert np.allclose(cc.block((0, 0), (0, 0)), identity_channel(2).matrix)
    assert np.allclose(cc.block((1, 1), (1, 1)), identity_channel(2).matrix)
    assert np.allclose(cc.block((0, 0), (1, 1)), 0)


def test_zero_coherence_is_classical():
    a = kraus_to_choi(random_kraus(2, 2, 3, seed=4))
    assert np.allclose(controlled_with_K(a, np.zeros((2, 2))).choi.matrix, classical_controlled(a).choi.matrix)


def test_depolarizing_with_half_identity():
    cc = controlled_with_K(depolarizing_channel(), np.eye(2) / 2)
    ii = np.outer(vectorize(np.eye(2)), vectorize(np.eye(2)))
    assert np.allclose(cc.block((0, 0), (1, 1)), ii / 2)
    assert validate_channel(cc.choi).cptp


def test_coherence_norm_examples():
    u = haar_unitary(2, 5)
    assert coherence_norm(controlled_unitary(u), 1) == pytest.approx(4)
    assert coherence_norm(classical_controlled(unitary_channel(u)), 1) == pytest.approx(0)
    cc = controlled_with_K(depolarizing_channel(), np.eye(2) / 2)
    assert coherence_norm(cc, 2) == pytest.approx(np.sqrt(2))


def test_coherence_rejects_out_of_span_and_overweight():
    with pytest.raises(InvalidCoherenceError):
        coherence_operator(unitary_channel(np.eye(2)), X)
    with pytest.raises(InvalidCoherenceError):
        coherence_operator(depolarizing_channel(), np.eye(2))


def test_most_coherent_examples():
    u = haar_unitary(3, 6)
    k = most_coherent_K(unitary_channel(u))
    assert k.norm == pytest.approx(3)
    assert abs(np.vdot(k.k, u)) == pytest.approx(3)
    k = most_coherent_K(depolarizing_channel())
    assert k.norm == pytest.approx(0.5)
    assert np.allclose(k.k, np.eye(2) / 2)
    k = most_coherent_K(pauli_channel([np.sqrt(0.7), np.sqrt(0.3), 0, 0]))
    # Tr (sqrt(.7) I)^dag (sqrt(.7) I) = 0.7 * d
    assert k.norm == pytest.approx(1.4)
    assert np.allclose(k.k, np.sqrt(0.7) * np.eye(2))


def test_most_coherent_with_alpha():
    alpha = np.array([0, 1j, 0, 0])
    k = most_coherent_K(depolarizing_channel(), alpha)
    assert k.norm == pytest.approx(0.5)
    with pytest.raises(InvalidCoherenceError):
        most_coherent_K(depolarizing_channel(), 2 * alpha)


def test_depolarizing_family_norm_bound():
    # every admissible K for the depolarizing channel has Tr K^dag K <= 1/2
    rng = np.random.default_rng(0)
    for _ in range(50):
        alpha = rng.normal(size=4) + 1j * rng.normal(size=4)
        alpha /= np.linalg.norm(alpha)
        assert most_coherent_K(depolarizing_channel(), alpha).norm == pytest.approx(0.5)


def test_axioms_pass_and_fail():
    a = kraus_to_choi(random_kraus(2, 2, 2, seed=9))
    assert axioms_check(classical_controlled(a), a).passed
    swap = np.eye(4)[[0, 2, 1, 3]]
    fake = ControlledChannel(unitary_channel(swap), None)
    rep = axioms_check(fake, identity_channel(2))
    assert not rep.control_preserved


def test_controlled_two_examples():
    b = kraus_to_choi(random_kraus(2, 2, 2, seed=1))
    l = most_coherent_K(b).k
    two = controlled_two(identity_channel(2), np.eye(2), b, l)
    assert np.allclose(two.choi.matrix, controlled_with_K(b, l).choi.matrix)
    dd = controlled_two(depolarizing_channel(), np.eye(2) / 2, depolarizing_channel(), np.eye(2) / 2)
    ii = np.outer(vectorize(np.eye(2)), vectorize(np.eye(2)))
    assert np.allclose(dd.block((0, 0), (1, 1)), ii / 4)


def test_controlled_two_is_concatenation():
    a = kraus_to_choi(random_kraus(2, 2, 2, seed=2))
    b = kraus_to_choi(random_kraus(2, 2, 3, seed=3))
    k, l = most_coherent_K(a).k, most_coherent_K(b).k
    seq = compose(flip_control(controlled_with_K(a, k).choi), controlled_with_K(b, l).choi)
    assert np.allclose(controlled_two(a, k, b, l).choi.matrix, seq.matrix)


def test_flip_control_involution():
    cc = controlled_unitary(haar_unitary(2, 8))
    flipped = flip_control(cc.choi)
    assert np.allclose(control_block(flipped, (0, 0), (0, 0)), cc.block((1, 1), (1, 1)))
    assert np.allclose(flip_control(flipped).matrix, cc.choi.matrix)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 3), st.sampled_from([1, 2]))
def test_coherence_eigenvalue_law(seed, d, p):
    rng = np.random.default_rng(seed)
    a = kraus_to_choi(random_kraus(d, d, 3, rng))
    k = random_coherence(a, rng)
    cc = controlled_with_K(a, k)
    expected = 2 ** (1 / p) * np.sqrt(d) * np.sqrt(np.trace(k.conj().T @ k).real)
    assert coherence_norm(cc, p) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 3))
def test_controlled_is_cptp_and_satisfies_axioms(seed, d):
    rng = np.random.default_rng(seed)
    a = kraus_to_choi(random_kraus(d, d, 2, rng))
    cc = controlled_with_K(a, random_coherence(a, rng))
    assert validate_channel(cc.choi).cptp
    assert axioms_check(cc, a).passed


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_controlled_two_is_cptp(seed):
    rng = np.random.default_rng(seed)
    a = kraus_to_choi(random_kraus(2, 2, 2, rng))
    b = kraus_to_choi(random_kraus(2, 2, 3, rng))
    two = controlled_two(a, random_coherence(a, rng), b, random_coherence(b, rng))
    assert validate_channel(two.choi).cptp


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(-np.pi, np.pi))
def test_phase_covariance(seed, phi):
    # moving a global phase between U and the branch phase leaves the Choi unchanged
    u = haar_unitary(2, seed)
    a = controlled_unitary(np.exp(1j * phi) * u, -phi)
    assert np.allclose(a.choi.matrix, controlled_unitary(u, 0.0).choi.matrix)
