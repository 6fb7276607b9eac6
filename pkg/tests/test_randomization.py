import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combctl.channels import PAULIS, X, Y, Z, choi_distance, identity_channel, pauli_channel, pauli_decompose, unitary_channel
from combctl.combs import check_comb_choi, comb_kraus_conditions, most_coherent_S
from combctl.controllization.randomization import (
    CLIFFORD_COSETS,
    analytic_coefficients,
    clifford_set,
    fit_loglog_slope,
    maps_paulis_to_paulis,
    pauli_set,
    pauli_twirl_coefficients,
    pauli_vs_clifford,
    randomization_comb,
    randomization_step_choi,
    randomized_channel,
    randomized_coefficients,
    randomized_controllization,
    sampled_controlled_choi,
    scaling_records,
)
from combctl.errors import DimensionError
from combctl.linalg import expm_generator
from combctl.sampling import haar_unitary, random_hermitian

seeds = st.integers(0, 2**31 - 1)


def pauli_s0_oracle():
    return sum(np.kron(s, s) for s in PAULIS) / 4


def test_sets():
    assert pauli_set().size == 4
    cl = clifford_set()
    assert cl.size == 24
    assert all(maps_paulis_to_paulis(u) for u in cl.unitaries)
    # distinct as channels: no two differ by a global phase
    for i, a in enumerate(cl.unitaries):
        for b in cl.unitaries[i + 1:]:
            assert abs(abs(np.trace(a.conj().T @ b)) - 2) > 1e-6
    assert not maps_paulis_to_paulis(expm_generator(Z, 0.3))


def test_coset_permutations():
    # each representative permutes the axes as its label says
    axes = {1: X, 2: Y, 3: Z}
    for label, v in CLIFFORD_COSETS.items():
        images = []
        for k in (1, 2, 3):
            q = v @ axes[k] @ v.conj().T
            images.append(int(np.argmax([abs(np.trace(s @ q)) for s in PAULIS])))
        assert sorted(images) == [1, 2, 3]
        if label == "id":
            assert images == [1, 2, 3]


def test_randomization_comb_is_valid():
    for rset in (pauli_set(), clifford_set()):
        comb = randomization_comb(rset)
        assert comb_kraus_conditions(comb).valid
        assert check_comb_choi(comb.to_choi()).valid


def test_step_examples():
    assert np.allclose(randomization_step_choi(np.eye(2), pauli_set()).matrix, identity_channel(2).matrix)
    assert np.allclose(randomization_step_choi(X, pauli_set()).matrix, unitary_channel(X).matrix)


def test_small_step_series():
    dt = 1e-3
    c = pauli_decompose(randomization_step_choi(expm_generator(Z, dt), pauli_set())).diagonal()
    assert np.allclose(c, [np.cos(dt) ** 2, 0, 0, np.sin(dt) ** 2], atol=1e-15)
    pred = analytic_coefficients(Z, dt, 1, "pauli").c
    assert np.allclose(c, pred, atol=1e-11)


def test_twirl_coefficients_keep_diagonal():
    c = pauli_decompose(unitary_channel(haar_unitary(2, 3))).c
    tw = pauli_twirl_coefficients(c)
    assert np.allclose(tw, np.diag(np.diag(c)))
    direct = pauli_decompose(randomization_step_choi(haar_unitary(2, 3), pauli_set())).c
    assert np.allclose(direct, tw)


def test_zero_hamiltonian():
    res = randomized_controllization(np.zeros((2, 2)), 1.0, 8, pauli_set())
    assert res.error == pytest.approx(0, abs=1e-12)
    assert randomized_coefficients(np.zeros((2, 2)), 1.0, 10, pauli_set()).c[0] == pytest.approx(1, abs=1e-14)


def test_traceless_error_decays():
    e16 = randomized_controllization(Z, 1.0, 16, pauli_set()).error
    e256 = randomized_controllization(Z, 1.0, 256, pauli_set()).error
    assert e256 < e16 / 8


def test_phase_law():
    h = Z + 0.8 * np.eye(2)
    res = randomized_controllization(h, 1.0, 1024, pauli_set())
    assert res.phase == pytest.approx(0.8, abs=1e-6)


def test_coefficient_examples():
    c = randomized_coefficients(Z, 1.0, 100, pauli_set()).c
    assert c[3] == pytest.approx(0.01, abs=1e-4)
    c = randomized_coefficients(Z, 1.0, 100, clifford_set()).c
    assert np.allclose(c[1:], 1 / 300, atol=1e-4)
    assert max(c[1:]) - min(c[1:]) < 1e-12


def test_c0_residual_is_third_order():
    h = random_hermitian(2, norm=1.0, seed=3)
    diffs = []
    for n in (100, 200):
        meas = randomized_coefficients(h, 1.0, n, pauli_set()).c[0]
        diffs.append(abs(meas - analytic_coefficients(h, 1.0, n, "pauli").c[0]))
    assert diffs[0] / diffs[1] == pytest.approx(8, rel=0.1)


def test_degenerate_single_axis_hamiltonian():
    p = analytic_coefficients(Z, 1.0, 32, "pauli").c[0]
    c = analytic_coefficients(Z, 1.0, 32, "clifford").c[0]
    # a = (0, 0, 1): pauli 1/n^2 term is (1 + 1)/2 = 1, clifford is 2/3
    assert p - c == pytest.approx((1 - 2 / 3) / 32 ** 2)


def test_clifford_not_better_generic():
    h = (X + Z) / np.sqrt(2)
    rep = pauli_vs_clifford(h, 1.0, [32])
    row = rep.rows[0]
    assert row.c0_pauli - row.c0_clifford > 0
    assert rep.clifford_not_better
    assert rep.same_s0


def test_s0_is_pauli_sum():
    for rset in (pauli_set(), clifford_set()):
        s0 = most_coherent_S(randomization_comb(rset))
        assert np.allclose(s0.circuit_operator, pauli_s0_oracle(), atol=1e-10)
    s = most_coherent_S(randomization_comb(pauli_set()))
    assert s.norm == pytest.approx(1)


def test_sampled_mode_is_worker_independent():
    u = expm_generator(random_hermitian(2, seed=1), 0.1)
    a = sampled_controlled_choi(u, pauli_set(), 5, seed=3, trials=600, workers=1)
    b = sampled_controlled_choi(u, pauli_set(), 5, seed=3, trials=600, workers=3)
    assert np.array_equal(a.matrix, b.matrix)


def test_sampled_mode_approaches_average():
    h = random_hermitian(2, norm=1.0, seed=2)
    avg = randomized_controllization(h, 1.0, 8, pauli_set())
    smp = randomized_controllization(h, 1.0, 8, pauli_set(), seed=1, mode="sampled", trials=4000)
    assert choi_distance(avg.choi, smp.choi) < 0.02


def test_rejects_non_qubit():
    with pytest.raises(DimensionError):
        randomized_controllization(np.eye(3), 1.0, 4, pauli_set())
    with pytest.raises(ValueError):
        randomized_controllization(Z, 1.0, 4, pauli_set(), mode="bogus")


def test_scaling_slope():
    h = random_hermitian(2, norm=1.0, seed=7)
    recs = scaling_records(h, 1.0, [4, 8, 16, 32, 64, 128, 256], pauli_set())
    assert fit_loglog_slope(recs) == pytest.approx(-1, abs=0.15)


def test_pauli_channel_coefficients_agree():
    alpha = np.array([0.8, 0.4, 0.4, 0.2])
    c = pauli_decompose(pauli_channel(alpha)).diagonal()
    assert np.allclose(c, alpha ** 2)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_randomized_channel_is_pauli_diagonal(seed):
    h = random_hermitian(2, norm=1.0, seed=seed)
    c = pauli_decompose(randomized_channel(h, 1.0, 5, pauli_set())).c
    assert np.allclose(c - np.diag(np.diag(c)), 0, atol=1e-12)
    assert np.sum(np.diag(c)).real == pytest.approx(1)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_clifford_trio_equal(seed):
    h = random_hermitian(2, norm=1.0, seed=seed)
    c = randomized_coefficients(h, 1.0, 20, clifford_set()).c
    assert max(c[1:]) - min(c[1:]) < 1e-12
