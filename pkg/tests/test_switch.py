import numpy as np
import pytest

from combctl.channels import X, depolarizing_channel, pauli_kraus, validate_channel
from combctl.controlled import controlled_two
from combctl.linalg import vectorize
from combctl.switch import (
    concatenated_weights,
    concatenation_residual,
    identity_depolarizing_residual,
    quantum_switch,
    switch_action_pauli,
    switch_block,
    switch_off_diagonal,
    switch_vs_controlled,
)

SEVEN = [np.sqrt(0.7), np.sqrt(0.3), 0, 0]


def ketbra(a, b):
    return np.outer(vectorize(a), vectorize(b).conj())


def test_switch_block_identity():
    assert np.allclose(switch_off_diagonal([1, 0, 0, 0]), ketbra(np.eye(2), np.eye(2)))


def test_switch_block_depolarizing():
    assert np.allclose(switch_off_diagonal([0.5] * 4), ketbra(np.eye(2), np.eye(2)) / 4)


def test_switch_block_seven_three():
    expected = 0.58 * ketbra(np.eye(2), np.eye(2)) + 0.42 * ketbra(X, X)
    assert np.allclose(switch_off_diagonal(SEVEN), expected)


def test_closed_form_matches_kraus_switch():
    rng = np.random.default_rng(3)
    for _ in range(5):
        alpha = np.abs(rng.normal(size=4))
        alpha /= np.linalg.norm(alpha)
        ops = pauli_kraus(alpha).operators
        brute = quantum_switch(ops, ops)
        assert np.allclose(brute.matrix, switch_action_pauli(alpha).matrix, atol=1e-12)
        assert validate_channel(brute).cptp


def test_switch_of_depolarizing_equals_concatenation():
    ops = pauli_kraus([0.5] * 4).operators
    sw = quantum_switch(ops, ops)
    d = depolarizing_channel()
    cc = controlled_two(d, np.eye(2) / 2, d, np.eye(2) / 2)
    assert np.abs(sw.matrix - cc.choi.matrix).max() <= 1e-12
    assert np.allclose(switch_block(sw), ketbra(np.eye(2), np.eye(2)) / 4)


def test_concatenated_weights_of_pauli_x():
    assert np.allclose(concatenated_weights([0, 1, 0, 0]), [1, 0, 0, 0])


def test_compare_depolarizing_matches():
    rep = switch_vs_controlled([0.5] * 4)
    assert rep.match
    assert rep.residual < 1e-6


def test_compare_pauli_operation_matches():
    rep = switch_vs_controlled([0, 1, 0, 0])
    assert rep.match
    # a single Pauli X has a Kraus span too small for the block |I>><<I|; the
    # doubled channel X o X = id is what reproduces it
    assert not rep.match_single and rep.match_concat


def test_compare_seven_three_fails():
    rep = switch_vs_controlled(SEVEN)
    assert not rep.match
    assert rep.residual > 1e-3


def test_identity_tensor_depolarizing_is_not_a_concatenation():
    assert identity_depolarizing_residual() == pytest.approx(np.sqrt(3) / 2, abs=1e-6)


def test_concatenation_residual_exact_rank_one():
    k_ops = [np.eye(2), X]
    target = ketbra(0.6 * np.eye(2), 0.8 * X)
    res, k, l = concatenation_residual(target, k_ops, k_ops)
    assert res < 1e-6
    assert np.allclose(np.outer(k, l.conj()), target, atol=1e-5)


def test_bad_alpha():
    with pytest.raises(ValueError):
        switch_off_diagonal([1, 1, 0, 0])
