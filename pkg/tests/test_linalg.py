import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combctl.errors import DimensionError, NotHermitianError, NotUnitaryError
from combctl.linalg import (
    devectorize,
    expm_generator,
    hermitian_eig,
    kron,
    partial_trace,
    permute_subsystems,
    schatten_norm,
    unitary_root,
    vectorize,
)
from combctl.sampling import haar_special_unitary, haar_unitary, random_density, random_hermitian

seeds = st.integers(0, 2**31 - 1)
dims = st.integers(2, 3)


def test_partial_trace_of_product():
    a = random_density(2, seed=1)
    b = random_density(3, seed=2)
    m = kron(a, b)
    assert np.allclose(partial_trace(m, [2, 3], [0]), a)
    assert np.allclose(partial_trace(m, [2, 3], [1]), b)


def test_partial_trace_bell_is_maximally_mixed():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(bell, bell), [2, 2], [0]), np.eye(2) / 2)


def test_partial_trace_bad_dims():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), [2, 3], [0])


def test_vectorize_matches_column_stacking_of_transpose():
    k = np.arange(6).reshape(3, 2) + 0j
    v = vectorize(k)
    # <n|<m| |K>> = <m|K|n> with the input index n leading
    for n in range(2):
        for m in range(3):
            assert v[n * 3 + m] == k[m, n]


def test_devectorize_basis_vector():
    k = devectorize(np.array([0, 1, 0, 0]), 2, 2)
    assert k[1, 0] == 1
    assert np.count_nonzero(k) == 1


def test_schatten_norms_of_diagonal():
    m = np.diag([3.0, -4.0])
    assert schatten_norm(m, 1) == pytest.approx(7)
    assert schatten_norm(m, 2) == pytest.approx(5)
    assert schatten_norm(m, np.inf) == pytest.approx(4)
    with pytest.raises(ValueError):
        schatten_norm(m, 0.5)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_expm_generator_pauli_z():
    z = np.diag([1.0, -1.0])
    assert np.allclose(expm_generator(z, 0.3), np.diag(np.exp([-0.3j, 0.3j])))


def test_unitary_root_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        unitary_root(np.array([[1, 1], [0, 1]]), 2)


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_vectorize_roundtrip(seed, d):
    k = np.random.default_rng(seed).normal(size=(d + 1, d)) + 0j
    assert np.allclose(devectorize(vectorize(k), d, d + 1), k)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_vectorize_tensor_identity(seed):
    # (I (x) A)|B>> = |A B>>
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(kron(np.eye(2), a) @ vectorize(b), vectorize(a @ b))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_partial_trace_preserves_trace(seed):
    rho = random_density(12, seed=seed)
    for keep in ([0], [1], [0, 2], [1, 2]):
        assert np.trace(partial_trace(rho, [2, 3, 2], keep)) == pytest.approx(1)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_permute_subsystems_of_product(seed):
    ops = [random_density(d, seed=seed + d) for d in (2, 3, 2)]
    out = permute_subsystems(kron(*ops), [2, 3, 2], [2, 0, 1])
    assert np.allclose(out, kron(ops[2], ops[0], ops[1]))


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_spectrum_reconstructs(seed, d):
    h = random_hermitian(d, seed=seed)
    spec = hermitian_eig(h)
    assert np.all(np.diff(spec.eigenvalues) <= 1e-12)
    assert np.allclose(spec.reconstruct(), h)


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.integers(1, 5))
def test_unitary_root_power(seed, d, n):
    u = haar_unitary(d, seed)
    v = unitary_root(u, n)
    assert np.allclose(np.linalg.matrix_power(v, n), u, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_special_root_has_unit_determinant(seed, d):
    u = haar_special_unitary(d, seed)
    v = unitary_root(u, d, special=True)
    assert np.linalg.det(v) == pytest.approx(1, abs=1e-10)
    assert np.allclose(np.linalg.matrix_power(v, d), u, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.0, 2.0))
def test_schatten_p2_is_frobenius(seed, scale):
    m = scale * random_hermitian(3, seed=seed)
    assert schatten_norm(m, 2) == pytest.approx(np.linalg.norm(m), abs=1e-12)
