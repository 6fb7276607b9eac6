"""Dense complex linear algebra with subsystem bookkeeping.

Vectorization convention: ``|K>> = sum_{mn} <m|K|n> |n>|m>``, so the input
index is the leading tensor factor. With row-major storage this is
``K.T.reshape(-1)``.
"""
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import BudgetError, DimensionError, NotHermitianError, NotUnitaryError

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
PSD_FLOOR = -1e-9
TP_TOL = 1e-9
CHOI_TOL = 1e-10
COMB_TOL = 1e-9

# Largest dense matrix side we agree to build (3**8).
MAX_DENSE_SIDE = 3 ** 8


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def _check_shape(side: int, dims: Sequence[int]):
    if any(int(d) < 1 for d in dims):
        raise DimensionError(f"dims must be positive, got {list(dims)}")
    if int(np.prod(dims)) != side:
        raise DimensionError(f"dims {list(dims)} do not multiply to side {side}")


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``m`` not listed in ``keep``.

    :param m: square matrix on the tensor product of ``dims``
    :param dims: factor dimensions in storage order
    :param keep: indices of the factors to retain (kept in ascending order)
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("partial_trace needs a square matrix")
    dims = [int(d) for d in dims]
    _check_shape(m.shape[0], dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_idx = keep + [n + k for k in keep]
    t = np.einsum(t, row + col, out_idx)
    side = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(side, side)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix or a vector.

    Factor ``perm[i]`` of the input becomes factor ``i`` of the output.
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(len(dims))):
        raise DimensionError(f"{perm} is not a permutation of {len(dims)} factors")
    _check_shape(m.shape[0], dims)
    n = len(dims)
    if m.ndim == 1:
        return m.reshape(dims).transpose(perm).reshape(-1)
    t = m.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    return t.reshape(m.shape)


def vectorize(k) -> np.ndarray:
    """Return ``|K>>`` as a 1-d array with the input index leading."""
    k = np.asarray(k, dtype=complex)
    if k.ndim != 2:
        raise DimensionError("vectorize needs a matrix")
    return k.T.reshape(-1).copy()


def devectorize(v, d_in: int, d_out: int) -> np.ndarray:
    """Inverse of :func:`vectorize`; returns a ``d_out x d_in`` matrix."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != d_in * d_out:
        raise DimensionError(f"vector of length {v.size} cannot be {d_out}x{d_in}")
    return v.reshape(d_in, d_out).T.copy()


def schatten_norm(m, p: float) -> float:
    """Schatten p-norm; ``p = np.inf`` gives the largest singular value."""
    if p < 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s ** p) ** (1.0 / p))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max(initial=0.0) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.abs(dagger(u) @ u - np.eye(u.shape[0])).max() <= tol


def require_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = as_matrix(u)
    if not is_unitary(u, tol):
        raise NotUnitaryError("matrix is not unitary within tolerance")
    return u


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> HermitianSpectrum:
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return HermitianSpectrum(w[::-1].copy(), v[:, ::-1].copy())


def expm_generator(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` through the spectrum of ``h``."""
    spec = hermitian_eig(h)
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * t)) @ dagger(v)


def unitary_eig(u: np.ndarray):
    """Eigenvalues and an orthonormal eigenbasis of a normal matrix."""
    # complex Schur form of a normal matrix is diagonal
    t, z = scipy.linalg.schur(u, output="complex")
    return np.diag(t).copy(), z


def unitary_root(u, n: int, special: bool = False) -> np.ndarray:
    """Principal n-th root of a unitary.

    Eigenphases are taken in (-pi, pi] and divided by ``n``. With
    ``special=True`` the input must have unit determinant and the branches
    of the largest (or smallest) phases are shifted by 2pi so that the root
    has unit determinant as well.
    """
    if n < 1:
        raise ValueError("root order must be positive")
    u = require_unitary(u)
    lam, z = unitary_eig(u)
    phases = np.angle(lam)
    phases[phases <= -np.pi + 1e-12] = np.pi
    if special:
        if abs(np.linalg.det(u) - 1) > 1e-9:
            raise NotUnitaryError("special root needs det(u) = 1")
        k = int(round(phases.sum() / (2 * np.pi)))
        order = np.argsort(phases)
        if k > 0:
            phases[order[::-1][:k]] -= 2 * np.pi
        elif k < 0:
            phases[order[: -k]] += 2 * np.pi
    return (z * np.exp(1j * phases / n)) @ dagger(z)


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def max_abs(m) -> float:
    return float(np.abs(np.asarray(m)).max(initial=0.0))


def check_budget(side: int):
    if side > MAX_DENSE_SIDE:
        raise BudgetError(f"dense side {side} exceeds budget {MAX_DENSE_SIDE}")
