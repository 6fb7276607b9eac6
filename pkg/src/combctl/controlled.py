"""Controlled quantum operations on a control qubit and a target system.

Choi operators of controlled channels are stored with factor order
``(control_in, target_in, control_out, target_out)``. Control blocks are
addressed by the pair ``(control_in, control_out)`` on each side, so the
block ``<00|J|11>`` is ``control_block(J, (0, 0), (1, 1))``.
"""
from dataclasses import dataclass

import numpy as np

from .channels import (
    ChoiMatrix,
    KrausSet,
    apply_channel,
    choi_to_orthogonal_kraus,
    identity_channel,
    kraus_to_choi,
)
from .errors import DimensionError, InvalidCoherenceError
from .linalg import as_matrix, dagger, kron, max_abs, schatten_norm, vectorize

SPAN_TOL = 1e-9
NORM_TOL = 1e-9
AXIOM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CoherenceOperator:
    """An operator ``K = sum_i beta_i K~_i`` in the span of orthogonal Kraus operators."""

    k: np.ndarray
    beta: np.ndarray
    basis: KrausSet
    residual: float

    @property
    def norm(self) -> float:
        """``Tr K^dag K``."""
        return float(np.real(np.trace(dagger(self.k) @ self.k)))


@dataclass(frozen=True, eq=False)
class ControlledChannel:
    choi: ChoiMatrix
    k: CoherenceOperator
    theta: float = 0.0

    @property
    def d_in(self) -> int:
        return self.choi.d_in // 2

    @property
    def d_out(self) -> int:
        return self.choi.d_out // 2

    def block(self, row, col) -> np.ndarray:
        return control_block(self.choi, row, col)

    @property
    def target(self) -> ChoiMatrix:
        return ChoiMatrix(self.block((1, 1), (1, 1)), self.d_in, self.d_out)


@dataclass(frozen=True)
class AxiomReport:
    control_preserved: bool
    branch0_identity: bool
    branch1_matches: bool
    residuals: tuple

    @property
    def passed(self) -> bool:
        return self.control_preserved and self.branch0_identity and self.branch1_matches


def coherence_operator(a: ChoiMatrix, k, basis: KrausSet = None) -> CoherenceOperator:
    """Decompose ``k`` against the orthogonal Kraus operators of ``a``.

    Raises :class:`InvalidCoherenceError` when ``k`` leaves the Kraus span
    or when ``sum |beta|^2 > 1``.
    """
    k = as_matrix(k)
    basis = choi_to_orthogonal_kraus(a) if basis is None else basis
    if k.shape != (basis.d_out, basis.d_in):
        raise DimensionError(f"coherence operator must be {basis.d_out}x{basis.d_in}")
    ops = np.array(basis.operators)
    norms = np.einsum("kij,kij->k", ops.conj(), ops).real
    beta = np.einsum("kij,ij->k", ops.conj(), k) / np.where(norms > 0, norms, 1)
    residual = float(np.linalg.norm(k - np.einsum("k,kij->ij", beta, ops)))
    if residual > SPAN_TOL:
        raise InvalidCoherenceError(f"operator is outside the Kraus span (residual {residual:.2e})")
    weight = float(np.sum(np.abs(beta) ** 2))
    if weight > 1 + NORM_TOL:
        raise InvalidCoherenceError(f"sum |beta|^2 = {weight:.6f} exceeds 1")
    return CoherenceOperator(k, beta, basis, residual)


def _as_coherence(a: ChoiMatrix, k) -> CoherenceOperator:
    return k if isinstance(k, CoherenceOperator) else coherence_operator(a, k)


def assemble_controlled(j0, j1, off, d_in: int, d_out: int) -> np.ndarray:
    """Build ``|00><00| j0 + |11><11| j1 + |00><11| off + h.c.`` in storage order."""
    t = np.zeros((2, d_in, 2, d_out) * 2, dtype=complex)
    shape = (d_in, d_out, d_in, d_out)
    t[0, :, 0, :, 0, :, 0, :] = np.reshape(j0, shape)
    t[1, :, 1, :, 1, :, 1, :] = np.reshape(j1, shape)
    t[0, :, 0, :, 1, :, 1, :] = np.reshape(off, shape)
    t[1, :, 1, :, 0, :, 0, :] = np.reshape(dagger(np.asarray(off)), shape)
    side = 4 * d_in * d_out
    return t.reshape(side, side)


def control_block(j: ChoiMatrix, row, col) -> np.ndarray:
    """Target block of a controlled Choi for control indices ``(c_in, c_out)``."""
    d_in, d_out = j.d_in // 2, j.d_out // 2
    t = j.matrix.reshape((2, d_in, 2, d_out) * 2)
    b = t[row[0], :, row[1], :, col[0], :, col[1], :]
    return b.reshape(d_in * d_out, d_in * d_out)


def flip_control(j: ChoiMatrix) -> ChoiMatrix:
    """Conjugate by X on the control, i.e. swap the roles of |0> and |1>."""
    d_in, d_out = j.d_in // 2, j.d_out // 2
    t = j.matrix.reshape((2, d_in, 2, d_out) * 2)[::-1, :, ::-1, :, ::-1, :, ::-1, :]
    return ChoiMatrix(t.reshape(j.matrix.shape).copy(), j.d_in, j.d_out)


def _square(a: ChoiMatrix):
    if a.d_in != a.d_out:
        raise DimensionError("controlled operations need d_in = d_out")
    return a.d_in


def classical_controlled(a: ChoiMatrix) -> ControlledChannel:
    d = _square(a)
    j = assemble_controlled(identity_channel(d).matrix, a.matrix, np.zeros((d * d, d * d)), d, d)
    zero = coherence_operator(a, np.zeros((d, d)))
    return ControlledChannel(ChoiMatrix(j, 2 * d, 2 * d), zero)


def controlled_with_K(a: ChoiMatrix, k, theta: float = 0.0) -> ControlledChannel:
    """Controlled version of ``a`` with coherence block ``|I>><<K|``."""
    d = _square(a)
    coh = _as_coherence(a, k)
    off = np.outer(vectorize(np.eye(d)), vectorize(coh.k).conj())
    j = assemble_controlled(identity_channel(d).matrix, a.matrix, off, d, d)
    return ControlledChannel(ChoiMatrix(j, 2 * d, 2 * d), coh, theta)


def controlled_unitary(u, theta: float = 0.0) -> ControlledChannel:
    """Fully coherent control of ``u`` with the branch phase ``exp(i theta)``."""
    u = as_matrix(u)
    return controlled_with_K(kraus_to_choi([u]), np.exp(1j * theta) * u, theta)


def coherence_norm(cc: ControlledChannel, p: float) -> float:
    """Schatten p-norm of the difference from the classically controlled channel."""
    delta = cc.choi.matrix - classical_controlled(cc.target).choi.matrix
    return schatten_norm(delta, p)


def most_coherent_K(a: ChoiMatrix, alpha=None) -> CoherenceOperator:
    """A coherence operator of maximal ``Tr K^dag K``.

    Without ``alpha`` the representative is the normalized projection of
    the identity onto the span of the maximal-norm Kraus operators; if that
    projection vanishes, the first maximal Kraus operator is used with its
    largest entry made real and positive.
    """
    basis = choi_to_orthogonal_kraus(a)
    ops = np.array(basis.operators)
    norms = np.einsum("kij,kij->k", ops.conj(), ops).real
    top = norms.max()
    amax = np.flatnonzero(norms >= top - 1e-9 * max(1.0, top))
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=complex)
        if alpha.shape != amax.shape or abs(np.sum(np.abs(alpha) ** 2) - 1) > NORM_TOL:
            raise InvalidCoherenceError(f"alpha must be a unit vector of length {amax.size}")
        k = np.einsum("k,kij->ij", alpha.conj(), ops[amax])
        return coherence_operator(a, k, basis)
    c = np.zeros(amax.size, dtype=complex)
    if basis.d_in == basis.d_out:
        c = np.trace(ops[amax], axis1=1, axis2=2).conj() / norms[amax]
    if np.linalg.norm(c) > 1e-9:
        k = np.einsum("k,kij->ij", c / np.linalg.norm(c), ops[amax])
    else:
        k = ops[amax[0]]
        flat = k.reshape(-1)
        big = flat[np.argmax(np.abs(flat))]
        k = k * (abs(big) / big)
    return coherence_operator(a, k, basis)


def axioms_check(cc: ControlledChannel, a: ChoiMatrix, tol: float = AXIOM_TOL) -> AxiomReport:
    """Check control preservation and the two conditional branches.

    Inputs ``|c><c| (x) E_ij`` are fed for every matrix unit ``E_ij``.
    """
    d = cc.d_in
    if cc.d_out != d or (a.d_in, a.d_out) != (d, d):
        raise DimensionError("controlled channel and target do not match")
    leak = branch0 = branch1 = 0.0
    for c in (0, 1):
        proj = np.zeros((2, 2))
        proj[c, c] = 1
        for i in range(d):
            for jj in range(d):
                e = np.zeros((d, d))
                e[i, jj] = 1
                out = apply_channel(cc.choi, kron(proj, e)).reshape(2, d, 2, d)
                branch = out[c, :, c, :].copy()
                out[c, :, c, :] = 0
                leak = max(leak, max_abs(out))
                if c == 0:
                    branch0 = max(branch0, max_abs(branch - e))
                else:
                    branch1 = max(branch1, max_abs(branch - apply_channel(a, e)))
    return AxiomReport(leak <= tol, branch0 <= tol, branch1 <= tol, (leak, branch0, branch1))


def controlled_two(a: ChoiMatrix, k, b: ChoiMatrix, l) -> ControlledChannel:
    """Control between two channels: ``a`` on |0> and ``b`` on |1>.

    The coherence block is ``<00|J|11> = |K>><<L|``.
    """
    d = _square(a)
    if _square(b) != d:
        raise DimensionError("both channels must act on the same system")
    kk = _as_coherence(a, k)
    ll = _as_coherence(b, l)
    off = np.outer(vectorize(kk.k), vectorize(ll.k).conj())
    j = assemble_controlled(a.matrix, b.matrix, off, d, d)
    return ControlledChannel(ChoiMatrix(j, 2 * d, 2 * d), ll)
