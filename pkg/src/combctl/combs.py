"""N-slot quantum combs.

A comb with ``N`` slots lives on ``H_0 (x) H_1 (x) ... (x) H_{2N+1}``; slot
``k`` (1-based) takes its input from ``H_{2k-1}`` and returns it on
``H_{2k}``. Comb Choi matrices and comb vectors are stored with factors in
ascending order.

Two operator views of a comb vector are used:

* link view: ``S : H_1 ... H_{2N} -> H_0 (x) H_{2N+1}``
* circuit view: ``T : H_0 H_2 ... H_{2N} -> H_1 H_3 ... H_{2N+1}``

Controlled combs merge the control qubit into the outer spaces, giving the
shape ``[2 d_0, d_1, ..., d_{2N}, 2 d_{2N+1}]`` with the control as the
leading factor of both outer spaces.
"""
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .channels import ChoiMatrix, choi_to_orthogonal_kraus
from .errors import DimensionError, InvalidCoherenceError
from .linalg import (
    COMB_TOL,
    PSD_FLOOR,
    as_matrix,
    check_budget,
    dagger,
    devectorize,
    kron,
    max_abs,
    partial_trace,
    permute_subsystems,
    vectorize,
)
from .sampling import haar_isometry, rng_from

SPAN_TOL = 1e-9


@dataclass(frozen=True)
class CombShape:
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) < 2 or len(self.dims) % 2:
            raise DimensionError(f"a comb needs an even number (>= 2) of spaces, got {len(self.dims)}")
        if min(self.dims) < 1:
            raise DimensionError("comb dimensions must be positive")

    @property
    def slots(self) -> int:
        return len(self.dims) // 2 - 1

    @property
    def side(self) -> int:
        return int(np.prod(self.dims))

    @property
    def last(self) -> int:
        return len(self.dims) - 1

    @property
    def mid(self) -> int:
        return int(np.prod(self.dims[1:-1]))

    def slot_dims(self, k: int):
        """``(d_in, d_out)`` of slot ``k`` (0-based)."""
        return self.dims[2 * k + 1], self.dims[2 * k + 2]

    def controlled(self) -> "CombShape":
        d = list(self.dims)
        d[0] *= 2
        d[-1] *= 2
        return CombShape(tuple(d))


def uniform_shape(slots: int, d: int) -> CombShape:
    return CombShape((d,) * (2 * slots + 2))


@dataclass(frozen=True, eq=False)
class CombChoi:
    matrix: np.ndarray
    shape: CombShape

    def __post_init__(self):
        if self.matrix.shape != (self.shape.side, self.shape.side):
            raise DimensionError(f"comb matrix {self.matrix.shape} does not match dims {self.shape.dims}")


@dataclass(frozen=True, eq=False)
class CombKraus:
    """Comb given by Kraus vectors (rows of ``vectors``) in ascending factor order."""

    vectors: np.ndarray
    shape: CombShape

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.shape.side:
            raise DimensionError(f"Kraus vectors {self.vectors.shape} do not match dims {self.shape.dims}")

    @classmethod
    def from_operators(cls, operators: Sequence, shape: CombShape) -> "CombKraus":
        """Build from link-view operators ``H_1..H_{2N} -> H_0 H_{2N+1}``."""
        return cls(np.array([link_operator_to_vector(s, shape) for s in operators]), shape)

    @property
    def operators(self) -> list:
        return [vector_to_link_operator(v, self.shape) for v in self.vectors]

    def to_choi(self) -> CombChoi:
        check_budget(self.shape.side)
        v = self.vectors
        return CombChoi(v.T @ v.conj(), self.shape)


@dataclass(frozen=True, eq=False)
class CoherenceOperatorS:
    """A comb vector ``S = sum_i beta_i S~_i`` in the span of orthogonal comb Kraus vectors."""

    vector: np.ndarray
    beta: np.ndarray
    basis: np.ndarray
    shape: CombShape
    residual: float

    @property
    def norm(self) -> float:
        return float(np.real(np.vdot(self.vector, self.vector)))

    @property
    def link_operator(self) -> np.ndarray:
        return vector_to_link_operator(self.vector, self.shape)

    @property
    def circuit_operator(self) -> np.ndarray:
        return vector_to_circuit_operator(self.vector, self.shape)


@dataclass(frozen=True)
class CombReport:
    cp: bool
    min_eigenvalue: float
    chain: tuple
    normalization: float
    tol: float = COMB_TOL

    @property
    def valid(self) -> bool:
        return self.cp and all(r <= self.tol for r in self.chain) and self.normalization <= self.tol


@dataclass(frozen=True)
class CombKrausReport:
    levels: tuple
    final: float
    tol: float = COMB_TOL

    @property
    def valid(self) -> bool:
        return all(r <= self.tol for r in self.levels) and self.final <= self.tol


def _link_order(n_spaces: int):
    # storage positions of (H_1..H_2N, H_0, H_2N+1) expressed as a permutation to ascending
    last = n_spaces - 1
    return [last - 1] + list(range(last - 1)) + [last]


def link_operator_to_vector(s, shape: CombShape) -> np.ndarray:
    s = as_matrix(s)
    d = shape.dims
    if s.shape != (d[0] * d[-1], shape.mid):
        raise DimensionError(f"link operator must be {d[0] * d[-1]}x{shape.mid}")
    src = list(d[1:-1]) + [d[0], d[-1]]
    return permute_subsystems(vectorize(s), src, _link_order(len(d)))


def vector_to_link_operator(v, shape: CombShape) -> np.ndarray:
    d = shape.dims
    n = len(d)
    t = np.asarray(v, dtype=complex).reshape(d).transpose(list(range(1, n - 1)) + [0, n - 1])
    return devectorize(t.reshape(-1), shape.mid, d[0] * d[-1])


def _parity_order(n: int):
    return list(range(0, n, 2)) + list(range(1, n, 2))


def vector_to_circuit_operator(v, shape: CombShape) -> np.ndarray:
    d = shape.dims
    order = _parity_order(len(d))
    t = np.asarray(v, dtype=complex).reshape(d).transpose(order)
    return devectorize(t.reshape(-1), int(np.prod(d[0::2])), int(np.prod(d[1::2])))


def circuit_operator_to_vector(t, shape: CombShape) -> np.ndarray:
    d = shape.dims
    order = _parity_order(len(d))
    src = [d[i] for i in order]
    return permute_subsystems(vectorize(as_matrix(t)), src, list(np.argsort(order)))


def identity_comb_vector(shape: CombShape) -> np.ndarray:
    d = shape.dims
    if any(d[2 * k] != d[2 * k + 1] for k in range(len(d) // 2)):
        raise DimensionError("identity comb needs d_{2k} = d_{2k+1}")
    return kron(*[vectorize(np.eye(d[2 * k])) for k in range(len(d) // 2)])


def identity_comb(shape: CombShape) -> CombChoi:
    check_budget(shape.side)
    v = identity_comb_vector(shape)
    return CombChoi(np.outer(v, v.conj()), shape)


def identity_comb_kraus(shape: CombShape) -> CombKraus:
    return CombKraus(identity_comb_vector(shape)[None, :], shape)


def slot_identity_vector(shape: CombShape) -> np.ndarray:
    """``|I>>_{0,2N+1} (x) |I>>_{1,2} (x) ... (x) |I>>_{2N-1,2N}``."""
    d = shape.dims
    n = len(d)
    if d[0] != d[-1] or any(d[2 * k - 1] != d[2 * k] for k in range(1, n // 2)):
        raise DimensionError("slot identity needs d_0 = d_{2N+1} and d_{2k-1} = d_{2k}")
    v = kron(*[vectorize(np.eye(d[0]))] + [vectorize(np.eye(d[2 * k])) for k in range(1, n // 2)])
    src = [d[0], d[-1]] + list(d[1:-1])
    return permute_subsystems(v, src, [0] + list(range(2, n)) + [1])


def check_comb_choi(j: CombChoi, tol: float = COMB_TOL) -> CombReport:
    """Positivity, the recursive normalization chain and ``Tr_odd J = I_even``.

    The chain residuals are listed for ``k = N, N-1, ..., 0``.
    """
    m = j.matrix
    d = list(j.shape.dims)
    n_slots = j.shape.slots
    herm = max_abs(m - dagger(m))
    min_eig = float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])
    if herm > 1e-10:
        min_eig = min(min_eig, -herm)
    chain = []
    for k in range(n_slots, -1, -1):
        upto = 2 * k + 1
        jk = partial_trace(m, d, range(upto + 1))
        lhs = partial_trace(jk, d[: upto + 1], range(upto))
        rhs = kron(partial_trace(jk, d[: upto + 1], range(upto - 1)), np.eye(d[2 * k]) / d[2 * k])
        chain.append(max_abs(lhs - rhs))
    evens = partial_trace(m, d, range(0, len(d), 2))
    norm_res = max_abs(evens - np.eye(evens.shape[0]))
    return CombReport(min_eig >= PSD_FLOOR, min_eig, tuple(chain), norm_res, tol)


def _input_kraus_vectors(inputs: Sequence[ChoiMatrix]):
    per_slot = []
    for a in inputs:
        per_slot.append([vectorize(k) for k in choi_to_orthogonal_kraus(a).operators])
    return [kron(*combo) for combo in product(*per_slot)]


def _check_inputs(shape: CombShape, inputs: Sequence[ChoiMatrix]):
    if len(inputs) != shape.slots:
        raise DimensionError(f"comb has {shape.slots} slots, got {len(inputs)} inputs")
    for k, a in enumerate(inputs):
        if (a.d_in, a.d_out) != shape.slot_dims(k):
            raise DimensionError(f"slot {k + 1} expects {shape.slot_dims(k)}, got {(a.d_in, a.d_out)}")


def link_apply(comb, inputs: Sequence[ChoiMatrix]) -> ChoiMatrix:
    """Output channel ``Tr_{1..2N}[J (I (x) (x)_k J_k^T (x) I)]`` on ``H_0 -> H_{2N+1}``."""
    shape = comb.shape
    _check_inputs(shape, inputs)
    d0, dl, mid = shape.dims[0], shape.dims[-1], shape.mid
    if isinstance(comb, CombKraus):
        ws = np.array(_input_kraus_vectors(inputs)) if inputs else np.ones((1, 1))
        t = comb.vectors.reshape(-1, d0, mid, dl)
        xs = np.einsum("raxb,wx->rwab", t, ws).reshape(-1, d0 * dl)
        return ChoiMatrix(xs.T @ xs.conj(), d0, dl)
    j_in = kron(*[a.matrix for a in inputs]) if inputs else np.ones((1, 1))
    t = comb.matrix.reshape(d0, mid, dl, d0, mid, dl)
    out = np.einsum("axbcyd,xy->abcd", t, j_in)
    return ChoiMatrix(out.reshape(d0 * dl, d0 * dl), d0, dl)


def orthogonal_comb_kraus(comb):
    """Mutually orthogonal Kraus vectors (rows) and their squared norms, largest first."""
    if isinstance(comb, CombKraus):
        _, s, vh = np.linalg.svd(comb.vectors, full_matrices=False)
        keep = s ** 2 > 1e-12
        vecs = s[keep, None] * vh[keep]
        norms = s[keep] ** 2
    else:
        m = comb.matrix
        w, v = np.linalg.eigh((m + dagger(m)) / 2)
        w, v = w[::-1], v[:, ::-1]
        if w[-1] < PSD_FLOOR:
            raise InvalidCoherenceError(f"comb is not positive (eigenvalue {w[-1]:.3e})")
        keep = w > 1e-12
        vecs = (np.sqrt(w[keep]) * v[:, keep]).T
        norms = w[keep]
    if vecs.shape[0] == 0:
        vecs = np.zeros((1, comb.shape.side), dtype=complex)
        norms = np.zeros(1)
    return vecs, norms


def _as_vector(s, shape: CombShape) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.ndim == 2:
        return link_operator_to_vector(s, shape)
    return s.reshape(-1)


def coherence_operator_s(comb, s, basis=None) -> CoherenceOperatorS:
    """Decompose ``s`` (comb vector or link-view operator) in the comb's Kraus span."""
    if isinstance(s, CoherenceOperatorS):
        s = s.vector
    v = _as_vector(s, comb.shape)
    if v.size != comb.shape.side:
        raise DimensionError("coherence vector does not match the comb shape")
    vecs, norms = orthogonal_comb_kraus(comb) if basis is None else basis
    beta = (vecs.conj() @ v) / np.where(norms > 0, norms, 1)
    residual = float(np.linalg.norm(v - beta @ vecs))
    if residual > SPAN_TOL:
        raise InvalidCoherenceError(f"operator is outside the comb Kraus span (residual {residual:.2e})")
    weight = float(np.sum(np.abs(beta) ** 2))
    if weight > 1 + 1e-9:
        raise InvalidCoherenceError(f"sum |beta|^2 = {weight:.6f} exceeds 1")
    return CoherenceOperatorS(v, beta, vecs, comb.shape, residual)


def most_coherent_S(comb, alpha=None) -> CoherenceOperatorS:
    """Comb coherence operator of maximal norm.

    The default representative is the normalized projection of the slot
    identity vector onto the maximal-norm eigenspace; if that vanishes,
    the first maximal Kraus vector with its largest entry real and positive.
    """
    vecs, norms = orthogonal_comb_kraus(comb)
    top = norms.max()
    bmax = np.flatnonzero(norms >= top - 1e-9 * max(1.0, top))
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=complex)
        if alpha.shape != bmax.shape or abs(np.sum(np.abs(alpha) ** 2) - 1) > 1e-9:
            raise InvalidCoherenceError(f"alpha must be a unit vector of length {bmax.size}")
        return coherence_operator_s(comb, alpha.conj() @ vecs[bmax], (vecs, norms))
    try:
        phi = slot_identity_vector(comb.shape)
        c = (vecs[bmax].conj() @ phi) / norms[bmax]
    except DimensionError:
        c = np.zeros(bmax.size)
    if np.linalg.norm(c) > 1e-9:
        v = (c / np.linalg.norm(c)) @ vecs[bmax]
    else:
        v = vecs[bmax[0]]
        big = v[np.argmax(np.abs(v))]
        v = v * (abs(big) / big)
    return coherence_operator_s(comb, v, (vecs, norms))


def _place(vec_block, shape: CombShape, c_in: int, c_out: int) -> np.ndarray:
    d0, dl, mid = shape.dims[0], shape.dims[-1], shape.mid
    t = np.zeros((2, d0, mid, 2, dl), dtype=complex)
    t[c_in, :, :, c_out, :] = np.reshape(vec_block, (d0, mid, dl))
    return t.reshape(-1)


def controlled_comb_two(comb_s, s, comb_t, t):
    """Comb acting as ``comb_s`` when the control is |0> and ``comb_t`` when |1>.

    The coherence block is ``<00|J|11> = |S>><<T|``. Two Kraus-form combs
    give a Kraus-form result; otherwise the result is a dense comb.
    """
    shape = comb_s.shape
    if comb_t.shape != shape:
        raise DimensionError("controlled comb needs two combs of one shape")
    cs = coherence_operator_s(comb_s, s)
    ct = coherence_operator_s(comb_t, t)
    new_shape = shape.controlled()
    if isinstance(comb_s, CombKraus) and isinstance(comb_t, CombKraus):
        rows = [_place(v, shape, 0, 0) + np.conj(b) * _place(ct.vector, shape, 1, 1) for v, b in zip(cs.basis, cs.beta)]
        weight = float(np.sum(np.abs(cs.beta) ** 2))
        g = np.eye(ct.beta.size) - weight * np.outer(ct.beta, ct.beta.conj())
        w, u = np.linalg.eigh(g)
        for lam, col in zip(w, u.T):
            if lam > 1e-14:
                rows.append(_place(np.sqrt(lam) * (col @ ct.basis), shape, 1, 1))
        return CombKraus(np.array(rows), new_shape)
    check_budget(new_shape.side)
    js = comb_s.to_choi() if isinstance(comb_s, CombKraus) else comb_s
    jt = comb_t.to_choi() if isinstance(comb_t, CombKraus) else comb_t
    d0, dl, mid = shape.dims[0], shape.dims[-1], shape.mid
    blk = (d0, mid, dl, d0, mid, dl)
    m = np.zeros((2, d0, mid, 2, dl) * 2, dtype=complex)
    m[0, :, :, 0, :, 0, :, :, 0, :] = js.matrix.reshape(blk)
    m[1, :, :, 1, :, 1, :, :, 1, :] = jt.matrix.reshape(blk)
    off = np.outer(cs.vector, ct.vector.conj()).reshape(blk)
    m[0, :, :, 0, :, 1, :, :, 1, :] = off
    m[1, :, :, 1, :, 0, :, :, 0, :] = np.conj(off).transpose(3, 4, 5, 0, 1, 2)
    return CombChoi(m.reshape(new_shape.side, new_shape.side), new_shape)


def controlled_comb(comb, s):
    """Identity comb on |0>, ``comb`` on |1>, coherence ``|S_id>><<S|``."""
    if isinstance(comb, CombKraus):
        ident = identity_comb_kraus(comb.shape)
    else:
        ident = identity_comb(comb.shape)
    return controlled_comb_two(ident, identity_comb_vector(comb.shape), comb, s)


def comb_kraus_conditions(k: CombKraus, tol: float = COMB_TOL) -> CombKrausReport:
    """Kraus-side validity conditions.

    For ``k = 0 .. N-1`` the odd spaces ``H_{2N-2k+1} .. H_{2N+1}`` join the
    range of the Kraus operators, and for every matrix unit ``A`` on ``H_0``
    and ``B`` on ``H_1 .. H_{2N-2k-1}`` the operator
    ``Tr_{1..2N-2k-1}[(B (x) I) sum_i S_i^dag (A (x) I) S_i]`` must be
    proportional to the identity on the even spaces ``H_{2N-2k} .. H_{2N}``.
    Finally all odd spaces are range and ``H_0`` joins the domain; the
    resulting operators must satisfy ``sum_i T_i^dag T_i = I``.
    """
    shape = k.shape
    d = shape.dims
    n = len(d)
    last = n - 1
    big_n = shape.slots
    tens = k.vectors.reshape((-1,) + d)
    levels = []
    for lev in range(big_n):
        kspaces = list(range(last, 2 * big_n - 2 * lev, -2))
        fspaces = list(range(1, 2 * big_n - 2 * lev))
        hspaces = list(range(2 * big_n - 2 * lev, last, 2))
        order = [0] + [1 + x for x in [0] + kspaces + fspaces + hspaces]
        dk = int(np.prod([d[x] for x in kspaces]))
        df = int(np.prod([d[x] for x in fspaces]))
        dh = int(np.prod([d[x] for x in hspaces]))
        s = tens.transpose(order).reshape(-1, d[0], dk, df, dh)
        w = np.einsum("iakfh,ibkgj->abfghj", s.conj(), s)
        tr = np.einsum("abfghh->abfg", w) / dh
        dev = w - tr[..., None, None] * np.eye(dh)
        levels.append(max_abs(dev))
    odds = list(range(1, n, 2))
    evens = list(range(0, n, 2))
    t = tens.transpose([0] + [1 + x for x in odds + evens])
    t = t.reshape(-1, int(np.prod([d[x] for x in odds])), int(np.prod([d[x] for x in evens])))
    gram = np.einsum("ioe,iof->ef", t.conj(), t)
    final = max_abs(gram - np.eye(gram.shape[0]))
    return CombKrausReport(tuple(levels), final, tol)


def circuit_comb_kraus(shape: CombShape, isometries: Sequence) -> CombKraus:
    """Comb of a sequential circuit with memory.

    ``isometries[0]`` maps ``H_0 -> H_1 (x) A_1``, ``isometries[k]`` maps
    ``H_{2k} (x) A_k -> H_{2k+1} (x) A_{k+1}`` and the last one ends in an
    environment that is traced out; each environment basis state gives one
    Kraus vector.
    """
    d = shape.dims
    if len(isometries) != shape.slots + 1:
        raise DimensionError(f"need {shape.slots + 1} isometries")
    w0 = np.asarray(isometries[0], dtype=complex)
    a = w0.shape[0] // d[1]
    t = w0.reshape(d[1], a, d[0])  # [outs..., anc, ins...]
    n_out, n_in = 1, 1
    for k in range(1, shape.slots + 1):
        w = np.asarray(isometries[k], dtype=complex)
        a_old = t.shape[n_out]
        a_new = w.shape[0] // d[2 * k + 1]
        if w.shape[1] != d[2 * k] * a_old:
            raise DimensionError(f"isometry {k} has wrong input dimension")
        w = w.reshape(d[2 * k + 1], a_new, d[2 * k], a_old)
        t = np.tensordot(w, t, axes=([3], [n_out]))
        # axes now: o_new, a_new, i_new, outs..., ins...
        outs = list(range(3, 3 + n_out))
        ins = list(range(3 + n_out, 3 + n_out + n_in))
        t = t.transpose(outs + [0, 1] + ins + [2])
        n_out += 1
        n_in += 1
    env = t.shape[n_out]
    d_odd = int(np.prod(d[1::2]))
    d_even = int(np.prod(d[0::2]))
    t = np.moveaxis(t, n_out, 0).reshape(env, d_odd, d_even)
    return CombKraus(np.array([circuit_operator_to_vector(t[e], shape) for e in range(env)]), shape)


def random_circuit_comb(shape: CombShape, seed=None, ancilla: int = 2) -> CombKraus:
    """Kraus form of a random valid comb built from Haar isometries."""
    rng = rng_from(seed)
    d = shape.dims
    big_n = shape.slots
    isos = []
    for k in range(big_n + 1):
        d_in = d[2 * k] * (ancilla if k else 1)
        a_next = ancilla if k < big_n else max(2, -(-d_in // d[2 * k + 1]))
        isos.append(haar_isometry(d_in, d[2 * k + 1] * a_next, rng))
    return circuit_comb_kraus(shape, isos)
