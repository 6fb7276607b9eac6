"""Neutralization combs and exact controllization of unitaries."""
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations
from math import factorial

import numpy as np

from ..channels import ChoiMatrix, unitary_channel
from ..combs import (
    CombChoi,
    CombKraus,
    CombShape,
    controlled_comb_two,
    identity_comb_kraus,
    identity_comb_vector,
    link_apply,
    most_coherent_S,
    uniform_shape,
)
from ..controlled import ControlledChannel, coherence_operator, control_block
from ..errors import BudgetError, DimensionError, InvalidStateError, PreconditionError
from ..linalg import (
    MAX_DENSE_SIDE,
    as_matrix,
    check_budget,
    dagger,
    devectorize,
    hermitian_eig,
    kron,
    max_abs,
    permute_subsystems,
    require_unitary,
    unitary_eig,
    vectorize,
)

MAX_ANTISYM_DIM = 4


def _outer_first_perm(n_spaces: int):
    # source order (0, 2N+1, odd inputs..., even outputs...) -> ascending
    last = n_spaces - 1
    src = [0, last] + list(range(1, last, 2)) + list(range(2, last, 2))
    return src, [src.index(i) for i in range(n_spaces)]


def _check_prep(rho, shape: CombShape) -> np.ndarray:
    rho = as_matrix(rho)
    d = shape.dims
    if d[0] != d[-1]:
        raise DimensionError("neutralization comb needs d_0 = d_{2N+1}")
    d_in = int(np.prod(d[1:-1:2]))
    if rho.shape != (d_in, d_in):
        raise DimensionError(f"state must live on the slot inputs (dimension {d_in})")
    if max_abs(rho - dagger(rho)) > 1e-10 or abs(np.trace(rho) - 1) > 1e-9:
        raise InvalidStateError("state must be Hermitian with unit trace")
    if np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0] < -1e-9:
        raise InvalidStateError("state is not positive")
    return rho


def prepare_traceout_comb(rho, shape: CombShape) -> CombChoi:
    """``|I>><<I|_{0,2N+1} (x) rho_in (x) I_out``: prepare ``rho``, discard the outputs."""
    rho = _check_prep(rho, shape)
    check_budget(shape.side)
    d = shape.dims
    eye = vectorize(np.eye(d[0]))
    d_out = int(np.prod(d[2:-1:2]))
    m = kron(np.outer(eye, eye.conj()), rho, np.eye(d_out))
    src, perm = _outer_first_perm(len(d))
    return CombChoi(permute_subsystems(m, [d[i] for i in src], perm), shape)


def prepare_traceout_kraus(rho, shape: CombShape) -> CombKraus:
    """Kraus form of :func:`prepare_traceout_comb`."""
    rho = _check_prep(rho, shape)
    d = shape.dims
    eye = vectorize(np.eye(d[0]))
    d_out = int(np.prod(d[2:-1:2]))
    spec = hermitian_eig(rho)
    src, perm = _outer_first_perm(len(d))
    dims = [d[i] for i in src]
    if shape.side > MAX_DENSE_SIDE:
        raise BudgetError(f"comb side {shape.side} exceeds the budget")
    rows = []
    for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        if lam <= 1e-14:
            continue
        for m in range(d_out):
            e = np.zeros(d_out)
            e[m] = 1
            rows.append(permute_subsystems(kron(eye, np.sqrt(lam) * vec, e), dims, perm))
    return CombKraus(np.array(rows), shape)


def _controlled_output(comb: CombKraus, inputs, target_choi: ChoiMatrix, theta) -> ControlledChannel:
    shape = comb.shape
    s0 = most_coherent_S(comb)
    ident = identity_comb_kraus(shape)
    ccomb = controlled_comb_two(comb, s0, ident, identity_comb_vector(shape))
    out = link_apply(ccomb, inputs)
    d = shape.dims[0]
    # <11|J|00> = |K>><<I|, so applying it to |I>>/d returns |K>>
    k = devectorize(control_block(out, (1, 1), (0, 0)) @ vectorize(np.eye(d)) / d, d, d)
    return ControlledChannel(out, coherence_operator(target_choi, k), theta)


def eigenstate_controllization(u, psi) -> ControlledChannel:
    """Controlled ``u`` from one use of ``u`` and a known eigenvector ``psi``.

    The output is the controlled version of ``exp(-i theta) u`` where
    ``exp(i theta) = <psi|u|psi>``; its ``theta`` field records ``-theta``.
    """
    u = require_unitary(u)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    d = u.shape[0]
    if psi.size != d or abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise InvalidStateError("psi must be a unit vector of matching dimension")
    overlap = np.vdot(psi, u @ psi)
    theta = float(np.angle(overlap))
    residual = float(np.linalg.norm(u @ psi - np.exp(1j * theta) * psi))
    if residual > 1e-9:
        raise PreconditionError(f"psi is not an eigenvector of u (residual {residual:.2e})")
    shape = uniform_shape(1, d)
    comb = prepare_traceout_kraus(np.outer(psi, psi.conj()), shape)
    j_u = unitary_channel(u)
    return _controlled_output(comb, [j_u], j_u, -theta)


def antisym_state(d: int) -> np.ndarray:
    """Totally antisymmetric state of ``d`` qudits of dimension ``d``."""
    if d < 2:
        raise DimensionError("antisymmetric state needs d >= 2")
    if d > MAX_ANTISYM_DIM:
        raise BudgetError(f"d = {d} exceeds the budget d <= {MAX_ANTISYM_DIM}")
    v = np.zeros(d ** d, dtype=complex)
    for perm in permutations(range(d)):
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        idx = 0
        for p in perm:
            idx = idx * d + p
        v[idx] = (-1) ** inv
    return v / np.sqrt(factorial(d))


def multicopy_controllization(v, d: int = None) -> ControlledChannel:
    """Controlled ``v^d`` from ``d`` uses of ``v`` and the antisymmetric state.

    The coherence operator of the output is ``conj(det v) v^d``, so for
    ``v`` with unit determinant the output is exactly controlled-``v^d``.
    """
    v = require_unitary(v)
    d = v.shape[0] if d is None else d
    if v.shape[0] != d:
        raise DimensionError("v must be d x d")
    shape = uniform_shape(d, d)
    if shape.side > MAX_DENSE_SIDE:
        raise BudgetError(f"comb side {shape.side} exceeds the budget")
    a = antisym_state(d)
    comb = prepare_traceout_kraus(np.outer(a, a.conj()), shape)
    target = np.linalg.matrix_power(v, d)
    theta = -float(np.angle(np.linalg.det(v)))
    return _controlled_output(comb, [unitary_channel(v)] * d, unitary_channel(target), theta)


@dataclass(frozen=True, eq=False)
class InvariantReport:
    exists: bool
    witness: np.ndarray = None
    residual: float = float("nan")


def invariant_subspace_check(u, n: int, tol: float = 1e-9) -> InvariantReport:
    """Look for a vector whose phase under ``u^{(x)n}`` follows ``det(u)^{n/d}``.

    This is the phase a one-dimensional invariant subspace of every
    ``U^{(x)n}`` must carry. Eigenvector products of ``u`` are matched
    against the ``d`` branches of ``det(u)^{n/d}``; when ``d`` divides
    ``n`` the witness is a product of antisymmetric states.
    """
    u = require_unitary(u)
    d = u.shape[0]
    if d ** n > MAX_DENSE_SIDE:
        raise BudgetError(f"d^n = {d ** n} exceeds the budget")
    t, z = unitary_eig(u)
    phases = np.angle(t)
    det_phase = phases.sum()
    targets = np.exp(1j * (n / d) * (det_phase + 2 * np.pi * np.arange(d)))
    big = np.eye(1, dtype=complex)
    for _ in range(n):
        big = np.kron(big, u)
    if n % d == 0 and d <= MAX_ANTISYM_DIM:
        a = antisym_state(d)
        w = kron(*[a] * (n // d)) if n // d > 1 else a
        lam = np.vdot(w, big @ w)
        res = float(np.linalg.norm(big @ w - lam * w))
        return InvariantReport(res <= tol, w, res)
    for combo in combinations_with_replacement(range(d), n):
        val = np.exp(1j * phases[list(combo)].sum())
        if np.min(np.abs(targets - val)) <= tol:
            w = kron(*[z[:, i] for i in combo]) if n > 1 else z[:, combo[0]]
            lam = np.vdot(w, big @ w)
            res = float(np.linalg.norm(big @ w - lam * w))
            if res <= tol:
                return InvariantReport(True, w, res)
    return InvariantReport(False)
