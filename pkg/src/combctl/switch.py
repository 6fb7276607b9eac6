"""Quantum switch of two qubit channels and its comparison with controlled concatenation."""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import PAULIS, ChoiMatrix, compose, kraus_set, kraus_to_choi, pauli_channel, pauli_kraus
from .controlled import assemble_controlled, control_block
from .errors import DimensionError
from .linalg import vectorize

MATCH_TOL = 1e-6


@dataclass(frozen=True)
class SwitchReport:
    match_single: bool
    match_concat: bool
    residual_single: float
    residual_concat: float

    @property
    def match(self) -> bool:
        return self.match_single or self.match_concat

    @property
    def residual(self) -> float:
        return min(self.residual_single, self.residual_concat)


def _check_alpha(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (4,) or np.any(alpha < 0):
        raise DimensionError("alpha must be four non-negative weights")
    if abs(np.sum(alpha ** 2) - 1) > 1e-9:
        raise ValueError(f"sum alpha^2 = {np.sum(alpha ** 2):.12f}, expected 1")
    return alpha


def quantum_switch(kraus_a, kraus_b) -> ChoiMatrix:
    """Switch Choi with Kraus ``|0><0| B_j A_i + |1><1| A_i B_j``."""
    ka, kb = kraus_set(kraus_a), kraus_set(kraus_b)
    if ka.d_in != ka.d_out or (kb.d_in, kb.d_out) != (ka.d_in, ka.d_in):
        raise DimensionError("switch needs two channels on the same system")
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    ops = [np.kron(p0, b @ a) + np.kron(p1, a @ b) for a in ka for b in kb]
    return kraus_to_choi(ops)


def switch_off_diagonal(alpha) -> np.ndarray:
    """Closed-form coherence block of the switch of two Pauli channels."""
    a = _check_alpha(alpha)
    w = [
        np.sum(a ** 4),
        2 * ((a[0] * a[1]) ** 2 - (a[2] * a[3]) ** 2),
        2 * ((a[0] * a[2]) ** 2 - (a[1] * a[3]) ** 2),
        2 * ((a[0] * a[3]) ** 2 - (a[1] * a[2]) ** 2),
    ]
    return sum(c * np.outer(vectorize(s), vectorize(s).conj()) for c, s in zip(w, PAULIS))


def concatenated_weights(alpha) -> np.ndarray:
    """Pauli weights of ``A o A`` for the channel with Kraus ``alpha_i sigma_i``."""
    a = _check_alpha(alpha)
    sq = [
        np.sum(a ** 4),
        2 * (a[0] * a[1]) ** 2 + 2 * (a[2] * a[3]) ** 2,
        2 * (a[0] * a[2]) ** 2 + 2 * (a[1] * a[3]) ** 2,
        2 * (a[0] * a[3]) ** 2 + 2 * (a[1] * a[2]) ** 2,
    ]
    return np.sqrt(np.maximum(sq, 0.0))


def switch_action_pauli(alpha) -> ChoiMatrix:
    """Switch of two copies of a Pauli channel, assembled from closed forms."""
    a = _check_alpha(alpha)
    one = pauli_channel(a)
    twice = compose(one, one)
    m = assemble_controlled(twice.matrix, twice.matrix, switch_off_diagonal(a), 2, 2)
    return ChoiMatrix(m, 4, 4)


def concatenation_residual(target, k_ops, l_ops, restarts: int = 8, seed: int = 0):
    """Minimize ``||target - |K>><<L| ||_F`` over ``K = sum b_i k_i``, ``L = sum g_i l_i``.

    The coefficient vectors are restricted to the unit ball. Returns the
    best residual and the optimal ``(K, L)``.
    """
    target = np.asarray(target, dtype=complex)
    km = np.array([vectorize(k) for k in k_ops]).T
    lm = np.array([vectorize(l) for l in l_ops]).T
    nk, nl = km.shape[1], lm.shape[1]

    def unpack(x):
        b = x[:nk] + 1j * x[nk:2 * nk]
        g = x[2 * nk:2 * nk + nl] + 1j * x[2 * nk + nl:]
        return b, g

    def fun(x):
        b, g = unpack(x)
        k, l = km @ b, lm @ g
        r = target - np.outer(k, l.conj())
        gb = -km.conj().T @ (r @ l)
        gg = -lm.conj().T @ (r.conj().T @ k)
        grad = 2 * np.concatenate([gb.real, gb.imag, gg.real, gg.imag])
        return float(np.sum(np.abs(r) ** 2)), grad

    cons = [
        {"type": "ineq", "fun": lambda x: 1 - np.sum(x[:2 * nk] ** 2), "jac": lambda x: np.concatenate([-2 * x[:2 * nk], np.zeros(2 * nl)])},
        {"type": "ineq", "fun": lambda x: 1 - np.sum(x[2 * nk:] ** 2), "jac": lambda x: np.concatenate([np.zeros(2 * nk), -2 * x[2 * nk:]])},
    ]

    starts = []
    u, s, vh = np.linalg.svd(target)
    b0 = np.linalg.lstsq(km, np.sqrt(s[0]) * u[:, 0], rcond=None)[0]
    g0 = np.linalg.lstsq(lm, np.sqrt(s[0]) * vh[0].conj(), rcond=None)[0]
    b0 /= max(1.0, np.linalg.norm(b0))
    g0 /= max(1.0, np.linalg.norm(g0))
    starts.append(np.concatenate([b0.real, b0.imag, g0.real, g0.imag]))
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        x = rng.normal(size=2 * (nk + nl))
        x[:2 * nk] /= np.linalg.norm(x[:2 * nk]) * 1.5
        x[2 * nk:] /= np.linalg.norm(x[2 * nk:]) * 1.5
        starts.append(x)

    best = None
    for x0 in starts:
        res = minimize(fun, x0, jac=True, method="SLSQP", constraints=cons, options={"ftol": 1e-16, "maxiter": 500})
        x = res.x
        # project back to the feasible set before scoring
        for lo, hi in ((0, 2 * nk), (2 * nk, 2 * (nk + nl))):
            nrm = np.linalg.norm(x[lo:hi])
            if nrm > 1:
                x[lo:hi] /= nrm
        val = fun(x)[0]
        if best is None or val < best[0]:
            best = (val, x)
    b, g = unpack(best[1])
    k = (km @ b).reshape(-1)
    l = (lm @ g).reshape(-1)
    return float(np.sqrt(max(best[0], 0.0))), k, l


def switch_vs_controlled(alpha, restarts: int = 8, seed: int = 0) -> SwitchReport:
    """Can the switch coherence block be written as ``|K>><<L|``?

    ``single`` searches ``K, L`` in the span of the Kraus operators of ``A``;
    ``concat`` uses those of ``A o A``, which is the channel on both
    diagonal blocks of the switch.
    """
    a = _check_alpha(alpha)
    target = switch_off_diagonal(a)
    out = []
    for weights in (a, concatenated_weights(a)):
        ops = [w * s for w, s in zip(weights, PAULIS) if w > 1e-12]
        out.append(concatenation_residual(target, ops, ops, restarts, seed)[0])
    return SwitchReport(out[0] <= MATCH_TOL, out[1] <= MATCH_TOL, out[0], out[1])


def switch_block(j: ChoiMatrix) -> np.ndarray:
    """The ``<00|J|11>`` coherence block of a switch or controlled Choi."""
    return control_block(j, (0, 0), (1, 1))


def identity_depolarizing_residual(restarts: int = 8, seed: int = 0) -> float:
    """Best concatenation fit to ``id (x) D`` on a control qubit and a target qubit.

    Both branches of ``id (x) D`` apply the depolarizing channel and the
    coherence block equals its full Choi operator ``I/2``. Any concatenation
    has a rank one block, so the residual stays bounded away from zero.
    """
    ops = pauli_kraus([0.5, 0.5, 0.5, 0.5]).operators
    return concatenation_residual(np.eye(4) / 2, ops, ops, restarts, seed)[0]
