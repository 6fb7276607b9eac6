"""Seeded random objects used by tests, fixtures and experiments."""
import numpy as np
from scipy.stats import unitary_group

from .linalg import dagger


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng_from(seed)).astype(complex).reshape(d, d)


def haar_special_unitary(d: int, seed=None) -> np.ndarray:
    u = haar_unitary(d, seed)
    return u / np.linalg.det(u) ** (1.0 / d)


def haar_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    if d_out < d_in:
        raise ValueError("isometry needs d_out >= d_in")
    return haar_unitary(d_out, seed)[:, :d_in]


def random_state(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rank=None, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, norm=None, seed=None) -> np.ndarray:
    """Random Hermitian matrix; rescaled to operator norm ``norm`` if given."""
    rng = rng_from(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + dagger(g)) / 2
    if norm is not None:
        h = h * (norm / np.abs(np.linalg.eigvalsh(h)).max())
    return h


def random_kraus(d_in: int, d_out: int, rank: int, seed=None) -> list:
    """Kraus operators of a random CPTP map cut from a Haar isometry."""
    v = haar_isometry(d_in, d_out * rank, seed)
    return [v[i * d_out:(i + 1) * d_out, :].copy() for i in range(rank)]
