"""Small reference automata and random generators used by tests and scripts."""

from __future__ import annotations

import numpy as np

from .gramian import kron_radius
from .wfa import Wfa, is_det_free

AB = ("a", "b")


def signed_two_state() -> Wfa:
    """Two states, signed integer weights; ``f("ba") == 60``."""
    return Wfa(AB, [1, -2], [1, -1], {"a": [[1, -1], [-2, 3]], "b": [[0, -2], [0, 5]]})


def generative_two_state() -> Wfa:
    """A proper generative probabilistic automaton."""
    return Wfa(AB, [1, 0], [0, 1 / 3],
               {"a": [[1 / 4, 1 / 4], [0, 1 / 3]], "b": [[0, 1 / 2], [1 / 3, 0]]})


def detfree_dynamic() -> Wfa:
    """A proper dynamic probabilistic automaton with no deterministic emissions."""
    return Wfa(AB, [1, 0], [1, 1],
               {"a": [[1 / 4, 1 / 4], [0, 1 / 3]], "b": [[0, 1 / 2], [2 / 3, 0]]})


def sticky_dynamic() -> Wfa:
    """Dynamic automaton whose second state always emits ``a``: ``f(b a^k) = 1/2``."""
    return Wfa(AB, [1, 0], [1, 1], {"a": [[1 / 2, 0], [0, 1]], "b": [[0, 1 / 2], [0, 0]]})


def redundant_state() -> Wfa:
    """Non-minimal: state 2 never reaches a final weight but is visited forever."""
    return Wfa(AB, [1, 0], [1, 0], {"a": [[1 / 2, 0], [0, 1]], "b": [[0, 1 / 2], [0, 0]]})


def cancelling_states() -> Wfa:
    """One symbol, two geometric states with opposite signs.

    ``||f||^2 = 1/3`` while dropping the second state gives ``4/3``.
    """
    return Wfa(("a",), [1, -1 / 2], [1, 1], {"a": [[1 / 2, 0], [0, 1 / 2]]})


def geometric(rate: float = 0.5, alphabet=("a",)) -> Wfa:
    """One state, ``f(x) = rate**|x|`` on every symbol."""
    return Wfa(alphabet, [1.0], [1.0], [[[rate]]] * len(alphabet))


GOLDEN = {
    "signed_two_state": signed_two_state,
    "generative_two_state": generative_two_state,
    "detfree_dynamic": detfree_dynamic,
    "sticky_dynamic": sticky_dynamic,
    "redundant_state": redundant_state,
    "cancelling_states": cancelling_states,
    "geometric": geometric,
}


def alphabet_of(k: int) -> tuple[str, ...]:
    return tuple("abcdefghijklmnopqrstuvwxyz"[:k])


def random_detfree_pdpa(rng: np.random.Generator, n: int, k: int,
                        concentration: float = 1.0) -> Wfa:
    """Random det-free proper dynamic automaton.

    Each state's outgoing mass over ``(symbol, next state)`` pairs is a
    Dirichlet draw; resampled until every symbol's row sums stay below one.
    """
    alphabet = alphabet_of(k)
    while True:
        rows = rng.dirichlet(np.full(k * n, concentration), size=n)  # n x (k*n)
        mats = rows.reshape(n, k, n).transpose(1, 0, 2)
        A = Wfa(alphabet, rng.dirichlet(np.ones(n)), np.ones(n), mats)
        if is_det_free(A):
            return A


def random_wfa(rng: np.random.Generator, n: int, k: int, radius: float = 0.8) -> Wfa:
    """Random signed automaton with ``rho(sum_a A_a (x) A_a) == radius``."""
    alphabet = alphabet_of(k)
    mats = rng.standard_normal((k, n, n))
    rho = kron_radius(Wfa(alphabet, np.ones(n), np.ones(n), mats))
    mats *= np.sqrt(radius / rho)
    return Wfa(alphabet, rng.standard_normal(n), rng.standard_normal(n), mats)


def random_well_conditioned(rng: np.random.Generator, n: int, max_cond: float = 100.0) -> np.ndarray:
    """Random invertible matrix with condition number at most ``max_cond``."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(0.0, np.log(max_cond), size=n))
    s[0], s[-1] = 1.0, max(s.max(), 1.0)
    return (U * s) @ V.T


def unobservable_extension(rng: np.random.Generator, m: int, r: int, k: int,
                           radius: float = 0.6) -> Wfa:
    """Automaton whose observability system has a non-trivial null space.

    States ``m..m+r-1`` never reach a final weight; their block is
    ``c_a Q_a`` with ``Q_a`` orthogonal and ``sum_a c_a**2 == 1``, so
    ``sum_a A_a (x) A_a`` has eigenvalue 1 while the observability Gramian
    stays finite. They are fed from the first block through ``C_a``.
    """
    B = random_wfa(rng, m, k, radius)
    c = rng.dirichlet(np.ones(k)) ** 0.5
    n = m + r
    mats = np.zeros((k, n, n))
    for a in range(k):
        Q, _ = np.linalg.qr(rng.standard_normal((r, r)))
        mats[a, :m, :m] = B.mats[a]
        mats[a, :m, m:] = 0.5 * rng.standard_normal((m, r))
        mats[a, m:, m:] = c[a] * Q
    alpha = np.concatenate([B.alpha, rng.standard_normal(r)])
    beta = np.concatenate([B.beta, np.zeros(r)])
    return Wfa(B.alphabet, alpha, beta, mats)
