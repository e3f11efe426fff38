"""Square-summability tests, l2 norms and distances, Hankel-block oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ModelError, NumericalError
from .gramian import FixedPointConfig, cross_gramian, gramian_fixed_point, kron_radius
from .minimize import minimize
from .numerics import DEFAULT_RANK_TOL, Svd, spectral_radius, svd
from .sva import SvaForm, pad_truncation
from .wfa import Wfa, difference, kron_square

L2_MARGIN = 1e-9
HANKEL_CAP = 10_000_000


# ---------------------------------------------------------------------------
# membership


@dataclass
class L2Report:
    member: bool
    method: str
    witness: float
    sufficient: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "member": self.member,
            "method": self.method,
            "witness": self.witness,
            "sufficient": self.sufficient,
        }


def sufficient_conditions(A: Wfa, dense_limit: int = 32) -> dict:
    """Cheap sufficient conditions for square-summability.

    Each entry is ``{"value": ..., "holds": bool}``; conditions too expensive
    for the automaton size have ``value`` None.
    """
    out: dict = {}
    n = A.n
    rho = kron_radius(A)
    out["kron_radius"] = {"value": rho, "holds": rho < 1.0}
    if n <= dense_limit:
        K = A.kron_sum()
        for name, p in (("kron_norm_1", 1), ("kron_norm_inf", np.inf)):
            v = float(np.linalg.norm(K, p))
            out[name] = {"value": v, "holds": v < 1.0}
    else:
        out["kron_norm_1"] = out["kron_norm_inf"] = {"value": None, "holds": False}
    gram = sum(M @ M.T for M in A.mats)
    v = float(np.linalg.norm(gram, 2))
    out["outer_norm_2"] = {"value": v, "holds": v < 1.0}
    return out


def check_l2(A: Wfa, rank_tol: float = DEFAULT_RANK_TOL) -> L2Report:
    """Decide square-summability via the minimized Kronecker square.

    ``f`` is square-summable iff ``rho(sum_a B_a) < 1`` for a minimal
    automaton ``B`` of ``f**2``. The cheap sufficient conditions are
    reported alongside.
    """
    B = minimize(kron_square(A), rank_tol).minimal
    rho = spectral_radius(B.transition_sum())
    member = rho < 1.0 - L2_MARGIN
    return L2Report(member, "minimized_kron_radius", rho, sufficient_conditions(A))


# ---------------------------------------------------------------------------
# norms


def _norm_sq_observability(A: Wfa, config: FixedPointConfig) -> float:
    G, _, _ = gramian_fixed_point(A, "s", config)
    return float(A.alpha @ G @ A.alpha)


def _norm_sq_reachability(A: Wfa, config: FixedPointConfig) -> float:
    G, _, _ = gramian_fixed_point(A, "p", config)
    return float(A.beta @ G @ A.beta)


def norm_sq_l2(A: Wfa, config: FixedPointConfig = FixedPointConfig(), cross_check: bool = True,
               rel_tol: float = 1e-7) -> float:
    """``||f||_2^2`` from a Gramian (``alpha^T G_s alpha`` or ``beta^T G_p beta``).

    If neither Gramian of ``A`` exists the automaton is minimized and the
    computation retried; a divergent minimal automaton means the norm is
    infinite (``DivergenceError``).
    """
    values = []
    for candidate in (A, None):
        if candidate is None:
            red = minimize(A)
            if not red.reduced:
                break
            candidate = red.minimal
        for route in (_norm_sq_observability, _norm_sq_reachability):
            try:
                values.append(route(candidate, config))
            except DivergenceError:
                continue
            if not cross_check:
                break
        if values:
            break
    if not values:
        raise DivergenceError("norm undefined/infinite: the function is not square-summable")
    if len(values) == 2:
        a, b = values
        if abs(a - b) > rel_tol * max(abs(a), abs(b), 1e-300) + 1e-14:
            raise NumericalError(f"Gramian norm formulas disagree: {a!r} vs {b!r}")
    return max(values[0], 0.0)


def norm_l2(A: Wfa, config: FixedPointConfig = FixedPointConfig()) -> float:
    return float(np.sqrt(norm_sq_l2(A, config)))


def pad_states(A: Wfa, n: int) -> Wfa:
    """Same function on ``n >= A.n`` states; the extra states carry zero weight."""
    if n < A.n:
        raise ModelError(f"cannot pad {A.n} states down to {n}")
    alpha = np.zeros(n)
    beta = np.zeros(n)
    alpha[: A.n] = A.alpha
    beta[: A.n] = A.beta
    mats = np.zeros((len(A.alphabet), n, n))
    mats[:, : A.n, : A.n] = A.mats
    return Wfa(A.alphabet, alpha, beta, mats)


def error_state_difference(A: Wfa, B: Wfa) -> Wfa:
    """Automaton for ``f_A - f_B`` tracking ``e = alpha_A^T A_x - alpha_B^T B_x`` directly.

    It is the difference automaton conjugated by ``[[I, 0], [I, -I]]`` after
    zero-padding both inputs to a common size: states ``(e, w)`` with
    ``w = alpha_B^T B_x``, transitions ``[[A_a, 0], [A_a - B_a, B_a]]`` and
    final weights ``(beta_A, beta_A - beta_B)``. When ``A`` and ``B`` are
    close, every weight reaching ``e`` is small, so sums of ``(f_A - f_B)^2``
    do not suffer the cancellation of the plain block-diagonal form.
    """
    if A.alphabet != B.alphabet:
        raise ModelError("alphabet mismatch")
    n = max(A.n, B.n)
    A, B = pad_states(A, n), pad_states(B, n)
    k = len(A.alphabet)
    mats = np.zeros((k, 2 * n, 2 * n))
    mats[:, :n, :n] = A.mats
    mats[:, n:, :n] = A.mats - B.mats
    mats[:, n:, n:] = B.mats
    return Wfa(
        A.alphabet,
        np.concatenate([A.alpha - B.alpha, B.alpha]),
        np.concatenate([A.beta, A.beta - B.beta]),
        mats,
    )


def distance_sq_l2(A: Wfa, B: Wfa, config: FixedPointConfig = FixedPointConfig()) -> float:
    """``||f_A - f_B||_2^2``.

    First choice is the reachability Gramian of ``error_state_difference``
    with convergence judged on the distance itself, which keeps relative
    accuracy even for distances many orders below ``||f_A||^2``. Falls back
    to ``norm_sq_l2(difference(A, B))``.
    """
    E = error_state_difference(A, B)
    try:
        b, ab = E.beta, np.abs(E.beta)

        def watch(X):
            return float(b @ X @ b), float(ab @ np.abs(X) @ ab)

        G, _, _ = gramian_fixed_point(E, "p", config, watch)
        return max(float(E.beta @ G @ E.beta), 0.0)
    except DivergenceError:
        pass
    try:
        return norm_sq_l2(difference(A, B), config, cross_check=False)
    except DivergenceError as exc:
        raise DivergenceError(f"distance undefined/infinite: {exc}") from exc


def distance_l2(A: Wfa, B: Wfa, config: FixedPointConfig = FixedPointConfig()) -> float:
    """``||f_A - f_B||_2``."""
    return float(np.sqrt(distance_sq_l2(A, B, config)))


def exact_truncation_error_sq(S: SvaForm, n_hat: int,
                              config: FixedPointConfig = FixedPointConfig()) -> float:
    """Closed-form ``||f - f_hat||^2`` for the SVA truncation with ``n_hat`` states.

    Uses the zero-padded truncation ``At`` (same size as the SVA) and the
    observability cross Gramian ``C = sum_x (A_x beta)(At_x beta)^T``:
    the error is ``sum_{i > n_hat} sigma_i (C + C^T - Gt_s)[i, i]``.
    """
    if not 1 <= n_hat < S.n:
        raise ModelError(f"n_hat must be in [1, {S.n - 1}], got {n_hat}")
    A = S.automaton
    At = pad_truncation(S, n_hat)
    tail = slice(n_hat, None)
    w = np.asarray(S.sigmas, dtype=float)[tail]
    def watch(X):
        d = np.diag(X)[tail]
        return float(w @ d), float(w @ np.abs(d))

    C = cross_gramian(A, At, config, watch)
    Gt, _, _ = gramian_fixed_point(At, "s", config, watch)
    M = C + C.T - Gt
    return float(w @ np.diag(M)[tail])


@dataclass
class KronInfReport:
    lhs: float
    row_block_norm: float  # ||[A_1 ... A_m]||_inf
    col_block_norm: float  # ||[A_1; ...; A_m]||_inf == ||[A_1^T ... A_m^T]||_1
    col_block_norm_dual: float

    @property
    def rhs(self) -> float:
        return self.row_block_norm * self.col_block_norm

    def holds(self, tol: float = 1e-9) -> bool:
        return self.lhs <= self.rhs + tol


def kron_inf_inequality_check(A: Wfa) -> KronInfReport:
    lhs = float(np.linalg.norm(A.kron_sum(), np.inf))
    row = float(np.linalg.norm(np.hstack(list(A.mats)), np.inf))
    col = float(np.linalg.norm(np.vstack(list(A.mats)), np.inf))
    dual = float(np.linalg.norm(np.hstack([M.T for M in A.mats]), 1))
    return KronInfReport(lhs, row, col, dual)


# ---------------------------------------------------------------------------
# brute-force oracles


def words(alphabet, max_len: int, min_len: int = 0):
    """Words in length-lexicographic order (symbol order = alphabet order)."""
    for k in range(min_len, max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


def count_words(k: int, max_len: int) -> int:
    return max_len + 1 if k == 1 else (k ** (max_len + 1) - 1) // (k - 1)


def _forward_rows(A: Wfa, max_len: int) -> np.ndarray:
    """Rows ``alpha^T A_x`` for every ``x`` with ``|x| <= max_len``, length-lex order."""
    levels = [A.alpha[None, :]]
    for _ in range(max_len):
        prev = levels[-1]
        # x = w a: lex order over (w, a) means the last symbol varies fastest
        nxt = np.einsum("wi,kij->wkj", prev, A.mats).reshape(-1, A.n)
        levels.append(nxt)
    return np.vstack(levels)


def _backward_rows(A: Wfa, max_len: int) -> np.ndarray:
    """Rows ``(A_x beta)^T`` for every ``x`` with ``|x| <= max_len``, length-lex order."""
    levels = [A.beta[None, :]]
    for _ in range(max_len):
        prev = levels[-1]
        # x = a w: first symbol varies slowest
        nxt = np.einsum("kij,wj->kwi", A.mats, prev).reshape(-1, A.n)
        levels.append(nxt)
    return np.vstack(levels)


def truncated_norm_sq(A: Wfa, max_len: int) -> float:
    """``sum_{|x| <= max_len} f(x)^2`` by explicit enumeration, level by level."""
    total = 0.0
    level = A.alpha[None, :]
    for k in range(max_len + 1):
        if k:
            level = np.einsum("wi,kij->wkj", level, A.mats).reshape(-1, A.n)
        total += float(np.sum((level @ A.beta) ** 2))
    return total


def tail_mass(A: Wfa, max_len: int) -> float:
    """``sum_{|x| > max_len} f(x)^2`` from a minimal automaton of ``f**2``.

    Level sums of ``f**2`` are ``b0^T M^k b1`` with ``M = sum_a B_a``; the tail
    is the geometric remainder, finite only when ``rho(M) < 1``.
    """
    B = minimize(kron_square(A)).minimal
    M = B.transition_sum()
    if spectral_radius(M) >= 1.0:
        raise DivergenceError("tail is infinite")
    v = B.alpha @ np.linalg.matrix_power(M, max_len + 1)
    return float(v @ np.linalg.solve(np.eye(B.n) - M, B.beta))


@dataclass
class HankelBlock:
    """Finite sub-block ``H[p, s] = f(p s)`` with explicit index words."""

    prefixes: list[tuple[str, ...]]
    suffixes: list[tuple[str, ...]]
    values: np.ndarray
    forward: np.ndarray | None = field(default=None, repr=False)
    backward: np.ndarray | None = field(default=None, repr=False)

    def entry(self, p, s) -> float:
        return float(self.values[self.prefixes.index(tuple(p)), self.suffixes.index(tuple(s))])


def hankel_block(A: Wfa, max_len_p: int, max_len_s: int, cap: int = HANKEL_CAP) -> HankelBlock:
    k = len(A.alphabet)
    n_p, n_s = count_words(k, max_len_p), count_words(k, max_len_s)
    if n_p * n_s > cap:
        raise ModelError(f"Hankel block of {n_p}x{n_s} entries exceeds the cap of {cap}")
    P = _forward_rows(A, max_len_p)
    S = _backward_rows(A, max_len_s)
    return HankelBlock(
        list(words(A.alphabet, max_len_p)), list(words(A.alphabet, max_len_s)), P @ S.T, P, S
    )


def hankel_svd(Hb: HankelBlock, rank_tol: float = DEFAULT_RANK_TOL,
               factored_above: int = 1_000_000) -> Svd:
    """SVD of the block; large blocks go through QR of the two factors."""
    if Hb.forward is None or Hb.values.size <= factored_above:
        return svd(Hb.values, rank_tol)
    Qp, Rp = np.linalg.qr(Hb.forward)
    Qs, Rs = np.linalg.qr(Hb.backward)
    inner = svd(Rp @ Rs.T, rank_tol)
    return Svd(Qp @ inner.U, inner.s, Qs @ inner.V)
