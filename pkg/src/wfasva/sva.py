"""Singular value automata: canonical form, truncation and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ModelError, NumericalError
from .gramian import FixedPointConfig, GramianPair, gramians
from .minimize import minimize
from .numerics import DEFAULT_RANK_TOL, cholesky_psd
from .wfa import Wfa, conjugate

SIGMA_FLOOR = 1e-14


@dataclass(frozen=True)
class SvaForm:
    """An SVA together with its Hankel singular values.

    ``automaton == conjugate(source, q, q_inv)`` where ``source`` is the
    (minimal) automaton that was balanced; ``minimized`` records whether
    ``source`` came out of an automatic minimization of the input.
    """

    automaton: Wfa
    sigmas: np.ndarray
    q: np.ndarray | None = None
    q_inv: np.ndarray | None = None
    source: Wfa | None = None
    source_dim: int | None = None
    minimized: bool = False
    jitter: tuple[float, float] = (0.0, 0.0)
    gramians: GramianPair | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.automaton.n


def _fix_signs(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flip column pairs so the largest-magnitude entry of each U column is positive."""
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def compute_sva(A: Wfa, rank_tol: float = DEFAULT_RANK_TOL, method: str = "auto",
                config: FixedPointConfig = FixedPointConfig()) -> SvaForm:
    """Balance a WFA so that both Gramians equal ``diag(sigmas)``.

    Non-minimal inputs are minimized first. Raises ``DivergenceError`` when
    the Gramians are undefined (the function is not square-summable).
    """
    red = minimize(A, rank_tol)
    B = red.minimal if red.reduced else A
    if not np.any(B.beta) or not np.any(B.alpha):
        raise ModelError("the zero function has no singular value automaton")
    G = gramians(B, method, config)
    cp = cholesky_psd(G.gp)
    cs = cholesky_psd(G.gs)
    Lp, Ls = cp.L, cs.L
    U, d, Vt = np.linalg.svd(Lp.T @ Ls)
    if d[-1] <= SIGMA_FLOOR * d[0]:
        raise NumericalError(
            f"Hankel singular values collapse (sigma_min/sigma_max = {d[-1] / d[0]:.3e}); "
            "the automaton is numerically non-minimal"
        )
    U, V = _fix_signs(U, Vt.T)
    root = np.sqrt(d)
    Q = scipy.linalg.solve_triangular(Lp.T, U * root, lower=False)
    Q_inv = (root[:, None] * V.T) @ scipy.linalg.solve_triangular(Ls, np.eye(B.n), lower=True)
    S = conjugate(B, Q, Q_inv)
    return SvaForm(S, d, Q, Q_inv, B, A.n, red.reduced, (cp.jitter, cs.jitter), G)


@dataclass(frozen=True)
class TruncationResult:
    truncated: Wfa
    kept: int
    dropped_sigmas: np.ndarray
    bound: float
    exact_error_sq: float | None = None


def _check_cut(S: SvaForm, n_hat: int, allow_full: bool = False) -> None:
    upper = S.n if allow_full else S.n - 1
    if not 1 <= n_hat <= upper:
        raise ModelError(f"n_hat must be in [1, {upper}], got {n_hat}")


def truncate(S: SvaForm, n_hat: int) -> TruncationResult:
    """Keep the leading ``n_hat`` states of the SVA."""
    _check_cut(S, n_hat)
    A = S.automaton
    T = Wfa(A.alphabet, A.alpha[:n_hat], A.beta[:n_hat], A.mats[:, :n_hat, :n_hat])
    tail = np.array(S.sigmas[n_hat:], dtype=float)
    return TruncationResult(T, n_hat, tail, float(np.sum(tail**2)))


def pad_truncation(S: SvaForm, n_hat: int) -> Wfa:
    """Full-size automaton ``<P alpha, beta, {A_a P}>`` with ``P = diag(I_nhat, 0)``.

    Computes the same function as ``truncate(S, n_hat).truncated``.
    ``n_hat == n`` is allowed and returns the SVA unchanged.
    """
    _check_cut(S, n_hat, allow_full=True)
    A = S.automaton
    alpha = A.alpha.copy()
    alpha[n_hat:] = 0.0
    mats = A.mats.copy()
    mats[:, :, n_hat:] = 0.0
    return Wfa(A.alphabet, alpha, A.beta, mats)


@dataclass(frozen=True)
class SvaDiagnostics:
    # per column j: sum_i s_i sum_a A_a(i,j)^2 - (s_j - alpha_j^2)
    column_residuals: np.ndarray
    # per row i: sum_j s_j sum_a A_a(i,j)^2 - (s_i - beta_i^2)
    row_residuals: np.ndarray
    coefficient_bound: np.ndarray  # sqrt(min(s_i, s_j) / max(s_i, s_j))
    coefficient_excess: np.ndarray  # max_a |A_a(i,j)| - bound

    @property
    def max_identity_residual(self) -> float:
        return float(max(np.abs(self.column_residuals).max(), np.abs(self.row_residuals).max()))

    @property
    def max_coefficient_excess(self) -> float:
        return float(self.coefficient_excess.max())

    def ok(self, tol: float = 1e-7) -> bool:
        return self.max_identity_residual <= tol and self.max_coefficient_excess <= tol


def sva_diagnostics(S: SvaForm) -> SvaDiagnostics:
    A = S.automaton
    s = np.asarray(S.sigmas, dtype=float)
    sq = (A.mats**2).sum(axis=0)
    col = s @ sq - (s - A.alpha**2)
    row = sq @ s - (s - A.beta**2)
    lo = np.minimum.outer(s, s)
    hi = np.maximum.outer(s, s)
    bound = np.sqrt(lo / hi)
    excess = np.abs(A.mats).max(axis=0) - bound
    return SvaDiagnostics(col, row, bound, excess)
