"""Reachability and observability Gramians.

Three routes:

* ``gramians_linear``: vectorize the fixed-point equations and solve the
  ``n^2 x n^2`` linear system (only valid when ``rho(sum_a A_a (x) A_a) < 1``).
* ``gramians_fixed_point``: iterate ``X <- C + sum_a L_a X R_a^T`` from zero.
  The iterates increase monotonically to the least PSD fixed point.
* ``build_sdp``: the affine parametrization of all solutions of the linear
  system plus the PSD/symmetry constraints, used to validate that the fixed
  point is the least (minimum trace) PSD solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
import scipy.sparse.linalg as spla

from .errors import DivergenceError, ModelError, NumericalError
from .numerics import DEFAULT_RANK_TOL, min_eig, pinv, spectral_radius, svd, symmetrize, unvec, vec
from .wfa import Wfa

EPS = float(np.finfo(float).eps)
Side = Literal["p", "s"]


@dataclass(frozen=True)
class FixedPointConfig:
    tol: float = 1e-12
    max_iter: int = 100_000
    # trace growth factor over the first ``growth_window`` iterations that
    # counts as divergence
    growth_factor: float = 1e8
    growth_window: int = 1000
    # when the iteration is still running after this many steps, compute the
    # spectral radius of the map restricted to the subspace the iterates live in
    certify_after: int = 200
    certify_max_dim: int = 4096
    radius_margin: float = 1e-9
    # after the tolerance is met, continue while updates keep shrinking
    polish: bool = True


LINEAR_MAX_STATES = 64


@dataclass(frozen=True)
class GramianPair:
    gp: np.ndarray
    gs: np.ndarray
    method: str
    residual_p: float
    residual_s: float
    iterations: int = 0
    details: dict = field(default_factory=dict, compare=False)


def apply_fp(A: Wfa, X) -> np.ndarray:
    """``alpha alpha^T + sum_a A_a^T X A_a``."""
    X = _square(A, X)
    return np.outer(A.alpha, A.alpha) + (A.mats.transpose(0, 2, 1) @ X @ A.mats).sum(axis=0)


def apply_fs(A: Wfa, Y) -> np.ndarray:
    """``beta beta^T + sum_a A_a Y A_a^T``."""
    Y = _square(A, Y)
    return np.outer(A.beta, A.beta) + (A.mats @ Y @ A.mats.transpose(0, 2, 1)).sum(axis=0)


def _square(A: Wfa, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (A.n, A.n):
        raise ModelError(f"expected a {A.n}x{A.n} matrix, got {X.shape}")
    return X


def fixed_point_residual(A: Wfa, G, side: Side) -> float:
    F = apply_fp if side == "p" else apply_fs
    return float(np.linalg.norm(F(A, G) - G))


# ---------------------------------------------------------------------------
# fixed-point iteration


def _restricted_radius(apply: Callable[[np.ndarray], np.ndarray], start: np.ndarray,
                       rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Spectral radius of a linear map restricted to the cyclic subspace of ``start``.

    Arnoldi with full reorthogonalization; stops when a new direction is
    numerically dependent on the previous ones.
    """
    nrm = np.linalg.norm(start)
    if nrm == 0.0:
        return 0.0
    dim = start.size
    Q = [start / nrm]
    cols = []
    sub = []
    op_scale = 0.0
    for _ in range(dim):
        w = apply(Q[-1])
        op_scale = max(op_scale, np.linalg.norm(w))
        B = np.array(Q).T
        h = B.T @ w
        r = w - B @ h
        h2 = B.T @ r
        r = r - B @ h2
        h = h + h2
        cols.append(h)
        rn = np.linalg.norm(r)
        if rn <= rank_tol * max(op_scale, 1e-300) or len(Q) == dim:
            break
        sub.append(rn)
        Q.append(r / rn)
    k = len(Q)
    H = np.zeros((k, k))
    for j, h in enumerate(cols):
        H[: h.size, j] = h
    for j, rn in enumerate(sub):
        H[j + 1, j] = rn
    # the last Arnoldi residual was dropped, so H is the restriction to span(Q)
    return spectral_radius(H)


def _polish(X, delta, C, L, Rt, it, patience: int = 25):
    """Keep iterating a converged sequence down to its rounding floor.

    Updates of non-normal maps need not shrink monotonically, so the loop
    only stops after ``patience`` steps without a new smallest update, when
    the update is a few ulps of ``||X||``, or after as many extra steps as
    were already spent.
    """
    stale = 0
    for _ in range(it):
        X_new = C + (L @ X @ Rt).sum(axis=0)
        d = np.linalg.norm(X_new - X)
        X, it = X_new, it + 1
        if d < delta:
            delta, stale = d, 0
        else:
            stale += 1
        if stale >= patience or d <= 4 * EPS * np.linalg.norm(X):
            break
    return X, it


def _stein_iterate(C: np.ndarray, L: np.ndarray, R: np.ndarray, config: FixedPointConfig,
                   label: str, watch: Callable[[np.ndarray], tuple[float, float]] | None = None,
                   ) -> tuple[np.ndarray, float, int]:
    """Least solution of ``X = C + sum_a L_a X R_a^T`` by plain iteration from 0.

    Stops when the update is below ``tol * (1 + ||X||_F)``. If ``watch`` is
    given it maps ``X`` to ``(q, m)``: a scalar of interest and the magnitude
    of the terms it sums (its rounding scale). ``q`` must then also have
    settled to relative ``tol`` or below ``8 eps m``; this matters when the
    quantity of interest is tiny compared to ``||X||``.

    Returns ``(X, residual, iterations)`` where ``residual`` is the Frobenius
    norm of ``F(X) - X``.
    """
    Rt = R.transpose(0, 2, 1)
    X = np.zeros_like(C)
    first_trace = None
    certified = False
    q = 0.0
    for it in range(1, config.max_iter + 1):
        X_new = C + (L @ X @ Rt).sum(axis=0)
        delta = np.linalg.norm(X_new - X)
        X = X_new
        if not np.all(np.isfinite(X)):
            raise DivergenceError(f"divergent: {label} Gramian undefined (overflow)")
        scale = np.linalg.norm(X)
        if not (np.isfinite(scale) and np.isfinite(delta)):
            raise DivergenceError(f"divergent: {label} Gramian undefined (overflow)")
        settled = True
        if watch is not None:
            q_new, mag = watch(X)
            settled = abs(q_new - q) <= config.tol * abs(q_new) + 8 * EPS * mag
            q = q_new
        if settled and delta <= config.tol * (1.0 + scale):
            if config.polish:
                X, it = _polish(X, delta, C, L, Rt, it)
            return X, float(np.linalg.norm(C + (L @ X @ Rt).sum(axis=0) - X)), it
        if it == 1:
            first_trace = abs(np.trace(X)) + scale
        elif it == config.growth_window:
            if scale > config.growth_factor * max(first_trace, 1e-300):
                raise DivergenceError(
                    f"divergent: {label} Gramian undefined (norm grew by {scale / first_trace:.3e})"
                )
        if not certified and it >= config.certify_after and C.size <= config.certify_max_dim:
            certified = True
            n, m = C.shape

            def apply(v):
                return vec((L @ unvec(v, n, m) @ Rt).sum(axis=0))

            rho = _restricted_radius(apply, vec(C))
            if rho >= 1.0 - config.radius_margin:
                raise DivergenceError(
                    f"divergent: {label} Gramian undefined (restricted spectral radius {rho:.6g})"
                )
    raise DivergenceError(
        f"divergent: {label} Gramian undefined (no convergence in {config.max_iter} iterations, "
        f"last update {delta:.3e})"
    )


def gramian_fixed_point(A: Wfa, side: Side, config: FixedPointConfig = FixedPointConfig(),
                        watch: Callable[[np.ndarray], tuple[float, float]] | None = None):
    """One Gramian by fixed-point iteration: ``(G, residual, iterations)``."""
    if side == "p":
        At = A.mats.transpose(0, 2, 1)
        G, res, it = _stein_iterate(np.outer(A.alpha, A.alpha), At, At, config, "reachability",
                                    watch)
    elif side == "s":
        G, res, it = _stein_iterate(np.outer(A.beta, A.beta), A.mats, A.mats, config,
                                    "observability", watch)
    else:
        raise ValueError(f"side must be 'p' or 's', got {side!r}")
    return symmetrize(G), res, it


def gramians_fixed_point(A: Wfa, tol: float = 1e-12, max_iter: int = 100_000,
                         config: FixedPointConfig | None = None) -> GramianPair:
    config = config or FixedPointConfig(tol=tol, max_iter=max_iter)
    gp, _, itp = gramian_fixed_point(A, "p", config)
    gs, _, its = gramian_fixed_point(A, "s", config)
    return GramianPair(
        gp, gs, "fixed_point",
        fixed_point_residual(A, gp, "p"), fixed_point_residual(A, gs, "s"),
        max(itp, its), {"iterations_p": itp, "iterations_s": its},
    )


def cross_gramian(A: Wfa, B: Wfa, config: FixedPointConfig = FixedPointConfig(),
                  watch: Callable[[np.ndarray], tuple[float, float]] | None = None,
                  ) -> np.ndarray:
    """``sum_x (A_x beta_A)(B_x beta_B)^T``: least solution of ``X = b_A b_B^T + sum_a A_a X B_a^T``."""
    if A.alphabet != B.alphabet:
        raise ModelError("alphabet mismatch")
    X, _, _ = _stein_iterate(np.outer(A.beta, B.beta), A.mats, B.mats, config, "cross", watch)
    return X


# ---------------------------------------------------------------------------
# unique-solution linear system


def kron_radius(A: Wfa) -> float:
    """``rho(sum_a A_a (x) A_a)``; uses ARPACK above 400 Kronecker states."""
    n = A.n
    if n * n <= 400:
        return spectral_radius(A.kron_sum())
    At = A.mats.transpose(0, 2, 1)

    def matvec(v):
        return vec((A.mats @ unvec(v, n) @ At).sum(axis=0))

    op = spla.LinearOperator((n * n, n * n), matvec=matvec, dtype=float)
    try:
        vals = spla.eigs(op, k=1, which="LM", return_eigenvectors=False, maxiter=10 * n * n)
    except spla.ArpackNoConvergence as exc:
        raise NumericalError("spectral radius did not converge") from exc
    return float(np.abs(vals).max())


def gramians_linear(A: Wfa, config: FixedPointConfig = FixedPointConfig()) -> GramianPair:
    """Solve the vectorized fixed-point equations directly.

    Requires ``rho(sum_a A_a (x) A_a) < 1``. Above ``LINEAR_MAX_STATES``
    states the dense system is too large and the fixed-point route is used.
    """
    rho = kron_radius(A)
    if rho >= 1.0:
        raise DivergenceError(
            f"rho(sum A_a (x) A_a) = {rho:.6g} >= 1: the linear system has no unique "
            "solution; use the fixed-point route"
        )
    if A.n > LINEAR_MAX_STATES:
        pair = gramians_fixed_point(A, config=config)
        return GramianPair(pair.gp, pair.gs, pair.method, pair.residual_p, pair.residual_s,
                           pair.iterations, {**pair.details, "fallback": True, "rho": rho})
    n = A.n
    Msys = np.eye(n * n) - A.kron_sum()
    try:
        y = np.linalg.solve(Msys, np.kron(A.beta, A.beta))
        x = np.linalg.solve(Msys.T, np.kron(A.alpha, A.alpha))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Gramian linear system is singular") from exc
    gp = symmetrize(unvec(x, n))
    gs = symmetrize(unvec(y, n))
    return GramianPair(gp, gs, "linear_system", fixed_point_residual(A, gp, "p"),
                       fixed_point_residual(A, gs, "s"), 0, {"rho": rho})


def gramians(A: Wfa, method: str = "auto", config: FixedPointConfig = FixedPointConfig()) -> GramianPair:
    """Dispatch: ``auto`` tries the linear system when it is valid and small."""
    if method == "linear":
        return gramians_linear(A, config)
    if method in ("fixed-point", "fixed_point"):
        return gramians_fixed_point(A, config=config)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if A.n <= LINEAR_MAX_STATES and kron_radius(A) < 1.0:
        return gramians_linear(A, config)
    return gramians_fixed_point(A, config=config)


# ---------------------------------------------------------------------------
# semi-definite program data


@dataclass(frozen=True)
class SdpProblem:
    """All solutions ``vec(Y) = y0 + basis @ t`` of the vectorized fixed-point system.

    ``system`` is ``I - sum_a A_a (x) A_a`` (transposed for the reachability
    side) and ``y0`` its min-norm solution. ``basis`` has orthonormal columns
    spanning the null space. A point ``t`` is feasible when ``Y(t)`` is
    symmetric and its symmetric part is PSD; the objective is ``Tr(Y(t))``
    minus the constant ``Tr(Y0)``.
    """

    side: str
    n: int
    system: np.ndarray
    rhs: np.ndarray
    y0: np.ndarray
    basis: np.ndarray
    traces: np.ndarray

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def Y0(self) -> np.ndarray:
        return unvec(self.y0, self.n)

    def Yi(self, i: int) -> np.ndarray:
        return unvec(self.basis[:, i], self.n)

    @staticmethod
    def project(Y) -> np.ndarray:
        return symmetrize(Y)

    def matrix(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(self.d)
        return unvec(self.y0 + self.basis @ t, self.n)

    def objective(self, t) -> float:
        t = np.asarray(t, dtype=float).reshape(self.d)
        return float(self.traces @ t)

    def symmetry_residual(self, t) -> float:
        Y = self.matrix(t)
        return float(np.linalg.norm(Y - Y.T))

    def psd_margin(self, t) -> float:
        return min_eig(self.project(self.matrix(t)))

    def is_feasible(self, t, tol: float = 1e-7) -> bool:
        return self.symmetry_residual(t) <= tol and self.psd_margin(t) >= -tol

    def system_residual(self, t) -> float:
        t = np.asarray(t, dtype=float).reshape(self.d)
        return float(np.linalg.norm(self.system @ (self.y0 + self.basis @ t) - self.rhs))

    def coordinates(self, G) -> tuple[np.ndarray, float]:
        """Coordinates of ``G`` in the affine solution space and the distance to it."""
        g = vec(G)
        t = self.basis.T @ (g - self.y0)
        return t, float(np.linalg.norm(self.y0 + self.basis @ t - g))

    def symmetric_directions(self, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
        """Basis (columns, in ``t`` space) of directions keeping ``Y`` symmetric."""
        if self.d == 0:
            return np.zeros((0, 0))
        cols = [vec(self.Yi(i) - self.Yi(i).T) for i in range(self.d)]
        Kmat = np.array(cols).T
        _, s, Vt = np.linalg.svd(Kmat, full_matrices=True)
        smax = s[0] if s.size and s[0] > 0 else 1.0
        r = int(np.count_nonzero(s > tol * max(smax, 1.0)))
        return Vt[r:].T


def build_sdp(A: Wfa, side: Side, consistency_tol: float = 1e-7,
              rank_tol: float = DEFAULT_RANK_TOL) -> SdpProblem:
    n = A.n
    K = A.kron_sum()
    if side == "s":
        system = np.eye(n * n) - K
        rhs = np.kron(A.beta, A.beta)
    elif side == "p":
        system = np.eye(n * n) - K.T
        rhs = np.kron(A.alpha, A.alpha)
    else:
        raise ValueError(f"side must be 'p' or 's', got {side!r}")
    y0 = pinv(system, rank_tol) @ rhs
    res = np.linalg.norm(system @ y0 - rhs)
    if res > consistency_tol * (1.0 + np.linalg.norm(rhs)):
        raise DivergenceError(f"inconsistent Gramian linear system (residual {res:.3e})")
    dec = svd(system, rank_tol)
    # orthonormal complement of the row space = null space
    _, _, Vt = np.linalg.svd(system)
    basis = Vt[dec.rank:].T
    traces = np.array([np.trace(unvec(basis[:, i], n)) for i in range(basis.shape[1])])
    return SdpProblem(side, n, system, rhs, y0, basis, traces)
