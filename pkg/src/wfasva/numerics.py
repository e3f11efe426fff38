"""Dense linear algebra helpers shared by the rest of the package.

Everything here is a thin, contract-checking layer over numpy/scipy. The
conventions that matter downstream:

* ``vec`` stacks columns, so ``vec(A @ X @ B.T) == kron(B, A) @ vec(X)``.
* ``svd`` is compact: singular values at or below ``rank_tol * s_max`` (or
  the absolute floor ``1e-12``) are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError

DEFAULT_RANK_TOL = 1e-10
ABS_RANK_FLOOR = 1e-12
PSD_NEG_TOL = 1e-8
JITTER_REL = 1e-12


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class Svd:
    """Compact SVD ``M = U @ diag(s) @ V.T`` with ``s`` descending."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.s)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.T


def svd(M, rank_tol: float = DEFAULT_RANK_TOL) -> Svd:
    if rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    M = as_matrix(M)
    if M.size == 0:
        return Svd(np.zeros((M.shape[0], 0)), np.zeros(0), np.zeros((M.shape[1], 0)))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    smax = s[0] if len(s) else 0.0
    keep = (s > rank_tol * smax) & (s > ABS_RANK_FLOOR)
    r = int(np.count_nonzero(keep))
    return Svd(U[:, :r], s[:r], Vt[:r].T)


@dataclass(frozen=True)
class Cholesky:
    """Lower factor of a PSD matrix plus the diagonal shift that was needed."""

    L: np.ndarray
    jitter: float = 0.0
    min_eig: float = field(default=0.0)


def cholesky_psd(G) -> Cholesky:
    """Factor ``G ~= L @ L.T`` for a symmetric PSD ``G``.

    ``G`` is symmetrized first. If its smallest eigenvalue is slightly
    negative or numerically zero a multiple of the identity is added so the
    factor is invertible; the shift is reported in ``Cholesky.jitter``.
    """
    G = as_matrix(G, "G")
    if G.shape[0] != G.shape[1]:
        raise ValueError(f"G must be square, got {G.shape}")
    G = 0.5 * (G + G.T)
    eigs = np.linalg.eigvalsh(G)
    norm2 = max(abs(eigs[0]), abs(eigs[-1]))
    lam_min = float(eigs[0])
    if lam_min < -PSD_NEG_TOL * norm2:
        raise NumericalError(
            f"matrix is indefinite: most negative eigenvalue {lam_min:.3e} "
            f"(spectral norm {norm2:.3e})"
        )
    jitter = 0.0
    if norm2 == 0.0:
        raise NumericalError("cannot factor the zero matrix into an invertible factor")
    if lam_min <= JITTER_REL * norm2:
        jitter = max(-lam_min, 0.0) + JITTER_REL * norm2
        G = G + jitter * np.eye(G.shape[0])
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by the shift above
        raise NumericalError(f"Cholesky failed after jitter {jitter:.3e}") from exc
    return Cholesky(L, jitter, lam_min)


def spectral_radius(M) -> float:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got {M.shape}")
    if M.size == 0:
        return 0.0
    try:
        eigs = scipy.linalg.eigvals(M)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError("eigenvalue computation did not converge") from exc
    return float(np.max(np.abs(eigs)))


def pinv(M, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse ``V diag(1/s) U.T`` built from ``svd``."""
    M = as_matrix(M)
    d = svd(M, rank_tol)
    return (d.V / d.s) @ d.U.T


def kron(Ma, Mb) -> np.ndarray:
    return np.kron(as_matrix(Ma, "Ma"), as_matrix(Mb, "Mb"))


def vec(M) -> np.ndarray:
    """Column-stacking vectorization."""
    return as_matrix(M).reshape(-1, order="F")


def unvec(v, n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    v = np.asarray(v, dtype=float)
    if v.size != n * m:
        raise ValueError(f"cannot reshape vector of size {v.size} to {n}x{m}")
    return v.reshape((n, m), order="F")


def symmetrize(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def psd_geq(G1, G2, tol: float = 0.0) -> bool:
    """Loewner order test ``G1 >= G2``, i.e. ``lambda_min(G1 - G2) >= -tol``."""
    G1 = as_matrix(G1, "G1")
    G2 = as_matrix(G2, "G2")
    if G1.shape != G2.shape:
        raise ValueError(f"shape mismatch {G1.shape} vs {G2.shape}")
    return bool(np.linalg.eigvalsh(symmetrize(G1 - G2))[0] >= -tol)


def min_eig(G) -> float:
    return float(np.linalg.eigvalsh(symmetrize(G))[0])


def induced_norm(M, p) -> float:
    """Induced matrix norm for ``p`` in ``{1, 2, inf}``."""
    return float(np.linalg.norm(as_matrix(M), ord=p))
