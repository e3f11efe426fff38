"""Exact minimization by forward then backward orthogonal basis reduction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_RANK_TOL
from .wfa import Wfa, zero_wfa


@dataclass(frozen=True)
class MinimizationResult:
    minimal: Wfa
    original_dim: int
    minimal_dim: int
    forward_basis: np.ndarray  # n x k, orthonormal columns
    backward_basis: np.ndarray  # k x m, orthonormal columns

    @property
    def reduced(self) -> bool:
        return self.minimal_dim < self.original_dim


def krylov_basis(start: np.ndarray, ops, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the smallest ``ops``-invariant subspace containing ``start``.

    Breadth-first closure with twice-iterated Gram-Schmidt. A candidate
    ``M @ v`` (``v`` a unit basis vector) is kept only if its residual is
    larger than ``rank_tol * ||M||_2``; borderline directions are dropped.
    """
    start = np.asarray(start, dtype=float)
    dim = start.size
    basis = np.zeros((dim, 0))
    nrm = np.linalg.norm(start)
    if nrm == 0.0:
        return basis
    vecs = [start / nrm]
    queue = deque([0])
    scales = [np.linalg.norm(M, 2) for M in ops]
    while queue and len(vecs) < dim:
        v = vecs[queue.popleft()]
        for M, scale in zip(ops, scales):
            if scale == 0.0:
                continue
            w = M @ v
            B = np.array(vecs).T
            r = w - B @ (B.T @ w)
            r = r - B @ (B.T @ r)
            rn = np.linalg.norm(r)
            if rn > rank_tol * scale:
                vecs.append(r / rn)
                queue.append(len(vecs) - 1)
                if len(vecs) == dim:
                    break
    return np.array(vecs).T


def _project(A: Wfa, B: np.ndarray) -> Wfa:
    return Wfa(A.alphabet, B.T @ A.alpha, B.T @ A.beta, B.T @ A.mats @ B)


def minimize(A: Wfa, rank_tol: float = DEFAULT_RANK_TOL) -> MinimizationResult:
    """Minimal automaton equivalent to ``A``.

    The zero function comes back as a one-state automaton with zero weights.
    """
    F = krylov_basis(A.alpha, [M.T for M in A.mats], rank_tol)
    if F.shape[1] == 0:
        return MinimizationResult(zero_wfa(A.alphabet), A.n, 1, F, np.zeros((0, 0)))
    R = _project(A, F)
    Bb = krylov_basis(R.beta, list(R.mats), rank_tol)
    if Bb.shape[1] == 0:
        return MinimizationResult(zero_wfa(A.alphabet), A.n, 1, F, Bb)
    M = _project(R, Bb)
    return MinimizationResult(M, A.n, M.n, F, Bb)


def rank(A: Wfa, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return minimize(A, rank_tol).minimal_dim


def is_minimal(A: Wfa, rank_tol: float = DEFAULT_RANK_TOL) -> bool:
    return minimize(A, rank_tol).minimal_dim == A.n
