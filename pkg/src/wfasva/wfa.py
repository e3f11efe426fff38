"""Weighted finite automata over a finite alphabet with real weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError, NumericalError

Word = Sequence[str]

CONDITION_LIMIT = 1e12
STOCHASTIC_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Wfa:
    """Automaton ``<alpha, beta, {A_a}>`` computing ``alpha^T A_x1 ... A_xt beta``.

    ``trans`` may be a mapping ``symbol -> n x n`` or a sequence of matrices in
    alphabet order; internally the matrices are kept as one read-only
    ``(|alphabet|, n, n)`` stack (``mats``).
    """

    alphabet: tuple[str, ...]
    alpha: np.ndarray
    beta: np.ndarray
    mats: np.ndarray
    index: Mapping[str, int] = field(init=False, repr=False)

    def __init__(self, alphabet: Iterable[str], alpha, beta, trans):
        alphabet = tuple(alphabet)
        if not alphabet:
            raise ModelError("alphabet must be non-empty", "alphabet")
        for s in alphabet:
            if not isinstance(s, str) or not s:
                raise ModelError(f"symbols must be non-empty strings, got {s!r}", "alphabet")
        if len(set(alphabet)) != len(alphabet):
            raise ModelError("alphabet has duplicate symbols", "alphabet")

        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if alpha.ndim != 1 or alpha.size == 0:
            raise ModelError(f"alpha must be a non-empty vector, got shape {alpha.shape}", "alpha")
        n = alpha.size
        if beta.shape != (n,):
            raise ModelError(f"beta must have length {n}, got shape {beta.shape}", "beta")

        if isinstance(trans, Mapping):
            extra = set(trans) - set(alphabet)
            if extra:
                raise ModelError(f"matrices for unknown symbols {sorted(extra)}", "transitions")
            missing = [s for s in alphabet if s not in trans]
            if missing:
                raise ModelError(f"missing matrices for symbols {missing}", "transitions")
            mats = [np.asarray(trans[s], dtype=float) for s in alphabet]
        else:
            mats = [np.asarray(m, dtype=float) for m in trans]
            if len(mats) != len(alphabet):
                raise ModelError(
                    f"expected {len(alphabet)} matrices, got {len(mats)}", "transitions"
                )
        for s, m in zip(alphabet, mats):
            if m.shape != (n, n):
                raise ModelError(
                    f"matrix has shape {m.shape}, expected {(n, n)}", f"transitions.{s}"
                )
        stack = np.stack(mats)
        named = [("alpha", alpha), ("beta", beta)]
        named += [(f"transitions.{s}", m) for s, m in zip(alphabet, mats)]
        for name, arr in named:
            if not np.all(np.isfinite(arr)):
                raise ModelError("non-finite weights", name)

        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "alpha", _frozen(alpha))
        object.__setattr__(self, "beta", _frozen(beta))
        object.__setattr__(self, "mats", _frozen(stack))
        object.__setattr__(self, "index", {s: i for i, s in enumerate(alphabet)})

    @property
    def n(self) -> int:
        return self.alpha.size

    @property
    def trans(self) -> dict[str, np.ndarray]:
        return {s: self.mats[i] for i, s in enumerate(self.alphabet)}

    def __getitem__(self, symbol: str) -> np.ndarray:
        return self.mats[self.index[symbol]]

    def __repr__(self) -> str:
        return f"Wfa(n={self.n}, alphabet={list(self.alphabet)})"

    def word(self, x) -> list[str]:
        """Normalize ``x`` to a list of symbols, checking membership.

        A plain string is split into characters, which only makes sense when
        every symbol is a single character; otherwise pass a sequence.
        """
        if isinstance(x, str):
            if x == "":
                return []
            if any(len(s) != 1 for s in self.alphabet):
                raise ModelError(
                    "alphabet has multi-character symbols; pass the word as a list of symbols"
                )
            x = list(x)
        x = list(x)
        for s in x:
            if s not in self.index:
                raise ModelError(f"unknown symbol {s!r}")
        return x

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def allclose(self, other: "Wfa", atol: float = 0.0, rtol: float = 0.0) -> bool:
        return (
            self.alphabet == other.alphabet
            and self.n == other.n
            and np.allclose(self.alpha, other.alpha, rtol=rtol, atol=atol)
            and np.allclose(self.beta, other.beta, rtol=rtol, atol=atol)
            and np.allclose(self.mats, other.mats, rtol=rtol, atol=atol)
        )

    def identical(self, other: "Wfa") -> bool:
        return (
            self.alphabet == other.alphabet
            and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.mats, other.mats)
        )

    def kron_sum(self) -> np.ndarray:
        """``sum_a A_a (x) A_a``, the transition matrix of ``kron_square``."""
        n = self.n
        out = np.zeros((n * n, n * n))
        for M in self.mats:
            out += np.kron(M, M)
        return out

    def transition_sum(self) -> np.ndarray:
        return self.mats.sum(axis=0)


def zero_wfa(alphabet: Iterable[str], n: int = 1) -> Wfa:
    """The zero function, by default as a single state with ``beta = 0``."""
    alphabet = tuple(alphabet)
    return Wfa(alphabet, np.zeros(n), np.zeros(n), np.zeros((len(alphabet), n, n)))


def evaluate(A: Wfa, x) -> float:
    """``alpha^T A_x beta`` by row-vector propagation."""
    v = A.alpha
    for s in A.word(x):
        v = v @ A.mats[A.index[s]]
    return float(v @ A.beta)


def conjugate(A: Wfa, Q, Q_inv=None) -> Wfa:
    """Change of basis ``<Q^T alpha, Q^-1 beta, {Q^-1 A_a Q}>``.

    If ``Q_inv`` is given it is trusted and no conditioning check happens.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (A.n, A.n):
        raise ModelError(f"Q must be {A.n}x{A.n}, got {Q.shape}")
    if Q_inv is None:
        cond = np.linalg.cond(Q)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise NumericalError(f"inversion of Q failed: condition number {cond:.3e}")
        Q_inv = np.linalg.inv(Q)
    else:
        Q_inv = np.asarray(Q_inv, dtype=float)
    return Wfa(A.alphabet, Q.T @ A.alpha, Q_inv @ A.beta, Q_inv @ A.mats @ Q)


def kron_square(A: Wfa) -> Wfa:
    """Automaton with ``n^2`` states computing ``f_A(x)**2``."""
    return Wfa(
        A.alphabet,
        np.kron(A.alpha, A.alpha),
        np.kron(A.beta, A.beta),
        [np.kron(M, M) for M in A.mats],
    )


def difference(A: Wfa, B: Wfa) -> Wfa:
    """Block-diagonal automaton computing ``f_A - f_B``."""
    if A.alphabet != B.alphabet:
        raise ModelError(f"alphabet mismatch: {A.alphabet} vs {B.alphabet}")
    n, m = A.n, B.n
    mats = np.zeros((len(A.alphabet), n + m, n + m))
    mats[:, :n, :n] = A.mats
    mats[:, n:, n:] = B.mats
    return Wfa(
        A.alphabet,
        np.concatenate([A.alpha, B.alpha]),
        np.concatenate([A.beta, -B.beta]),
        mats,
    )


@dataclass
class ValidationReport:
    kind: str
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def _check_initial(A: Wfa, report: ValidationReport, tol: float) -> None:
    for i in np.flatnonzero(A.alpha < -tol):
        report.violations.append(f"alpha[{i}] = {A.alpha[i]} is negative")
    total = A.alpha.sum()
    if abs(total - 1.0) > tol:
        report.violations.append(f"sum(alpha) = {total} != 1")
    for k, s in enumerate(A.alphabet):
        for i, j in zip(*np.nonzero(A.mats[k] < -tol)):
            report.violations.append(f"A[{s}][{i},{j}] = {A.mats[k][i, j]} is negative")


def validate_pgpa(A: Wfa, tol: float = STOCHASTIC_TOL) -> ValidationReport:
    """Check the proper generative conditions; never raises."""
    report = ValidationReport("pGPA")
    _check_initial(A, report, tol)
    for i in np.flatnonzero(A.beta < -tol):
        report.violations.append(f"beta[{i}] = {A.beta[i]} is negative")
    rows = A.mats.sum(axis=(0, 2)) + A.beta
    for i in np.flatnonzero(np.abs(rows - 1.0) > tol):
        report.violations.append(f"row {i}: sum_a A_a 1 + beta = {rows[i]} != 1")
    return report


def validate_pdpa(A: Wfa, tol: float = STOCHASTIC_TOL) -> ValidationReport:
    """Check the proper dynamic conditions; never raises."""
    report = ValidationReport("pDPA")
    _check_initial(A, report, tol)
    for i in np.flatnonzero(np.abs(A.beta - 1.0) > tol):
        report.violations.append(f"beta[{i}] = {A.beta[i]} != 1")
    rows = A.mats.sum(axis=(0, 2))
    for i in np.flatnonzero(np.abs(rows - 1.0) > tol):
        report.violations.append(f"row {i}: sum_a A_a 1 = {rows[i]} != 1")
    return report


def is_det_free(A: Wfa) -> bool:
    """Every symbol's matrix has max absolute row sum strictly below one."""
    return bool(np.all(np.abs(A.mats).sum(axis=2).max(axis=1) < 1.0))
