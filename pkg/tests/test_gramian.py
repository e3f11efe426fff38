import itertools

import numpy as np
import pytest

from wfasva import models
from wfasva.errors import DivergenceError
from wfasva.gramian import (
    FixedPointConfig,
    apply_fp,
    apply_fs,
    build_sdp,
    cross_gramian,
    fixed_point_residual,
    gramian_fixed_point,
    gramians,
    gramians_fixed_point,
    gramians_linear,
    kron_radius,
)
from wfasva.numerics import psd_geq
from wfasva.wfa import Wfa


def _word_matrix(A, word):
    M = np.eye(A.n)
    for a in word:
        M = M @ A[a]
    return M


def _brute_gramians(A, t):
    gp = np.zeros((A.n, A.n))
    gs = np.zeros((A.n, A.n))
    for k in range(t + 1):
        for word in itertools.product(A.alphabet, repeat=k):
            M = _word_matrix(A, word)
            p = A.alpha @ M
            s = M @ A.beta
            gp += np.outer(p, p)
            gs += np.outer(s, s)
    return gp, gs


def test_apply_on_zero_gives_outer_products(rng):
    A = models.random_wfa(rng, 3, 2)
    np.testing.assert_array_equal(apply_fp(A, np.zeros((3, 3))), np.outer(A.alpha, A.alpha))
    np.testing.assert_array_equal(apply_fs(A, np.zeros((3, 3))), np.outer(A.beta, A.beta))


def test_apply_is_monotone(rng):
    A = models.random_wfa(rng, 4, 3)
    for _ in range(20):
        P, R = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        Y = P @ P.T
        X = Y + R @ R.T
        assert psd_geq(X, Y)
        assert psd_geq(apply_fp(A, X), apply_fp(A, Y), 1e-10)
        assert psd_geq(apply_fs(A, X), apply_fs(A, Y), 1e-10)


@pytest.mark.parametrize("t", [0, 1, 2, 3, 4])
def test_iterates_are_finite_word_sums(rng, t):
    A = models.random_wfa(rng, 3, 2)
    gp, gs = np.zeros((3, 3)), np.zeros((3, 3))
    for _ in range(t + 1):
        gp, gs = apply_fp(A, gp), apply_fs(A, gs)
    bp, bs = _brute_gramians(A, t)
    np.testing.assert_allclose(gp, bp, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(gs, bs, rtol=1e-12, atol=1e-12)


def test_geometric_gramians_linear_and_fixed_point():
    A = models.geometric(0.5)
    lin = gramians_linear(A)
    fp = gramians_fixed_point(A)
    for G in (lin.gp, lin.gs):
        assert G[0, 0] == pytest.approx(4 / 3, rel=1e-14)
    for G in (fp.gp, fp.gs):
        assert G[0, 0] == pytest.approx(4 / 3, abs=1e-11)
    assert lin.method == "linear_system" and fp.method == "fixed_point"


def test_detfree_model_has_gramians():
    A = models.detfree_dynamic()
    G = gramians_linear(A)
    assert fixed_point_residual(A, G.gp, "p") <= 1e-9
    assert fixed_point_residual(A, G.gs, "s") <= 1e-9
    for M in (G.gp, G.gs):
        np.testing.assert_allclose(M, M.T, atol=1e-8)
        assert np.linalg.eigvalsh(M)[0] > -1e-10


def test_zero_function_has_zero_observability_gramian(rng):
    A = models.random_wfa(rng, 3, 2)
    Z = Wfa(A.alphabet, A.alpha, np.zeros(3), A.mats)
    np.testing.assert_array_equal(gramians_linear(Z).gs, np.zeros((3, 3)))


def test_non_minimal_forward_iteration_diverges():
    A = models.redundant_state()
    with pytest.raises(DivergenceError, match="reachability"):
        gramian_fixed_point(A, "p")
    G, res, _ = gramian_fixed_point(A, "s")
    assert res <= 1e-10


def test_sticky_model_observability_diverges():
    with pytest.raises(DivergenceError, match="observability"):
        gramian_fixed_point(models.sticky_dynamic(), "s")


def test_growth_heuristic_catches_explosive_iteration():
    A = models.geometric(1.5)
    with pytest.raises(DivergenceError):
        gramians_fixed_point(A, config=FixedPointConfig(certify_after=10**9))


def test_linear_route_refuses_unit_radius():
    with pytest.raises(DivergenceError):
        gramians_linear(models.sticky_dynamic())


def test_linear_route_falls_back_above_size_limit(rng):
    A = models.random_wfa(rng, 70, 2, radius=0.5)
    G = gramians_linear(A)
    assert G.method == "fixed_point" and G.details["fallback"]


def test_cross_method_agreement(rng):
    for _ in range(10):
        A = models.random_wfa(rng, int(rng.integers(2, 7)), int(rng.integers(1, 4)),
                              radius=float(rng.uniform(0.2, 0.95)))
        lin, fp = gramians_linear(A), gramians_fixed_point(A)
        assert np.linalg.norm(lin.gp - fp.gp) <= 1e-7
        assert np.linalg.norm(lin.gs - fp.gs) <= 1e-7
        assert max(lin.residual_p, lin.residual_s, fp.residual_p, fp.residual_s) <= 1e-10


def test_auto_dispatch(rng):
    assert gramians(models.geometric(0.5)).method == "linear_system"
    assert gramians(models.redundant_state().__class__(
        ("a",), [1.0], [1.0], [[[0.5]]]), "fixed-point").method == "fixed_point"
    with pytest.raises(ValueError):
        gramians(models.geometric(0.5), "magic")


def test_cross_gramian_of_identical_automata_is_observability(rng):
    A = models.random_wfa(rng, 3, 2, radius=0.6)
    np.testing.assert_allclose(cross_gramian(A, A), gramians_linear(A).gs, atol=1e-10)


def test_kron_radius_iterative_matches_dense(rng):
    A = models.random_wfa(rng, 21, 2, radius=0.7)
    assert kron_radius(A) == pytest.approx(0.7, rel=1e-6)


class TestSdp:
    def test_unique_case_has_trivial_null_space(self, rng):
        A = models.random_wfa(rng, 3, 2, radius=0.6)
        G = gramians_linear(A)
        for side, ref in (("s", G.gs), ("p", G.gp)):
            prob = build_sdp(A, side)
            assert prob.d == 0
            np.testing.assert_allclose(prob.Y0, ref, atol=1e-9)
            t, dist = prob.coordinates(ref)
            assert dist <= 1e-9 and prob.is_feasible(t)

    def test_singular_instance_least_solution(self, rng):
        A = models.unobservable_extension(rng, 3, 2, 2)
        assert kron_radius(A) == pytest.approx(1.0, abs=1e-9)
        gs, res, _ = gramian_fixed_point(A, "s")
        prob = build_sdp(A, "s")
        assert prob.d >= 1
        t_star, dist = prob.coordinates(gs)
        assert dist <= 1e-7
        assert prob.system_residual(t_star) <= 1e-7
        assert prob.is_feasible(t_star)
        dirs = prob.symmetric_directions()
        assert dirs.shape[1] >= 1
        base = prob.objective(t_star)
        feasible = 0
        while feasible < 20:
            u = dirs @ rng.standard_normal(dirs.shape[1])
            t = t_star + rng.uniform(-1, 1) * u / np.linalg.norm(u)
            if prob.is_feasible(t):
                feasible += 1
                assert prob.objective(t) >= base - 1e-7

    def test_inconsistent_system_raises(self):
        with pytest.raises(DivergenceError):
            build_sdp(models.sticky_dynamic(), "s")
