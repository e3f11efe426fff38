import numpy as np
import pytest

from wfasva import models
from wfasva.analysis import (
    check_l2,
    count_words,
    distance_l2,
    distance_sq_l2,
    error_state_difference,
    exact_truncation_error_sq,
    hankel_block,
    hankel_svd,
    kron_inf_inequality_check,
    norm_l2,
    norm_sq_l2,
    pad_states,
    tail_mass,
    truncated_norm_sq,
    words,
)
from wfasva.errors import DivergenceError, ModelError
from wfasva.minimize import minimize
from wfasva.sva import compute_sva, truncate
from wfasva.wfa import Wfa, difference, evaluate, zero_wfa

from conftest import random_words


class TestMembership:
    def test_detfree_member(self):
        rep = check_l2(models.detfree_dynamic())
        assert rep.member
        assert rep.witness < 1
        assert rep.sufficient["kron_radius"]["holds"]

    def test_sticky_not_member(self):
        rep = check_l2(models.sticky_dynamic())
        assert not rep.member
        assert rep.witness == pytest.approx(1.0, abs=1e-9)

    def test_constant_function_not_member(self):
        assert not check_l2(Wfa(("a",), [1.0], [1.0], [[[1.0]]])).member

    def test_signed_model_not_member(self):
        assert not check_l2(models.signed_two_state()).member

    def test_non_minimal_member_found_through_minimization(self):
        A = models.redundant_state()
        rep = check_l2(A)
        assert rep.member
        # the cheap test on the raw automaton is inconclusive
        assert not rep.sufficient["kron_radius"]["holds"]

    def test_sufficient_conditions_imply_membership(self, rng):
        for _ in range(30):
            A = models.random_wfa(rng, 3, 2, radius=float(rng.uniform(0.1, 1.5)))
            rep = check_l2(A)
            if any(c["holds"] for c in rep.sufficient.values()):
                assert rep.member
            assert rep.as_dict()["member"] == rep.member


class TestNorms:
    def test_cancelling_states_norms(self):
        A = models.cancelling_states()
        assert norm_sq_l2(A) == pytest.approx(1 / 3, abs=1e-9)
        naive = Wfa(A.alphabet, A.alpha[:1], A.beta[:1], A.mats[:, :1, :1])
        assert norm_sq_l2(naive) == pytest.approx(4 / 3, abs=1e-9)

    def test_zero_norm(self):
        assert norm_l2(zero_wfa(("a", "b"), 3)) == 0.0

    def test_infinite_norm(self):
        with pytest.raises(DivergenceError, match="infinite"):
            norm_l2(models.sticky_dynamic())

    def test_norm_matches_enumeration_plus_tail(self, rng):
        for _ in range(5):
            A = models.random_wfa(rng, 3, 2, radius=0.5)
            L = 10
            oracle = truncated_norm_sq(A, L) + tail_mass(A, L)
            assert norm_sq_l2(A) == pytest.approx(oracle, rel=1e-9)

    def test_norm_of_non_minimal_automaton(self):
        # only a^k has weight; state 2 never reaches a final weight but loops forever
        A = models.redundant_state()
        assert norm_sq_l2(A) == pytest.approx(truncated_norm_sq(A, 16) + tail_mass(A, 16),
                                              rel=1e-9)

    def test_tail_mass_divergent(self):
        with pytest.raises(DivergenceError):
            tail_mass(models.sticky_dynamic(), 5)


class TestDistance:
    def test_self_distance_zero(self, rng):
        A = models.random_detfree_pdpa(rng, 4, 2)
        assert distance_l2(A, A) <= 1e-9

    def test_distance_to_zero_is_norm(self, rng):
        A = models.random_detfree_pdpa(rng, 4, 2)
        assert distance_l2(A, zero_wfa(A.alphabet)) == pytest.approx(norm_l2(A), rel=1e-9)

    def test_detfree_truncation_against_word_sums(self):
        S = compute_sva(models.detfree_dynamic())
        T = truncate(S, 1)
        d2 = distance_sq_l2(S.automaton, T.truncated)
        assert d2 <= S.sigmas[1] ** 2
        brute = truncated_norm_sq(difference(S.automaton, T.truncated), 20)
        assert d2 == pytest.approx(brute, abs=1e-4)

    def test_error_state_automaton_computes_difference(self, rng):
        A = models.random_wfa(rng, 4, 2)
        B = models.random_wfa(rng, 2, 2)
        E = error_state_difference(A, B)
        assert E.n == 8
        for x in random_words(rng, A.alphabet, 30):
            assert evaluate(E, x) == pytest.approx(evaluate(A, x) - evaluate(B, x),
                                                   rel=1e-9, abs=1e-12)

    def test_pad_states(self):
        A = models.signed_two_state()
        P = pad_states(A, 4)
        assert P.n == 4 and evaluate(P, "ba") == 60.0
        with pytest.raises(ModelError):
            pad_states(A, 1)

    def test_distance_divergent(self):
        with pytest.raises(DivergenceError):
            distance_l2(models.sticky_dynamic(), models.detfree_dynamic())

    def test_small_distances_keep_relative_accuracy(self, rng):
        A = models.random_detfree_pdpa(rng, 3, 2)
        B = Wfa(A.alphabet, A.alpha, A.beta + 1e-7 * np.array([1.0, 0.0, 0.0]), A.mats)
        # f_A - f_B = -1e-7 alpha^T A_x e_1, whose square sum is 1e-14 G_p[0, 0]
        D = Wfa(A.alphabet, A.alpha, 1e-7 * np.array([1.0, 0.0, 0.0]), A.mats)
        expected = truncated_norm_sq(D, 14) + tail_mass(D, 14)
        assert distance_sq_l2(A, B) == pytest.approx(expected, rel=1e-6)


class TestHankel:
    def test_signed_entries(self):
        Hb = hankel_block(models.signed_two_state(), 2, 2)
        assert Hb.entry("b", "a") == 60.0
        assert Hb.entry("ba", "") == 60.0
        assert Hb.entry("", "ba") == 60.0

    def test_word_order_is_length_lex(self):
        assert list(words("ab", 2)) == [(), ("a",), ("b",), ("a", "a"), ("a", "b"),
                                        ("b", "a"), ("b", "b")]
        assert count_words(2, 10) == 2047 and count_words(1, 5) == 6

    def test_block_matches_evaluate(self, rng):
        A = models.random_wfa(rng, 3, 2)
        Hb = hankel_block(A, 3, 2)
        for i in rng.integers(0, len(Hb.prefixes), 10):
            for j in rng.integers(0, len(Hb.suffixes), 5):
                p, s = Hb.prefixes[i], Hb.suffixes[j]
                assert Hb.values[i, j] == pytest.approx(evaluate(A, list(p) + list(s)),
                                                        rel=1e-12, abs=1e-14)

    def test_hankel_consistency(self, rng):
        A = models.random_wfa(rng, 3, 2)
        Hb = hankel_block(A, 3, 3)
        seen = {}
        for i, p in enumerate(Hb.prefixes):
            for j, s in enumerate(Hb.suffixes):
                w = p + s
                if w in seen:
                    assert Hb.values[i, j] == pytest.approx(seen[w], rel=1e-12, abs=1e-14)
                else:
                    seen[w] = Hb.values[i, j]

    def test_signed_rank(self):
        assert hankel_svd(hankel_block(models.signed_two_state(), 3, 3)).rank == 2

    def test_geometric_singular_value(self):
        Hb = hankel_block(models.geometric(0.5), 8, 8)
        assert hankel_svd(Hb).s[0] == pytest.approx(4 / 3, abs=1e-4)

    def test_golden_ranks(self, golden):
        for name, A in golden.items():
            L = 10 if len(A.alphabet) == 1 else 6
            assert hankel_svd(hankel_block(A, L, L)).rank == minimize(A).minimal_dim, name

    def test_block_singular_values_increase_to_sigmas(self, rng):
        A = models.random_detfree_pdpa(rng, 3, 2)
        sig = compute_sva(A).sigmas
        prev = np.zeros(3)
        for L in range(1, 9):
            s = hankel_svd(hankel_block(A, L, L), 0.0).s[:3]
            s = np.pad(s, (0, 3 - len(s)))
            assert np.all(s >= prev - 1e-12)
            assert np.all(s <= sig + 1e-10)
            prev = s

    def test_cap(self):
        with pytest.raises(ModelError, match="cap"):
            hankel_block(models.signed_two_state(), 12, 12)

    def test_factored_svd_matches_dense(self, rng):
        A = models.random_wfa(rng, 3, 2)
        Hb = hankel_block(A, 5, 5)
        dense = hankel_svd(Hb)
        fact = hankel_svd(Hb, factored_above=0)
        np.testing.assert_allclose(fact.s, dense.s, rtol=1e-10)


class TestExactError:
    def test_detfree_cut(self):
        S = compute_sva(models.detfree_dynamic())
        e = exact_truncation_error_sq(S, 1)
        d2 = distance_sq_l2(S.automaton, truncate(S, 1).truncated)
        assert e == pytest.approx(d2, rel=1e-6)
        assert e <= S.sigmas[1] ** 2 + 1e-7

    def test_random_cuts_bounded(self, rng):
        S = compute_sva(models.random_detfree_pdpa(rng, 6, 2))
        for n_hat in range(1, S.n):
            assert exact_truncation_error_sq(S, n_hat) <= np.sum(S.sigmas[n_hat:] ** 2) + 1e-7

    def test_invalid_cut(self):
        S = compute_sva(models.detfree_dynamic())
        with pytest.raises(ModelError):
            exact_truncation_error_sq(S, 2)


class TestKronInf:
    def test_detfree_strict(self):
        rep = kron_inf_inequality_check(models.detfree_dynamic())
        assert rep.lhs < 1 and rep.holds()

    def test_scalar_equality(self):
        rep = kron_inf_inequality_check(Wfa(("a",), [1.0], [1.0], [[[-0.7]]]))
        assert rep.lhs == pytest.approx(0.49) and rep.rhs == pytest.approx(0.49)

    def test_random_weights(self, rng):
        for _ in range(100):
            A = Wfa(("a", "b", "c"), np.ones(3), np.ones(3), rng.standard_normal((3, 3, 3)))
            rep = kron_inf_inequality_check(A)
            assert rep.holds()
            assert rep.col_block_norm == pytest.approx(rep.col_block_norm_dual)
