"""Minimal resolution: shuffle differential, abelianization, s^-1 embedding."""

from itertools import combinations

import pytest

from symtrace.derham import Form
from symtrace.gcalg import (
    AlgebraElement,
    InvalidInputError,
    dx_gen,
    lam_gen,
    x_gen,
)
from symtrace.resolution import (
    RElement,
    abelianize,
    delta_R,
    lam_element,
    r_word_basis,
    s_inv,
    word_degree,
    word_weight,
)


def X(i):
    return AlgebraElement.from_gen(x_gen(i))


def DX(i):
    return AlgebraElement.from_gen(dx_gen(i))


def word(*letters):
    return RElement.from_word(tuple(letters))


class TestDifferential:
    def test_two_letter(self):
        # delta lam(v1, v2) = -[v1, v2]
        got = delta_R(lam_element((1, 2)))
        expected = -(word((1,), (2,)) - word((2,), (1,)))
        assert got == expected

    def test_three_letter_matches_cyclic_form(self):
        # delta lam(v1,v2,v3) = -[v1, lam(2,3)] - [v2, lam(3,1)] - [v3, lam(1,2)]
        got = delta_R(lam_element((1, 2, 3)))
        from symtrace.resolution import commutator

        expected = RElement.zero()
        for head, pair in [(1, (2, 3)), (2, (3, 1)), (3, (1, 2))]:
            expected = expected - commutator(word((head,)), lam_element(pair))
        assert got == expected

    def test_singleton_closed(self):
        assert delta_R(lam_element((1,))).is_zero()

    def test_square_zero_letters(self):
        for k in range(1, 5):
            for idx in combinations(range(1, 5), k):
                assert delta_R(delta_R(lam_element(idx))).is_zero()

    def test_square_zero_words(self):
        for w in range(1, 5):
            for deg in range(0, w):
                for wd in r_word_basis(3, w, deg):
                    if wd:
                        assert delta_R(delta_R(RElement.from_word(wd))).is_zero()

    def test_weight_preserved_degree_drops(self):
        e = lam_element((1, 2, 3))
        de = delta_R(e)
        for wd in de.terms:
            assert word_weight(wd) == 3
            assert word_degree(wd) == 1


class TestAbelianize:
    def test_commutator_dies(self):
        e = word((1,), (2,)) - word((2,), (1,))
        assert abelianize(e).is_zero()

    def test_mixed_word(self):
        e = word((1, 2), (1,))
        assert abelianize(e) == X(1) * AlgebraElement.from_gen(lam_gen((1, 2)))

    def test_delta_lands_in_commutators(self):
        for w in range(1, 6):
            for deg in range(0, w):
                for wd in r_word_basis(3, w, deg):
                    if wd:
                        e = RElement.from_word(wd)
                        assert abelianize(delta_R(e)).is_zero()

    def test_degree_preserved(self):
        from symtrace.gcalg import monomial_degree

        e = word((1, 2), (1, 2, 3))
        ab = abelianize(e)
        for m in ab.terms:
            assert monomial_degree(m) == word_degree(((1, 2), (1, 2, 3)))

    def test_odd_letter_square_vanishes(self):
        assert abelianize(word((1, 2), (1, 2))).is_zero()


class TestSInv:
    def test_basic(self):
        got = s_inv(Form(X(1) * DX(2) * DX(3), 3))
        assert got == X(1) * AlgebraElement.from_gen(lam_gen((2, 3)))

    def test_sorting_sign(self):
        got = s_inv(Form(DX(2) * DX(1), 2))
        assert got == -AlgebraElement.from_gen(lam_gen((1, 2)))

    def test_repeated_dx_is_zero_form(self):
        assert (DX(1) * DX(1)).is_zero()

    def test_degree_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            s_inv(Form(X(1), 2))

    def test_singleton_becomes_variable(self):
        assert s_inv(Form(X(1) * DX(2), 2)) == X(1) * X(2)


class TestWordBasis:
    def test_counts_small(self):
        # N=2, weight 2, degree 0: words (1)(1), (1)(2), (2)(1), (2)(2)
        assert len(r_word_basis(2, 2, 0)) == 4
        # N=2, weight 2, degree 1: the single pair letter
        assert r_word_basis(2, 2, 1) == [((1, 2),)]

    def test_empty_word(self):
        assert r_word_basis(2, 0, 0) == [()]
