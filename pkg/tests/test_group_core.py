import random

import pytest
from hypothesis import given, settings, strategies as st

from wiserd.errors import ConfigError, UncertifiedElementError
from wiserd.group_core import (IDENTITY, RELATOR_SET, RELATORS, Ball, DistinctCertified, Equal,
                               UnknownWithinBound, abelianize, area_bound_for, certify_equal,
                               derive, element_length, equal_in_G, flat_length, nf_inverse,
                               nf_multiply, nf_word, normal_form)
from wiserd.words import ALPHABET

words = st.text(alphabet=ALPHABET, max_size=10)


def test_relators_are_trivial():
    for r in RELATORS:
        assert normal_form(r) == IDENTITY
        assert abelianize(r) == (0, 0, 0)


def test_relator_set_closed_under_rotation_and_inverse():
    assert RELATOR_SET.is_closed()
    assert len(RELATOR_SET.variants) == 2 * (3 + 3 + 5 + 5)
    assert "Ccab" not in RELATOR_SET


def test_abelianization_torsion():
    # c has order three in the abelianization, a and b equal 2c there
    assert abelianize("ccc") == (0, 0, 0)
    assert abelianize("a") == abelianize("b") == abelianize("cc")
    assert abelianize("s") == (0, 1, 0) and abelianize("t") == (0, 0, 1)


def test_abelianization_invariants_by_smith_form():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form
    rows = []
    for r in RELATORS:
        rows.append([r.count(x) - r.count(x.upper()) for x in "abcst"])
    snf = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
    diag = sorted(abs(snf[i, i]) for i in range(4))
    assert diag == [0, 1, 1, 3]


def test_ball_sizes():
    b = Ball(4)
    assert [b.size(r) for r in range(5)] == [1, 11, 83, 569, 3781]
    assert b.sphere_sizes() == [1, 10, 72, 486, 3212]


def test_ball_radius_zero_and_errors():
    b = Ball(0)
    assert len(b) == 1
    with pytest.raises(ConfigError):
        Ball(-1)
    with pytest.raises(UncertifiedElementError):
        b.word_length("a")


def test_ball_json_sorted():
    import json
    items = json.loads(Ball(1).to_json())
    assert items[0] == {"canonical_word": "", "length": 0}
    assert len(items) == 11


def test_rmul_table_consistent(ball5):
    t = ball5.rmul_table()
    for i in range(ball5.size(3)):
        for k, ch in enumerate(ALPHABET):
            j = t[i, k]
            assert ball5.nfs[j] == normal_form(ball5.words[i] + ch)


@settings(max_examples=200, deadline=None)
@given(words)
def test_derivation_replays(w):
    nf, factors = derive(w)
    assert nf == normal_form(w)
    cert = certify_equal(w, nf_word(nf))
    assert cert is not None and cert.replay()


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_multiplication_and_inverse(u, v):
    g, h = normal_form(u), normal_form(v)
    assert nf_multiply(g, h) == normal_form(u + v)
    assert nf_multiply(g, nf_inverse(g)) == IDENTITY


def test_equal_verdicts():
    assert isinstance(equal_in_G("ab", "c"), Equal)
    assert isinstance(equal_in_G("a", "s"), DistinctCertified)
    v = equal_in_G("a", "b")
    assert isinstance(v, DistinctCertified) and v.reason == "patch-separation"
    assert area_bound_for("ab", "c") == 16 * 9


def test_unknown_when_bound_too_small():
    w = "saSCC" * 3
    v = equal_in_G(w, "", area_bound=0)
    assert isinstance(v, UnknownWithinBound)


def test_length_dp_matches_ball(ball5):
    rng = random.Random(1)
    for idx in rng.sample(range(len(ball5)), 300):
        assert element_length(ball5.nfs[idx]) == ball5.lengths[idx]


def test_flat_length_small_values():
    assert flat_length(0, 0) == 0
    assert flat_length(1, 1) == 1
    assert flat_length(2, 2) == 2
    # a^8 b^8 = c^8 is shortened through a stable letter
    assert flat_length(8, 8) == min(8, 4 + 2)
