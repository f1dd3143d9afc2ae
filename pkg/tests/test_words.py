from hypothesis import given, strategies as st

from wiserd.words import (ALPHABET, Letter, free_reduce, inverse, is_reduced, parse_word, power,
                          pretty, shortlex_key)

words = st.text(alphabet=ALPHABET, max_size=12)


def test_letter_roundtrip():
    for ch in ALPHABET:
        assert Letter.from_char(ch).char == ch
        assert Letter.from_char(ch).inverse().char == ch.swapcase()


@given(words)
def test_inverse_is_involution(w):
    assert inverse(inverse(w)) == w


@given(words)
def test_free_reduce_idempotent(w):
    r = free_reduce(w)
    assert is_reduced(r)
    assert free_reduce(r) == r
    assert free_reduce(w + inverse(w)) == ""


def test_parse_variants():
    assert parse_word("e") == ""
    assert parse_word("a b A") == "abA"
    assert parse_word("a^-1 b") == "Ab"
    assert parse_word("a⁻¹") == "A"


def test_power_and_pretty():
    assert power("a", 3) == "aaa"
    assert power("a", -2) == "AA"
    assert power("a", 0) == ""
    assert pretty("") == "e"


def test_shortlex_orders_by_length_first():
    assert shortlex_key("b") < shortlex_key("aa")
    assert shortlex_key("a") < shortlex_key("A") < shortlex_key("b")
