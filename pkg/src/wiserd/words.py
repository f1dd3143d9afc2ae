"""Free-group words over the ten letters a, b, c, s, t and their inverses.

A word is a plain ``str``; a lowercase character is a generator and the
matching uppercase character is its inverse.  ``"aB"`` is ``a b^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

GENERATORS = "abcst"
# shortlex letter order: a < a^-1 < b < b^-1 < ... < t^-1
ALPHABET = "aAbBcCsStT"
_RANK = {ch: i for i, ch in enumerate(ALPHABET)}


@dataclass(frozen=True, order=True)
class Letter:
    base: str
    sign: int

    def __post_init__(self):
        if self.base not in GENERATORS or self.sign not in (1, -1):
            raise ConfigError(f"bad letter {self.base!r}^{self.sign}")

    @property
    def char(self) -> str:
        return self.base if self.sign == 1 else self.base.upper()

    @classmethod
    def from_char(cls, ch: str) -> "Letter":
        if ch not in _RANK:
            raise ConfigError(f"unknown letter {ch!r}")
        return cls(ch.lower(), 1 if ch.islower() else -1)

    def inverse(self) -> "Letter":
        return Letter(self.base, -self.sign)


ALL_LETTERS = tuple(Letter.from_char(ch) for ch in ALPHABET)


def inverse(w: str) -> str:
    return w[::-1].swapcase()


def free_reduce(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def is_reduced(w: str) -> bool:
    return all(w[i] != w[i + 1].swapcase() for i in range(len(w) - 1))


def shortlex_key(w: str) -> tuple:
    return (len(w), tuple(_RANK[ch] for ch in w))


def parse_word(text: str) -> str:
    """Accept ``abAB``, ``a b A B``, ``a·b·a^-1`` or ``e`` (identity)."""
    s = text.strip()
    if s in ("", "e", "1"):
        return ""
    out: list[str] = []
    i = 0
    for sep in "·* ,.":
        s = s.replace(sep, "")
    while i < len(s):
        ch = s[i]
        if ch not in _RANK:
            raise ConfigError(f"cannot parse word {text!r} at {ch!r}")
        if s.startswith("^-1", i + 1) or s.startswith("⁻¹", i + 1):
            out.append(ch.swapcase())
            i += 4 if s.startswith("^-1", i + 1) else 3
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def pretty(w: str) -> str:
    if not w:
        return "e"
    return "·".join(ch if ch.islower() else ch.lower() + "⁻¹" for ch in w)


def power(letter: str, k: int) -> str:
    """``letter^k`` as a word (negative k uses the inverse letter)."""
    return letter * k if k >= 0 else letter.swapcase() * (-k)
