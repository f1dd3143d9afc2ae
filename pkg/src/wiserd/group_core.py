"""Words, the word problem, word length and balls for the group

    G = < a, b, c, s, t | c = ab = ba, c^2 = s a s^-1 = t b t^-1 >.

``G`` is a double HNN extension of the free abelian group ``<a, b>``:
``s`` conjugates ``a`` to ``d = c^2`` and ``t`` conjugates ``b`` to ``d``.
Britton's lemma therefore gives a normal form, computed letter by letter
in :func:`nf_append`.  Equalities are certified by explicit products of
conjugated relators (:class:`Certificate`) that replay in the free group;
inequalities are certified either by the abelianization or by landing on
distinct vertices of the developed cover.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .development import Development
from .errors import ConfigError, ResourceLimitError, UncertifiedElementError
from .words import ALPHABET, free_reduce, inverse, power, shortlex_key

RELATORS = ("abC", "baC", "saSCC", "tbTCC")


def _rotations(w: str) -> list[str]:
    return [w[i:] + w[:i] for i in range(len(w))]


@dataclass(frozen=True)
class RelatorSet:
    base: tuple = RELATORS
    variants: frozenset = field(init=False)

    def __post_init__(self):
        vs = set()
        for r in self.base:
            vs.update(_rotations(r))
            vs.update(_rotations(inverse(r)))
        object.__setattr__(self, "variants", frozenset(vs))

    def __contains__(self, w: str) -> bool:
        return w in self.variants

    def is_closed(self) -> bool:
        return all(
            inverse(v) in self.variants and all(x in self.variants for x in _rotations(v))
            for v in self.variants
        )


RELATOR_SET = RelatorSet()

# ---------------------------------------------------------------------------
# abelianization: G^ab = Z/3 + Z + Z.  a = b = 2c and 3c = 0 in the first
# summand; the coordinates returned are (c mod 3, s, t).
_AB = {"a": (2, 0, 0), "b": (2, 0, 0), "c": (1, 0, 0), "s": (0, 1, 0), "t": (0, 0, 1)}
TORSION = (3, 0, 0)


def abelianize(w: str) -> tuple[int, int, int]:
    x = y = z = 0
    for ch in w:
        e = 1 if ch.islower() else -1
        v = _AB[ch.lower()]
        x += e * v[0]
        y += e * v[1]
        z += e * v[2]
    return (x % 3, y, z)


def ab_add(u, v):
    return ((u[0] + v[0]) % 3, u[1] + v[1], u[2] + v[2])


# ---------------------------------------------------------------------------
# Britton normal form.  An element is (stack, z): stack is a tuple of
# (rep, letter) pairs with rep a coset representative in Z^2 and letter in
# "sStT"; z in Z^2 is the trailing a^i b^j.  The word is
# rep_1 x_1 rep_2 x_2 ... a^i b^j.

NF = tuple
IDENTITY: NF = ((), (0, 0))
_VEC = {"a": (1, 0), "A": (-1, 0), "b": (0, 1), "B": (0, -1), "c": (1, 1), "C": (-1, -1)}
# generator of the subgroup an element must lie in to pass through the
# letter from the left, and of the image on the right
_LEFT_GEN = {"s": (2, 2), "S": (1, 0), "t": (2, 2), "T": (0, 1)}
_RIGHT_GEN = {"s": (1, 0), "S": (2, 2), "t": (0, 1), "T": (2, 2)}


def _decompose(z: tuple, letter: str) -> tuple[tuple, int]:
    """Write z = rep + k * left generator of ``letter``."""
    i, j = z
    if letter in "st":
        k = j // 2
        return (i - 2 * k, j - 2 * k), k
    if letter == "S":
        return (0, j), i
    return (i, 0), j


def nf_append(nf: NF, ch: str) -> NF:
    stack, z = nf
    v = _VEC.get(ch)
    if v is not None:
        return stack, (z[0] + v[0], z[1] + v[1])
    rep, k = _decompose(z, ch)
    if rep == (0, 0) and stack and stack[-1][1] == ch.swapcase():
        prev, _ = stack[-1]
        g = _RIGHT_GEN[ch]
        return stack[:-1], (prev[0] + k * g[0], prev[1] + k * g[1])
    g = _RIGHT_GEN[ch]
    return stack + ((rep, ch),), (k * g[0], k * g[1])


def normal_form(w: str, start: NF = IDENTITY) -> NF:
    nf = start
    for ch in w:
        nf = nf_append(nf, ch)
    return nf


def _zword(z) -> str:
    return power("a", z[0]) + power("b", z[1])


def nf_word(nf: NF) -> str:
    stack, z = nf
    return "".join(_zword(rep) + x for rep, x in stack) + _zword(z)


def nf_multiply(g: NF, h: NF) -> NF:
    return normal_form(nf_word(h), g)


def nf_inverse(g: NF) -> NF:
    return normal_form(inverse(nf_word(g)))


# ---------------------------------------------------------------------------
# Certificates.


@dataclass(frozen=True)
class Certificate:
    """``lhs * rhs^-1`` equals the product of ``u r u^-1`` in the free group."""

    lhs: str
    rhs: str
    factors: tuple  # of (conjugator, relator variant)

    @property
    def area(self) -> int:
        return len(self.factors)

    def product(self) -> str:
        return free_reduce("".join(u + r + inverse(u) for u, r in self.factors))

    def replay(self) -> bool:
        if not all(r in RELATOR_SET for _, r in self.factors):
            return False
        return self.product() == free_reduce(self.lhs + inverse(self.rhs))


class _Rewriter:
    """Carries a working word through relator rewrites, logging each one."""

    def __init__(self):
        self.stack_words: list[str] = []
        self.tail = ""
        self.factors: list[tuple[str, str]] = []

    def prefix_len(self) -> int:
        return sum(map(len, self.stack_words))

    def prefix(self) -> str:
        return "".join(self.stack_words)

    def rewrite(self, pos: int, p: str, q: str):
        """Replace tail[pos:pos+len(p)] = p by q; p q^-1 must be a relator."""
        assert self.tail[pos:pos + len(p)] == p, (self.tail, pos, p)
        r = p + inverse(q)
        assert r in RELATOR_SET, r
        self.factors.append((self.prefix() + self.tail[:pos], r))
        self.tail = self.tail[:pos] + q + self.tail[pos + len(p):]

    def cancel(self):
        self.tail = free_reduce(self.tail)

    # chains that realise adjacent swaps in Z^2
    _SWAPS = {
        "ba": (("ba", "c", 0), ("c", "ab", 0)),
        "Ba": (("B", "aC", 0), ("Ca", "B", 1)),
        "bA": (("b", "Ac", 0), ("cA", "b", 1)),
        "BA": (("BA", "C", 0), ("C", "AB", 0)),
    }

    def sort_tail(self, start: int = 0):
        """Rewrite tail[start:] (letters a,b,c and inverses) into a^i b^j."""
        i = start
        while i < len(self.tail):
            ch = self.tail[i]
            if ch == "c":
                self.rewrite(i, "c", "ab")
            elif ch == "C":
                self.rewrite(i, "C", "BA")
            i += 1
        changed = True
        while changed:
            changed = False
            self.tail = self.tail[:start] + free_reduce(self.tail[start:])
            i = start
            while i < len(self.tail) - 1:
                pair = self.tail[i:i + 2]
                chain = self._SWAPS.get(pair)
                if chain:
                    for p, q, off in chain:
                        self.rewrite(i + off, p, q)
                    changed = True
                    # the pair became ab-sorted and may cancel with neighbours
                    break
                i += 1

    def unsort_to(self, start: int, target: str):
        """Rewrite the sorted tail[start:] into ``target`` (same element of Z^2)."""
        sub = _Rewriter()
        sub.tail = target
        sub.sort_tail()
        assert sub.tail == self.tail[start:], (sub.tail, self.tail[start:])
        # replay sub's chain backwards: each step q -> p has relator inverse
        base = self.prefix() + self.tail[:start]
        for u, r in reversed(sub.factors):
            self.factors.append((base + u, inverse(r)))
        self.tail = self.tail[:start] + target

    def append(self, nf: NF, ch: str) -> NF:
        new = nf_append(nf, ch)
        if ch in _VEC:
            self.tail += ch
            self.sort_tail()
            assert self.tail == _zword(new[1])
            return new
        stack, z = nf
        rep, k = _decompose(z, ch)
        left = _LEFT_GEN[ch]
        lword = {(2, 2): "cc", (1, 0): "a", (0, 1): "b"}[left]
        self.unsort_to(0, _zword(rep) + lword.swapcase() * (-k) if k < 0 else _zword(rep) + lword * k)
        pos = len(_zword(rep))
        # push ch leftwards through the k copies of the left generator
        self.tail += ch
        right = {(2, 2): "cc", (1, 0): "a", (0, 1): "b"}[_RIGHT_GEN[ch]]
        unit = lword if k >= 0 else lword.swapcase()
        runit = right if k >= 0 else right.swapcase()
        for m in range(abs(k)):
            at = pos + (abs(k) - 1 - m) * len(unit)
            # tail[at:] = unit + ch + runit*m
            self.rewrite(at, unit + ch, ch + runit)
        if len(new[0]) < len(stack):
            # pinch: previous stack letter is ch^-1, now adjacent to ch
            assert self.tail[0] == ch
            prev_word = self.stack_words.pop()
            self.tail = free_reduce(prev_word + self.tail)
            self.sort_tail()
        else:
            self.stack_words.append(self.tail[: pos + 1])
            self.tail = self.tail[pos + 1:]
            self.sort_tail()
        assert self.tail == _zword(new[1]), (self.tail, new)
        return new


def derive(w: str) -> tuple[NF, tuple]:
    """Normal form of ``w`` with relator factors showing ``w = nf_word``."""
    rw = _Rewriter()
    nf = IDENTITY
    for ch in w:
        nf = rw.append(nf, ch)
    assert rw.prefix() + rw.tail == nf_word(nf)
    return nf, tuple(rw.factors)


def certify_equal(w1: str, w2: str) -> Certificate | None:
    nf1, f1 = derive(w1)
    nf2, f2 = derive(w2)
    if nf1 != nf2:
        return None
    back = tuple((u, inverse(r)) for u, r in reversed(f2))
    return Certificate(w1, w2, f1 + back)


# ---------------------------------------------------------------------------
# equality verdicts


@dataclass(frozen=True)
class Equal:
    witness: Certificate
    kind: str = "Equal"


@dataclass(frozen=True)
class DistinctCertified:
    reason: str  # "abelianization" | "patch-separation"
    kind: str = "DistinctCertified"


@dataclass(frozen=True)
class UnknownWithinBound:
    area_bound: int
    kind: str = "UnknownWithinBound"


DEFAULT_AREA_CONSTANT = 16


def area_bound_for(w1: str, w2: str, constant: int = DEFAULT_AREA_CONSTANT) -> int:
    n = len(w1) + len(w2)
    return constant * n * n


_DEV = Development()


def equal_in_G(w1: str, w2: str, area_bound: int | None = None):
    """Decide equality in G with a certificate either way.

    ``Equal`` carries a relator chain of at most ``area_bound`` factors
    (default ``16 n^2`` for total length ``n``).  Distinctness is only ever
    claimed from the abelianization or from two different vertices of the
    developed cover.
    """
    if area_bound is None:
        area_bound = area_bound_for(w1, w2)
    if area_bound < 0:
        raise ConfigError("area bound must be nonnegative")
    if abelianize(w1) != abelianize(w2):
        return DistinctCertified("abelianization")
    v1 = _DEV.locate(w1)
    v2 = _DEV.locate(w2)
    if v1 != v2:
        return DistinctCertified("patch-separation")
    cert = certify_equal(w1, w2)
    if cert is None or not cert.replay() or cert.area > area_bound:
        return UnknownWithinBound(area_bound)
    return Equal(cert)


# ---------------------------------------------------------------------------
# exact word length of arbitrary elements


def _hex_len(i, j):
    """Word length in Z^2 for generators a, b, ab."""
    i = np.asarray(i)
    j = np.asarray(j)
    same = np.sign(i) * np.sign(j) >= 0
    return np.where(same, np.maximum(np.abs(i), np.abs(j)), np.abs(i) + np.abs(j))


def flat_length(i, j):
    """Length in G of a^i b^j (vectorised).

    A geodesic may leave the flat once through a band along a diagonal and
    come back: ``c^(2k)`` costs ``|k| + 2`` that way.  Using two such
    detours never helps since they commute and merge.
    """
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    best = _hex_len(i, j)
    cands = [np.ones_like(i), -np.ones_like(i), i // 2, (i + 1) // 2, j // 2, (j + 1) // 2]
    for k in cands:
        k = np.where(k == 0, 1, k)
        cost = np.abs(k) + 2 + _hex_len(i - 2 * k, j - 2 * k)
        best = np.minimum(best, cost)
    return best


_LEFT_GEN_ARR = {k: np.array(v) for k, v in _LEFT_GEN.items()}
_RIGHT_GEN_ARR = {k: np.array(v) for k, v in _RIGHT_GEN.items()}


def element_length(nf: NF) -> int:
    """Exact word length of the element with normal form ``nf``.

    A geodesic word crosses exactly the bands of the normal form, in order,
    and between crossings it travels inside one flat.  The crossing points
    are integers along the band lines, so the length is a shortest path
    over a chain of integer choices, solved by dynamic programming.
    """
    stack, z = nf
    n = len(stack)
    if n == 0:
        return int(flat_length(z[0], z[1]))
    # upper bound from crossing at the representatives themselves
    ub = sum(int(flat_length(*rep)) for rep, _ in stack) + int(flat_length(*z)) + n
    # crossing parameters are bounded since lengths dominate flat distances
    radius = ub + sum(abs(r[0]) + abs(r[1]) for r, _ in stack) + 2
    m = np.arange(-radius, radius + 1)
    # cost[k]: cheapest way to reach crossing point m[k] of the current band
    cost = None
    prev_x = None
    for idx, (rep, x) in enumerate(stack):
        gl = _LEFT_GEN_ARR[x]
        if idx == 0:
            cost = flat_length(rep[0] + m * gl[0], rep[1] + m * gl[1]).astype(np.int64)
        else:
            hr = _RIGHT_GEN_ARR[prev_x]
            di = rep[0] + m[None, :] * gl[0] - m[:, None] * hr[0]
            dj = rep[1] + m[None, :] * gl[1] - m[:, None] * hr[1]
            cost = (cost[:, None] + flat_length(di, dj)).min(axis=0)
        prev_x = x
    hr = _RIGHT_GEN_ARR[prev_x]
    final = cost + flat_length(z[0] - m * hr[0], z[1] - m * hr[1])
    best = int(final.min())
    return best + n


def word_length_of(w: str) -> int:
    return element_length(normal_form(w))


# ---------------------------------------------------------------------------
# balls


@dataclass(frozen=True)
class GroupElement:
    canonical: str
    length: int
    nf: NF = field(repr=False, compare=False, default=None)


DEFAULT_MAX_ELEMENTS = 2_000_000


class Ball:
    """Breadth-first enumeration of the Cayley graph, exact by normal forms.

    Elements are indexed in BFS order; within a sphere the order is shortlex
    of the canonical words, which are shortlex minimal representatives.
    ``rmul[i, k]`` is the index of ``element_i * ALPHABET[k]`` (or -1 when
    that product lies outside the ball).
    """

    def __init__(self, radius: int = 0, max_elements: int = DEFAULT_MAX_ELEMENTS):
        if radius < 0:
            raise ConfigError("radius must be nonnegative")
        self.max_elements = max_elements
        self.index: dict = {IDENTITY: 0}
        self.nfs: list = [IDENTITY]
        self.words: list[str] = [""]
        self.lengths: list[int] = [0]
        self.parent: list[int] = [-1]
        self.last_letter: list[int] = [-1]
        self.sphere_starts = [0, 1]  # sphere r occupies [starts[r], starts[r+1])
        self._rmul: list[list[int]] = []  # filled for expanded elements
        self.radius = 0
        self.extend(radius)

    def __len__(self):
        return len(self.nfs)

    def sphere_sizes(self) -> list[int]:
        s = self.sphere_starts
        return [s[r + 1] - s[r] for r in range(self.radius + 1)]

    def size(self, r: int | None = None) -> int:
        r = self.radius if r is None else r
        if r > self.radius:
            raise UncertifiedElementError(f"ball only enumerated to radius {self.radius}")
        return self.sphere_starts[r + 1]

    def extend(self, radius: int):
        while self.radius < radius:
            lo, hi = self.sphere_starts[self.radius], self.sphere_starts[self.radius + 1]
            for idx in range(lo, hi):
                nf = self.nfs[idx]
                row = []
                for k, ch in enumerate(ALPHABET):
                    nxt = nf_append(nf, ch)
                    j = self.index.get(nxt)
                    if j is None:
                        j = len(self.nfs)
                        if j >= self.max_elements:
                            raise ResourceLimitError(
                                f"ball({radius}) exceeds the cap of {self.max_elements} elements")
                        self.index[nxt] = j
                        self.nfs.append(nxt)
                        self.words.append(self.words[idx] + ch)
                        self.lengths.append(self.radius + 1)
                        self.parent.append(idx)
                        self.last_letter.append(k)
                    row.append(j)
                self._rmul.append(row)
            self.radius += 1
            self.sphere_starts.append(len(self.nfs))

    def rmul_table(self) -> np.ndarray:
        """Right multiplication by letters, shape (len(self), 10)."""
        t = np.full((len(self.nfs), len(ALPHABET)), -1, dtype=np.int64)
        if self._rmul:
            t[: len(self._rmul)] = np.asarray(self._rmul, dtype=np.int64)
        return t

    def lookup(self, w: str) -> int | None:
        return self.index.get(normal_form(w))

    def element(self, idx: int) -> GroupElement:
        return GroupElement(self.words[idx], self.lengths[idx], self.nfs[idx])

    def elements(self, r: int | None = None) -> Iterator[GroupElement]:
        for idx in range(self.size(r)):
            yield self.element(idx)

    def word_length(self, g) -> int:
        """Certified length of ``g`` (a word, a normal form or a GroupElement)."""
        nf = _as_nf(g)
        idx = self.index.get(nf)
        if idx is None:
            raise UncertifiedElementError(
                f"element not reached by ball({self.radius}) enumeration")
        return self.lengths[idx]

    def to_json(self, r: int | None = None) -> str:
        items = [{"canonical_word": self.words[i], "length": self.lengths[i]}
                 for i in range(self.size(r))]
        items.sort(key=lambda d: shortlex_key(d["canonical_word"]))
        return json.dumps(items, separators=(",", ":"))


def _as_nf(g) -> NF:
    if isinstance(g, GroupElement):
        return g.nf if g.nf is not None else normal_form(g.canonical)
    if isinstance(g, str):
        return normal_form(g)
    return g


def ball(r: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> list[GroupElement]:
    b = Ball(r, max_elements)
    return list(b.elements())


def word_length(g, enumeration: Ball) -> int:
    return enumeration.word_length(g)
