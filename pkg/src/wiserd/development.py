"""Lazy development of the universal cover as a tree of flats.

Every vertex of the cover lies in exactly one flat, a copy of the
integer lattice spanned by ``a`` and ``b`` (``c`` is the diagonal).  Flats
are glued to each other by strips of squares ("bands"): an ``s`` band
joins a diagonal line of one flat to an ``a`` line of another, a ``t`` band
does the same with a ``b`` line.  Bands and flats form a tree, so the
development is built on demand by following letters from a base vertex.

Band keys inside a flat:

* ``("s", delta, p)`` : the diagonal ``i - j = delta``, lattice points with
  ``j = p (mod 2)``; crossing leaves by a letter ``s``.
* ``("t", delta, p)`` : same diagonal set, left by ``t``.
* ``("S", j0)``       : the ``a`` line ``j = j0``, left by ``s^-1``.
* ``("T", i0)``       : the ``b`` line ``i = i0``, left by ``t^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count

from .errors import DevelopmentConflict
from .words import power

_UID = count()

Vertex = tuple  # (Flat, i, j)


def line_key(letter: str, i: int, j: int) -> tuple:
    """Key of the band left through by ``letter`` at lattice point (i, j)."""
    if letter in "st":
        return (letter, i - j, j % 2)
    if letter == "S":
        return ("S", j)
    if letter == "T":
        return ("T", i)
    raise ValueError(letter)


def cline_point(delta: int, p: int, tau: float):
    """Point of the diagonal band line at band parameter tau."""
    return (delta + p + 2 * tau, p + 2 * tau)


@dataclass(eq=False)
class Flat:
    parent: "Flat | None"
    parent_key: tuple | None  # key of the connecting band inside the parent
    own_key: tuple | None  # key of the same band inside this flat
    origin_word: str
    depth: int
    uid: int = field(default_factory=lambda: next(_UID))
    children: dict = field(default_factory=dict)

    def __hash__(self):
        return self.uid

    def __repr__(self):
        return f"Flat#{self.uid}(depth={self.depth}, origin={self.origin_word or 'e'})"

    def word_of(self, i: int, j: int) -> str:
        return self.origin_word + power("a", i) + power("b", j)

    # the band joining this flat to its parent
    @property
    def letter_in(self) -> str | None:
        return None if self.parent_key is None else self.parent_key[0]

    def child(self, key: tuple) -> "Flat":
        ch = self.children.get(key)
        if ch is None:
            letter = key[0]
            if letter in "st":
                _, delta, p = key
                origin = self.word_of(delta + p, p) + letter
                own = ("S", 0) if letter == "s" else ("T", 0)
            elif letter == "S":
                origin = self.word_of(0, key[1]) + "S"
                own = ("s", 0, 0)
            else:
                origin = self.word_of(key[1], 0) + "T"
                own = ("t", 0, 0)
            ch = Flat(self, key, own, origin, self.depth + 1)
            self.children[key] = ch
        return ch


def _cross(flat: Flat, key: tuple, i: int, j: int, to_parent: bool):
    """Map lattice point (i, j) of ``flat`` across the band with ``key``."""
    letter = key[0]
    if to_parent:
        other = flat.parent
        pkey = flat.parent_key
    else:
        other = flat.child(key)
        pkey = key
    # pkey is the band key seen from the parent side
    pl = pkey[0]
    if not to_parent:
        if pl in "st":
            _, delta, p = pkey
            k = (j - p) // 2
            return (other, k, 0) if pl == "s" else (other, 0, k)
        if pl == "S":
            return (other, 2 * i, 2 * i)
        return (other, 2 * j, 2 * j)
    # crossing from child back to parent
    if pl in "st":
        _, delta, p = pkey
        k = i if pl == "s" else j
        return (other, delta + p + 2 * k, p + 2 * k)
    if pl == "S":
        if i != j or i % 2:
            raise DevelopmentConflict(f"bad return point {(i, j)} via {letter}")
        return (other, i // 2, pkey[1])
    if i != j or i % 2:
        raise DevelopmentConflict(f"bad return point {(i, j)} via {letter}")
    return (other, pkey[1], i // 2)


_STEP = {"a": (1, 0), "A": (-1, 0), "b": (0, 1), "B": (0, -1), "c": (1, 1), "C": (-1, -1)}


class Development:
    """The cover developed lazily from a base vertex ``(root, 0, 0)``."""

    def __init__(self):
        self.root = Flat(None, None, None, "", 0)

    @property
    def base(self) -> Vertex:
        return (self.root, 0, 0)

    def move(self, v: Vertex, letter: str) -> Vertex:
        flat, i, j = v
        d = _STEP.get(letter)
        if d is not None:
            return (flat, i + d[0], j + d[1])
        key = line_key(letter, i, j)
        if key == flat.own_key:
            return _cross(flat, key, i, j, to_parent=True)
        return _cross(flat, key, i, j, to_parent=False)

    def locate(self, word: str, start: Vertex | None = None) -> Vertex:
        v = self.base if start is None else start
        for ch in word:
            v = self.move(v, ch)
        return v

    @staticmethod
    def word_of(v: Vertex) -> str:
        flat, i, j = v
        return flat.word_of(i, j)

    @staticmethod
    def vkey(v: Vertex) -> tuple:
        return (v[0].uid, v[1], v[2])


def flat_path(f: Flat, g: Flat) -> list[Flat]:
    """Flats on the tree path from ``f`` to ``g`` (inclusive)."""
    up, down = [f], [g]
    while up[-1].depth > down[-1].depth:
        up.append(up[-1].parent)
    while down[-1].depth > up[-1].depth:
        down.append(down[-1].parent)
    while up[-1] is not down[-1]:
        up.append(up[-1].parent)
        down.append(down[-1].parent)
    return up + down[-2::-1]
