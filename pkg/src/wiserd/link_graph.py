"""The link of a vertex of the presentation complex, as an exact metric graph.

Edge lengths are angles of the form ``m*v + n*pi/2`` with ``v = arccos(1/4)``.
The triangle angle ``u = arccos(7/8)`` equals ``pi - 2v`` and is stored as
``(-2, 2)``.  Since ``v/pi`` is irrational, two angles are equal exactly when
their coefficient pairs are; ordering uses 50-digit arithmetic.
"""
from __future__ import annotations

import heapq
from collections import Counter
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, total_ordering

import mpmath

from .errors import ClassificationError, PreconditionError
from .group_core import RELATORS
from .words import ALPHABET

mpmath.mp.dps = 50
_V = mpmath.acos(mpmath.mpf(1) / 4)
_HALF_PI = mpmath.pi / 2


@total_ordering
@dataclass(frozen=True)
class AngleValue:
    m: Fraction | int = 0
    n: Fraction | int = 0

    def __post_init__(self):
        object.__setattr__(self, "m", _norm(self.m))
        object.__setattr__(self, "n", _norm(self.n))

    def __add__(self, other: "AngleValue") -> "AngleValue":
        return AngleValue(self.m + other.m, self.n + other.n)

    def __sub__(self, other: "AngleValue") -> "AngleValue":
        return AngleValue(self.m - other.m, self.n - other.n)

    def __neg__(self):
        return AngleValue(-self.m, -self.n)

    def scale(self, q) -> "AngleValue":
        q = Fraction(q)
        return AngleValue(self.m * q, self.n * q)

    def exact(self):
        return mpmath.mpf(self.m.numerator) / self.m.denominator * _V + \
            mpmath.mpf(self.n.numerator) / self.n.denominator * _HALF_PI

    def __float__(self):
        return float(self.exact())

    def __lt__(self, other: "AngleValue") -> bool:
        if self == other:
            return False
        return self.exact() < other.exact()

    @property
    def coefficients(self) -> tuple:
        return (self.m, self.n)

    def __repr__(self):
        return f"AngleValue({self.m}, {self.n})"

    def label(self) -> str:
        return NAMES.get(self, f"{self.m}v+{self.n}pi/2")


def _norm(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


ZERO = AngleValue(0, 0)
V = AngleValue(1, 0)
U = AngleValue(-2, 2)
HALF_PI = AngleValue(0, 1)
PI = AngleValue(0, 2)
TWO_PI = AngleValue(0, 4)
NAMES = {ZERO: "0", U: "u", V: "v", HALF_PI: "pi/2", PI: "pi", TWO_PI: "2pi",
         TWO_PI + U + U: "2pi+2u", TWO_PI + V + V: "2pi+2v"}

# corner angles of each relator face, corner k sitting between letters k-1 and k
CORNER_ANGLES = {
    "abC": (V, U, V),
    "baC": (V, U, V),
    "saSCC": (HALF_PI, HALF_PI, HALF_PI, HALF_PI, PI),
    "tbTCC": (HALF_PI, HALF_PI, HALF_PI, HALF_PI, PI),
}


def angle_identity_error() -> float:
    """|arccos(7/8) + 2 arccos(1/4) - pi| from the side lengths 1, 1, 1/2."""
    a, b, c = 1.0, 1.0, 0.5
    apex = math.acos((a * a + b * b - c * c) / (2 * a * b))
    base = math.acos((a * a + c * c - b * b) / (2 * a * c))
    return abs(apex + 2 * base - math.pi)


@dataclass(frozen=True)
class LinkEdge:
    ends: tuple  # two germs (outgoing letters)
    length: AngleValue
    face: str
    corner: int

    @property
    def bold(self) -> bool:
        return self.length in (U, V)

    def other(self, germ: str) -> str:
        return self.ends[1] if self.ends[0] == germ else self.ends[0]


@dataclass(frozen=True)
class LinkPoint:
    """A vertex (``edge is None``) or the point at fraction ``t`` along an edge."""

    germ: str | None = None
    edge: int | None = None
    t: Fraction = Fraction(0)

    @classmethod
    def vertex(cls, germ: str) -> "LinkPoint":
        return cls(germ=germ)

    @classmethod
    def on_edge(cls, edge: int, t) -> "LinkPoint":
        return cls(edge=edge, t=Fraction(t))


@dataclass(frozen=True)
class CycleClass:
    kind: str
    cycle: tuple  # edge indices in traversal order
    length: AngleValue


class LinkGraph:
    def __init__(self, vertices: tuple, edges: tuple):
        self.vertices = vertices
        self.edges = edges
        self.adj: dict[str, list[int]] = {g: [] for g in vertices}
        for k, e in enumerate(edges):
            self.adj[e.ends[0]].append(k)
            if e.ends[1] != e.ends[0]:
                self.adj[e.ends[1]].append(k)

    # ---------------------------------------------------------------- metric
    def _dijkstra(self, sources: dict) -> dict:
        dist = dict(sources)
        heap = [(float(d), g, d) for g, d in sources.items()]
        heapq.heapify(heap)
        done = set()
        while heap:
            _, g, d = heapq.heappop(heap)
            if g in done or dist[g] != d:
                continue
            done.add(g)
            for k in self.adj[g]:
                e = self.edges[k]
                h = e.other(g)
                nd = d + e.length
                if h not in dist or nd < dist[h]:
                    dist[h] = nd
                    heapq.heappush(heap, (float(nd), h, nd))
        return dist

    def _anchors(self, p: LinkPoint) -> dict:
        if p.edge is None:
            return {p.germ: ZERO}
        e = self.edges[p.edge]
        d0 = e.length.scale(p.t)
        d1 = e.length.scale(1 - p.t)
        out = {e.ends[0]: d0}
        if e.ends[1] not in out or d1 < out[e.ends[1]]:
            out[e.ends[1]] = d1
        return out

    def distance(self, p: LinkPoint, q: LinkPoint) -> AngleValue:
        best = None
        if p.edge is not None and p.edge == q.edge:
            best = self.edges[p.edge].length.scale(abs(p.t - q.t))
        if p == q:
            return ZERO
        table = self.vertex_distances
        for g, dp in self._anchors(p).items():
            for h, dq in self._anchors(q).items():
                if h in table[g]:
                    cand = dp + table[g][h] + dq
                    if best is None or cand < best:
                        best = cand
        return best

    @cached_property
    def vertex_distances(self) -> dict:
        return {g: self._dijkstra({g: ZERO}) for g in self.vertices}

    # ---------------------------------------------------------------- cycles
    @cached_property
    def simple_cycles(self) -> tuple:
        """Every simple cycle, as a tuple of edge indices (one rotation/direction)."""
        found = set()
        out = []
        order = {g: i for i, g in enumerate(self.vertices)}

        def dfs(start, g, path_v, path_e):
            for k in self.adj[g]:
                if k in path_e:
                    continue
                h = self.edges[k].other(g)
                if h == start:
                    key = frozenset(path_e + [k])
                    if key not in found:
                        found.add(key)
                        out.append(tuple(path_e + [k]))
                elif h not in path_v and order[h] > order[start]:
                    dfs(start, h, path_v | {h}, path_e + [k])

        for s in self.vertices:
            dfs(s, s, {s}, [])
        return tuple(out)

    def cycle_length(self, cyc) -> AngleValue:
        total = ZERO
        for k in cyc:
            total = total + self.edges[k].length
        return total

    def cycle_vertices(self, cyc) -> frozenset:
        return self._cycle_vertex_cache(cyc)

    @cached_property
    def _cycle_vertex_table(self) -> dict:
        return {c: frozenset(g for k in c for g in self.edges[k].ends) for c in self.simple_cycles}

    def _cycle_vertex_cache(self, cyc) -> frozenset:
        hit = self._cycle_vertex_table.get(tuple(cyc))
        if hit is None:
            hit = frozenset(g for k in cyc for g in self.edges[k].ends)
        return hit

    @cached_property
    def _cycle_lengths(self) -> dict:
        return {c: self.cycle_length(c) for c in self.simple_cycles}

    def girth(self, removed: frozenset = frozenset()) -> AngleValue | None:
        lengths = [self.cycle_length(c) for c in self.simple_cycles if not removed & set(c)]
        return min(lengths) if lengths else None

    def classify_cycle(self, cyc) -> str:
        lens = [self.edges[k].length for k in cyc]
        bold = [x for x in lens if x in (U, V)]
        plain = [x for x in lens if x not in (U, V)]
        total = self.cycle_length(cyc)
        if total != TWO_PI:
            raise ClassificationError(f"cycle {cyc} has length {total}")
        if Counter(bold) == Counter([U, U, V, V, V, V]) and not plain:
            return "Bold"
        if Counter(bold) == Counter([U, V, V]) and sum(plain, ZERO) == PI:
            return "Mixed"
        if not bold:
            key = sorted(x.n for x in plain)
            if key == [2, 2]:
                return "NonBoldPiPi"
            if key == [1, 1, 2]:
                return "NonBoldHalfHalfPi"
            if key == [1, 1, 1, 1]:
                return "NonBoldFourHalves"
        raise ClassificationError(f"2pi-cycle {cyc} matches no pattern")

    def enumerate_2pi_cycles(self) -> list[CycleClass]:
        out = []
        for c in self.simple_cycles:
            if self.cycle_length(c) == TWO_PI:
                out.append(CycleClass(self.classify_cycle(c), c, TWO_PI))
        return out

    def census(self) -> dict:
        counts: dict[str, int] = {}
        for cc in self.enumerate_2pi_cycles():
            counts[cc.kind] = counts.get(cc.kind, 0) + 1
        return counts

    def _contains(self, cyc, p: LinkPoint) -> bool:
        if p.edge is not None and 0 < p.t < 1:
            return p.edge in cyc
        if p.edge is not None:
            g = self.edges[p.edge].ends[0 if p.t == 0 else 1]
            return g in self.cycle_vertices(cyc)
        return p.germ in self.cycle_vertices(cyc)

    def smallest_common_cycle(self, p: LinkPoint, q: LinkPoint):
        """Shortest simple cycle through both points, its length, and uniqueness."""
        if not self.distance(p, q) > PI:
            raise PreconditionError("points are at distance at most pi")
        cands = [(self._cycle_lengths[c], c) for c in self.simple_cycles
                 if self._contains(c, p) and self._contains(c, q)]
        cands.sort(key=lambda x: float(x[0]))
        best_len, best = cands[0]
        unique = len(cands) == 1 or cands[1][0] != best_len and best_len < cands[1][0]
        return best, best_len, unique

    def points(self, denominator: int = 8) -> list[LinkPoint]:
        pts = [LinkPoint.vertex(g) for g in self.vertices]
        for k in range(len(self.edges)):
            pts.extend(LinkPoint.on_edge(k, Fraction(i, denominator)) for i in range(1, denominator))
        return pts

    def lemma_audit(self, denominator: int = 8) -> dict:
        """Check the large-distance cycle lemma on vertices and edge samples."""
        pts = self.points(denominator)
        targets = {TWO_PI + U + U, TWO_PI + V + V}
        checked = failures = 0
        lengths: dict[str, int] = {}
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                p, q = pts[i], pts[j]
                if not self.distance(p, q) > PI:
                    continue
                checked += 1
                _, length, unique = self.smallest_common_cycle(p, q)
                lab = length.label()
                lengths[lab] = lengths.get(lab, 0) + 1
                if length not in targets or not unique:
                    failures += 1
        return {"pairs_checked": checked, "failures": failures, "lengths": lengths}

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"ends": list(e.ends), "m": str(e.length.m), "n": str(e.length.n),
                       "face": e.face, "corner": e.corner} for e in self.edges],
            "census": self.census(),
        }


def corner_edges(relator: str, angles) -> list[LinkEdge]:
    out = []
    n = len(relator)
    for k in range(n):
        incoming = relator[k - 1]
        ends = (incoming.swapcase(), relator[k])
        out.append(LinkEdge(ends, angles[k], relator, k))
    return out


def build_link() -> LinkGraph:
    edges = []
    for r in RELATORS:
        edges.extend(corner_edges(r, CORNER_ANGLES[r]))
    return LinkGraph(tuple(ALPHABET), tuple(edges))
