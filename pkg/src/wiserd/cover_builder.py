"""Finite patches of the universal cover, with bands, flats and chromosomes.

A patch of radius r is the set of vertices at 1-skeleton distance at most
r from the base vertex (every edge counted as one step), together with the
edges and faces all of whose vertices lie in it.  Vertices come from the
lazy :class:`~wiserd.development.Development`, which is independent of the
normal forms in :mod:`wiserd.group_core`; the two are compared in tests.

Faces are keyed by ``(relator, start vertex)``: the face reads the relator
along its boundary starting at that vertex.  Squares keep their subdivided
side, so they have five corners, the last one of angle pi.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
import numpy as np

from .development import Development, Flat
from .errors import ClassificationError, DevelopmentConflict, PreconditionError, ResourceLimitError
from .group_core import RELATORS
from .link_graph import TWO_PI, U, V, LinkGraph, build_link
from .words import ALPHABET, inverse

EDGE_LENGTH = {"a": 1.0, "b": 1.0, "c": 0.5, "s": 1.0, "t": 1.0}
SQUARES = ("saSCC", "tbTCC")
TRIANGLES = ("abC", "baC")
_LINK = build_link()
# index of the link edge produced by corner k of relator r
_CORNER_INDEX = {(e.face, e.corner): idx for idx, e in enumerate(_LINK.edges)}

DEFAULT_MAX_VERTICES = 3_000_000


@dataclass
class ComplexPatch:
    radius: int
    dev: Development
    verts: list  # development vertices, BFS order
    dist: list  # 1-skeleton distance from the base vertex
    index: dict  # vertex key -> position in verts
    nbr: np.ndarray  # (n, 10) neighbour along each letter of ALPHABET, -1 if outside

    @property
    def n_vertices(self) -> int:
        return len(self.verts)

    def key(self, v) -> tuple:
        return Development.vkey(v)

    def contains(self, v) -> bool:
        return self.key(v) in self.index

    def word(self, idx: int) -> str:
        return Development.word_of(self.verts[idx])

    # ------------------------------------------------------------ edges/faces
    def edges(self):
        """Directed labelled edges ``(i, letter, j)`` for positive letters."""
        for i in range(self.n_vertices):
            for k, ch in enumerate(ALPHABET):
                if ch.islower() and self.nbr[i, k] >= 0:
                    yield (i, ch, int(self.nbr[i, k]))

    def face_vertices(self, relator: str, start) -> list | None:
        """Vertices of the face reading ``relator`` from ``start`` (None if it leaves the patch)."""
        out = [start]
        v = start
        for ch in relator[:-1]:
            v = self.dev.move(v, ch)
            if not self.contains(v):
                return None
            out.append(v)
        back = self.dev.move(v, relator[-1])
        if back != start:
            raise DevelopmentConflict(f"face {relator} does not close at {Development.word_of(start)}")
        return out

    def faces(self):
        """All faces ``(relator, start index)`` with every vertex in the patch."""
        for i, v in enumerate(self.verts):
            for r in RELATORS:
                if self.face_vertices(r, v) is not None:
                    yield (r, i)

    def corners_at(self, v):
        """Faces with a corner at v: list of (relator, corner, start vertex)."""
        out = []
        for r in RELATORS:
            for k in range(len(r)):
                start = self.dev.locate(inverse(r[:k]), v)
                out.append((r, k, start))
        return out

    def is_interior(self, idx: int) -> bool:
        """Every face at the vertex lies in the patch (its full star)."""
        v = self.verts[idx]
        return all(self.face_vertices(r, s) is not None for r, _, s in self.corners_at(v))

    def extracted_link(self, idx: int) -> nx.MultiGraph:
        """Link at a vertex read off the faces of the patch."""
        v = self.verts[idx]
        g = nx.MultiGraph()
        for k, ch in enumerate(ALPHABET):
            if self.nbr[idx, k] >= 0:
                g.add_node(ch)
        for r, k, s in self.corners_at(v):
            if self.face_vertices(r, s) is None:
                continue
            e = _LINK.edges[_CORNER_INDEX[(r, k)]]
            # germs are the actual neighbouring vertices reached along the corner's sides
            out_v = self.dev.move(v, r[k])
            in_v = self.dev.move(v, r[k - 1].swapcase())
            g.add_edge(_germ_of(self, v, out_v), _germ_of(self, v, in_v), length=e.length)
        return g

    def to_json(self) -> str:
        data = {
            "radius": self.radius,
            "vertices": [{"word": self.word(i), "distance": self.dist[i], "base": i == 0}
                         for i in range(self.n_vertices)],
            "edges": [{"from": i, "label": ch, "to": j, "length": EDGE_LENGTH[ch]}
                      for i, ch, j in self.edges()],
            "faces": [{"relator": r, "start": i} for r, i in self.faces()],
        }
        return json.dumps(data, separators=(",", ":"))


def _germ_of(patch: ComplexPatch, v, w) -> str:
    for ch in ALPHABET:
        if patch.dev.move(v, ch) == w:
            return ch
    raise DevelopmentConflict("neighbour not reachable by a single letter")


def build_patch(radius: int, max_vertices: int = DEFAULT_MAX_VERTICES,
                dev: Development | None = None) -> ComplexPatch:
    if radius < 0:
        raise PreconditionError("radius must be nonnegative")
    dev = dev or Development()
    base = dev.base
    verts = [base]
    dist = [0]
    index = {Development.vkey(base): 0}
    frontier = [0]
    for r in range(radius):
        nxt = []
        for i in frontier:
            v = verts[i]
            for ch in ALPHABET:
                w = dev.move(v, ch)
                k = Development.vkey(w)
                if k not in index:
                    if len(verts) >= max_vertices:
                        raise ResourceLimitError(f"patch({radius}) exceeds {max_vertices} vertices")
                    index[k] = len(verts)
                    verts.append(w)
                    dist.append(r + 1)
                    nxt.append(index[k])
        frontier = nxt
    nbr = np.full((len(verts), len(ALPHABET)), -1, dtype=np.int64)
    for i, v in enumerate(verts):
        for k, ch in enumerate(ALPHABET):
            j = index.get(Development.vkey(dev.move(v, ch)))
            if j is not None:
                nbr[i, k] = j
    return ComplexPatch(radius, dev, verts, dist, index, nbr)


# ---------------------------------------------------------------- singular locus


def singular_locus(patch: ComplexPatch) -> dict:
    """Edge labels split by singularity, with per-edge incidence counts.

    An open edge is singular when at least three faces contain it.  The
    count is done on the faces actually present around each interior edge.
    """
    singular: set = set()
    regular: set = set()
    counts: Counter = Counter()
    for i, ch, j in patch.edges():
        v = patch.verts[i]
        n = 0
        for r in RELATORS:
            for k, x in enumerate(r):
                if x == ch:
                    start = patch.dev.locate(inverse(r[:k]), v)
                elif x == ch.swapcase():
                    start = patch.dev.locate(inverse(r[:k + 1]), v)
                else:
                    continue
                if patch.face_vertices(r, start) is not None:
                    n += 1
        counts[(ch, n)] += 1
        (singular if n >= 3 else regular).add((i, ch, j))
    return {"singular": singular, "regular": regular, "counts": counts}


# ---------------------------------------------------------------- bands


def line_of(band: Flat, flat: Flat) -> tuple | None:
    """Geometric line of ``flat`` bounding the band (child flat ``band``)."""
    if band is flat:
        key = flat.own_key
    elif band.parent is flat:
        key = band.parent_key
    else:
        return None
    if key[0] in "st":
        return ("c", key[1])
    return ("a" if key[0] == "S" else "b", key[1])


def square_band(patch: ComplexPatch, relator: str, start) -> Flat:
    """The band containing a square: the deeper of the two flats it joins."""
    f1 = start[0]
    f2 = patch.dev.move(start, relator[0])[0]
    return f1 if f1.depth > f2.depth else f2


@dataclass
class BandFragment:
    band: Flat  # identifies the band (the child flat of its tree edge)
    letter: str  # "s" or "t"
    squares: list  # (relator, start vertex) ordered along the band
    truncated: bool
    width: float = 1.0

    @property
    def uid(self) -> int:
        return self.band.uid

    def boundary_lines(self) -> tuple:
        c_flat, ab_flat = (self.band.parent, self.band) if self.band.parent_key[0] in "st" \
            else (self.band, self.band.parent)
        return ((c_flat, line_of(self.band, c_flat)), (ab_flat, line_of(self.band, ab_flat)))


def _square_tau(patch: ComplexPatch, relator: str, start) -> int:
    # position of the square along the band: the a/b-side coordinate of its corner
    v = patch.dev.move(start, relator[0])
    return v[1] if relator[0] == "s" else v[2]


def detect_bands(patch: ComplexPatch) -> list[BandFragment]:
    groups: dict[int, list] = {}
    owner: dict[int, Flat] = {}
    for v in patch.verts:
        for r in SQUARES:
            if patch.face_vertices(r, v) is None:
                continue
            b = square_band(patch, r, v)
            groups.setdefault(b.uid, []).append((r, v))
            owner[b.uid] = b
    out = []
    for uid, sq in groups.items():
        sq.sort(key=lambda x: _square_tau(patch, *x))
        # bands are bi-infinite, so a fragment is always cut by the patch
        out.append(BandFragment(owner[uid], sq[0][0][0], sq, truncated=True))
    return out


def band_flat_intersection(band: BandFragment, flat: Flat, patch: ComplexPatch) -> list:
    """Patch vertices of ``flat`` on the band: empty unless the flat bounds it."""
    line = line_of(band.band, flat)
    if line is None:
        return []
    kind, val = line
    pts = []
    for i, v in enumerate(patch.verts):
        if v[0] is not flat:
            continue
        _, x, y = v
        if (kind == "c" and x - y == val) or (kind == "a" and y == val) or (kind == "b" and x == val):
            pts.append(i)
    return pts


# ---------------------------------------------------------------- flats


@dataclass
class FlatFragment:
    flat: Flat
    triangles: list  # (relator, start vertex)

    @property
    def uid(self) -> int:
        return self.flat.uid


def detect_flats(patch: ComplexPatch) -> list[FlatFragment]:
    by_flat: dict[int, FlatFragment] = {}
    for v in patch.verts:
        for r in TRIANGLES:
            if patch.face_vertices(r, v) is None:
                continue
            ff = by_flat.get(v[0].uid)
            if ff is None:
                ff = by_flat[v[0].uid] = FlatFragment(v[0], [])
            ff.triangles.append((r, v))
    return list(by_flat.values())


def bold_completion_count(link: LinkGraph = _LINK) -> dict:
    """For each bold path, the number of ways to close it into a bold 2pi-cycle."""
    bold_cycles = [c for c in link.simple_cycles
                   if all(link.edges[k].bold for k in c) and link.cycle_length(c) == TWO_PI]
    bold_edges = [k for k, e in enumerate(link.edges) if e.bold]
    out = {}
    for k in bold_edges:
        out[k] = sum(1 for c in bold_cycles if k in c)
    return out


def flat_disk(flat: Flat, radius: int) -> set:
    """Triangles of the simplicial disk of radius ``radius`` about (flat, 0, 0).

    Grown ring by ring: each step adds every triangle meeting the previous
    disk, the extension being forced at every boundary vertex.
    """
    tri_at = {(0, 0): [(0, 0, "abC"), (0, 0, "baC"), (-1, 0, "abC"), (0, -1, "baC"),
                       (-1, -1, "abC"), (-1, -1, "baC")]}

    def triangles_at(p):
        i, j = p
        return [(i + di, j + dj, r) for di, dj, r in tri_at[(0, 0)]]

    def corners(tri):
        i, j, r = tri
        if r == "abC":
            return [(i, j), (i + 1, j), (i + 1, j + 1)]
        return [(i, j), (i, j + 1), (i + 1, j + 1)]

    disk: set = set()
    verts = {(0, 0)}
    for _ in range(radius):
        new = set()
        for p in verts:
            new.update(triangles_at(p))
        disk |= new
        verts = {q for t in disk for q in corners(t)}
    return disk


# ---------------------------------------------------------------- chromosomes


def band_trace(patch: ComplexPatch, v, band: Flat) -> frozenset:
    """Link edges at v coming from squares of ``band``."""
    out = set()
    for r in SQUARES:
        for k in range(len(r)):
            start = patch.dev.locate(inverse(r[:k]), v)
            if square_band(patch, r, start) is band:
                out.add(_CORNER_INDEX[(r, k)])
    return frozenset(out)


def bands_at(dev: Development, v) -> list[Flat]:
    """The six bands whose boundary passes through v."""
    found = []
    seen = set()
    for r in SQUARES:
        for k in range(len(r)):
            start = dev.locate(inverse(r[:k]), v)
            f1 = start[0]
            f2 = dev.move(start, r[0])[0]
            b = f1 if f1.depth > f2.depth else f2
            if b.uid not in seen:
                seen.add(b.uid)
                found.append(b)
    return found


@lru_cache(maxsize=None)
def _cycle_kind(t1: frozenset, t2: frozenset) -> tuple:
    cands = sorted(((_LINK.cycle_length(c), c) for c in _LINK.simple_cycles
                    if t1 <= set(c) and t2 <= set(c)), key=lambda x: float(x[0]))
    if not cands:
        return ("none", None, False)
    best = cands[0][0]
    unique = len(cands) == 1 or cands[1][0] != best
    if best == TWO_PI + U + U:
        return ("TypeU", best, unique)
    if best == TWO_PI + V + V:
        return ("TypeV", best, unique)
    return ("other", best, unique)


def classify_pair_at(patch_or_dev, v, b1: Flat, b2: Flat) -> str:
    """Kind of the chromosome formed by two bands through the vertex v."""
    if b1 is b2:
        raise PreconditionError("a chromosome needs two distinct bands")
    dev = patch_or_dev.dev if isinstance(patch_or_dev, ComplexPatch) else patch_or_dev
    flat = v[0]
    l1, l2 = line_of(b1, flat), line_of(b2, flat)
    if l1 is None or l2 is None:
        raise PreconditionError("both bands must pass through the vertex")
    if l1 == l2:
        return "Colle"
    holder = patch_or_dev if isinstance(patch_or_dev, ComplexPatch) else _DevHolder(dev)
    kind, _, unique = _cycle_kind(band_trace(holder, v, b1), band_trace(holder, v, b2))
    if kind not in ("TypeU", "TypeV") or not unique:
        raise ClassificationError(f"pair at {Development.word_of(v)} is unclassifiable")
    return kind


class _DevHolder:
    def __init__(self, dev):
        self.dev = dev


def classify_band_pair(b1: BandFragment, b2: BandFragment, patch: ComplexPatch):
    """Disjoint, Colle, or TypeU/TypeV with the centromere vertex."""
    if b1.uid == b2.uid:
        raise PreconditionError("B1 = B2 is not a pair")
    common = []
    for (f1, l1) in b1.boundary_lines():
        for (f2, l2) in b2.boundary_lines():
            if f1 is f2:
                common.append((f1, l1, l2))
    if not common:
        return ("Disjoint", None)
    flat, l1, l2 = common[0]
    if l1 == l2:
        return ("Colle", None)
    x = _line_intersection(l1, l2)
    if x is None:
        return ("Disjoint", None)
    v = (flat, x[0], x[1])
    kind = classify_pair_at(patch, v, b1.band, b2.band)
    return (kind, v)


def _line_intersection(l1, l2):
    lines = {l1[0]: l1[1], l2[0]: l2[1]}
    if len(lines) < 2:
        return None  # parallel distinct lines
    if "a" in lines and "b" in lines:
        return (lines["b"], lines["a"])
    if "a" in lines:
        j = lines["a"]
        return (lines["c"] + j, j)
    i = lines["b"]
    return (i, i - lines["c"])


def chromosome_census(radius: int, dev: Development | None = None) -> dict:
    """Classify every band pair meeting at an interior vertex of patch(radius).

    A vertex at distance at most ``radius - 2`` has its whole star inside
    patch(radius) because every face has 1-skeleton diameter 2, so those
    vertices are exactly where two bands can be seen to meet with both
    complete around the meeting point.
    """
    dev = dev or Development()
    inner = build_patch(max(radius - 2, 0), dev=dev)
    counts: Counter = Counter()
    colle_pairs: set = set()
    failed: list = []
    for v in inner.verts:
        bands = bands_at(dev, v)
        if len(bands) != 6:
            raise ClassificationError("a vertex must lie on exactly six bands")
        for x in range(6):
            for y in range(x + 1, 6):
                try:
                    kind = classify_pair_at(dev, v, bands[x], bands[y])
                except ClassificationError:
                    failed.append((Development.word_of(v), bands[x].uid, bands[y].uid))
                    continue
                if kind == "Colle":
                    key = (min(bands[x].uid, bands[y].uid), max(bands[x].uid, bands[y].uid))
                    if key in colle_pairs:
                        continue
                    colle_pairs.add(key)
                counts[kind] += 1
    return {"interior_vertices": inner.n_vertices, "counts": dict(counts),
            "unclassifiable": len(failed), "failures": failed[:20]}
