"""CAT(0) geometry of the developed cover: points, charts and geodesics.

A flat carries lattice coordinates (x, y) meaning x*A + y*B with the
Euclidean chart A = (1, 0), B = (-7/8, sqrt(15)/8), so that |A| = |B| = 1
and |A + B| = 1/2.  A band is the unit strip [0, 1] x R with coordinates
(w, tau): w = 0 on its diagonal side and w = 1 on its a- or b-side, and tau
measured so that moving tau by one moves two c-edges on the diagonal side
and one edge on the other side.

Since flats and bands form a tree, the pieces met by a geodesic are
exactly those on the tree path between its endpoints.  The remaining
unknowns are where it crosses each band side; the length is a sum of
Euclidean norms of affine functions of those crossing parameters, a
convex problem solved by Newton's method on a smoothed objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .development import Flat, flat_path

SQ15 = math.sqrt(15.0)
CHART = np.array([[1.0, -7.0 / 8.0], [0.0, SQ15 / 8.0]])  # lattice -> Euclidean
CHART_INV = np.linalg.inv(CHART)
TOL = 1e-9


def flat_norm(dx: float, dy: float) -> float:
    return math.sqrt(max(dx * dx + dy * dy - 1.75 * dx * dy, 0.0))


# ---------------------------------------------------------------- points


@dataclass(frozen=True)
class Point:
    """A point of the cover: in a flat (``band`` False) or inside a band."""

    piece: Flat  # the flat, or the child flat identifying the band
    x: float
    y: float
    band: bool = False

    def key(self, digits: int = 9) -> tuple:
        return (self.piece.uid, self.band, round(self.x, digits), round(self.y, digits))

    def is_vertex(self) -> bool:
        return not self.band and abs(self.x - round(self.x)) < TOL and abs(self.y - round(self.y)) < TOL

    def __repr__(self):
        kind = "band" if self.band else "flat"
        return f"Point({kind}#{self.piece.uid}, {self.x:.6g}, {self.y:.6g})"


def vertex_point(v) -> Point:
    flat, i, j = v
    return Point(flat, float(i), float(j))


def normalize(p: Point) -> Point:
    """Move band points lying on a band side onto the flat."""
    if not p.band:
        return p
    if abs(p.x) < TOL:
        return on_side(p.piece, 0, p.y)
    if abs(p.x - 1) < TOL:
        return on_side(p.piece, 1, p.y)
    return p


# ---------------------------------------------------------------- band charts


@dataclass(frozen=True)
class Side:
    flat: Flat
    origin: tuple  # lattice point at tau = 0
    direction: tuple  # lattice step per unit tau
    w: int  # 0 for the diagonal side, 1 for the a/b side
    kind: str  # "c", "a" or "b"
    value: int  # i - j for c lines, j for a lines, i for b lines

    def at(self, tau: float) -> tuple:
        return (self.origin[0] + self.direction[0] * tau, self.origin[1] + self.direction[1] * tau)

    def tau_of(self, x: float, y: float) -> float:
        d = self.direction
        return (x - self.origin[0]) / d[0] if d[0] else (y - self.origin[1]) / d[1]

    def contains(self, x: float, y: float, tol: float = TOL) -> bool:
        return abs(line_value(self.kind, x, y) - self.value) < tol

    @property
    def line(self) -> tuple:
        return (self.kind, self.value)


def line_value(kind: str, x: float, y: float) -> float:
    return x - y if kind == "c" else (y if kind == "a" else x)


def band_sides(band: Flat) -> tuple[Side, Side]:
    """(diagonal side, a/b side) of the band whose child flat is ``band``."""
    key = band.parent_key
    letter = key[0]
    parent = band.parent
    if letter in "st":
        _, delta, p = key
        cside = Side(parent, (delta + p, p), (2, 2), 0, "c", delta)
        if letter == "s":
            abside = Side(band, (0, 0), (1, 0), 1, "a", 0)
        else:
            abside = Side(band, (0, 0), (0, 1), 1, "b", 0)
        return cside, abside
    cside = Side(band, (0, 0), (2, 2), 0, "c", 0)
    if letter == "S":
        abside = Side(parent, (0, key[1]), (1, 0), 1, "a", key[1])
    else:
        abside = Side(parent, (key[1], 0), (0, 1), 1, "b", key[1])
    return cside, abside


def side_in(band: Flat, flat: Flat) -> Side:
    cs, ab = band_sides(band)
    if cs.flat is flat:
        return cs
    if ab.flat is flat:
        return ab
    raise ValueError("flat does not bound the band")


def on_side(band: Flat, w: int, tau: float) -> Point:
    side = band_sides(band)[w]
    x, y = side.at(tau)
    return Point(side.flat, x, y)


def band_coords(band: Flat, p: Point) -> tuple[float, float]:
    """(w, tau) of a point of the closed band."""
    if p.band:
        return (p.x, p.y)
    side = side_in(band, p.piece)
    return (float(side.w), side.tau_of(p.x, p.y))


# ---------------------------------------------------------------- chains


def piece_path(p: Point, q: Point) -> list:
    """Pieces from p to q: ("F", flat) and ("B", band) alternating."""
    if p.band and q.band and p.piece is q.piece:
        return [("B", p.piece)]
    starts = [p.piece] if not p.band else [p.piece.parent, p.piece]
    ends = [q.piece] if not q.band else [q.piece.parent, q.piece]
    flats = min((flat_path(a, b) for a in starts for b in ends), key=len)
    pieces = []
    for k, f in enumerate(flats):
        pieces.append(("F", f))
        if k + 1 < len(flats):
            g = flats[k + 1]
            pieces.append(("B", g if g.depth > f.depth else f))
    if p.band:
        pieces.insert(0, ("B", p.piece))
    if q.band:
        pieces.append(("B", q.piece))
    return pieces


@dataclass
class Geodesic:
    start: Point
    end: Point
    pieces: list  # ("F", flat) / ("B", band)
    points: list  # breakpoints: start, interface crossings, end (Points)
    length: float
    segment_lengths: list

    @property
    def bands(self) -> list[Flat]:
        """Bands met, ordered from the start (interior points are always met)."""
        return [obj for kind, obj in self.pieces if kind == "B"]

    @property
    def flats(self) -> list[Flat]:
        return [obj for kind, obj in self.pieces if kind == "F"]

    def point_at(self, s: float) -> Point:
        """Point at arc length s from the start."""
        if self.length <= 0:
            return self.start
        s = min(max(s, 0.0), self.length)
        acc = 0.0
        for k, seg in enumerate(self.segment_lengths):
            if s <= acc + seg or k == len(self.segment_lengths) - 1:
                t = 0.0 if seg <= 0 else (s - acc) / seg
                return _interp(self.pieces[k], self.points[k], self.points[k + 1], min(max(t, 0.0), 1.0))
            acc += seg
        return self.end

    def midpoint(self) -> Point:
        return self.point_at(self.length / 2)

    def samples(self, n: int) -> list[Point]:
        return [self.point_at(self.length * k / n) for k in range(n + 1)]

    def flat_segments(self) -> list:
        """(flat, p0, p1) in lattice coordinates for every flat piece."""
        out = []
        for k, (kind, obj) in enumerate(self.pieces):
            if kind == "F":
                a = _coords_in(self.points[k], kind, obj)
                b = _coords_in(self.points[k + 1], kind, obj)
                out.append((obj, a, b))
        return out


def _coords_in(p: Point, kind: str, obj: Flat) -> tuple:
    if kind == "F":
        if p.band:
            raise ValueError("band point in flat piece")
        return (p.x, p.y)
    return band_coords(obj, p)


def _interp(piece, p0: Point, p1: Point, t: float) -> Point:
    kind, obj = piece
    a = _coords_in(p0, kind, obj)
    b = _coords_in(p1, kind, obj)
    x = a[0] + t * (b[0] - a[0])
    y = a[1] + t * (b[1] - a[1])
    if kind == "F":
        return Point(obj, x, y)
    return normalize(Point(obj, x, y, band=True))


def piece_distance(piece, a: tuple, b: tuple) -> float:
    kind, _ = piece
    if kind == "F":
        return flat_norm(b[0] - a[0], b[1] - a[1])
    return math.hypot(b[0] - a[0], b[1] - a[1])


class _Problem:
    """Sum of Euclidean norms ||J_k theta + c_k|| over pieces."""

    def __init__(self, nvars: int):
        self.n = nvars
        self.J: list[np.ndarray] = []
        self.c: list[np.ndarray] = []

    def add(self, J, c):
        self.J.append(np.asarray(J, dtype=float))
        self.c.append(np.asarray(c, dtype=float))

    def finalize(self):
        self.JJ = np.stack(self.J) if self.J else np.zeros((0, 2, self.n))
        self.cc = np.stack(self.c) if self.c else np.zeros((0, 2))

    def value(self, th, eps=0.0):
        r = self.JJ @ th + self.cc
        return float(np.sqrt((r * r).sum(axis=1) + eps * eps).sum())

    def solve(self, th0, eps_schedule=(1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12), iters=60):
        th = np.array(th0, dtype=float)
        if self.n == 0:
            return th
        for eps in eps_schedule:
            for _ in range(iters):
                r = self.JJ @ th + self.cc  # (m, 2)
                nr = np.sqrt((r * r).sum(axis=1) + eps * eps)
                u = r / nr[:, None]
                g = np.einsum("mij,mi->j", self.JJ, u)
                # Hessian: J^T (I/n - r r^T / n^3) J
                P = np.eye(2)[None] / nr[:, None, None] - r[:, :, None] * r[:, None, :] / nr[:, None, None] ** 3
                H = np.einsum("mia,mij,mjb->ab", self.JJ, P, self.JJ)
                H += 1e-14 * np.eye(self.n)
                try:
                    step = -np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    step = -g
                f0 = float(nr.sum())
                t = 1.0
                while t > 1e-12:
                    cand = th + t * step
                    if self.value(cand, eps) <= f0 + 1e-4 * t * float(g @ step):
                        break
                    t *= 0.5
                else:
                    break
                th = cand
                if float(np.abs(t * step).max()) < 1e-13:
                    break
        return th


def _flat_coords(p: Point) -> tuple:
    return (p.x, p.y)


def geodesic_between(p: Point, q: Point) -> Geodesic:
    p, q = normalize(p), normalize(q)
    pieces = piece_path(p, q)
    if len(pieces) == 1:
        kind, obj = pieces[0]
        a = _coords_in(p, kind, obj)
        b = _coords_in(q, kind, obj)
        d = piece_distance(pieces[0], a, b)
        return Geodesic(p, q, pieces, [p, q], d, [d])
    # interfaces between consecutive pieces: (band, side index)
    interfaces = []
    for k in range(len(pieces) - 1):
        (k1, o1), (_, o2) = pieces[k], pieces[k + 1]
        band, flat = (o2, o1) if k1 == "F" else (o1, o2)
        side = side_in(band, flat)
        interfaces.append((band, side))
    # variables: one tau per interface, tied across a flat when both
    # interfaces lie on the same line (entry point = exit point there)
    var_of = []
    offset = []
    nv = 0
    for k, (band, side) in enumerate(interfaces):
        if k > 0 and pieces[k][0] == "F":
            prev_band, prev_side = interfaces[k - 1]
            if prev_side.line == side.line:
                # same line: tau' with side.at(tau') == prev_side.at(tau)
                v, off = var_of[-1], offset[-1]
                # both sides are diagonals with direction (2, 2)
                shift = (prev_side.origin[1] - side.origin[1]) / 2.0
                if side.kind != "c" or prev_side.kind != "c":
                    raise AssertionError("only diagonal lines carry two bands")
                shift_x = (prev_side.origin[0] - side.origin[0]) / 2.0
                if abs(shift - shift_x) > TOL:
                    raise AssertionError("inconsistent diagonal offsets")
                var_of.append(v)
                offset.append(off + shift)
                continue
        var_of.append(nv)
        offset.append(0.0)
        nv += 1
    prob = _Problem(nv)
    skip_flat = set()
    for k in range(1, len(pieces) - 1):
        if pieces[k][0] == "F" and var_of[k - 1] == var_of[k]:
            skip_flat.add(k)

    def endpoint_affine(k_interface: int, in_piece: int):
        """Affine map theta -> coords in piece ``in_piece`` of interface point."""
        band, side = interfaces[k_interface]
        v, off = var_of[k_interface], offset[k_interface]
        kind, obj = pieces[in_piece]
        row = np.zeros((2, nv))
        if kind == "F":
            const = np.array(side.at(off), dtype=float)
            row[0, v] = side.direction[0]
            row[1, v] = side.direction[1]
        else:
            const = np.array([float(side.w), off])
            row[1, v] = 1.0
        return row, const

    for k, piece in enumerate(pieces):
        if k in skip_flat:
            continue
        kind, obj = piece
        if k == 0:
            A0 = np.zeros((2, nv))
            c0 = np.array(_coords_in(p, kind, obj), dtype=float)
        else:
            A0, c0 = endpoint_affine(k - 1, k)
        if k == len(pieces) - 1:
            A1 = np.zeros((2, nv))
            c1 = np.array(_coords_in(q, kind, obj), dtype=float)
        else:
            A1, c1 = endpoint_affine(k, k)
        J = A1 - A0
        c = c1 - c0
        if kind == "F":
            J = CHART @ J
            c = CHART @ c
        prob.add(J, c)
    prob.finalize()
    th0 = _initial_guess(p, q, interfaces, var_of, offset, nv)
    th = prob.solve(th0)
    # rebuild breakpoints
    pts = [p]
    for k, (band, side) in enumerate(interfaces):
        tau = th[var_of[k]] + offset[k]
        x, y = side.at(tau)
        pts.append(Point(side.flat, x, y))
    pts.append(q)
    segs = []
    for k, piece in enumerate(pieces):
        kind, obj = piece
        a = _coords_in(pts[k], kind, obj)
        b = _coords_in(pts[k + 1], kind, obj)
        segs.append(piece_distance(piece, a, b))
    return Geodesic(p, q, pieces, pts, float(sum(segs)), segs)


def _initial_guess(p, q, interfaces, var_of, offset, nv):
    th = np.zeros(nv)
    # start each crossing at the foot of the start point when it is on the line
    for k, (band, side) in enumerate(interfaces):
        if not p.band and side.flat is p.piece:
            th[var_of[k]] = side.tau_of(p.x, p.y) - offset[k] if side.direction[0] or side.direction[1] else 0.0
    return th


def distance(p: Point, q: Point) -> float:
    return geodesic_between(p, q).length


# ---------------------------------------------------------------- refined graph oracle


def refined_length(g: Geodesic, k: int = 8, window: float = 3.0) -> float:
    """Shortest path when crossings are restricted to the 1/k grid.

    Works on the same chain of pieces as ``g``; it is an upper bound for
    the true length and converges to it as k grows.
    """
    pieces = g.pieces
    if len(pieces) == 1:
        return g.length
    layers = []
    for idx in range(1, len(g.points) - 1):
        bp = g.points[idx]
        kind, obj = pieces[idx]
        band = obj if kind == "B" else pieces[idx - 1][1]
        side = side_in(band, bp.piece)
        t0 = side.tau_of(bp.x, bp.y)
        lo = math.floor((t0 - window) * k)
        hi = math.ceil((t0 + window) * k)
        taus = np.arange(lo, hi + 1) / k
        pts = [Point(side.flat, *side.at(t)) for t in taus]
        layers.append(pts)
    layers = [[g.start]] + layers + [[g.end]]
    cost = np.zeros(1)
    for li in range(len(pieces)):
        kind, obj = pieces[li]
        A = np.array([_coords_in(pt, kind, obj) for pt in layers[li]])
        B = np.array([_coords_in(pt, kind, obj) for pt in layers[li + 1]])
        d = B[None, :, :] - A[:, None, :]
        if kind == "F":
            dist = np.sqrt(np.maximum(d[..., 0] ** 2 + d[..., 1] ** 2 - 1.75 * d[..., 0] * d[..., 1], 0))
        else:
            dist = np.hypot(d[..., 0], d[..., 1])
        cost = (cost[:, None] + dist).min(axis=0)
    return float(cost.min())


# ---------------------------------------------------------------- local checks


def flat_direction_angle(d1, d2) -> float:
    e1 = CHART @ np.asarray(d1, float)
    e2 = CHART @ np.asarray(d2, float)
    c = float(e1 @ e2 / (np.linalg.norm(e1) * np.linalg.norm(e2)))
    return math.acos(max(-1.0, min(1.0, c)))
