"""Envelopes of geodesic segments and the triangle lemmas built on them.

An envelope is stored as pieces of the cover:

* whole bands (``bands``),
* regions of single flats (``regions``, keyed by flat uid),
* whole flats (``flats``, only in saturated envelopes),

optionally truncated to a closed ball (``center``, ``radius``) for the
reduced variants.  Membership of a point is a predicate over these pieces.

The analytic envelope follows the band sequence of the geodesic: the bands
themselves, then for every two consecutive bands the piece of flat between
their boundary lines (nothing if the lines coincide, the strip if they are
parallel, the two opposite narrow sectors at the crossing point otherwise),
then half-planes at the ends, and finally the glued chromosomes that meet
the segment in at least two points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .development import Development, Flat
from .errors import LemmaViolation, PreconditionError
from .geometry import (CHART, TOL, Geodesic, Point, Side, band_sides, distance,
                       flat_direction_angle, flat_norm, geodesic_between, line_value,
                       normalize, side_in, vertex_point)

_DIR = {"a": (1, 0), "b": (0, 1), "c": (1, 1)}
_FUNC = {"c": (1, -1), "a": (0, 1), "b": (1, 0)}  # line_value = f . (x, y)


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class Slab:
    """lo <= f(x, y) <= hi for one of the three line functionals."""

    kind: str
    lo: float
    hi: float

    def contains(self, x, y, tol=TOL) -> bool:
        v = line_value(self.kind, x, y)
        return self.lo - tol <= v <= self.hi + tol


@dataclass(frozen=True)
class Region:
    tag: str  # hull | strip | sector | wide-sector | half-plane | point
    slabs: tuple = ()
    apex: tuple | None = None
    dirs: tuple | None = None  # sector pair spanned by d1, d2 (and their negatives)

    def contains(self, x, y, tol=TOL) -> bool:
        return _region_contains(self, x, y, tol)


def _sector_contains(apex, dirs, x, y, tol=TOL) -> bool:
    dx, dy = x - apex[0], y - apex[1]
    (a, b), (c, d) = dirs
    det = a * d - b * c
    lam = (dx * d - dy * c) / det
    mu = (a * dy - b * dx) / det
    return (lam >= -tol and mu >= -tol) or (lam <= tol and mu <= tol)


@dataclass
class Envelope:
    kind: str
    gamma: Geodesic
    bands: dict = field(default_factory=dict)  # uid -> (band flat, tag)
    regions: dict = field(default_factory=dict)  # flat uid -> list[Region]
    region_flats: dict = field(default_factory=dict)  # flat uid -> Flat
    flats: dict = field(default_factory=dict)  # uid -> Flat (whole flats)
    center: Point | None = None
    radius: float | None = None
    notes: list = field(default_factory=list)

    # ------------------------------------------------------------ building
    def add_band(self, band: Flat, tag: str):
        self.bands.setdefault(band.uid, (band, tag))

    def add_region(self, flat: Flat, region: Region):
        self.regions.setdefault(flat.uid, []).append(region)
        self.region_flats[flat.uid] = flat

    def copy(self, kind: str) -> "Envelope":
        return Envelope(kind, self.gamma, dict(self.bands),
                        {k: list(v) for k, v in self.regions.items()},
                        dict(self.region_flats), dict(self.flats), self.center, self.radius,
                        list(self.notes))

    # ------------------------------------------------------------ queries
    def in_region(self, p: Point, tol: float = 1e-7) -> bool:
        """Membership ignoring the metric truncation."""
        p = normalize(p)
        if p.band:
            return p.piece.uid in self.bands
        flat = p.piece
        if flat.uid in self.flats:
            return True
        for reg in self.regions.get(flat.uid, ()):
            if _region_contains(reg, p.x, p.y, tol):
                return True
        # closed bands contain their boundary lines
        for uid in _bands_bounding(flat, self.bands):
            band = self.bands[uid][0]
            if side_in(band, flat).contains(p.x, p.y, tol):
                return True
        return False

    def contains(self, p: Point, tol: float = 1e-7) -> bool:
        if not self.in_region(p, tol):
            return False
        if self.center is None:
            return True
        return distance(self.center, p) <= self.radius + tol

    def summary(self) -> dict:
        tags: dict[str, int] = {}
        for _, tag in self.bands.values():
            tags["band:" + tag] = tags.get("band:" + tag, 0) + 1
        for regs in self.regions.values():
            for r in regs:
                tags[r.tag] = tags.get(r.tag, 0) + 1
        if self.flats:
            tags["flat"] = len(self.flats)
        return {"kind": self.kind, "length": self.gamma.length, "pieces": tags,
                "radius": self.radius, "notes": list(self.notes)}


def _region_contains(reg: Region, x, y, tol) -> bool:
    if reg.apex is not None and reg.dirs is not None:
        return _sector_contains(reg.apex, reg.dirs, x, y, tol)
    if reg.apex is not None:
        return abs(x - reg.apex[0]) < tol and abs(y - reg.apex[1]) < tol
    return all(s.contains(x, y, tol) for s in reg.slabs)


def _bands_bounding(flat: Flat, bands: dict):
    for uid, (band, _) in bands.items():
        if band is flat or band.parent is flat:
            yield uid


# ---------------------------------------------------------------- helpers


def lines_through(flat: Flat, x: float, y: float, tol: float = TOL):
    """Lattice lines of the flat through a point: (kind, value)."""
    out = []
    for kind in "abc":
        v = line_value(kind, x, y)
        if abs(v - round(v)) < tol:
            out.append((kind, int(round(v))))
    return out


def bands_on_line(flat: Flat, line: tuple) -> list[Flat]:
    """Bands whose boundary is the given line of the flat."""
    kind, value = line
    out = []
    keys = []
    if kind == "c":
        keys = [(ch, value, p) for ch in "st" for p in (0, 1)]
    elif kind == "a":
        keys = [("S", value)]
    else:
        keys = [("T", value)]
    for key in keys:
        if flat.own_key == key:
            out.append(flat)
        else:
            out.append(flat.child(key))
    return out


def colle_partners(band: Flat) -> list[Flat]:
    """Bands sharing the diagonal boundary line of ``band``."""
    cside = band_sides(band)[0]
    return [b for b in bands_on_line(cside.flat, cside.line) if b is not band]


def _segment_line(flat, a, b):
    """The lattice line containing a nondegenerate segment, if any."""
    if abs(a[0] - b[0]) < TOL and abs(a[1] - b[1]) < TOL:
        return None
    for kind in "abc":
        va, vb = line_value(kind, *a), line_value(kind, *b)
        if abs(va - vb) < TOL and abs(va - round(va)) < TOL:
            return (kind, int(round(va)))
    return None


def _hull(a, b) -> Region:
    slabs = []
    for kind in "abc":
        va, vb = line_value(kind, *a), line_value(kind, *b)
        slabs.append(Slab(kind, math.floor(min(va, vb) + TOL), math.ceil(max(va, vb) - TOL)))
    return Region("hull", tuple(slabs))


def _half_plane(side: Side, x, y) -> Region:
    v = line_value(side.kind, x, y)
    if v >= side.value:
        return Region("half-plane", (Slab(side.kind, side.value, math.inf),))
    return Region("half-plane", (Slab(side.kind, -math.inf, side.value),))


def _crossing(l1, l2):
    (k1, v1), (k2, v2) = l1, l2
    vals = {k1: v1, k2: v2}
    if "a" in vals and "b" in vals:
        return (vals["b"], vals["a"])
    if "a" in vals:
        return (vals["c"] + vals["a"], vals["a"])
    return (vals["b"], vals["b"] - vals["c"])


# ---------------------------------------------------------------- construction


def geodesic(x, y) -> Geodesic:
    """Geodesic between two vertices (development vertices or Points)."""
    p = x if isinstance(x, Point) else vertex_point(x)
    q = y if isinstance(y, Point) else vertex_point(y)
    return geodesic_between(p, q)


def bands_met(g: Geodesic) -> list[Flat]:
    return g.bands


def centromere_contacts(g: Geodesic) -> list:
    """Points where ``g`` crosses two bands at once through their common vertex.

    Such a geodesic touches the chromosome at its centromere instead of
    crossing a sector transversally; the envelope is still built but the
    case is flagged.
    """
    hits = []
    for k in range(1, len(g.pieces) - 1):
        kind, flat = g.pieces[k]
        if kind != "F" or g.segment_lengths[k] >= TOL:
            continue
        if side_in(g.pieces[k - 1][1], flat).line != side_in(g.pieces[k + 1][1], flat).line:
            pt = g.points[k]
            hits.append((pt.piece, pt.x, pt.y))
    return hits


def analytic_envelope(g: Geodesic, endpoint_contacts: bool = False) -> Envelope:
    """Analytic envelope H(g).

    ``endpoint_contacts`` selects the reading where a contact at an endpoint
    counts toward the two points needed for a glued chromosome.  The default
    counts interior points only; with the flag set, any bands the wider
    reading adds are listed in ``notes``.
    """
    env = Envelope("Analytic", g)
    p, q = g.start, g.end
    bands = g.bands
    if not bands:
        flat = p.piece
        a, b = (p.x, p.y), (q.x, q.y)
        line = _segment_line(flat, a, b)
        if g.length < TOL:
            env.add_region(flat, Region("point", apex=a))
        elif line is None:
            env.add_region(flat, _hull(a, b))
        else:
            _add_glued_along(env, flat, line)
        return env
    for band in bands:
        env.add_band(band, "crossed")
    if centromere_contacts(g):
        env.notes.append("geodesic passes through a centromere")
    # pieces between consecutive bands
    for k in range(1, len(g.pieces) - 1):
        kind, flat = g.pieces[k]
        if kind != "F":
            continue
        b_in, b_out = g.pieces[k - 1][1], g.pieces[k + 1][1]
        s_in, s_out = side_in(b_in, flat), side_in(b_out, flat)
        if s_in.line == s_out.line:
            continue
        if s_in.kind == s_out.kind:
            lo, hi = sorted((s_in.value, s_out.value))
            env.add_region(flat, Region("strip", (Slab(s_in.kind, lo, hi),)))
            continue
        apex = _crossing(s_in.line, s_out.line)
        d1, d2 = _DIR[s_in.kind], _DIR[s_out.kind]
        if flat_direction_angle(d1, d2) > math.pi / 2:
            d2 = (-d2[0], -d2[1])
        narrow = Region("sector", apex=apex, dirs=(d1, d2))
        env.add_region(flat, narrow)
        a = (g.points[k].x, g.points[k].y)
        b = (g.points[k + 1].x, g.points[k + 1].y)
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        if not (_region_contains(narrow, *mid, 1e-7)):
            wide = Region("wide-sector", apex=apex, dirs=(d1, (-d2[0], -d2[1])))
            env.add_region(flat, wide)
            env.notes.append("geodesic crosses the wide sector pair")
    # half-planes at the ends
    first_side = side_in(bands[0], p.piece)
    if not first_side.contains(p.x, p.y):
        env.add_region(p.piece, _half_plane(first_side, p.x, p.y))
    last_side = side_in(bands[-1], q.piece)
    if not last_side.contains(q.x, q.y):
        env.add_region(q.piece, _half_plane(last_side, q.x, q.y))
    # glued chromosomes meeting the segment in two points or more
    for band in bands:
        for other in colle_partners(band):
            env.add_band(other, "glued")
    for flat, a, b in g.flat_segments():
        line = _segment_line(flat, a, b)
        if line is not None:
            _add_glued_along(env, flat, line)
    if endpoint_contacts:
        extra = _endpoint_glued(env, g)
        if extra:
            env.notes.append(f"endpoint reading adds {len(extra)} bands")
            for band in extra:
                env.add_band(band, "glued-endpoint")
    return env


def _add_glued_along(env: Envelope, flat: Flat, line: tuple):
    """Every glued chromosome containing a band on ``line``."""
    for band in bands_on_line(flat, line):
        env.add_band(band, "glued")
        for other in colle_partners(band):
            env.add_band(other, "glued")


def _endpoint_glued(env: Envelope, g: Geodesic) -> list:
    """Glued pairs through both endpoints that are not already present."""
    out = []
    ends = []
    for pt in (g.start, g.end):
        s = set()
        for line in lines_through(pt.piece, pt.x, pt.y):
            if line[0] == "c":
                s.update(b.uid for b in bands_on_line(pt.piece, line))
        ends.append(s)
    for uid in ends[0] & ends[1]:
        if uid not in env.bands:
            out.append(uid)
    return out


def reduce_envelope(env: Envelope) -> Envelope:
    red = env.copy("Reduced" if env.kind == "Analytic" else "SaturatedReduced")
    red.center = env.gamma.midpoint()
    red.radius = 2.0 * env.gamma.length
    return red


def saturate_envelope(env: Envelope) -> Envelope:
    sat = env.copy("Saturated")
    for uid, flat in env.region_flats.items():
        sat.flats[uid] = flat
    for band, _ in env.bands.values():
        for side in band_sides(band):
            sat.flats[side.flat.uid] = side.flat
    return sat


def reduced(g: Geodesic) -> Envelope:
    return reduce_envelope(analytic_envelope(g))


def saturated_reduced(g: Geodesic) -> Envelope:
    return reduce_envelope(saturate_envelope(analytic_envelope(g)))


# ---------------------------------------------------------------- vertices


def envelope_vertices(env: Envelope, dev: Development | None = None, near=None) -> list:
    """Lattice vertices of a reduced envelope, as (flat, i, j) tuples.

    ``near=(point, r)`` keeps only vertices within distance ``r`` of ``point``
    and scans around that point instead of the whole envelope.
    """
    if env.center is None:
        raise PreconditionError("vertex enumeration needs a reduced envelope")
    out = {}
    R = env.radius
    g = env.gamma
    if g.length < TOL:
        p = g.start
        return [(p.piece, int(round(p.x)), int(round(p.y)))]
    flats_to_scan: dict = {}
    for uid, flat in list(env.region_flats.items()) + list(env.flats.items()):
        flats_to_scan[uid] = flat
    lines_to_scan = []
    for band, _ in env.bands.values():
        for side in band_sides(band):
            lines_to_scan.append(side)
    focus, frad = (env.center, R) if near is None else near
    cache: dict = {}
    fcache: dict = {}

    def dist_c(pt: Point):
        k = pt.key()
        if k not in cache:
            cache[k] = distance(env.center, pt)
        return cache[k]

    def dist_f(pt: Point):
        if near is None:
            return dist_c(pt)
        k = pt.key()
        if k not in fcache:
            fcache[k] = distance(focus, pt)
        return fcache[k]

    def consider(flat, i, j):
        k = (flat.uid, i, j)
        if k in out:
            return
        pt = Point(flat, float(i), float(j))
        if not env.in_region(pt):
            return
        if near is not None and dist_f(pt) > frad + 1e-7:
            return
        if dist_c(pt) <= R + 1e-7:
            out[k] = (flat, i, j)

    for uid, flat in flats_to_scan.items():
        ref, dref = _nearest_ref(flat, env, dist_f, focus)
        rho = frad + dref + 1e-9
        span = int(math.ceil(math.sqrt(8.0) * rho)) + 1
        cx, cy = int(round(ref[0])), int(round(ref[1]))
        for i in range(cx - span, cx + span + 1):
            for j in range(cy - span, cy + span + 1):
                if flat_norm(i - ref[0], j - ref[1]) <= rho:
                    consider(flat, i, j)
    for side in lines_to_scan:
        ref, dref = _nearest_ref(side.flat, env, dist_f, focus, side)
        rho = frad + dref + 1e-9
        t0 = side.tau_of(*ref)
        step = 0.5 if side.kind == "c" else 1.0
        n = int(math.ceil(rho / step)) + 2
        for m in range(-n, n + 1):
            tau = math.floor(t0 / step) * step + m * step
            x, y = side.at(tau)
            if abs(x - round(x)) < TOL and abs(y - round(y)) < TOL:
                consider(side.flat, int(round(x)), int(round(y)))
    return list(out.values())


def _nearest_ref(flat: Flat, env: Envelope, dist_c, center: Point, side: Side | None = None):
    """A point of the flat (on ``side`` if given) and its distance to ``center``."""
    g = env.gamma
    cands = []
    for pt in g.points:
        if not pt.band and pt.piece is flat:
            if side is None or side.contains(pt.x, pt.y):
                cands.append((pt.x, pt.y))
    if not cands:
        # project the centre's nearest geodesic point via the tree: the flat
        # is attached to some band of the envelope; use the foot on that band
        target = side
        if target is None:
            for band, _ in env.bands.values():
                for s in band_sides(band):
                    if s.flat is flat:
                        target = s
                        break
                if target is not None:
                    break
        if target is None:
            c = center
            if not c.band and c.piece is flat:
                return (c.x, c.y), 0.0
            raise PreconditionError("no reference point for a flat of the envelope")
        # closest point of the line to the centre, found by a 1D search
        tau = _closest_tau(target, center)
        cands.append(target.at(tau))
    best = min(cands, key=lambda a: dist_c(Point(flat, *a)))
    return best, dist_c(Point(flat, *best))


def _closest_tau(side: Side, center: Point) -> float:
    from scipy.optimize import minimize_scalar

    f = lambda t: distance(center, Point(side.flat, *side.at(t)))
    # the distance to a line is convex along it
    lo, hi = -50.0, 50.0
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


# ---------------------------------------------------------------- triangle lemmas


@dataclass
class TripleIntersection:
    witness: Point
    kind: str = "TripleIntersection"


@dataclass
class ResidualTriangle:
    flat: Flat
    corners: tuple  # three lattice points
    area: float
    kind: str = "ResidualTriangle"


def check_frizes(A, B, C) -> bool:
    """Every band met by one side is met by one of the other two sides."""
    sides = [geodesic(A, B), geodesic(B, C), geodesic(A, C)]
    met = [set(b.uid for b in g.bands) for g in sides]
    return all(m <= met[(k + 1) % 3] | met[(k + 2) % 3] for k, m in enumerate(met))


def check_midpoint_balls(A, B, C, sides=None) -> bool:
    """Balls about side midpoints, radius twice the side, contain the shortest side."""
    sides = sides or [geodesic(A, B), geodesic(B, C), geodesic(A, C)]
    shortest = min(sides, key=lambda g: g.length)
    n = 8
    for g in sides:
        m = g.midpoint()
        r = 2.0 * g.length
        # the distance to a convex ball centre is convex along a geodesic:
        # checking the endpoints suffices, samples are a sanity net
        for pt in shortest.samples(n):
            if distance(m, pt) > r + 1e-7:
                return False
    return True


def _candidates(sides: list[Geodesic]) -> list[Point]:
    pts = []
    shortest = min(sides, key=lambda g: g.length)
    pts.extend(shortest.samples(8))
    for g in sides:
        pts.extend(g.points)
        pts.append(g.midpoint())
    for g in sides:
        pts.extend(g.samples(8))
    seen = set()
    out = []
    for p in pts:
        k = p.key(7)
        if k not in seen:
            seen.add(k)
            out.append(p)
    # vertices first: they make retract witnesses group elements
    out.sort(key=lambda p: not p.is_vertex())
    return out


def _find_witness(envs: list[Envelope], cands: list[Point]):
    for p in cands:
        if all(e.in_region(p) for e in envs) and all(e.contains(p) for e in envs):
            return p
    return _region_witness(envs)


def _pieces(env: Envelope) -> tuple[dict, dict]:
    flats = dict(env.region_flats)
    flats.update(env.flats)
    for band, _ in env.bands.values():
        for side in band_sides(band):
            flats[side.flat.uid] = side.flat
    return flats, {uid: b for uid, (b, _) in env.bands.items()}


def _region_witness(envs: list[Envelope], max_lattice: int = 200):
    """Search the common part of the envelopes piece by piece."""
    from shapely import get_coordinates
    from shapely.geometry import box

    E = lambda p: tuple(CHART @ np.asarray(p, float))
    pieces = [_pieces(e) for e in envs]
    common = set(pieces[0][0]).intersection(*(set(f) for f, _ in pieces[1:]))
    for uid in sorted(common):
        flat = pieces[0][0][uid]
        shape = None
        for e in envs:
            if uid in e.flats:
                part = box(-1e3, -1e3, 1e3, 1e3)
            else:
                part = _flat_shape(e.copy("unbounded"), flat, E, clip=False)
            shape = part if shape is None else shape.intersection(part)
            if shape.is_empty:
                break
        if shape is None or shape.is_empty:
            continue
        cands = [shape.representative_point().coords[0]]
        cands += [tuple(c) for c in get_coordinates(shape)]
        pts = [Point(flat, float(i), float(j)) for i, j in _lattice_in_box(shape, E, max_lattice)]
        pts += [Point(flat, *CHART_INV_apply(x, y)) for x, y in cands]
        for p in pts:
            if all(e.contains(p) for e in envs):
                return p
    bands = set(pieces[0][1]).intersection(*(set(b) for _, b in pieces[1:]))
    for uid in sorted(bands):
        band = pieces[0][1][uid]
        side = band_sides(band)[0]
        for e in envs:
            tau = _closest_tau(side, e.center)
            for w in (0.0, 0.5, 1.0):
                p = normalize(Point(band, w, tau, True))
                if all(x.contains(p) for x in envs):
                    return p
    return None


def _lattice_in_box(shape, E, limit):
    """Lattice points of the flat inside ``shape`` (near its centroid first)."""
    from shapely.geometry import Point as SPoint

    x0, y0, x1, y1 = shape.bounds
    corners = [CHART_INV_apply(x, y) for x in (x0, x1) for y in (y0, y1)]
    i0 = math.floor(min(c[0] for c in corners))
    i1 = math.ceil(max(c[0] for c in corners))
    j0 = math.floor(min(c[1] for c in corners))
    j1 = math.ceil(max(c[1] for c in corners))
    if (i1 - i0 + 1) * (j1 - j0 + 1) > 40 * limit:
        return []
    cx, cy = CHART_INV_apply(*shape.centroid.coords[0]) if not shape.centroid.is_empty else (0, 0)
    pts = [(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)
           if shape.buffer(1e-7).contains(SPoint(E((i, j))))]
    pts.sort(key=lambda ij: ((ij[0] - cx) ** 2 + (ij[1] - cy) ** 2, ij))
    return pts[:limit]


def triangle_reduce(A, B, C, sides=None):
    """Outcome of the reduction lemma for the triangle with vertices A, B, C."""
    sides = sides or [geodesic(A, B), geodesic(B, C), geodesic(A, C)]
    envs = [reduced(g) for g in sides]
    w = _find_witness(envs, _candidates(sides))
    if w is not None:
        return TripleIntersection(w)
    # residual case: all three sides inside one flat
    if any(g.bands for g in sides):
        raise LemmaViolation("no common point and the triangle leaves a flat")
    return _residual_in_flat(sides, envs)


def _residual_in_flat(sides, envs):
    from shapely.geometry import Polygon
    from shapely.ops import unary_union

    flat = sides[0].start.piece
    corners = [(sides[0].start.x, sides[0].start.y), (sides[1].start.x, sides[1].start.y),
               (sides[1].end.x, sides[1].end.y)]
    E = lambda p: tuple(CHART @ np.asarray(p, float))
    D = Polygon([E(c) for c in corners])
    covers = []
    for env in envs:
        covers.append(_flat_shape(env, flat, E))
    inter = covers[0].intersection(covers[1]).intersection(covers[2])
    if not inter.is_empty:
        x, y = inter.representative_point().coords[0]
        lx, ly = CHART_INV_apply(x, y)
        return TripleIntersection(Point(flat, lx, ly))
    # a hair of growth closes float gaps between adjacent covers
    D0 = D.difference(unary_union(covers).buffer(1e-9, join_style="mitre"))
    if D0.is_empty or D0.area < 1e-9:
        raise LemmaViolation("empty residual but no common point")
    D0 = D0.buffer(0)
    if D0.geom_type != "Polygon":
        raise LemmaViolation("residual is not connected")
    simp = D0.simplify(1e-7)
    pts = list(simp.exterior.coords)[:-1]
    if len(pts) != 3:
        raise LemmaViolation(f"residual has {len(pts)} corners")
    lat = [tuple(float(round(t)) if abs(t - round(t)) < 1e-6 else t for t in CHART_INV_apply(*p))
           for p in pts]
    if not _is_simplicial_isosceles(lat):
        raise LemmaViolation("residual triangle is not simplicial isosceles")
    return ResidualTriangle(flat, tuple(lat), float(D0.area))


def CHART_INV_apply(x, y):
    from .geometry import CHART_INV

    v = CHART_INV @ np.array([x, y])
    return (float(v[0]), float(v[1]))


def _is_simplicial_isosceles(lat) -> bool:
    """Corners on lattice lines with sides along two lattice directions of equal length."""
    for p in lat:
        if len(lines_through(None, *p, tol=1e-6)) < 2:
            return False
    kinds = []
    lens = []
    for k in range(3):
        a, b = lat[k], lat[(k + 1) % 3]
        line = None
        for kind in "abc":
            if abs(line_value(kind, *a) - line_value(kind, *b)) < 1e-6:
                line = kind
        if line is None:
            return False
        kinds.append(line)
        lens.append(flat_norm(b[0] - a[0], b[1] - a[1]))
    if len(set(kinds)) != 3:
        return False
    # the two a/b sides have equal length
    ab = [l for k, l in zip(kinds, lens) if k != "c"]
    return abs(ab[0] - ab[1]) < 1e-6


def _flat_shape(env: Envelope, flat: Flat, E, clip: bool = True):
    """Shapely polygon of H' restricted to ``flat`` (disk inscribed by a 720-gon).

    ``clip=False`` drops the metric truncation.
    """
    from shapely.geometry import Polygon, Point as SPoint, LineString
    from shapely.ops import unary_union

    big = 1e3
    parts = []
    for reg in env.regions.get(flat.uid, ()):
        parts.append(_region_polygon(reg, E, big))
    for uid in _bands_bounding(flat, env.bands):
        band = env.bands[uid][0]
        side = side_in(band, flat)
        a, b = side.at(-big), side.at(big)
        parts.append(LineString([E(a), E(b)]).buffer(1e-9))
    shape = unary_union(parts) if parts else Polygon()
    c = env.center
    if clip and c is not None:
        if c.band or c.piece is not flat:
            raise LemmaViolation("flat triangle with an off-flat midpoint")
        disk = SPoint(E((c.x, c.y))).buffer(env.radius, quad_segs=180)
        # buffer() inscribes its polygon in the circle
        shape = shape.intersection(disk)
    return shape


def _region_polygon(reg: Region, E, big):
    from shapely.geometry import Polygon, box

    if reg.apex is not None and reg.dirs is None:
        from shapely.geometry import Point as SPoint
        return SPoint(E(reg.apex)).buffer(1e-9)
    if reg.apex is not None:
        x0, y0 = reg.apex
        (a, b), (c, d) = reg.dirs
        s1 = Polygon([E((x0, y0)), E((x0 + big * a, y0 + big * b)), E((x0 + big * (a + c), y0 + big * (b + d))),
                      E((x0 + big * c, y0 + big * d))])
        s2 = Polygon([E((x0, y0)), E((x0 - big * a, y0 - big * b)), E((x0 - big * (a + c), y0 - big * (b + d))),
                      E((x0 - big * c, y0 - big * d))])
        return s1.union(s2)
    poly = box(-big, -big, big, big)
    for s in reg.slabs:
        poly = poly.intersection(_slab_polygon(s, E, big))
    return poly


def _slab_polygon(s: Slab, E, big):
    from shapely.geometry import Polygon

    lo = max(s.lo, -big)
    hi = min(s.hi, big)
    if s.kind == "a":  # lo <= y <= hi
        pts = [(-big, lo), (big, lo), (big, hi), (-big, hi)]
    elif s.kind == "b":
        pts = [(lo, -big), (hi, -big), (hi, big), (lo, big)]
    else:  # lo <= x - y <= hi
        pts = [(-big + lo, -big), (-big + hi, -big), (big + hi, big), (big + lo, big)]
    return Polygon([E(p) for p in pts])


def triangle_reduce_saturated(A, B, C, sides=None) -> Point:
    sides = sides or [geodesic(A, B), geodesic(B, C), geodesic(A, C)]
    envs = [saturated_reduced(g) for g in sides]
    w = _find_witness(envs, _candidates(sides))
    if w is None:
        raise LemmaViolation("saturated reduced envelopes have no common point")
    return w
