"""Polynomial branching audit and convolution-norm experiments.

Group elements are handled as normal forms (see :mod:`wiserd.group_core`);
lengths are word lengths with unit generators.  Geometry is done in the
cover whose vertex ``g`` is reached from the base vertex by reading a word
for ``g`` letter by letter, so left multiplication acts by isometries.

Three-paths ``(a3, a2, a1)`` are read through the inversion ``g -> g^-1``,
which carries that cover onto the one where ``e, a1, a2 a1, z`` is a path
with step lengths ``|a1|, |a2|, |a3|``.  Accordingly the hull of ``z`` is

    hull(z) = { g : g^-1 is a vertex of the reduced envelope of [e, z^-1] }.
"""
from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import envelope_engine as ee
from .development import Development
from .errors import (DegenerateDataError, LemmaViolation, NonConvergenceError, PreconditionError,
                     ResourceLimitError, RetractFailure)
from .geometry import Point, band_sides, distance, normalize, vertex_point
from .group_core import (Ball, element_length, flat_length, nf_inverse, nf_multiply,
                         nf_word, normal_form)

KAPPA = 8
DELTA = 0
MAX_BALL_RADIUS = int(os.environ.get("WISERD_MAX_BALL_RADIUS", "7"))

_DEV = Development()


def _max_radius() -> int:
    return int(os.environ.get("WISERD_MAX_BALL_RADIUS", str(MAX_BALL_RADIUS)))


# ---------------------------------------------------------------- lengths


class Lengths:
    """Word lengths: table lookup inside a ball, exact dynamic programme outside."""

    def __init__(self, ball: Ball | None = None, radius: int = 5):
        self.ball = ball if ball is not None else Ball(radius)
        self._extra: dict = {}

    @property
    def radius(self) -> int:
        return self.ball.radius

    def __call__(self, g) -> int:
        idx = self.ball.index.get(g)
        if idx is not None:
            return self.ball.lengths[idx]
        v = self._extra.get(g)
        if v is None:
            v = element_length(g)
            self._extra[g] = v
        return v

    def at_most(self, g, bound: int) -> bool:
        """``|g| <= bound``, avoiding the slow path when the ball decides it."""
        idx = self.ball.index.get(g)
        if idx is not None:
            return self.ball.lengths[idx] <= bound
        if bound <= self.ball.radius:
            return False
        return self(g) <= bound


_LENGTHS: Lengths | None = None


def default_lengths() -> Lengths:
    global _LENGTHS
    if _LENGTHS is None:
        _LENGTHS = Lengths(radius=5)
    return _LENGTHS


# ---------------------------------------------------------------- hulls


def _env_to(target_word: str, dev: Development):
    p = vertex_point(dev.base)
    q = vertex_point(dev.locate(target_word))
    return ee.reduced(ee.geodesic(p, q))


def hull(z, dev: Development | None = None) -> frozenset:
    """Vertex set of the reduced envelope attached to ``z``, as normal forms."""
    dev = dev or _DEV
    env = _env_to(nf_word(nf_inverse(z)), dev)
    out = set()
    for flat, i, j in ee.envelope_vertices(env):
        out.add(nf_inverse(normal_form(flat.word_of(i, j))))
    return frozenset(out)


class HullTest:
    """Membership in ``hull(z)`` without enumerating it."""

    def __init__(self, z, dev: Development | None = None):
        self.dev = dev or _DEV
        self.env = _env_to(nf_word(nf_inverse(z)), self.dev)

    def __contains__(self, g) -> bool:
        v = self.dev.locate(nf_word(nf_inverse(g)))
        return self.env.contains(vertex_point(v))


# ---------------------------------------------------------------- three-paths


@dataclass(frozen=True)
class ThreePath:
    a3: tuple
    a2: tuple
    a1: tuple

    @property
    def target(self):
        return nf_multiply(nf_multiply(self.a3, self.a2), self.a1)

    def words(self) -> tuple[str, str, str]:
        return (nf_word(self.a3), nf_word(self.a2), nf_word(self.a1))


@dataclass
class ThreePathFamily:
    z: tuple
    r: int
    members: frozenset

    def __len__(self):
        return len(self.members)


def _caps(lz: int, r: int):
    """Caps on |a1| and |a2|; None when the family is uncapped."""
    if lz >= r:
        return 3 * r, r
    return None, None


def is_member(path: ThreePath, z, r: int, lengths: Lengths, h) -> bool:
    """Whether ``path`` belongs to the family of ``z`` at radius ``r``.

    ``h`` is anything supporting ``in`` for the hull of ``z``.
    """
    if path.target != z:
        return False
    lz = lengths(z)
    l1, l2, l3 = lengths(path.a1), lengths(path.a2), lengths(path.a3)
    if l1 + l2 + l3 > KAPPA * lz + DELTA:
        return False
    c1, c2 = _caps(lz, r)
    if c1 is not None and (l1 > c1 or l2 > c2):
        return False
    return path.a1 in h and nf_multiply(path.a2, path.a1) in h


def three_paths(z, r: int, lengths: Lengths | None = None, h: frozenset | None = None,
                dev: Development | None = None) -> ThreePathFamily:
    """All members of the family of ``z`` at radius ``r``, by pairs of hull vertices."""
    if r < 0:
        raise PreconditionError("radius must be nonnegative")
    lengths = lengths or default_lengths()
    h = hull(z, dev) if h is None else h
    lz = lengths(z)
    c1, c2 = _caps(lz, r)
    budget = KAPPA * lz + DELTA
    hs = sorted(h)
    l_of = {p: lengths(p) for p in hs}
    third = {q: nf_multiply(z, nf_inverse(q)) for q in hs}
    l_third = {q: lengths(third[q]) for q in hs}
    out = set()
    for p in hs:
        lp = l_of[p]
        if c1 is not None and lp > c1:
            continue
        pinv = nf_inverse(p)
        for q in hs:
            room = budget - lp - l_third[q]
            if c2 is not None:
                room = min(room, c2)
            if room < 0 or abs(l_of[q] - lp) > room:
                continue
            a2 = nf_multiply(q, pinv)
            if lengths.at_most(a2, room):
                out.add(ThreePath(third[q], a2, p))
    return ThreePathFamily(z, r, frozenset(out))


def brute_force_three_paths(z, r: int, ball: Ball, lengths: Lengths | None = None,
                            h: frozenset | None = None, dev: Development | None = None) -> frozenset:
    """Same family by enumerating factorizations ``a1, a2`` over a ball.

    The ball must contain every admissible ``a1`` and ``a2``; raises
    :class:`ResourceLimitError` otherwise.
    """
    lengths = lengths or default_lengths()
    h = hull(z, dev) if h is None else h
    lz = lengths(z)
    c1, c2 = _caps(lz, r)
    n1 = KAPPA * lz + DELTA if c1 is None else c1
    n2 = KAPPA * lz + DELTA if c2 is None else c2
    if max(n1, n2) > ball.radius:
        raise ResourceLimitError(
            f"exhaustive factorization needs ball({max(n1, n2)}), have ball({ball.radius})")
    out = set()
    for i1 in range(ball.size(n1)):
        a1 = ball.nfs[i1]
        if a1 not in h:
            continue
        l1 = ball.lengths[i1]
        for i2 in range(ball.size(n2)):
            a2 = ball.nfs[i2]
            q = nf_multiply(a2, a1)
            if q not in h:
                continue
            a3 = nf_multiply(z, nf_inverse(q))
            if l1 + ball.lengths[i2] + lengths(a3) <= KAPPA * lz + DELTA:
                out.add(ThreePath(a3, a2, a1))
    return frozenset(out)


def required_radius(lz: int, r: int) -> int:
    """Ball radius the exhaustive factorization needs for ``(z, r)``."""
    c1, c2 = _caps(lz, r)
    if c1 is None:
        return KAPPA * lz + DELTA
    return max(c1, c2)


def three_path_audit(zs, radii, ball: Ball, lengths: Lengths | None = None,
                     dev: Development | None = None) -> dict:
    """Compare :func:`three_paths` with the exhaustive oracle on every case.

    Feasibility is checked for all cases before any work is done.
    """
    lengths = lengths or default_lengths()
    zs = list(zs)
    need = max((required_radius(lengths(z), r) for z in zs for r in radii), default=0)
    if need > ball.radius:
        raise ResourceLimitError(
            f"exhaustive factorization needs ball({need}); ball({ball.radius}) is available")
    cases = mismatches = 0
    for z in zs:
        h = hull(z, dev)
        for r in radii:
            cases += 1
            if three_paths(z, r, lengths, h).members != brute_force_three_paths(z, r, ball, lengths, h):
                mismatches += 1
    return {"cases": cases, "mismatches": mismatches}


# ---------------------------------------------------------------- fits


def polyfit_loglog(table) -> tuple[float, float, float]:
    """Least-squares fit ``value ~ constant * r**exponent``.

    ``table`` is a sequence of ``(r, value)`` pairs.  Returns
    ``(exponent, constant, residual)`` with the residual the root mean
    square error in log space.
    """
    pts = [(float(r), float(v)) for r, v in table]
    if len(pts) < 3:
        raise DegenerateDataError("need at least three points")
    if any(r <= 0 or v <= 0 for r, v in pts):
        raise DegenerateDataError("radii and values must be positive")
    if len({r for r, _ in pts}) < 2:
        raise DegenerateDataError("need two distinct radii")
    x = np.log([r for r, _ in pts])
    y = np.log([v for _, v in pts])
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(slope), float(math.exp(icpt)), res


# ---------------------------------------------------------------- growth


@dataclass
class BranchingAudit:
    p1_table: list = field(default_factory=list)  # (r, max |C_z^r|)
    p1_fit: tuple | None = None
    hull_table: list = field(default_factory=list)  # (r, max vertices within r)
    hull_fit: tuple | None = None
    p3_table: list = field(default_factory=list)  # (r, max flat triangles)
    p2_rows: list = field(default_factory=list)  # (|x|, |u|)
    p2_fit: tuple | None = None  # (slope, intercept, degree)
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p1_table": [list(r) for r in self.p1_table],
            "p1_fit": list(self.p1_fit) if self.p1_fit else None,
            "hull_table": [list(r) for r in self.hull_table],
            "hull_fit": list(self.hull_fit) if self.hull_fit else None,
            "p3_table": [list(r) for r in self.p3_table],
            "p2_rows": [list(r) for r in self.p2_rows],
            "p2_fit": list(self.p2_fit) if self.p2_fit else None,
            "witnesses": len(self.witnesses),
        }


def growth_audit(r_max: int, zs, lengths: Lengths | None = None,
                 dev: Development | None = None) -> BranchingAudit:
    """Tabulate ``max_z |C_z^r|`` for ``r = 1..r_max`` over the elements ``zs``."""
    lengths = lengths or default_lengths()
    best = [0] * (r_max + 1)
    for z in zs:
        h = hull(z, dev)
        for r in range(1, r_max + 1):
            best[r] = max(best[r], len(three_paths(z, r, lengths, h)))
    audit = BranchingAudit()
    audit.p1_table = [(r, best[r]) for r in range(1, r_max + 1)]
    audit.p1_fit = polyfit_loglog(audit.p1_table)
    return audit


def hull_growth(words, r_max: int, dev: Development | None = None) -> list:
    """Max number of reduced-envelope vertices within ``r`` of the origin.

    For each target word the geodesic from the base vertex is used; the
    distance is the length in the cover.
    """
    dev = dev or _DEV
    best = [0] * (r_max + 1)
    for w in words:
        p = vertex_point(dev.base)
        env = ee.reduced(ee.geodesic(p, vertex_point(dev.locate(w))))
        vs = ee.envelope_vertices(env, near=(p, float(r_max)))
        ds = sorted(distance(p, vertex_point(v)) for v in vs)
        for r in range(1, r_max + 1):
            best[r] = max(best[r], sum(1 for d in ds if d <= r + 1e-7))
    return [(r, best[r]) for r in range(1, r_max + 1)]


# ---------------------------------------------------------------- flat triangles

_KINDS = ("a", "b", "c")


def _line_kinds(p, q) -> set:
    """Lattice line kinds through both points (empty if none)."""
    out = set()
    if p[1] == q[1]:
        out.add("a")
    if p[0] == q[0]:
        out.add("b")
    if p[0] - p[1] == q[0] - q[1]:
        out.add("c")
    return out


def is_flat_triangle(p, q, s) -> bool:
    """Three lattice points spanning a simplicial triangle of a flat, or a single point."""
    if p == q == s:
        return True
    if len({p, q, s}) < 3:
        return False
    k1, k2, k3 = _line_kinds(p, q), _line_kinds(q, s), _line_kinds(p, s)
    return any(len({x, y, w}) == 3 for x in k1 for y in k2 for w in k3)


def flat_third_vertices(zij) -> list:
    """Points ``x`` completing ``(0,0), x, z`` to a triangle of the flat."""
    p, q = zij
    if p == 0 and q == 0:
        return [(0, 0)]
    if q == 0:
        return [(0, -p), (p, p)]
    if p == 0:
        return [(-q, 0), (q, q)]
    if p == q:
        return [(p, 0), (0, p)]
    return []


def _root_coords(z):
    """Lattice coordinates of ``z`` in the flat through ``e``, or None."""
    stack, ij = z
    return None if stack else tuple(ij)


def flat_triangle_count(z, r: int) -> int:
    ij = _root_coords(z)
    if ij is None:
        return 0
    return sum(1 for x in flat_third_vertices(ij) if int(flat_length(*x)) <= r)


def flat_triangle_brute(z, r: int) -> int:
    """Direct enumeration over lattice points of the flat through ``e``."""
    ij = _root_coords(z)
    if ij is None:
        return 0
    n = 3 * r + 2
    ii, jj = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    lens = flat_length(ii, jj)
    count = 0
    for i, j in zip(ii[lens <= r], jj[lens <= r]):
        if is_flat_triangle((0, 0), (int(i), int(j)), ij):
            count += 1
    return count


def flat_triangle_census(zs, r_max: int) -> list:
    """Rows ``(r, max_z count)`` for ``r = 0..r_max``."""
    return [(r, max((flat_triangle_count(z, r) for z in zs), default=0)) for r in range(r_max + 1)]


# ---------------------------------------------------------------- retractions


@dataclass
class RetractWitness:
    x: tuple
    z: tuple
    corners: tuple  # (s_a, s_b, s_c) as normal forms
    u: tuple
    v: tuple
    w: tuple
    a: tuple
    b: tuple
    c: tuple
    point: bool

    def replays(self) -> bool:
        b_inv, c_inv = nf_inverse(self.b), nf_inverse(self.c)
        return (nf_multiply(nf_multiply(b_inv, self.u), self.a) == self.x
                and nf_multiply(nf_multiply(c_inv, self.w), self.a) == self.z)

    def legs(self) -> list:
        """The three legs with their targets."""
        b_inv, c_inv = nf_inverse(self.b), nf_inverse(self.c)
        out = []
        for t in ((b_inv, self.u, self.a), (c_inv, self.v, self.b), (c_inv, self.w, self.a)):
            path = ThreePath(*t)
            out.append((path, path.target))
        return out


def _vertex_nf(flat, i, j):
    return normal_form(flat.word_of(i, j))


def _common_vertex(pt: Point, envs, search: int = 3):
    """A lattice vertex near ``pt`` contained in every envelope."""
    pt = normalize(pt)
    cands = []
    if pt.band:
        # corners of the nearby squares on both sides of the band
        for tau in sorted(range(math.floor(pt.y) - search, math.ceil(pt.y) + search + 1),
                          key=lambda t: (abs(t - pt.y), t)):
            for side in band_sides(pt.piece):
                x, y = side.at(tau)
                cands.append((side.flat, int(round(x)), int(round(y))))
    else:
        cx, cy = pt.x, pt.y
        box = [(i, j) for i in range(math.floor(cx) - search, math.ceil(cx) + search + 1)
               for j in range(math.floor(cy) - search, math.ceil(cy) + search + 1)]
        box.sort(key=lambda ij: (abs(ij[0] - cx) + abs(ij[1] - cy), ij))
        cands = [(pt.piece, i, j) for i, j in box]
    for v in cands:
        if all(e.contains(vertex_point(v)) for e in envs):
            return v
    return None


def retract_triangle(x, z, dev: Development | None = None) -> RetractWitness:
    """Retraction witness for the triangle spanned by ``x`` and ``z``."""
    dev = dev or _DEV
    A = vertex_point(dev.base)
    B = vertex_point(dev.locate(nf_word(nf_inverse(x))))
    C = vertex_point(dev.locate(nf_word(nf_inverse(z))))
    sides = [ee.geodesic(A, B), ee.geodesic(B, C), ee.geodesic(A, C)]
    try:
        res = ee.triangle_reduce(A, B, C, sides)
    except LemmaViolation as exc:
        raise RetractFailure(str(exc)) from exc
    if isinstance(res, ee.TripleIntersection):
        envs = [ee.reduced(g) for g in sides]
        v = _common_vertex(res.witness, envs)
        if v is None:
            raise RetractFailure("no common vertex near the triple intersection")
        s = _vertex_nf(*v)
        corners = (s, s, s)
        point = True
    else:
        flat = res.flat
        # corners of the residual triangle nearest to A, B, C respectively
        lat = [(int(round(px)), int(round(py))) for px, py in res.corners]
        ends = [(A.x, A.y), (B.x, B.y), (C.x, C.y)]
        order = []
        for ex, ey in ends:
            k = min(range(3), key=lambda m: (lat[m][0] - ex) ** 2 + (lat[m][1] - ey) ** 2)
            order.append(lat[k])
        if len(set(order)) != 3:
            raise RetractFailure("residual corners do not match the triangle vertices")
        corners = tuple(_vertex_nf(flat, i, j) for i, j in order)
        point = False
    sa, sb, sc = corners
    a = nf_inverse(sa)
    b = nf_multiply(nf_inverse(sb), nf_inverse(x))
    c = nf_multiply(nf_inverse(sc), nf_inverse(z))
    u = nf_multiply(nf_inverse(sb), sa)
    v = nf_multiply(nf_inverse(sc), sb)
    w = nf_multiply(nf_inverse(sc), sa)
    return RetractWitness(x, z, corners, u, v, w, a, b, c, point)


def check_witness(wit: RetractWitness, lengths: Lengths, dev: Development | None = None) -> list:
    """Failed conditions of a witness (empty when valid)."""
    bad = []
    if not wit.replays():
        bad.append("replay")
    r = lengths(wit.x)
    for k, (path, target) in enumerate(wit.legs()):
        if not is_member(path, target, r, lengths, HullTest(target, dev)):
            bad.append(f"leg{k}")
    return bad


def retract_audit(pairs, lengths: Lengths | None = None,
                  dev: Development | None = None) -> BranchingAudit:
    """Run the retraction on every ``(x, z)`` pair; raises on the first failure."""
    lengths = lengths or default_lengths()
    audit = BranchingAudit()
    for x, z in pairs:
        wit = retract_triangle(x, z, dev)
        bad = check_witness(wit, lengths, dev)
        if bad:
            raise RetractFailure(f"{nf_word(x)}, {nf_word(z)}: {', '.join(bad)}")
        audit.witnesses.append(wit)
        audit.p2_rows.append((lengths(x), lengths(wit.u)))
    audit.p2_fit = fit_p2(audit.p2_rows)
    return audit


def fit_p2(rows) -> tuple[float, float, int]:
    """Smallest-slope line above the per-length maxima of ``|u|``.

    Returns ``(slope, intercept, degree)``; the degree is 0 when the
    maxima do not grow.
    """
    top: dict = {}
    for n, m in rows:
        top[n] = max(top.get(n, 0), m)
    xs = sorted(top)
    if len(xs) >= 2:
        slope = max(0.0, float(np.polyfit(xs, [top[n] for n in xs], 1)[0]))
    else:
        slope = 0.0
    icpt = max((top[n] - slope * n for n in xs), default=0.0)
    return slope, float(icpt), int(slope > 1e-9)


# ---------------------------------------------------------------- convolution norms


@dataclass
class RdEstimate:
    r: int
    R: int
    lower_bound: float
    power_bound: float
    iterations: int
    converged: bool = True
    vector: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"r": self.r, "R": self.R, "lower_bound": self.lower_bound,
                "power_bound": self.power_bound, "iterations": self.iterations,
                "converged": self.converged}


_BALLS: dict = {}


def shared_ball(radius: int) -> Ball:
    if radius > _max_radius():
        raise ResourceLimitError(
            f"ball({radius}) exceeds the radius cap {_max_radius()} (WISERD_MAX_BALL_RADIUS)")
    b = _BALLS.get("ball")
    if b is None:
        b = Ball(radius)
        _BALLS["ball"] = b
    elif b.radius < radius:
        b.extend(radius)
    return b


def product_table(ball: Ball, r: int, R: int) -> np.ndarray:
    """``T[x, y]`` = index of ``x*y`` for ``x`` in B_r, ``y`` in B_R."""
    rmul = ball.rmul_table()
    nx, ny = ball.size(r), ball.size(R)
    T = np.empty((nx, ny), dtype=np.int64)
    T[:, 0] = np.arange(nx)
    for y in range(1, ny):
        T[:, y] = rmul[T[:, ball.parent[y]], ball.last_letter[y]]
    if (T < 0).any():
        raise PreconditionError("ball too small for the requested products")
    return T


def convolution_operator(ball: Ball, f: np.ndarray, r: int, R: int):
    """Sparse matrix of ``g -> f*g`` from B_R to B_{r+R}."""
    T = product_table(ball, r, R)
    nx, ny = T.shape
    rows = T.ravel()
    cols = np.tile(np.arange(ny), nx)
    data = np.repeat(f[:nx], ny)
    keep = data != 0
    return sp.csr_matrix((data[keep], (rows[keep], cols[keep])), shape=(ball.size(r + R), ny))


def convolve(ball: Ball, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Exact ``f*g`` for ``f, g`` indexed by ball elements (radius permitting)."""
    rf = _support_radius(ball, f)
    rg = _support_radius(ball, g)
    if rf + rg > ball.radius:
        raise ResourceLimitError("product support leaves the ball")
    out = np.zeros(ball.size(ball.radius))
    op = convolution_operator(ball, _pad(f, ball.size(rf)), rf, rg)
    res = op @ _pad(g, ball.size(rg))
    out[: res.shape[0]] = res
    return out


def _pad(v, n):
    out = np.zeros(n)
    m = min(n, len(v))
    out[:m] = v[:m]
    return out


def _support_radius(ball: Ball, v: np.ndarray) -> int:
    nz = np.nonzero(v)[0]
    if len(nz) == 0:
        return 0
    return ball.lengths[int(nz.max())]


def test_function(ball: Ball, r: int, kind: str = "characteristic", seed: int = 0) -> np.ndarray:
    n = ball.size(r)
    if kind == "characteristic":
        return np.ones(n)
    if kind == "random":
        rng = np.random.default_rng(seed)
        v = rng.random(n)
        return v / np.linalg.norm(v)
    if kind == "delta":
        v = np.zeros(n)
        v[0] = 1.0
        return v
    raise PreconditionError(f"unknown test function {kind!r}")


test_function.__test__ = False  # keep pytest from collecting it


def rd_constant_estimate(r: int, R: int, method: str = "powerIteration", f_kind: str = "characteristic",
                         seed: int = 0, tol: float = 1e-8, max_iter: int = 20000,
                         start: np.ndarray | None = None) -> RdEstimate:
    """Convolution-norm ratios for ``f`` supported on B_r acting on B_R.

    ``lower_bound`` is the characteristic-function quotient.  With
    ``method="powerIteration"`` the largest singular value of the
    convolution operator, divided by the l2 norm of ``f``, is computed by
    power iteration on the normal operator.  ``start`` warm-starts the
    iteration (shorter vectors are zero-padded).
    """
    if r < 0 or R < 0:
        raise PreconditionError("radii must be nonnegative")
    if method not in ("characteristic", "powerIteration"):
        raise PreconditionError(f"unknown method {method!r}")
    ball = shared_ball(r + R)
    nr, nR = ball.size(r), ball.size(R)
    chi = convolution_operator(ball, np.ones(nr), r, R)
    lower = float(np.linalg.norm(chi @ np.ones(nR)) / math.sqrt(nr * nR))
    if method == "characteristic":
        return RdEstimate(r, R, lower, lower, 0)
    f = test_function(ball, r, f_kind, seed)
    op = chi if f_kind == "characteristic" else convolution_operator(ball, f, r, R)
    fn = float(np.linalg.norm(f))
    x = np.ones(nR) if start is None else _pad(start, nR)
    x /= np.linalg.norm(x)
    lam = float(np.dot(op @ x, op @ x))
    for it in range(1, max_iter + 1):
        y = op.T @ (op @ x)
        ny_ = float(np.linalg.norm(y))
        if ny_ == 0.0:
            return RdEstimate(r, R, lower, 0.0, it, vector=x)
        x = y / ny_
        new = float(np.dot(op @ x, op @ x))
        if abs(new - lam) <= tol * max(new, 1e-300):
            lam = max(lam, new)
            return RdEstimate(r, R, lower, math.sqrt(lam) / fn, it, vector=x)
        lam = max(lam, new)
    raise NonConvergenceError(f"power iteration did not converge in {max_iter} steps",
                              best=RdEstimate(r, R, lower, math.sqrt(lam) / fn, max_iter, False, x))


def rd_scan(r_max: int, cap: int | None = None, f_kind: str = "characteristic",
            seed: int = 0) -> tuple[list, bool]:
    """One row per ``r = 1..r_max`` at the largest ``R`` with ``r + R <= cap``.

    Returns ``(rows, monotone)``; ``monotone`` records that the power
    bound never decreased while ``R`` grew from 0.
    """
    cap = _max_radius() if cap is None else cap
    if r_max < 1:
        raise PreconditionError("r_max must be at least 1")
    if r_max > cap:
        raise ResourceLimitError(f"r_max={r_max} exceeds the radius cap {cap}")
    rows = []
    monotone = True
    for r in range(1, r_max + 1):
        prev = None
        est = None
        vec = None
        for R in range(0, cap - r + 1):
            est = rd_constant_estimate(r, R, f_kind=f_kind, seed=seed, start=vec)
            vec = est.vector
            if prev is not None and est.power_bound < prev - 1e-9 * prev:
                monotone = False
            prev = est.power_bound
        ball = shared_ball(cap)
        rows.append({"r": r, "R": est.R, "ball_size": ball.size(r),
                     "lower_bound": est.lower_bound, "power_bound": est.power_bound,
                     "young_ceiling": math.sqrt(ball.size(r))})
    return rows, monotone


def slope_table(rows) -> list:
    """Local log-log slopes of the power bound between consecutive radii."""
    out = []
    for a, b in zip(rows, rows[1:]):
        out.append((b["r"], math.log(b["power_bound"] / a["power_bound"]) / math.log(b["r"] / a["r"])))
    return out


def random_word(rng: random.Random, n: int) -> str:
    from .words import ALPHABET, free_reduce

    w = ""
    while len(w) < n:
        w = free_reduce(w + rng.choice(ALPHABET))
    return w
