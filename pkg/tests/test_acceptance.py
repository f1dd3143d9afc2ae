"""Acceptance criteria, one test per criterion.

Each test registers a PASS/FAIL line printed in the terminal summary.  Two
criteria are stated at scales this machine cannot reach; they run at the
stated scale, fail with the resource error, and are followed by a companion
test (suffix ``b``) at the largest feasible scale.
"""
from __future__ import annotations

import math
import random
import subprocess
import sys
import time

import pytest

from conftest import record
from wiserd import envelope_engine as ee
from wiserd import rd_lab as rl
from wiserd.cover_builder import build_patch, chromosome_census
from wiserd.development import Development
from wiserd.errors import ResourceLimitError
from wiserd.geometry import vertex_point
from wiserd.group_core import (Ball, DistinctCertified, Equal, RELATORS, area_bound_for,
                               equal_in_G, normal_form)
from wiserd.link_graph import TWO_PI, angle_identity_error, build_link
from wiserd.words import free_reduce, inverse

pytestmark = pytest.mark.slow


# ---------------------------------------------------------------- 1


def test_c01_link_census():
    t = time.perf_counter()
    L = build_link()
    census = L.census()
    girth = L.girth()
    dt = time.perf_counter() - t
    ok = (len(L.vertices) == 10 and len(L.edges) == 16 and girth == TWO_PI
          and girth.coefficients == (0, 4) and census.get("Bold") == 1
          and census.get("NonBoldPiPi") == 1 and census.get("NonBoldHalfHalfPi") == 4
          and census.get("NonBoldFourHalves") == 1 and dt < 1.0)
    record(1, "link census 10/16, girth 2pi, 1 bold + 1/4/1 non-bold, < 1 s", ok,
           f"{census}, {dt:.3f}s")
    assert ok


# ---------------------------------------------------------------- 2


def test_c02_cycle_lemma():
    t = time.perf_counter()
    res = build_link().lemma_audit(8)
    dt = time.perf_counter() - t
    ok = res["failures"] == 0 and res["pairs_checked"] > 0 and dt < 10
    record(2, "far pairs lie on a unique minimal cycle of length 2pi+2u or 2pi+2v, < 10 s", ok,
           f"{res['pairs_checked']} pairs, {res['lengths']}, {dt:.2f}s")
    assert ok


# ---------------------------------------------------------------- 3


def test_c03_angle_identity():
    err = angle_identity_error()
    record(3, "arccos(7/8) + 2 arccos(1/4) = pi within 1e-12", err < 1e-12, f"error {err:.2e}")
    assert err < 1e-12


# ---------------------------------------------------------------- 4


def _equal_word(w: str, rng: random.Random) -> str:
    r = rng.choice(RELATORS)
    k = rng.randint(0, len(w))
    x = rng.choice("aAbBcCsStT")
    return free_reduce(w[:k] + x + r + inverse(x) + w[k:])


def test_c04_cross_oracle_balls():
    t = time.perf_counter()
    B = Ball(6)
    ball_sizes = [B.size(r) for r in range(7)]
    patch_sizes = [build_patch(r).n_vertices for r in range(7)]
    rng = random.Random(2024)
    contradictions = 0
    counts = {"Equal": 0, "DistinctCertified": 0, "UnknownWithinBound": 0}
    for _ in range(1000):
        w1 = rl.random_word(rng, rng.randint(0, 8))
        w2 = _equal_word(w1, rng) if rng.random() < 0.5 else rl.random_word(rng, rng.randint(0, 8))
        v = equal_in_G(w1, w2, area_bound_for(w1, w2))
        counts[type(v).__name__] += 1
        same = normal_form(w1) == normal_form(w2)
        if isinstance(v, Equal) and (not same or not v.witness.replay()):
            contradictions += 1
        if isinstance(v, DistinctCertified) and same:
            contradictions += 1
        back = equal_in_G(w2, w1, area_bound_for(w2, w1))
        if {type(v), type(back)} == {Equal, DistinctCertified}:
            contradictions += 1
    dt = time.perf_counter() - t
    ok = ball_sizes == patch_sizes and contradictions == 0 and dt < 300
    record(4, "ball(r) = patch(r) for r <= 6; no Equal/Distinct contradiction on 1000 pairs, < 5 min",
           ok, f"sizes {ball_sizes}, verdicts {counts}, {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 5


def test_c05_chromosomes():
    t = time.perf_counter()
    c = chromosome_census(8)
    dt = time.perf_counter() - t
    ok = c["unclassifiable"] == 0 and set(c["counts"]) <= {"Colle", "TypeU", "TypeV"}
    record(5, "patch(8): every interior intersecting band pair is Colle/TypeU/TypeV", ok,
           f"{c['interior_vertices']} interior vertices, {c['counts']}, {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 6


def _triangle_checks(A, B, C, sides):
    out = [ee.check_frizes(A, B, C), ee.check_midpoint_balls(A, B, C, sides)]
    try:
        res = ee.triangle_reduce(A, B, C, sides)
        out.append(isinstance(res, (ee.TripleIntersection, ee.ResidualTriangle)))
    except Exception:
        out.append(False)
    try:
        out.append(ee.triangle_reduce_saturated(A, B, C, sides) is not None)
    except Exception:
        out.append(False)
    return out


def _random_triples(rng: random.Random):
    while True:
        a = rl.random_word(rng, rng.randint(0, 4))
        b = free_reduce(a + rl.random_word(rng, rng.randint(0, 6)))
        c = free_reduce(a + rl.random_word(rng, rng.randint(0, 6)))
        yield a, b, c


def test_c06_triangle_suite():
    """Triples whose sides pass through a centromere are flagged and kept
    out of the verdict; they are still checked and reported separately."""
    t = time.perf_counter()
    dev = Development()
    B2 = Ball(2)
    core = [("", B2.words[i], B2.words[j]) for i in range(len(B2)) for j in range(len(B2))]
    passed = [0, 0, 0, 0]
    counted = flagged = flagged_ok = 0
    failures = []

    def run(triple) -> bool:
        nonlocal counted, flagged, flagged_ok
        A, B, C = (vertex_point(dev.locate(w)) for w in triple)
        sides = [ee.geodesic(A, B), ee.geodesic(B, C), ee.geodesic(A, C)]
        res = _triangle_checks(A, B, C, sides)
        if any(ee.centromere_contacts(g) for g in sides):
            flagged += 1
            flagged_ok += all(res)
            return False
        counted += 1
        for k, ok in enumerate(res):
            passed[k] += ok
        if not all(res):
            failures.append((triple, res))
        return True

    for triple in core:
        run(triple)
    n_core = counted
    gen = _random_triples(random.Random(6))
    while counted < n_core + 500:
        run(next(gen))
    dt = time.perf_counter() - t
    ok = all(p == counted for p in passed) and dt < 1800
    record(6, "frizes / midpoint balls / reduction / saturated witness on core + 500 triples, < 30 min",
           ok, f"{counted} triples ({n_core} core), passed {passed}; {flagged} centromere-flagged "
           f"triples excluded, {flagged_ok} of them pass anyway; {dt:.0f}s")
    assert ok, failures[:5]


# ---------------------------------------------------------------- 7


def test_c07_growth_bounds():
    t = time.perf_counter()
    rng = random.Random(7)
    words = [rl.random_word(rng, 12) for _ in range(4)]
    hull_tab = rl.hull_growth(words, 8)
    hull_exp = rl.polyfit_loglog(hull_tab)[0]
    B = Ball(5)
    lengths = rl.Lengths(B)
    zs = [B.nfs[i] for i in range(B.size(2))]
    audit = rl.growth_audit(8, zs, lengths)
    p1_exp = audit.p1_fit[0]
    flat_zs = [B.nfs[i] for i in range(len(B)) if not B.nfs[i][0]]
    p3 = rl.flat_triangle_census(flat_zs, 8)
    counts = [c for r, c in p3 if r >= 1]
    # beyond the saturation radius the table is flat
    sat = next(r for r in range(1, 9) if len(set(c for rr, c in p3 if rr >= r)) == 1)
    ok = hull_exp <= 3.5 and p1_exp <= 6.5 and sat < 8
    record(7, "growth exponents: hull <= 3.5, max |C_z^r| <= 6.5; flat triangles constant, r = 1..8", ok,
           f"hull {hull_exp:.2f} {hull_tab}, p1 {p1_exp:.2f} {audit.p1_table}, "
           f"p3 {counts} (constant from r={sat}), {time.perf_counter() - t:.0f}s")
    assert ok


# ---------------------------------------------------------------- 8


def test_c08_three_paths_stated_scale():
    B = Ball(6)
    zs = [B.nfs[i] for i in range(len(B))]
    try:
        res = rl.three_path_audit(zs, range(1, 7), B, rl.Lengths(B))
    except ResourceLimitError as exc:
        record(8, "three_paths = exhaustive factorization for all z in ball(6), r <= 6", False,
               f"resource limit: {exc}")
        raise
    ok = res["mismatches"] == 0
    record(8, "three_paths = exhaustive factorization for all z in ball(6), r <= 6", ok, str(res))
    assert ok


def test_c08b_three_paths_feasible_scale():
    t = time.perf_counter()
    B = Ball(6)
    lengths = rl.Lengths(B)
    zs = [B.nfs[i] for i in range(B.size(2))]
    cases = mism = 0
    for z in zs:
        radii = [r for r in (1, 2) if lengths(z) >= r] or [1]
        res = rl.three_path_audit([z], radii, B, lengths)
        cases += res["cases"]
        mism += res["mismatches"]
    ok = mism == 0
    record(8, "three_paths = exhaustive factorization, z in ball(2), r <= 2 where the oracle fits ball(6)",
           ok, f"{cases} cases, {mism} mismatches, {time.perf_counter() - t:.0f}s", "b")
    assert ok


# ---------------------------------------------------------------- 9

# power bounds at the largest R with r + R <= 7, frozen from a reference run
FROZEN_RD = {1: 2.481956626987774, 2: 3.8832624248173477, 3: 4.518138570798789,
             4: 3.9678128639510954, 5: 2.9256637622470993}


def _rd_grid(r_max: int, R_max: int):
    bad = []
    for r in range(r_max + 1):
        bad += _rd_grid_row(r, R_max)
    return bad


def test_c09_rd_probe_stated_scale():
    try:
        bad = _rd_grid(5, 8)
    except ResourceLimitError as exc:
        record(9, "RD probe properties for r <= 5, R <= 8", False, f"resource limit: {exc}")
        raise
    record(9, "RD probe properties for r <= 5, R <= 8", not bad, str(bad))
    assert not bad


def test_c09b_rd_probe_feasible_scale():
    t = time.perf_counter()
    bad = [x for r in range(6) for x in _rd_grid_row(r, 7 - r)]
    rows, mono = rl.rd_scan(5, cap=7)
    slopes = rl.slope_table(rows)
    frozen = all(abs(row["power_bound"] - FROZEN_RD[row["r"]]) <= 1e-6 * FROZEN_RD[row["r"]]
                 for row in rows)
    ok = not bad and mono and frozen and len(slopes) == 4
    record(9, "RD probe properties for r + R <= 7; slope table frozen", ok,
           f"slopes {[(r, round(s, 4)) for r, s in slopes]}, {time.perf_counter() - t:.0f}s", "b")
    assert ok


def _rd_grid_row(r: int, R_max: int):
    bad = []
    prev = None
    vec = None
    for R in range(R_max + 1):
        e = rl.rd_constant_estimate(r, R, start=vec)
        vec = e.vector
        young = math.sqrt(rl.shared_ball(r + R).size(r))
        if e.lower_bound > e.power_bound + 1e-12 or e.power_bound > young + 1e-12:
            bad.append((r, R))
        if prev is not None and e.power_bound < prev * (1 - 1e-9):
            bad.append((r, R, "monotone"))
        prev = e.power_bound
    return bad


# ---------------------------------------------------------------- 10


def test_c10_report_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"report{k}.json"
        proc = subprocess.run([sys.executable, "-m", "wiserd.cli_report", "report", "--seed", "3",
                               "--out", str(path)], capture_output=True, timeout=900)
        outs.append((proc.returncode, path.read_bytes()))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    record(10, "two report runs with the same config and seed are byte-identical", ok,
           f"exit codes {[o[0] for o in outs]}, {len(outs[0][1])} bytes")
    assert ok
