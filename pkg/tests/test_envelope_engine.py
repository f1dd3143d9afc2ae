import random

import pytest

from wiserd import envelope_engine as ee
from wiserd.development import Development
from wiserd.errors import PreconditionError
from wiserd.geometry import distance, vertex_point
from wiserd.rd_lab import random_word


@pytest.fixture(scope="module")
def dev():
    return Development()


def pt(dev, w):
    return vertex_point(dev.locate(w))


def test_envelope_contains_geodesic(dev):
    rng = random.Random(2)
    for _ in range(8):
        g = ee.geodesic(pt(dev, ""), pt(dev, random_word(rng, rng.randint(1, 7))))
        h = ee.reduced(g)
        for p in g.samples(6):
            assert h.contains(p)


def test_point_envelope(dev):
    p = pt(dev, "")
    g = ee.geodesic(p, p)
    h = ee.reduced(g)
    assert ee.envelope_vertices(h) == [(p.piece, 0, 0)]


def test_unreduced_vertices_rejected(dev):
    g = ee.geodesic(pt(dev, ""), pt(dev, "a"))
    with pytest.raises(PreconditionError):
        ee.envelope_vertices(ee.analytic_envelope(g))


def test_band_crossing_envelope(dev):
    g = ee.geodesic(pt(dev, ""), pt(dev, "sas"))
    assert g.bands
    s = ee.reduced(g).summary()
    assert s["pieces"].get("band:crossed", 0) >= 1


def test_saturation_is_larger(dev):
    g = ee.geodesic(pt(dev, ""), pt(dev, "tasB"))
    red, sat = ee.reduced(g), ee.saturated_reduced(g)
    for p in g.samples(5):
        assert red.contains(p) and sat.contains(p)
    assert len(sat.flats) >= len(red.flats)


def test_vertices_near_origin(dev):
    o = pt(dev, "")
    env = ee.reduced(ee.geodesic(o, pt(dev, "sAtb")))
    near = ee.envelope_vertices(env, near=(o, 2.0))
    allv = ee.envelope_vertices(env)
    keys = {(f.uid, i, j) for f, i, j in allv}
    assert near and all((f.uid, i, j) in keys for f, i, j in near)
    assert all(distance(o, vertex_point(v)) <= 2.0 + 1e-7 for v in near)


def test_flat_triangle_has_residual(dev):
    res = ee.triangle_reduce(pt(dev, ""), pt(dev, "aaaaaaaa"), pt(dev, "cccc"))
    assert isinstance(res, ee.ResidualTriangle)
    assert sorted(tuple(round(c) for c in x) for x in res.corners) == [(0, 0), (4, 0), (4, 4)]


def test_triangle_lemmas_random(dev):
    rng = random.Random(7)
    for _ in range(6):
        A = pt(dev, "")
        B, C = (pt(dev, random_word(rng, rng.randint(1, 6))) for _ in range(2))
        assert ee.check_frizes(A, B, C)
        assert ee.check_midpoint_balls(A, B, C)
        assert isinstance(ee.triangle_reduce(A, B, C), (ee.TripleIntersection, ee.ResidualTriangle))
        assert ee.triangle_reduce_saturated(A, B, C) is not None


def test_off_side_witness(dev):
    # the common point lies off all three sides
    res = ee.triangle_reduce(pt(dev, ""), pt(dev, "Asas"), pt(dev, "AAAAB"))
    assert isinstance(res, ee.TripleIntersection)


def test_centromere_flag(dev):
    through = ee.geodesic(pt(dev, "CCaSB"), pt(dev, "CCasttAB"))
    assert ee.centromere_contacts(through)
    assert "geodesic passes through a centromere" in ee.analytic_envelope(through).notes
    assert not ee.centromere_contacts(ee.geodesic(pt(dev, ""), pt(dev, "aaaa")))


def test_residual_between_adjacent_hulls(dev):
    # the two hull covers share an edge; float noise must not leave a sliver
    res = ee.triangle_reduce(pt(dev, ""), pt(dev, "aB"), pt(dev, "cc"))
    assert isinstance(res, ee.ResidualTriangle)
    assert sorted(res.corners) == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
