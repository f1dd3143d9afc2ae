import math
from fractions import Fraction

import pytest

from wiserd.errors import PreconditionError
from wiserd.link_graph import (HALF_PI, PI, TWO_PI, U, V, AngleValue, LinkPoint, angle_identity_error,
                               build_link)


@pytest.fixture(scope="module")
def link():
    return build_link()


def test_angle_arithmetic():
    assert U + V + V == PI
    assert float(U) == pytest.approx(math.acos(7 / 8), abs=1e-15)
    assert float(V) == pytest.approx(math.acos(1 / 4), abs=1e-15)
    assert V < HALF_PI < U + V
    assert (TWO_PI + U + U).label() == "2pi+2u"
    assert AngleValue(Fraction(1, 2), 0).scale(2) == V


def test_angle_identity():
    assert angle_identity_error() < 1e-12


def test_shape(link):
    assert len(link.vertices) == 10
    assert len(link.edges) == 16
    assert sum(e.bold for e in link.edges) == 6


def test_girth_and_census(link):
    assert link.girth() == TWO_PI
    assert link.girth().coefficients == (0, 4)
    c = link.census()
    assert c["Bold"] == 1
    assert (c["NonBoldPiPi"], c["NonBoldHalfHalfPi"], c["NonBoldFourHalves"]) == (1, 4, 1)
    assert c["Mixed"] == 12


def test_distances_symmetric(link):
    for g in link.vertices:
        for h in link.vertices:
            p, q = LinkPoint.vertex(g), LinkPoint.vertex(h)
            assert link.distance(p, q) == link.distance(q, p)
    assert link.distance(LinkPoint.vertex("a"), LinkPoint.vertex("a")) == AngleValue()


def test_smallest_cycle_requires_far_points(link):
    with pytest.raises(PreconditionError):
        link.smallest_common_cycle(LinkPoint.vertex("a"), LinkPoint.vertex("a"))


def test_lemma_audit(link):
    res = link.lemma_audit(4)
    assert res["failures"] == 0
    assert set(res["lengths"]) <= {"2pi+2u", "2pi+2v"}


def test_json_roundtrip(link):
    import json
    d = json.loads(json.dumps(link.to_json()))
    assert len(d["edges"]) == 16
