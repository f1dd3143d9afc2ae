import networkx as nx
import pytest

from wiserd.cover_builder import (TRIANGLES, bands_at, bold_completion_count, build_patch,
                                  chromosome_census, classify_band_pair, classify_pair_at,
                                  detect_bands, detect_flats, flat_disk, singular_locus)
from wiserd.development import Development
from wiserd.errors import PreconditionError
from wiserd.link_graph import build_link


@pytest.fixture(scope="module")
def patch3():
    return build_patch(3)


def test_patch_sizes_match_ball():
    assert [build_patch(r).n_vertices for r in range(4)] == [1, 11, 83, 569]


def test_patch_radius_zero():
    p = build_patch(0)
    assert p.n_vertices == 1 and list(p.edges()) == [] and list(p.faces()) == []


def test_negative_radius():
    with pytest.raises(PreconditionError):
        build_patch(-1)


def test_extracted_link_is_the_link(patch3):
    assert patch3.is_interior(0)
    g = patch3.extracted_link(0)
    ref = nx.MultiGraph()
    for e in build_link().edges:
        ref.add_edge(*e.ends)
    assert nx.is_isomorphic(g, ref)
    assert sorted(tuple(sorted(e)) for e in g.edges()) == sorted(tuple(sorted(e)) for e in ref.edges())


def test_singular_locus(patch3):
    loc = singular_locus(patch3)
    inner = {i for i in range(patch3.n_vertices) if patch3.dist[i] <= 1}
    for (i, ch, j) in loc["singular"] | loc["regular"]:
        if i in inner and j in inner:
            singular = (i, ch, j) in loc["singular"]
            # flat edges meet three or six faces, stable edges two
            assert singular == (ch in "abc")


def test_bands_and_flats(patch3):
    bands = detect_bands(patch3)
    flats = detect_flats(patch3)
    assert bands and flats
    assert all(len(b.squares) > 0 for b in bands)
    assert sum(len(f.triangles) for f in flats) == sum(
        1 for r, _ in patch3.faces() if r in TRIANGLES)


def test_flat_disk_growth():
    f = Development().base[0]
    assert [len(flat_disk(f, k)) for k in (1, 2, 3)] == [6, 24, 54]


def test_bold_completion_unique():
    counts = bold_completion_count()
    assert counts and all(v == 1 for v in counts.values())


def test_six_bands_per_vertex_and_kinds():
    dev = Development()
    v = dev.base
    bands = bands_at(dev, v)
    assert len(bands) == 6
    kinds = [classify_pair_at(dev, v, bands[i], bands[j]) for i in range(6) for j in range(i + 1, 6)]
    assert set(kinds) <= {"Colle", "TypeU", "TypeV"}
    with pytest.raises(PreconditionError):
        classify_pair_at(dev, v, bands[0], bands[0])


def test_band_pair_classification(patch3):
    bands = detect_bands(patch3)
    seen = set()
    for i in range(len(bands)):
        for j in range(i + 1, min(len(bands), i + 6)):
            kind, x = classify_band_pair(bands[i], bands[j], patch3)
            seen.add(kind)
            assert kind in {"Disjoint", "Colle", "TypeU", "TypeV"}
            assert (x is not None) == (kind in {"TypeU", "TypeV"})
    assert "Disjoint" in seen or "Colle" in seen


def test_small_census():
    c = chromosome_census(4)
    assert c["unclassifiable"] == 0
    assert c["interior_vertices"] == 83
    assert set(c["counts"]) == {"Colle", "TypeU", "TypeV"}
    assert c["counts"]["TypeV"] == 8 * 83 and c["counts"]["TypeU"] == 83
