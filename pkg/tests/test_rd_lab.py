import math

import numpy as np
import pytest

from wiserd import rd_lab as rl
from wiserd.errors import DegenerateDataError, ResourceLimitError
from wiserd.group_core import IDENTITY, Ball, normal_form


@pytest.fixture(scope="module")
def lengths(ball5):
    return rl.Lengths(ball5)


def test_identity_family_contains_trivial_path(lengths):
    for r in (1, 3):
        fam = rl.three_paths(IDENTITY, r, lengths)
        assert rl.ThreePath(IDENTITY, IDENTITY, IDENTITY) in fam.members


def test_members_are_near_geodesic(lengths):
    z = normal_form("sab")
    fam = rl.three_paths(z, 2, lengths)
    assert len(fam) > 0
    for p in fam.members:
        assert p.target == z
        assert lengths(p.a1) + lengths(p.a2) + lengths(p.a3) <= 8 * lengths(z)
        assert lengths(p.a1) <= 6 and lengths(p.a2) <= 2


def test_three_paths_match_oracle(ball5, lengths):
    for w in ("", "a", "s", "tb", "cS"):
        z = normal_form(w)
        h = rl.hull(z)
        for r in (1,):
            if lengths(z) >= r or not w:
                assert rl.three_paths(z, r, lengths, h).members == rl.brute_force_three_paths(
                    z, r, ball5, lengths, h)


def test_nesting_when_capped(lengths):
    z = normal_form("tAsb")
    h = rl.hull(z)
    fams = [rl.three_paths(z, r, lengths, h).members for r in (1, 2, 3)]
    assert fams[0] <= fams[1] <= fams[2]


def test_oracle_refuses_small_ball(lengths):
    with pytest.raises(ResourceLimitError):
        rl.brute_force_three_paths(normal_form("a"), 3, Ball(2), lengths)
    with pytest.raises(ResourceLimitError):
        rl.three_path_audit([normal_form("aaa")], [3], Ball(2), lengths)


def test_hull_membership_agrees(lengths):
    z = normal_form("sBt")
    h = rl.hull(z)
    test = rl.HullTest(z)
    assert all(g in test for g in list(h)[:20])
    assert IDENTITY in h and z in h


def test_polyfit_exact_and_constant():
    e, k, res = rl.polyfit_loglog([(r, 5 * r ** 3) for r in range(1, 9)])
    assert e == pytest.approx(3.0, abs=1e-9) and k == pytest.approx(5.0)
    assert rl.polyfit_loglog([(r, 7) for r in range(1, 5)])[0] == pytest.approx(0.0, abs=1e-12)


def test_polyfit_noisy():
    rng = np.random.default_rng(3)
    data = [(r, 2 * r ** 2.5 * math.exp(rng.normal(0, 0.05))) for r in range(1, 30)]
    assert abs(rl.polyfit_loglog(data)[0] - 2.5) < 0.1


def test_polyfit_degenerate():
    with pytest.raises(DegenerateDataError):
        rl.polyfit_loglog([(1, 1), (2, 2)])
    with pytest.raises(DegenerateDataError):
        rl.polyfit_loglog([(1, 1), (2, 0), (3, 1)])


def test_flat_triangles():
    z = normal_form("aaa")
    assert rl.flat_triangle_count(normal_form("s"), 5) == 0
    for r in range(6):
        assert rl.flat_triangle_count(z, r) == rl.flat_triangle_brute(z, r)
    assert rl.flat_triangle_count(IDENTITY, 0) == 1
    assert rl.is_flat_triangle((0, 0), (3, 0), (3, 3))
    assert not rl.is_flat_triangle((0, 0), (3, 0), (3, 2))


def test_retract_point_and_flat_cases(lengths):
    audit = rl.retract_audit([(normal_form("a"), normal_form("ab")),
                              (normal_form("sa"), normal_form("b")),
                              (normal_form("AAAAAAAA"), normal_form("CCCC"))], lengths)
    assert len(audit.witnesses) == 3
    assert all(w.replays() for w in audit.witnesses)
    # a single face is its own residual triangle
    assert not audit.witnesses[0].point
    assert audit.witnesses[1].point
    assert not audit.witnesses[2].point


def test_convolution_unit_and_associativity():
    ball = rl.shared_ball(4)
    rng = np.random.default_rng(0)
    n1 = ball.size(1)
    f, g, h = (rng.random(n1) for _ in range(3))
    delta = np.zeros(1)
    delta[0] = 1.0
    assert np.allclose(rl.convolve(ball, delta, g)[:n1], g)
    assert np.allclose(rl.convolve(ball, f, delta)[:n1], f)
    fg = rl.convolve(ball, f, g)[: ball.size(2)]
    gh = rl.convolve(ball, g, h)[: ball.size(2)]
    left = rl.convolve(ball, fg, h)
    right = rl.convolve(ball, f, gh)
    assert np.allclose(left, right)


def test_delta_estimate_is_one():
    e = rl.rd_constant_estimate(0, 3, f_kind="delta")
    assert e.power_bound == pytest.approx(1.0)
    assert rl.rd_constant_estimate(0, 2).lower_bound == pytest.approx(1.0)


def test_estimate_properties_small():
    prev = None
    vec = None
    for R in range(4):
        e = rl.rd_constant_estimate(2, R, start=vec)
        vec = e.vector
        assert e.lower_bound <= e.power_bound + 1e-12
        assert e.power_bound <= math.sqrt(83) + 1e-12
        if prev is not None:
            assert e.power_bound >= prev * (1 - 1e-9)
        prev = e.power_bound


def test_random_f_young_ceiling():
    e = rl.rd_constant_estimate(2, 2, f_kind="random", seed=5)
    ball = rl.shared_ball(4)
    f = rl.test_function(ball, 2, "random", 5)
    assert e.power_bound <= np.abs(f).sum() / np.linalg.norm(f) + 1e-12


def test_radius_cap(monkeypatch):
    monkeypatch.setenv("WISERD_MAX_BALL_RADIUS", "3")
    with pytest.raises(ResourceLimitError):
        rl.rd_constant_estimate(2, 2)


def test_hull_growth_small():
    tab = rl.hull_growth(["sasa"], 3)
    assert [r for r, _ in tab] == [1, 2, 3]
    assert all(a <= b for (_, a), (_, b) in zip(tab, tab[1:]))
