import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from buckleopt import geometry as geo
from buckleopt.errors import DegenerateDomainError, InvalidDomainError
from oracles import brute_force_hull, star_curvature

coeff = st.floats(-0.12, 0.12, allow_nan=False)
stars = st.builds(
    lambda r0, cs: geo.StarShape((0.0, 0.0), r0, tuple(cs)),
    st.floats(0.5, 2.0),
    st.lists(st.tuples(coeff, coeff), min_size=1, max_size=4),
)
polygons = st.integers(3, 12).map(lambda n: geo.regular_polygon(n, 1.0, phase=0.3))
domains = st.one_of(
    stars,
    polygons,
    st.builds(geo.Disk, st.just((0.5, -0.2)), st.floats(0.1, 5.0)),
    st.builds(geo.Rectangle, st.just((0.0, 0.0)), st.floats(0.1, 3.0), st.floats(0.1, 3.0)),
)


def test_basic_quantities(unit_square, unit_disk):
    assert geo.perimeter(unit_square) == pytest.approx(4.0, abs=1e-14)
    assert geo.perimeter(unit_disk) == pytest.approx(2 * math.pi, abs=1e-12)
    assert geo.area(unit_square) == pytest.approx(1.0)
    assert geo.area(unit_disk) == pytest.approx(math.pi)
    assert geo.diameter(unit_square) == pytest.approx(math.sqrt(2))
    assert geo.diameter(geo.Disk((1.0, 1.0), 3.0)) == 6.0


def test_trivial_star_is_disk():
    s = geo.StarShape((0.0, 0.0), 1.0, ((0.0, 0.0), (0.0, 0.0)))
    assert abs(geo.perimeter(s) - 2 * math.pi) < 1e-10
    assert geo.area(s) == pytest.approx(math.pi, rel=1e-10)


@pytest.mark.parametrize("vertices", [((0, 0), (1, 0)), ((0, 0), (1, 1), (2, 2))])
def test_degenerate_polygon_rejected(vertices):
    with pytest.raises(InvalidDomainError):
        geo.Polygon(vertices)


def test_self_intersecting_polygon_rejected():
    with pytest.raises(InvalidDomainError):
        geo.Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))


def test_clockwise_polygon_rejected():
    with pytest.raises(InvalidDomainError):
        geo.Polygon(((0, 0), (0, 1), (1, 1), (1, 0)))


def test_star_with_negative_radius_rejected():
    with pytest.raises(InvalidDomainError):
        geo.StarShape((0.0, 0.0), 0.5, ((0.8, 0.0),))


def test_hull_of_l_shape(l_shape):
    hull = geo.convex_hull(l_shape)
    expected = brute_force_hull(l_shape.vertices)
    assert set(hull.vertices) == expected
    assert len(hull.vertices) == 5
    assert geo.perimeter(hull) < geo.perimeter(l_shape)


def test_hull_of_convex_pentagon_is_idempotent():
    p = geo.regular_polygon(5, 1.0)
    hull = geo.convex_hull(p)
    assert np.allclose(sorted(hull.vertices), sorted(p.vertices), atol=1e-14)


def test_hull_of_collinear_points_is_degenerate():
    with pytest.raises(DegenerateDomainError):
        geo.convex_hull(geo._polygon_unchecked(np.array([[0, 0], [1, 0], [2, 0.0]])))


def test_is_convex(unit_square, l_shape):
    assert geo.is_convex(unit_square)
    assert not geo.is_convex(l_shape)


@pytest.mark.parametrize("amp", [0.05, 0.1, 0.2])
def test_is_convex_matches_curvature_oracle(amp):
    coeffs = ((0.0, 0.0), (0.0, 0.0), (amp, 0.0))
    star = geo.StarShape((0.0, 0.0), 1.0, coeffs)
    theta = 2 * np.pi * np.arange(4096) / 4096
    assert geo.is_convex(star) == bool(np.all(star_curvature(1.0, coeffs, theta) >= 0))


def test_scale_domain(unit_square):
    assert geo.scale_domain(unit_square, 1.0) == unit_square
    assert geo.perimeter(geo.scale_domain(unit_square, 2.0)) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        geo.scale_domain(unit_square, 0.0)


def test_saturate_perimeter(unit_square, unit_disk):
    assert geo.saturate_perimeter(unit_square, 4.0) is unit_square
    sq = geo.saturate_perimeter(unit_square, 8.0)
    assert (sq.width, sq.height) == pytest.approx((2.0, 2.0))
    assert geo.saturate_perimeter(unit_disk, 4 * math.pi).radius == pytest.approx(2.0)


def test_hausdorff_distance(unit_square):
    assert geo.hausdorff_distance(unit_square, unit_square) == 0.0
    moved = geo.translate_domain(unit_square, (1.0, 0.0))
    assert geo.hausdorff_distance(unit_square, moved) == pytest.approx(1.0, abs=1e-2)
    big = geo.Rectangle((0.0, 0.0), 3.0, 3.0)
    assert geo.hausdorff_distance(unit_square, big) == pytest.approx(2 * math.sqrt(2), abs=1e-2)


def test_star_to_polygon():
    s = geo.StarShape((0.0, 0.0), 1.0, ((0.0, 0.0),))
    sq = geo.star_to_polygon(s, 4)
    assert np.allclose(np.hypot(*sq.array.T), 1.0)
    assert geo.perimeter(sq) == pytest.approx(4 * math.sqrt(2))
    assert abs(geo.perimeter(geo.star_to_polygon(s, 4096)) - 2 * math.pi) < 1e-5


@pytest.mark.parametrize("seed", range(5))
def test_inscribed_polygon_area_below_star(seed):
    rng = np.random.default_rng(seed)
    coeffs = tuple(map(tuple, rng.uniform(-0.03, 0.03, (3, 2))))
    s = geo.StarShape((0.0, 0.0), 1.0, coeffs)
    assert geo.is_convex(s)
    for n in (64, 128, 512):
        assert geo.area(geo.star_to_polygon(s, n)) <= geo.area(s)


def test_domain_json_roundtrip(l_shape):
    for d in (l_shape, geo.Disk((0.5, 1.0), 2.0), geo.Rectangle((1, 2), 3, 4),
              geo.StarShape((0.0, 0.0), 1.0, ((0.1, -0.2),))):
        text = geo.dumps_domain(d)
        assert geo.loads_domain(text) == d
        json.loads(text)


def test_unknown_domain_type():
    with pytest.raises(InvalidDomainError):
        geo.domain_from_dict({"type": "ellipse"})


def test_contains_strict_and_closed(unit_square):
    x = np.array([0.5, 0.0, 1.5])
    y = np.array([0.5, 0.5, 0.5])
    assert list(geo.contains(unit_square, x, y)) == [True, False, False]
    assert list(geo.contains(unit_square, x, y, closed=True)) == [True, True, False]


@settings(max_examples=40, deadline=None)
@given(domains)
def test_diameter_below_half_perimeter(d):
    assert geo.diameter(d) < geo.perimeter(d) / 2


@settings(max_examples=30, deadline=None)
@given(domains, st.floats(0.2, 5.0))
def test_scaling_laws(d, t):
    s = geo.scale_domain(d, t)
    assert geo.perimeter(s) == pytest.approx(t * geo.perimeter(d), rel=1e-10)
    assert geo.area(s) == pytest.approx(t * t * geo.area(d), rel=1e-10)
    assert geo.diameter(s) == pytest.approx(t * geo.diameter(d), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(domains, st.floats(0.5, 20.0))
def test_saturation_hits_target(d, p):
    assert geo.perimeter(geo.saturate_perimeter(d, p)) == pytest.approx(p, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(stars)
def test_hull_never_longer(d):
    hull = geo.convex_hull(d)
    assert geo.perimeter(hull) <= geo.perimeter(d) * (1 + 1e-9)
    assert geo.area(hull) >= geo.area(geo.star_to_polygon(d, 4096)) * (1 - 1e-12)
    assert geo.is_convex(hull)


@settings(max_examples=15, deadline=None)
@given(stars, st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_hausdorff_translation_invariant(d, shift):
    other = geo.scale_domain(d, 1.1)
    base = geo.hausdorff_distance(d, other)
    moved = geo.hausdorff_distance(geo.translate_domain(d, shift), geo.translate_domain(other, shift))
    assert moved == pytest.approx(base, abs=1e-2 * geo.diameter(d))
