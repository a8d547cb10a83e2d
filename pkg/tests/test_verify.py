import json

import pytest

from buckleopt import geometry as geo
from buckleopt import verify


def small_corpus():
    return {"square": geo.Rectangle((0, 0), 1, 1), "lshape": verify.L_SHAPE}


def test_corpus_contents():
    corpus = verify.standard_corpus(0)
    assert {"disk", "square", "rect2x1", "pentagon", "lshape"} <= set(corpus)
    assert sum(k.startswith("star") for k in corpus) == 3
    assert geo.dumps_domain(verify.standard_corpus(0)["star1"]) == geo.dumps_domain(corpus["star1"])
    assert geo.dumps_domain(verify.standard_corpus(1)["star1"]) != geo.dumps_domain(corpus["star1"])


def test_nested_pairs_are_nested():
    pairs = verify.nested_pairs(0, 20)
    assert len(pairs) == 20
    for _, inner, outer in pairs:
        pts = geo.closure_samples(inner)
        assert geo.contains(outer, pts[:, 0], pts[:, 1], closed=True).all()


def test_nonconvex_fixtures():
    fx = verify.nonconvex_fixtures()
    assert set(fx) == {"lshape", "star5", "tshape"}
    assert not any(geo.is_convex(d) for d in fx.values())


def test_scaling_checks_and_control():
    checks = verify.check_scaling_law(small_corpus(), t_list=(2.0,), reraster=False)
    regular = [c for c in checks if not c.control]
    assert regular and all(c.passed for c in regular)
    control = [c for c in checks if c.control]
    assert len(control) == 1 and not control[0].passed and control[0].ok


def test_monotonicity_checks():
    checks = verify.check_monotonicity(verify.nested_pairs(0, 5), h=1 / 12)
    assert all(c.ok for c in checks)
    assert any(c.control for c in checks)


def test_convexification_checks():
    checks = verify.check_convexification(verify.nonconvex_fixtures(), resolution=24)
    assert all(c.ok for c in checks)


def test_connectedness_checks():
    checks = verify.check_connectedness(small_corpus(), resolution=16)
    assert all(c.ok for c in checks)


def test_dense_resolution_bound():
    dom = geo.regular_polygon(5, 1.0)
    from buckleopt.raster import rasterize
    n = rasterize(dom, verify.dense_resolution(dom)).N
    assert 200 < n <= 400


def test_report_serialization():
    report = verify.VerificationReport(3, verify.check_connectedness(small_corpus(), resolution=16))
    data = json.loads(report.to_json())
    assert data["seed"] == 3
    assert data["summary"] == {"checks": 2, "passed": 2, "failed": 0, "controls": 1,
                               "controls_behaving": 1}
    assert report.all_passed
    assert "negative controls behaved" in report.to_table()
    assert len(report.find("connected/control")) == 1


def test_failed_regular_check_fails_report():
    bad = verify.Check("x", "a", "d", {}, False, 0.0)
    assert not verify.VerificationReport(0, [bad]).all_passed
    control = verify.Check("y", "a", "d", {}, False, 0.0, expected=False)
    assert verify.VerificationReport(0, [control]).all_passed
