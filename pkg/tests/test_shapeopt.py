import math
from types import SimpleNamespace

import numpy as np
import pytest

from buckleopt import geometry as geo
from buckleopt.eigensolve import generalized_smallest
from buckleopt.operators import assemble_biharmonic, assemble_laplacian
from buckleopt.raster import rasterize
from buckleopt.shapeopt import (
    ObjectiveRecord,
    OptimizerConfig,
    ShapeFamily,
    _nelder_mead,
    beta_star,
    buckling_of_domain,
    convexification_gain,
    disk_of_perimeter,
    hausdorff_to_disk,
    objective_scale_invariant,
    optimize,
    penalized_profile,
    trace_rows,
)
from oracles import DISK_LAMBDA1, DISK_OBJECTIVE


def test_disk_extrapolated(unit_disk):
    rec = buckling_of_domain(unit_disk, 1 / 64, 1, True)
    assert rec.extrapolated
    assert rec.lambdas[0] == pytest.approx(DISK_LAMBDA1, rel=0.01)
    assert rec.objective_value == pytest.approx(rec.recompute_objective())


def test_relative_resolution_scaling(l_shape):
    big = geo.scale_domain(l_shape, 2.0)
    a = buckling_of_domain(l_shape, geo.diameter(l_shape) / 48)
    b = buckling_of_domain(big, geo.diameter(big) / 48)
    assert b.lambdas[0] == pytest.approx(a.lambdas[0] / 4, rel=1e-3)
    assert objective_scale_invariant(b) == pytest.approx(objective_scale_invariant(a), rel=1e-3)


def test_square_hull_gives_identical_record(unit_square):
    hull = geo.convex_hull(unit_square)
    a = buckling_of_domain(unit_square, 1 / 32)
    b = buckling_of_domain(hull, 1 / 32)
    assert a.lambdas == b.lambdas
    assert a.perimeter == pytest.approx(b.perimeter, rel=1e-14)


@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_disk_objective(radius):
    d = geo.Disk((0.0, 0.0), radius)
    rec = buckling_of_domain(d, geo.diameter(d) / 64, 1, True)
    assert objective_scale_invariant(rec) == pytest.approx(DISK_OBJECTIVE, rel=0.01)


def test_objective_formula():
    rec = ObjectiveRecord(None, 0.1, (10.0,), 5.0, 1.0, 250.0)
    assert objective_scale_invariant(rec) == 250.0


def test_objective_invariant_on_matrix_path(l_shape):
    g = rasterize(l_shape, 1 / 24)
    for t in (0.5, 3.0):
        gt = g.rescaled(t)
        lam = generalized_smallest(assemble_biharmonic(g), assemble_laplacian(g)).values[0]
        lam_t = generalized_smallest(assemble_biharmonic(gt), assemble_laplacian(gt)).values[0]
        per = geo.perimeter(l_shape)
        assert (t * per) ** 2 * lam_t == pytest.approx(per**2 * lam, rel=1e-10)


def test_beta_star():
    assert beta_star(10.0, 5.0) == pytest.approx(4.0)
    # 14.6819 / pi = 4.67339
    assert beta_star(14.6819, 2 * math.pi) == pytest.approx(14.6819 / math.pi, rel=1e-14)
    assert beta_star(14.6819, 2 * math.pi) == pytest.approx(4.6734, abs=1e-4)
    assert beta_star(6.0, 4.0, d_param=3) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        beta_star(-1.0, 1.0)
    with pytest.raises(ValueError):
        beta_star(1.0, 1.0, d_param=1)


def test_penalized_profile(unit_square):
    rec = buckling_of_domain(unit_square, 1 / 16)
    lam, per = rec.lambdas[0], rec.perimeter
    t_grid = np.round(np.arange(0.5, 2.0001, 0.05), 10)
    b = beta_star(lam, per)
    prof = penalized_profile(unit_square, b, t_grid, record=rec)
    ts, fs = zip(*prof)
    assert ts[int(np.argmin(fs))] == pytest.approx(1.0)
    assert dict(prof)[1.0] == lam + b * per
    flat = [f for _, f in penalized_profile(unit_square, 0.0, t_grid, record=rec)]
    assert np.all(np.diff(flat) < 0)
    for factor in (1.2, 0.8):
        fs = [f for _, f in penalized_profile(unit_square, factor * b, t_grid, record=rec)]
        t_star = (1 / factor) ** (1 / 3)
        assert abs(t_grid[int(np.argmin(fs))] - t_star) <= 0.05
    with pytest.raises(ValueError):
        penalized_profile(unit_square, b, [0.0, 1.0], record=rec)


def test_convexification_gain(l_shape, unit_square):
    lam, lam_hull = convexification_gain(l_shape, 1 / 24)
    assert lam_hull < lam
    a, b = convexification_gain(unit_square, 1 / 24)
    assert a == b


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(family="ellipse")
    with pytest.raises(ValueError):
        OptimizerConfig(perimeter=-1)
    with pytest.raises(ValueError):
        OptimizerConfig(start=[[0.1, 0.0]], K=4)
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"family": "star", "speed": 3})
    cfg = OptimizerConfig.from_dict({"family": "polygon", "n": 6})
    assert OptimizerConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_zero_parameters_reproduce_saturated_disk():
    cfg = OptimizerConfig(K=3, perimeter=3.0)
    fam = ShapeFamily(cfg)
    dom = fam.domain(fam.x0)
    assert geo.perimeter(dom) == pytest.approx(3.0, rel=1e-12)
    disk = disk_of_perimeter(3.0)
    h = geo.diameter(dom) / 48
    assert rasterize(dom, h).lattice_set() == rasterize(disk, h).lattice_set()
    assert buckling_of_domain(dom, h).lambdas == buckling_of_domain(disk, h).lambdas


def test_convexified_family_is_convex():
    cfg = OptimizerConfig(family="polygon", n=6, convexify=True)
    fam = ShapeFamily(cfg)
    rng = np.random.default_rng(1)
    for _ in range(10):
        dom = fam.domain(rng.normal(0, 0.3, fam.x0.size))
        assert geo.is_convex(dom)
        assert geo.perimeter(dom) == pytest.approx(cfg.perimeter, rel=1e-12)


def test_nelder_mead_on_quadratic():
    cfg = SimpleNamespace(max_evals=2000, stop_tol=1e-12, reflection=1.0, expansion=2.0,
                          contraction=0.5, shrink=0.5)
    target = np.array([1.0, -2.0, 0.5])
    x, f, converged = _nelder_mead(lambda x: float(np.sum((x - target) ** 2)), np.zeros(3), 0.5,
                                   cfg, lambda *a: None)
    assert converged
    assert np.allclose(x, target, atol=1e-4)


def test_nelder_mead_respects_budget():
    cfg = SimpleNamespace(max_evals=7, stop_tol=0.0, reflection=1.0, expansion=2.0,
                          contraction=0.5, shrink=0.5)
    calls = []
    _nelder_mead(lambda x: float(np.sum(x**2)), np.ones(4), 0.1, cfg, lambda c, x, f: calls.append(c))
    assert calls == list(range(1, 8))


@pytest.fixture(scope="module")
def short_trace():
    cfg = OptimizerConfig(K=2, start=[[0.0, 0.0], [0.2, 0.0]], max_evals=15,
                          search_resolution=32, report_resolution=48, seed=1)
    return optimize(cfg)


def test_short_run_saturates_and_improves(short_trace):
    p = short_trace.config.perimeter
    recs = [r for r in short_trace.evaluations if r is not None]
    assert len(short_trace.evaluations) == 15
    assert all(abs(r.perimeter - p) <= 1e-9 * p for r in recs)
    best = [r.objective_value for _, r in short_trace.iterations]
    assert np.all(np.diff(best) <= 0)
    assert short_trace.final.objective_value < short_trace.initial.objective_value
    assert short_trace.hausdorff_to_disk == pytest.approx(
        hausdorff_to_disk(short_trace.final.domain, p))


def test_trace_rows(short_trace):
    rows = trace_rows(short_trace)
    assert len(rows) == 15
    assert all(len(r) == 5 for r in rows)
    assert [r[0] for r in rows] == list(range(1, 16))


def test_optimize_is_deterministic(short_trace):
    again = optimize(short_trace.config)
    assert trace_rows(again) == trace_rows(short_trace)
