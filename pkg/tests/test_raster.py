import itertools

import numpy as np
import pytest

from buckleopt import geometry as geo
from buckleopt.errors import ResolutionTooCoarseError
from buckleopt.raster import (
    GridEmbedding,
    connected_components,
    mask_included,
    rasterize,
    union_frame,
)
from buckleopt.verify import two_squares_embedding


def test_unit_square_lattice(unit_square):
    g = rasterize(unit_square, 0.25)
    assert g.N == 9
    pts = {tuple(p) for p in g.points()}
    assert pts == set(itertools.product((0.25, 0.5, 0.75), repeat=2))
    assert rasterize(unit_square, 0.5).N == 1
    assert {tuple(p) for p in rasterize(unit_square, 0.5).points()} == {(0.5, 0.5)}


def test_unit_disk_brute_force(unit_disk):
    h = 0.5
    expected = {(i * h, j * h) for i in range(-3, 4) for j in range(-3, 4)
                if (i * h) ** 2 + (j * h) ** 2 < 1}
    g = rasterize(unit_disk, h)
    assert g.N == 9
    assert {tuple(p) for p in g.points()} == expected


def test_boundary_points_are_excluded(unit_square):
    g = rasterize(unit_square, 0.1)
    pts = g.points()
    assert np.all((pts > 0) & (pts < 1))
    assert g.N == 81


def test_margin_and_index(unit_disk):
    g = rasterize(unit_disk, 0.1)
    assert not g.inside[:2].any() and not g.inside[-2:].any()
    assert not g.inside[:, :2].any() and not g.inside[:, -2:].any()
    idx = g.interior_index[g.inside]
    assert np.array_equal(idx, np.arange(g.N))
    assert np.all(g.interior_index[~g.inside] == -1)


def test_too_coarse(unit_square):
    with pytest.raises(ResolutionTooCoarseError):
        rasterize(unit_square, 1.0)
    with pytest.raises(ValueError):
        rasterize(unit_square, -0.1)


def test_common_lattice(unit_square):
    a = rasterize(unit_square, 0.125)
    b = rasterize(geo.Rectangle((0.0, 0.0), 2.0, 2.0), 0.125)
    assert a.lattice_set() <= b.lattice_set()
    assert mask_included(a, b)
    assert not mask_included(b, a)
    offset, masks = union_frame(a, b)
    assert masks[0].shape == masks[1].shape
    assert masks[0].sum() == a.N and masks[1].sum() == b.N


def test_union_frame_rejects_mixed_spacing(unit_square):
    with pytest.raises(ValueError):
        union_frame(rasterize(unit_square, 0.25), rasterize(unit_square, 0.125))


def test_connected_components(unit_disk, l_shape):
    assert connected_components(rasterize(unit_disk, 0.1)) == 1
    assert connected_components(rasterize(l_shape, 0.1)) == 1
    assert connected_components(two_squares_embedding(0.25)) == 2


def test_rescaled_keeps_mask(unit_disk):
    g = rasterize(unit_disk, 0.1)
    r = g.rescaled(2.0)
    assert r.h == pytest.approx(0.2) and r.N == g.N
    assert np.allclose(r.points(), 2 * g.points())


def test_from_mask_crops():
    m = np.zeros((10, 10), bool)
    m[4:6, 3:5] = True
    g = GridEmbedding.from_mask(m, 0.5, (1, 1))
    assert g.inside.shape == (6, 6)
    assert g.offset == (1 + 4 - 2, 1 + 3 - 2)
    assert g.lattice_set() == {(5, 4), (5, 5), (6, 4), (6, 5)}


def test_text_dumps(unit_square):
    g = rasterize(unit_square, 0.25)
    assert g.to_csv().count("1") == 9
    pgm = g.to_pgm().splitlines()
    assert pgm[0] == "P2" and pgm[1] == f"{g.ny} {g.nx}"
