import math

import numpy as np
import pytest

from npspect.geometry import build_grid, export_grid_csv, make_ellipsoid, make_sphere, two_spheres


def test_sphere_node_and_normal():
    s = make_sphere(1.0)
    p = np.array([[1.0, 0.0, 0.0]])
    assert np.allclose(s.point(p), p) and np.allclose(s.normal(p), p)


def test_sphere_area_and_normals():
    g = build_grid(make_sphere(1.0), 16, 32)
    assert abs(g.area() - 4 * math.pi) < 1e-10
    assert np.abs(np.linalg.norm(g.normals, axis=1) - 1).max() < 1e-12
    assert len(g.nodes) == len(g.normals) == len(g.weights) == len(g.patch_radius)
    assert np.all(g.weights > 0)
    assert np.allclose(g.patch_radius, np.sqrt(g.weights / math.pi))


def test_flux_identity():
    g = build_grid(make_sphere(2.0), 12, 24)
    assert g.flux() == pytest.approx(32 * math.pi, rel=1e-12)
    e = build_grid(make_ellipsoid(2, 1, 1), 24, 48)
    assert e.flux() == pytest.approx(8 * math.pi, rel=1e-10)


def test_degenerate_ellipsoid_is_sphere():
    a = build_grid(make_ellipsoid(1, 1, 1), 8, 16)
    b = build_grid(make_sphere(1), 8, 16)
    assert np.array_equal(a.nodes, b.nodes)


def test_rejections():
    for bad in (lambda: make_sphere(0), lambda: make_ellipsoid(1, 1, 0), lambda: build_grid(make_sphere(), 3, 8),
                lambda: two_spheres(1.0, 3.0)):
        with pytest.raises(ValueError):
            bad()


def test_ellipsoid_area_converges():
    # prolate spheroid 2,1,1 area
    e = math.sqrt(1 - 1 / 4)
    exact = 2 * math.pi * (1 + 2 * math.asin(e) / e)
    errs = [abs(build_grid(make_ellipsoid(2, 1, 1), n, 2 * n).area() - exact) for n in (6, 8, 12)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-6
    d = [abs(build_grid(make_ellipsoid(2, 1, 1), n, 2 * n).area() - build_grid(make_ellipsoid(2, 1, 1), n + 4,
                                                                              2 * n + 8).area()) for n in (6, 10, 14)]
    assert d[0] > d[1] > d[2]


def test_two_spheres_components():
    a, b = two_spheres()
    assert (a.component_id, b.component_id) == (0, 1)
    ga, gb = build_grid(a, 8, 16), build_grid(b, 8, 16)
    assert np.linalg.norm(ga.nodes.mean(0) - gb.nodes.mean(0)) == pytest.approx(4.0)


def test_export_csv(tmp_path):
    g = build_grid(make_sphere(), 4, 8)
    out = tmp_path / "grid.csv"
    export_grid_csv(g, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,z,nx,ny,nz,w" and len(lines) == 33
