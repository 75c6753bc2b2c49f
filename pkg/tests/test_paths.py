import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_holonomy.errors import BasePointMismatch, DegenerateSpec, DimensionMismatch
from spectral_holonomy.paths import (
    Circle,
    Concat,
    DiscretizedPath,
    Perturbed,
    Plane,
    Polyline,
    Reverse,
    concat_paths,
    discretize,
    random_perturbation,
    reverse_path,
    winding_number,
)

PARAMS = ("re_z", "im_z", "c")


def plane_c(c=-1.0):
    return Plane(PARAMS, ("re_z", "im_z"), {"c": c})


def test_plane_embed_project():
    pl = Plane(PARAMS, ("im_z", "c"), {"re_z": 0.5})
    x = pl.embed([1.0, 2.0])
    assert np.array_equal(x, [0.5, 1.0, 2.0])
    assert np.array_equal(pl.project(x), [1.0, 2.0])


@pytest.mark.parametrize("axes, fixed", [
    (("re_z", "re_z"), {"im_z": 0, "c": 0}),
    (("re_z", "w"), {"im_z": 0, "c": 0}),
    (("re_z", "im_z"), {}),
    (("re_z", "im_z"), {"c": 0, "re_z": 1}),
])
def test_plane_validation(axes, fixed):
    with pytest.raises(DimensionMismatch):
        Plane(PARAMS, axes, fixed)


def test_circle_discretization():
    pl = Plane(PARAMS, ("im_z", "c"), {"re_z": 0.0})
    path = discretize(Circle(pl, (0.0, -1.0), 0.5), 64)
    assert len(path) == 65
    assert path.is_loop
    assert np.array_equal(path.samples[0], path.samples[-1])
    r = np.linalg.norm(pl.project(path.samples) - [0.0, -1.0], axis=1)
    assert np.allclose(r, 0.5)


def test_circle_orientation_and_start():
    pl = plane_c()
    ccw = discretize(Circle(pl, (0, 0), 1.0, "ccw", np.pi / 2), 16)
    assert np.allclose(ccw.samples[0], [0, 1, -1])
    assert winding_number(ccw, (0, 0), pl) == 1
    cw = discretize(Circle(pl, (0, 0), 1.0, "cw"), 16)
    assert winding_number(cw, (0, 0), pl) == -1
    assert winding_number(cw, (3, 0), pl) == 0


def test_circle_through():
    pl = plane_c()
    c = Circle.through(pl, (1.0, 1.0), (1.0, 3.0))
    assert np.isclose(c.radius, 2.0)
    assert np.allclose(c.start, [1.0, 3.0, -1.0])
    assert np.array_equal(c.start, c.end)


@pytest.mark.parametrize("radius", [0.0, -1.0, np.inf])
def test_degenerate_circle(radius):
    with pytest.raises(DegenerateSpec):
        Circle(plane_c(), (0, 0), radius)


def test_too_few_circle_samples():
    with pytest.raises(DegenerateSpec):
        discretize(Circle(plane_c(), (0, 0), 1.0), 8)


def test_reverse_circle_visits_same_points_backwards():
    c = Circle(plane_c(), (0.2, 0.1), 0.3)
    fwd = discretize(c, 32)
    back = discretize(Reverse(c), 32)
    assert np.allclose(back.samples, fwd.samples[::-1])
    assert winding_number(back, (0.2, 0.1), plane_c()) == -1


def test_concat_of_loops_visits_base_twice():
    pl = plane_c()
    a = Circle.through(pl, (0, 0), (1, 0))
    b = Circle.through(pl, (2, 0), (1, 0))
    path = discretize(Concat((a, b)), 32)
    assert path.is_loop
    hits = np.nonzero(np.linalg.norm(path.samples - path.samples[0], axis=1) < 1e-12)[0]
    assert list(hits) == [0, 32, 64]
    assert np.all(np.diff(path.ts) > 0)


def test_concat_rejects_gap():
    pl = plane_c()
    with pytest.raises(BasePointMismatch):
        Concat((Circle(pl, (0, 0), 1.0), Circle(pl, (0, 0), 2.0)))


def test_polyline():
    pts = np.array([[0, 0, 0], [1, 0, 0], [1, 3, 0]], dtype=float)
    path = discretize(Polyline(pts), 8)
    assert not path.is_loop
    assert np.array_equal(path.samples[0], pts[0])
    assert np.array_equal(path.samples[-1], pts[-1])
    assert any(np.array_equal(s, pts[1]) for s in path.samples)
    # arc-length parameter
    assert np.allclose(Polyline(pts).point_at(0.25), [[1, 0, 0]])


def test_closed_polyline_is_loop():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=float)
    assert discretize(Polyline(pts), 12).is_loop


def test_empty_polyline():
    with pytest.raises(DegenerateSpec):
        Polyline(np.zeros((0, 3)))


def test_discretized_path_validation():
    with pytest.raises(DegenerateSpec):
        DiscretizedPath(np.zeros((1, 3)), [0.0], False)
    with pytest.raises(DegenerateSpec):
        DiscretizedPath(np.zeros((3, 3)), [0.0, 0.5, 0.5], False)


def test_concat_and_reverse_discretized():
    pl = plane_c()
    a = discretize(Circle.through(pl, (0, 0), (1, 0)), 16)
    b = discretize(Circle.through(pl, (2, 0), (1, 0)), 16)
    ab = concat_paths(a, b)
    assert len(ab) == 33 and ab.is_loop
    assert np.allclose(ab.point_at([0.25]), a.point_at([0.5]))
    r = reverse_path(ab)
    assert np.array_equal(r.samples, ab.samples[::-1])
    assert np.allclose(r.point_at([0.25]), ab.point_at([0.75]))
    with pytest.raises(BasePointMismatch):
        concat_paths(a, discretize(Circle(pl, (5, 5), 1.0), 16))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_perturbation_keeps_endpoints_and_stays_close(seed):
    rng = np.random.default_rng(seed)
    c = Circle(plane_c(), (0.0, 0.0), 1.0, start_angle=rng.uniform(0, 6))
    p = random_perturbation(c, rng, 0.01, axes=[0, 1])
    path = discretize(p, 64)
    assert path.is_loop
    assert np.array_equal(path.samples[0], c.start)
    base = discretize(c, 64)
    assert np.max(np.abs(path.samples - base.samples)) <= 0.01 * (1 + 1 / 2 + 1 / 3) + 1e-15
    assert np.all(path.samples[:, 2] == -1.0)


def test_perturbed_dimension_check():
    with pytest.raises(DimensionMismatch):
        Perturbed(Circle(plane_c(), (0, 0), 1.0), np.zeros((2, 2)))
