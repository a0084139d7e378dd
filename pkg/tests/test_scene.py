import math

import pytest

from quadray import QuadraticMap
from quadray.scene import (HullLayer, MarkerLayer, PointCloudLayer,
                           PolylineLayer, SceneModel, Viewport,
                           julia_point_cloud, render_scene)


def vp():
    return Viewport(-2.0, 2.0, -2.0, 2.0)


def test_empty_scene_is_valid_svg():
    svg = render_scene(SceneModel(viewport=vp()))
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")


def test_render_is_deterministic():
    scene = SceneModel(viewport=vp(), layers=[
        MarkerLayer(points=[1.0 + 0j], labels=["beta"]),
        PolylineLayer(points=[0j, 1.0 + 1.0j, 2.5 + 0.5j]),
    ])
    assert render_scene(scene) == render_scene(scene)


def test_marker_layer_single_point():
    scene = SceneModel(viewport=vp(), layers=[
        MarkerLayer(points=[1.0 + 0j], labels=["m"])])
    svg = render_scene(scene)
    assert svg.count("<circle") == 1
    # viewport maps 1+0i to (480, 320) in a 640x640 canvas
    assert 'cx="480.000"' in svg and 'cy="320.000"' in svg


def test_polyline_clipped_to_viewport():
    scene = SceneModel(viewport=vp(), layers=[
        PolylineLayer(points=[0j, 10.0 + 0j])])
    svg = render_scene(scene)
    # the segment must stop at the right viewport edge (x = 640)
    assert "640.000,320.000" in svg


def test_point_cloud_outside_viewport_dropped():
    scene = SceneModel(viewport=vp(), layers=[
        PointCloudLayer(points=[0.5 + 0.5j, 30.0 + 0j])])
    svg = render_scene(scene)
    assert svg.count("M") == 1


def test_hull_layer_draws_polygon():
    scene = SceneModel(viewport=vp(), layers=[
        HullLayer(points=[0j, 1.0 + 0j, 0.5 + 1.0j, 0.5 + 0.2j])])
    svg = render_scene(scene)
    assert "<polygon" in svg


def test_julia_cloud_on_unit_circle():
    pts = julia_point_cloud(QuadraticMap(0.0), count=500, seed=3)
    assert len(pts) == 500
    assert all(abs(abs(z) - 1.0) < 1e-6 for z in pts)


def test_julia_cloud_seeded_reproducible():
    a = julia_point_cloud(QuadraticMap(-1.0), count=200, seed=5)
    b = julia_point_cloud(QuadraticMap(-1.0), count=200, seed=5)
    assert a == b


def test_basilica_rays_meet_alpha():
    # inverse-iteration cloud plus the 1/3 and 2/3 rays: both polylines end
    # within marker radius of the alpha fixed point (a 4px marker spans
    # ~0.028 complex units in the default 4.4-unit / 640px viewport)
    from quadray import Angle, trace_ray
    qmap = QuadraticMap(-1.0)
    alpha = (1.0 - math.sqrt(5.0)) / 2.0
    marker_radius = 4.0 * 4.4 / 640.0
    ends = []
    for num in (1, 2):
        trace = trace_ray(qmap, Angle(num, 3), g_min=1e-10)
        ends.append(trace.samples[-1][1])
    assert all(abs(e - alpha) < marker_radius for e in ends)
