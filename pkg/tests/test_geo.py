import math

import numpy as np
import pytest

from flowscore import geo
from flowscore.geo import (
    SpatialIndex,
    Tract,
    bboxes_overlap,
    build_link_index,
    link_midpoint,
    link_tract,
    links_within_radius,
    load_tracts,
    point_along_polyline,
    point_in_polygon,
    point_polyline_distance,
    point_segment_distance,
    polygon_area,
    polygon_polyline_distance,
    polyline_bbox,
    polyline_length,
    segment_segment_distance,
    segments_intersect,
    validate_tracts,
)

from fixtures import grid_network, square, write_tracts_geojson


UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


def test_point_segment_distance():
    assert point_segment_distance((0.0, 1.0), (0.0, 0.0), (2.0, 0.0)) == 1.0
    assert point_segment_distance((3.0, 0.0), (0.0, 0.0), (2.0, 0.0)) == 1.0
    assert point_segment_distance((1.0, 0.0), (0.0, 0.0), (2.0, 0.0)) == 0.0
    # degenerate segment is a point
    assert point_segment_distance((3.0, 4.0), (0.0, 0.0), (0.0, 0.0)) == 5.0


def test_point_in_polygon_interior_and_exterior():
    assert point_in_polygon((0.5, 0.5), UNIT_SQUARE)
    assert not point_in_polygon((1.5, 0.5), UNIT_SQUARE)
    assert not point_in_polygon((-0.001, 0.5), UNIT_SQUARE)


def test_point_in_polygon_boundary_is_inside():
    assert point_in_polygon((0.0, 0.0), UNIT_SQUARE)  # vertex
    assert point_in_polygon((0.5, 0.0), UNIT_SQUARE)  # edge midpoint
    assert point_in_polygon((1.0, 0.5), UNIT_SQUARE)
    assert point_in_polygon((0.5, 1.0), UNIT_SQUARE)  # horizontal top edge


def test_point_in_polygon_concave():
    # C-shape opening right
    poly = ((0, 0), (3, 0), (3, 1), (1, 1), (1, 2), (3, 2), (3, 3), (0, 3))
    assert point_in_polygon((0.5, 1.5), poly)
    assert not point_in_polygon((2.0, 1.5), poly)  # inside the notch
    assert point_in_polygon((2.0, 0.5), poly)


def test_polygon_area():
    assert polygon_area(UNIT_SQUARE) == 1.0
    tri = ((0.0, 0.0), (4.0, 0.0), (0.0, 3.0))
    assert polygon_area(tri) == 6.0
    # orientation must not matter
    assert polygon_area(tuple(reversed(tri))) == 6.0


def test_segments_intersect():
    assert segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
    assert segments_intersect((0, 0), (1, 1), (1, 1), (2, 0))  # shared endpoint
    assert segments_intersect((0, 0), (2, 0), (1, 0), (3, 0))  # collinear overlap
    assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert not segments_intersect((0, 0), (1, 0), (2, 0), (3, 0))  # collinear gap


def test_segment_segment_distance():
    assert segment_segment_distance((0, 0), (1, 0), (0, 1), (1, 1)) == 1.0
    assert segment_segment_distance((0, 0), (2, 2), (0, 2), (2, 0)) == 0.0
    assert segment_segment_distance((0, 0), (1, 0), (3, 0), (4, 0)) == 2.0


def test_polygon_polyline_distance():
    inside = ((0.2, 0.2), (0.8, 0.8))
    assert polygon_polyline_distance(UNIT_SQUARE, inside) == 0.0
    crossing = ((-1.0, 0.5), (2.0, 0.5))
    assert polygon_polyline_distance(UNIT_SQUARE, crossing) == 0.0
    outside = ((2.0, 0.0), (2.0, 1.0))
    assert polygon_polyline_distance(UNIT_SQUARE, outside) == 1.0
    touching = ((1.0, 0.5), (2.0, 0.5))
    assert polygon_polyline_distance(UNIT_SQUARE, touching) == 0.0


def test_polyline_length_and_point_along():
    line = ((0.0, 0.0), (3.0, 0.0), (3.0, 4.0))
    assert polyline_length(line) == 7.0
    assert point_along_polyline(line, 0.0) == (0.0, 0.0)
    assert point_along_polyline(line, 3.0) == (3.0, 0.0)
    assert point_along_polyline(line, 5.0) == (3.0, 2.0)
    assert point_along_polyline(line, 99.0) == (3.0, 4.0)
    assert point_along_polyline(line, -1.0) == (0.0, 0.0)


def test_bbox_helpers():
    assert polyline_bbox(((1.0, 5.0), (-2.0, 3.0), (0.0, 7.0))) == (-2.0, 3.0, 1.0, 7.0)
    assert bboxes_overlap((0, 0, 1, 1), (1, 1, 2, 2))  # edge touch counts
    assert not bboxes_overlap((0, 0, 1, 1), (1.01, 0, 2, 1))


def test_spatial_index_matches_brute_force():
    rng = np.random.default_rng(21)
    n = 400
    boxes = {}
    for i in range(n):
        x0, y0 = rng.uniform(0, 1000, size=2)
        w, h = rng.uniform(0, 80, size=2)
        boxes[i] = (x0, y0, x0 + w, y0 + h)
    index = SpatialIndex(boxes.items())
    for _ in range(300):
        qx, qy = rng.uniform(-50, 1050, size=2)
        qw, qh = rng.uniform(0, 150, size=2)
        q = (qx, qy, qx + qw, qy + qh)
        brute = sorted(k for k, b in boxes.items() if bboxes_overlap(b, q))
        assert index.query(q) == brute


def test_spatial_index_degenerate_inputs():
    assert SpatialIndex([]).query((0, 0, 1, 1)) == []
    # all boxes are the same point
    idx = SpatialIndex([(1, (5.0, 5.0, 5.0, 5.0)), (2, (5.0, 5.0, 5.0, 5.0))])
    assert idx.query((4, 4, 6, 6)) == [1, 2]
    assert idx.query((5, 5, 5, 5)) == [1, 2]
    assert idx.query((6.1, 6.1, 7, 7)) == []


def test_links_within_radius_inclusive_and_sorted():
    net = grid_network(2, 2, spacing_miles=1.0)
    index = build_link_index(net)
    spacing_m = geo.polyline_length(net.links[0].geometry)
    # query at a node: every incident link touches it, distance 0
    at_node = links_within_radius((0.0, 0.0), 0.0, net, index)
    assert at_node == sorted(at_node)
    assert len(at_node) == 4  # two outgoing, two incoming
    # exactly at the radius boundary
    mid = (spacing_m / 2.0, spacing_m / 2.0)
    d = spacing_m / 2.0
    hits = links_within_radius(mid, d, net, index)
    assert len(hits) == len(net.links)  # all edges of the unit cell touch
    just_inside = links_within_radius(mid, d * 0.999, net, index)
    assert just_inside == []


def test_links_within_radius_index_agrees_with_scan():
    net = grid_network(4, 5, spacing_miles=0.3)
    index = build_link_index(net)
    rng = np.random.default_rng(22)
    for _ in range(100):
        p = (float(rng.uniform(-500, 2500)), float(rng.uniform(-500, 2000)))
        r = float(rng.uniform(0, 600))
        assert links_within_radius(p, r, net, index) == links_within_radius(p, r, net, None)


def test_links_within_radius_rejects_negative():
    net = grid_network(2, 2)
    with pytest.raises(ValueError):
        links_within_radius((0.0, 0.0), -1.0, net)


def test_tract_validation():
    with pytest.raises(ValueError):
        Tract(1, ((0.0, 0.0), (1.0, 0.0)), 100.0, False)
    with pytest.raises(ValueError):
        Tract(1, UNIT_SQUARE, -5.0, False)


def test_link_midpoint_multi_segment():
    net = grid_network(1, 2, spacing_miles=1.0)
    link = net.links[0]
    mid = link_midpoint(link)
    length_m = polyline_length(link.geometry)
    assert mid == pytest.approx((length_m / 2.0, 0.0))


def test_link_tract_first_match_wins_on_overlap():
    net = grid_network(1, 2, spacing_miles=1.0)
    link = net.links[0]
    big = Tract(10, square(800.0, 0.0, 900.0), 1000.0, False)
    small = Tract(20, square(800.0, 0.0, 900.0), 500.0, True)
    assert link_tract(link, [big, small]) == 10
    assert link_tract(link, [small, big]) == 20
    far = Tract(30, square(1e6, 1e6, 10.0), 10.0, False)
    assert link_tract(link, [far]) is None


def test_validate_tracts_flags_overlaps_only():
    a = Tract(1, square(0.0, 0.0, 10.0), 100.0, False)
    b = Tract(2, square(5.0, 3.0, 10.0), 100.0, False)  # corner inside a
    c = Tract(3, square(40.0, 0.0, 10.0), 100.0, False)  # disjoint
    d = Tract(4, square(55.0, 0.0, 5.0), 100.0, False)  # edge-tangent to c only
    warnings = validate_tracts([a, b, c, d])
    assert warnings == ["tracts 1 and 2 overlap"]
    # crossing boundaries with no vertex containment still count
    e = Tract(5, ((-20.0, -1.0), (20.0, -1.0), (20.0, 1.0), (-20.0, 1.0)), 50.0, False)
    f = Tract(6, ((-1.0, -20.0), (1.0, -20.0), (1.0, 20.0), (-1.0, 20.0)), 50.0, False)
    assert validate_tracts([e, f]) == ["tracts 5 and 6 overlap"]


def test_load_tracts_roundtrip(tmp_path):
    tracts = [
        Tract(7, square(100.0, 100.0, 50.0), 1200.0, True),
        Tract(8, square(300.0, 100.0, 50.0), 800.0, False),
    ]
    path = tmp_path / "tracts.geojson"
    write_tracts_geojson(path, tracts)
    loaded = load_tracts(str(path))
    assert [t.id for t in loaded] == [7, 8]
    assert loaded[0].is_coc and not loaded[1].is_coc
    assert loaded[0].population == 1200.0
    assert loaded[0].polygon == tracts[0].polygon


def test_load_tracts_rejects_non_polygon(tmp_path):
    path = tmp_path / "bad.geojson"
    path.write_text(
        '{"type": "FeatureCollection", "features": [{"type": "Feature",'
        '"properties": {"tract_id": 1}, "geometry": {"type": "Point", "coordinates": [0, 0]}}]}'
    )
    with pytest.raises(ValueError):
        load_tracts(str(path))


def test_load_tracts_requires_id(tmp_path):
    path = tmp_path / "noid.geojson"
    path.write_text(
        '{"type": "FeatureCollection", "features": [{"type": "Feature",'
        '"properties": {}, "geometry": {"type": "Polygon",'
        '"coordinates": [[[0, 0], [1, 0], [1, 1], [0, 0]]]}}]}'
    )
    with pytest.raises(ValueError):
        load_tracts(str(path))


def test_load_tracts_rejects_non_integer_id(tmp_path):
    path = tmp_path / "stringid.geojson"
    path.write_text(
        '{"type": "FeatureCollection", "features": [{"type": "Feature",'
        '"properties": {"tract_id": "T1"}, "geometry": {"type": "Polygon",'
        '"coordinates": [[[0, 0], [1, 0], [1, 1], [0, 0]]]}}]}'
    )
    with pytest.raises(ValueError, match="tract_id 'T1' is not an integer"):
        load_tracts(str(path))
