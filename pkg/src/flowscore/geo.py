"""Planar geometry helpers and a uniform-grid spatial index.

Everything works in meters on projected coordinates. Boundary cases are
inclusive throughout: a point on a polygon edge is inside, a geometry at
exactly the query radius is returned.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

Point = tuple[float, float]
BBox = tuple[float, float, float, float]

_EPS = 1e-9


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_polyline_distance(p: Point, polyline) -> float:
    """Minimum distance from p to any segment of the polyline."""
    best = math.inf
    for a, b in zip(polyline, polyline[1:]):
        d = point_segment_distance(p, a, b)
        if d < best:
            best = d
    if math.isinf(best):
        # single-point "polyline"
        return math.hypot(p[0] - polyline[0][0], p[1] - polyline[0][1])
    return best


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    scale = max(1.0, abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1]))
    if abs(_orient(a, b, p)) > _EPS * scale * scale:
        return False
    return (
        min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
        and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    return (
        _on_segment(c, a, b)
        or _on_segment(d, a, b)
        or _on_segment(a, c, d)
        or _on_segment(b, c, d)
    )


def segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def _closed_ring(polygon) -> list[Point]:
    ring = list(polygon)
    if ring[0] != ring[-1]:
        ring.append(ring[0])
    return ring


def point_in_polygon(p: Point, polygon) -> bool:
    """Even-odd containment; points on the boundary count as inside."""
    ring = _closed_ring(polygon)
    for a, b in zip(ring, ring[1:]):
        if _on_segment(p, a, b):
            return True
    px, py = p
    inside = False
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        if (y0 > py) != (y1 > py):
            x_cross = x1 + (py - y1) * (x0 - x1) / (y0 - y1)
            if px < x_cross:
                inside = not inside
    return inside


def polygon_area(polygon) -> float:
    ring = _closed_ring(polygon)
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        acc += x0 * y1 - x1 * y0
    return abs(acc) / 2.0


def polygon_polyline_distance(polygon, polyline) -> float:
    """Zero when the polyline touches or enters the polygon."""
    if point_in_polygon(polyline[0], polygon):
        return 0.0
    ring = _closed_ring(polygon)
    best = math.inf
    for pa, pb in zip(polyline, polyline[1:]):
        for qa, qb in zip(ring, ring[1:]):
            d = segment_segment_distance(pa, pb, qa, qb)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best


def polyline_length(polyline) -> float:
    return sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(polyline, polyline[1:])
    )


def point_along_polyline(polyline, distance: float) -> Point:
    """Point at the given arc length from the start, clamped to the ends."""
    if distance <= 0:
        return polyline[0]
    walked = 0.0
    for a, b in zip(polyline, polyline[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if walked + seg >= distance and seg > 0:
            t = (distance - walked) / seg
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        walked += seg
    return polyline[-1]


def polyline_bbox(polyline) -> BBox:
    xs = [p[0] for p in polyline]
    ys = [p[1] for p in polyline]
    return (min(xs), min(ys), max(xs), max(ys))


def bboxes_overlap(a: BBox, b: BBox) -> bool:
    return a[0] <= b[2] and a[2] >= b[0] and a[1] <= b[3] and a[3] >= b[1]


class SpatialIndex:
    """Uniform grid over bounding boxes.

    query() returns exactly the ids whose stored bbox overlaps the query
    bbox (same answer as a brute-force scan), sorted for determinism.
    Exact geometry predicates stay with the caller.
    """

    def __init__(self, items, cell_size: float | None = None):
        self._bboxes: dict = dict(items)
        if cell_size is None:
            cell_size = self._pick_cell_size()
        self._cell = cell_size
        self._grid: dict[tuple[int, int], list] = {}
        for key, bbox in self._bboxes.items():
            for cell in self._cells_for(bbox):
                self._grid.setdefault(cell, []).append(key)

    def _pick_cell_size(self) -> float:
        if not self._bboxes:
            return 1.0
        boxes = self._bboxes.values()
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[2] for b in boxes)
        y1 = max(b[3] for b in boxes)
        extent = max(x1 - x0, y1 - y0)
        if extent <= 0:
            return 1.0
        return extent / max(1.0, math.sqrt(len(self._bboxes)))

    def _cells_for(self, bbox: BBox):
        c = self._cell
        ix0 = math.floor(bbox[0] / c)
        iy0 = math.floor(bbox[1] / c)
        ix1 = math.floor(bbox[2] / c)
        iy1 = math.floor(bbox[3] / c)
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                yield (ix, iy)

    def query(self, bbox: BBox) -> list:
        hits = set()
        for cell in self._cells_for(bbox):
            for key in self._grid.get(cell, ()):
                if key not in hits and bboxes_overlap(self._bboxes[key], bbox):
                    hits.add(key)
        return sorted(hits)

    def __len__(self) -> int:
        return len(self._bboxes)


def build_link_index(network) -> SpatialIndex:
    return SpatialIndex(
        (link.id, polyline_bbox(link.geometry)) for link in network.links
    )


def links_within_radius(point: Point, radius_m: float, network, index: SpatialIndex | None = None) -> list[int]:
    """Ids of links whose geometry comes within radius_m of point (inclusive)."""
    if radius_m < 0:
        raise ValueError("radius must be nonnegative")
    if index is None:
        candidates = [link.id for link in network.links]
    else:
        x, y = point
        candidates = index.query((x - radius_m, y - radius_m, x + radius_m, y + radius_m))
    out = []
    for link_id in candidates:
        link = network.link_by_id[link_id]
        if point_polyline_distance(point, link.geometry) <= radius_m:
            out.append(link_id)
    return sorted(out)


@dataclass(frozen=True)
class Tract:
    id: int
    polygon: tuple[Point, ...]
    population: float
    is_coc: bool

    def __post_init__(self) -> None:
        if len(self.polygon) < 3:
            raise ValueError(f"tract {self.id} polygon needs >= 3 points")
        if self.population < 0:
            raise ValueError(f"tract {self.id} has negative population")


def link_midpoint(link) -> Point:
    return point_along_polyline(link.geometry, polyline_length(link.geometry) / 2.0)


def build_tract_index(tracts) -> SpatialIndex:
    return SpatialIndex((t.id, polyline_bbox(t.polygon)) for t in tracts)


def link_tract(link, tracts, index: SpatialIndex | None = None):
    """Tract id containing the link's length midpoint, or None.

    With overlapping tracts the first match in input order wins; overlap
    itself is reported by validate_tracts.
    """
    mid = link_midpoint(link)
    if index is not None:
        candidate_ids = set(index.query((mid[0], mid[1], mid[0], mid[1])))
        candidates = [t for t in tracts if t.id in candidate_ids]
    else:
        candidates = tracts
    for tract in candidates:
        if point_in_polygon(mid, tract.polygon):
            return tract.id
    return None


def _interior_point_in(p: Point, polygon) -> bool:
    ring = _closed_ring(polygon)
    for a, b in zip(ring, ring[1:]):
        if _on_segment(p, a, b):
            return False
    return point_in_polygon(p, polygon)


def validate_tracts(tracts) -> list[str]:
    """Warn on tract pairs whose interiors appear to overlap."""
    warnings = []
    boxes = {t.id: polyline_bbox(t.polygon) for t in tracts}
    for i, ta in enumerate(tracts):
        for tb in tracts[i + 1 :]:
            if not bboxes_overlap(boxes[ta.id], boxes[tb.id]):
                continue
            overlap = any(_interior_point_in(p, tb.polygon) for p in ta.polygon) or any(
                _interior_point_in(p, ta.polygon) for p in tb.polygon
            )
            if not overlap:
                ring_a = _closed_ring(ta.polygon)
                ring_b = _closed_ring(tb.polygon)
                for a0, a1 in zip(ring_a, ring_a[1:]):
                    if overlap:
                        break
                    for b0, b1 in zip(ring_b, ring_b[1:]):
                        o1 = _orient(a0, a1, b0)
                        o2 = _orient(a0, a1, b1)
                        o3 = _orient(b0, b1, a0)
                        o4 = _orient(b0, b1, a1)
                        if (
                            o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0
                            and (o1 > 0) != (o2 > 0)
                            and (o3 > 0) != (o4 > 0)
                        ):
                            overlap = True
                            break
            if overlap:
                warnings.append(f"tracts {ta.id} and {tb.id} overlap")
    return warnings


def _load_polygon_features(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise ValueError(f"{path}: expected a GeoJSON FeatureCollection")
    out = []
    for feature in doc.get("features", []):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ValueError(f"{path}: only Polygon geometries are supported")
        # exterior ring only; holes are out of scope for these inputs
        ring = [(float(x), float(y)) for x, y in geom["coordinates"][0]]
        if len(ring) > 1 and ring[0] == ring[-1]:
            ring = ring[:-1]
        out.append((feature.get("properties") or {}, tuple(ring)))
    return out


def load_tracts(path: str) -> list[Tract]:
    tracts = []
    for props, ring in _load_polygon_features(path):
        if "tract_id" not in props:
            raise ValueError(f"{path}: tract feature missing tract_id")
        try:
            tract_id = int(props["tract_id"])
        except (TypeError, ValueError):
            raise ValueError(
                f"{path}: tract_id {props['tract_id']!r} is not an integer"
            ) from None
        tracts.append(
            Tract(
                id=tract_id,
                polygon=ring,
                population=float(props.get("population", 0.0)),
                is_coc=bool(props.get("is_coc", False)),
            )
        )
    return tracts
