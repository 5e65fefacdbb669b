"""Street typology: functional class x adjacent land use -> street type."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

from . import geo


class LandUse(enum.Enum):
    RESIDENTIAL = "R"
    COMMERCIAL = "C"
    INDUSTRIAL = "I"
    PUBLIC = "P"
    OTHER = "O"


class TransportContext(enum.Enum):
    HIGHWAY = "Highway"
    THROUGHWAY = "Throughway"
    NEIGHBORHOOD_STREET = "NeighborhoodStreet"


class StreetType(enum.Enum):
    NEIGHBORHOOD_RESIDENTIAL = "NeighborhoodResidential"
    RESIDENTIAL_THROUGHWAY = "ResidentialThroughway"
    NEIGHBORHOOD_COMMERCIAL = "NeighborhoodCommercial"
    COMMERCIAL_THROUGHWAY = "CommercialThroughway"
    INDUSTRIAL = "Industrial"
    PSP = "PSP"
    HIGHWAY = "Highway"
    OTHERS = "Others"


@dataclass(frozen=True)
class Parcel:
    """A land parcel polygon with a coarse use code.

    area defaults to the polygon's own area; a supplied value must agree
    with the geometry within 1%.
    """

    id: int
    polygon: tuple[tuple[float, float], ...]
    land_use: LandUse
    area: float = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if len(self.polygon) < 3:
            raise ValueError(f"parcel {self.id} polygon needs >= 3 points")
        computed = geo.polygon_area(self.polygon)
        if computed <= 0:
            raise ValueError(f"parcel {self.id} has zero area")
        if self.area is None:
            object.__setattr__(self, "area", computed)
        elif abs(self.area - computed) > 0.01 * computed:
            raise ValueError(
                f"parcel {self.id}: declared area {self.area} is more than 1% "
                f"off the polygon area {computed}"
            )


def transport_context(link) -> TransportContext:
    """Map functional class (and speed, for class 3) to a road context."""
    if link.fclass in (1, 2):
        return TransportContext.HIGHWAY
    if link.fclass == 3:
        if link.speed_mph > 50.0:
            return TransportContext.HIGHWAY
        return TransportContext.THROUGHWAY
    if link.fclass == 4:
        return TransportContext.THROUGHWAY
    return TransportContext.NEIGHBORHOOD_STREET


def build_parcel_index(parcels) -> geo.SpatialIndex:
    return geo.SpatialIndex((p.id, geo.polyline_bbox(p.polygon)) for p in parcels)


def dominant_land_use(
    link,
    parcels,
    adjacency_buffer_m: float = 20.0,
    index: geo.SpatialIndex | None = None,
) -> LandUse:
    """Land use of the largest parcel within the buffer of the link.

    Ties go to the smaller parcel id; no parcel in range means OTHER.
    """
    if index is not None:
        x0, y0, x1, y1 = geo.polyline_bbox(link.geometry)
        b = adjacency_buffer_m
        candidate_ids = set(index.query((x0 - b, y0 - b, x1 + b, y1 + b)))
        candidates = [p for p in parcels if p.id in candidate_ids]
    else:
        candidates = parcels
    best = None
    for parcel in candidates:
        if geo.polygon_polyline_distance(parcel.polygon, link.geometry) <= adjacency_buffer_m:
            if best is None or (parcel.area, -parcel.id) > (best.area, -best.id):
                best = parcel
    if best is None:
        return LandUse.OTHER
    return best.land_use


_NON_HIGHWAY_TABLE = {
    (TransportContext.NEIGHBORHOOD_STREET, LandUse.RESIDENTIAL): StreetType.NEIGHBORHOOD_RESIDENTIAL,
    (TransportContext.THROUGHWAY, LandUse.RESIDENTIAL): StreetType.RESIDENTIAL_THROUGHWAY,
    (TransportContext.NEIGHBORHOOD_STREET, LandUse.COMMERCIAL): StreetType.NEIGHBORHOOD_COMMERCIAL,
    (TransportContext.THROUGHWAY, LandUse.COMMERCIAL): StreetType.COMMERCIAL_THROUGHWAY,
}


def classify_street(context: TransportContext, land_use: LandUse) -> StreetType:
    """Total mapping of (context, land use) to one of the 8 street types."""
    if context is TransportContext.HIGHWAY:
        return StreetType.HIGHWAY
    if land_use is LandUse.INDUSTRIAL:
        return StreetType.INDUSTRIAL
    if land_use is LandUse.PUBLIC:
        return StreetType.PSP
    if land_use is LandUse.OTHER:
        return StreetType.OTHERS
    return _NON_HIGHWAY_TABLE[(context, land_use)]


def classify_network(
    network,
    parcels,
    adjacency_buffer_m: float = 20.0,
    index: geo.SpatialIndex | None = None,
) -> dict[int, StreetType]:
    if index is None:
        index = build_parcel_index(parcels)
    out: dict[int, StreetType] = {}
    for link in network.links:
        context = transport_context(link)
        if context is TransportContext.HIGHWAY:
            # land use cannot change the outcome, skip the geometry work
            out[link.id] = StreetType.HIGHWAY
            continue
        use = dominant_land_use(link, parcels, adjacency_buffer_m, index)
        out[link.id] = classify_street(context, use)
    return out


def load_parcels(path: str) -> list[Parcel]:
    codes = {u.value: u for u in LandUse}
    parcels = []
    for props, ring in geo._load_polygon_features(path):
        if "parcel_id" not in props:
            raise ValueError(f"{path}: parcel feature missing parcel_id")
        code = props.get("land_use")
        if code not in codes:
            raise ValueError(f"{path}: bad land_use {code!r} (want one of R,C,I,P,O)")
        try:
            parcel_id = int(props["parcel_id"])
        except (TypeError, ValueError):
            raise ValueError(
                f"{path}: parcel_id {props['parcel_id']!r} is not an integer"
            ) from None
        parcels.append(Parcel(id=parcel_id, polygon=ring, land_use=codes[code]))
    return parcels


def write_link_types(path: str, street_types: dict[int, StreetType], network) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["link_id", "street_type"])
        for link in network.links:
            writer.writerow([link.id, street_types[link.id].value])


def read_link_types(path: str) -> dict[int, StreetType]:
    by_value = {t.value: t for t in StreetType}
    out: dict[int, StreetType] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[int(row["link_id"])] = by_value[row["street_type"]]
    return out
