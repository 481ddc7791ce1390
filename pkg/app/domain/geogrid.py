"""
Regular latitude/longitude grids: bilinear regridding, point sampling at
county centroids and spherical cell areas.

Interpolation never extrapolates: points or target grids outside the
source hull raise :class:`DomainCoverageError`.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from app.domain.errors import AlignmentError, DomainCoverageError
from app.domain.models import GriddedField, GridSpec

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

# Coordinates within this many degrees of the hull edge count as inside.
_EDGE_TOLERANCE_DEG = 1e-9


def normalize_longitude(lon: float) -> float:
    """Map any longitude into [-180, 180)."""
    return ((float(lon) + 180.0) % 360.0) - 180.0


def contains(spec: GridSpec, lat: float, lon: float) -> bool:
    tol = _EDGE_TOLERANCE_DEG
    return (
        spec.lat_start - tol <= lat <= spec.lat_end + tol
        and spec.lon_start - tol <= lon <= spec.lon_end + tol
    )


def _snap(coords: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Snap coordinates that coincide with a node (up to rounding) onto it."""
    idx = np.abs(coords[:, None] - nodes[None, :]).argmin(axis=1)
    near = np.abs(coords - nodes[idx]) <= _EDGE_TOLERANCE_DEG
    return np.where(near, nodes[idx], coords)


def _interpolator(field: GriddedField) -> RegularGridInterpolator:
    spec = field.spec
    # (lat, lon, time) so one lookup returns the whole time series
    return RegularGridInterpolator(
        (spec.lats, spec.lons),
        np.moveaxis(field.values, 0, -1),
        method="linear",
        bounds_error=True,
    )


def regrid_bilinear(field: GriddedField, target: GridSpec) -> GriddedField:
    """
    Bilinearly interpolate ``field`` onto ``target``, one time step at a time.

    Raises:
        DomainCoverageError: if any target node lies outside the source grid.
    """
    if target == field.spec:
        return field.model_copy(update={"values": field.values.copy()})

    source = field.spec
    for lat, lon in ((target.lat_start, target.lon_start), (target.lat_end, target.lon_end)):
        if not contains(source, lat, lon):
            raise DomainCoverageError(
                f"target grid [{target.lat_start}..{target.lat_end}] x [{target.lon_start}..{target.lon_end}] "
                f"extends outside source grid [{source.lat_start}..{source.lat_end}] x "
                f"[{source.lon_start}..{source.lon_end}] of {field.provenance.tag}"
            )

    lats = np.clip(_snap(target.lats, source.lats), source.lat_start, source.lat_end)
    lons = np.clip(_snap(target.lons, source.lons), source.lon_start, source.lon_end)
    grid_lat, grid_lon = np.meshgrid(lats, lons, indexing="ij")
    points = np.column_stack([grid_lat.ravel(), grid_lon.ravel()])

    sampled = _interpolator(field)(points)  # (nlat*nlon, time)
    values = np.moveaxis(sampled.reshape(target.lat_count, target.lon_count, -1), -1, 0)

    logger.debug(
        f"Regridded {field.variable} of {field.provenance.tag} from "
        f"{source.lat_count}x{source.lon_count} to {target.lat_count}x{target.lon_count}"
    )
    return field.model_copy(update={"spec": target, "values": np.ascontiguousarray(values)})


def sample_at_point(field: GriddedField, lat: float, lon: float) -> np.ndarray:
    """
    Bilinear sample of every time step at one point.

    Raises:
        DomainCoverageError: if the point lies outside the grid.
    """
    lon = normalize_longitude(lon)
    spec = field.spec
    if not contains(spec, lat, lon):
        raise DomainCoverageError(
            f"point ({lat}, {lon}) outside grid [{spec.lat_start}..{spec.lat_end}] x "
            f"[{spec.lon_start}..{spec.lon_end}]"
        )
    lat_s = float(np.clip(_snap(np.array([lat]), spec.lats)[0], spec.lat_start, spec.lat_end))
    lon_s = float(np.clip(_snap(np.array([lon]), spec.lons)[0], spec.lon_start, spec.lon_end))
    return _interpolator(field)(np.array([[lat_s, lon_s]]))[0]


def cell_area(lat_center: float, dlat: float, dlon: float) -> float:
    """
    Area (km2) of a lat/lon cell: R^2 * dlon * (sin(phi2) - sin(phi1)).
    """
    phi1 = math.radians(lat_center - dlat / 2.0)
    phi2 = math.radians(lat_center + dlat / 2.0)
    return EARTH_RADIUS_KM ** 2 * math.radians(dlon) * (math.sin(phi2) - math.sin(phi1))


def normalize_longitudes(lons: Sequence[float]) -> np.ndarray:
    """Vectorized [0, 360) -> [-180, 180) conversion."""
    return (np.asarray(lons, dtype=float) + 180.0) % 360.0 - 180.0


def common_grid(specs: Sequence[GridSpec]) -> GridSpec:
    """
    Coarsest-spacing grid over the intersection of several grids' domains,
    used as the common target when ensemble members differ in resolution.
    """
    if not specs:
        raise AlignmentError("no grids to intersect", module="geogrid")
    if all(s == specs[0] for s in specs):
        return specs[0]
    lat_lo = max(s.lat_start for s in specs)
    lat_hi = min(s.lat_end for s in specs)
    lon_lo = max(s.lon_start for s in specs)
    lon_hi = min(s.lon_end for s in specs)
    lat_step = max(s.lat_step for s in specs)
    lon_step = max(s.lon_step for s in specs)
    lat_count = int(math.floor((lat_hi - lat_lo) / lat_step + 1e-9)) + 1
    lon_count = int(math.floor((lon_hi - lon_lo) / lon_step + 1e-9)) + 1
    if lat_count < 2 or lon_count < 2:
        raise DomainCoverageError("member grids do not share a common domain of at least 2x2 nodes")
    return GridSpec(
        lat_start=lat_lo, lat_step=lat_step, lat_count=lat_count,
        lon_start=lon_lo, lon_step=lon_step, lon_count=lon_count,
    )


def to_common_grid(fields: Iterable[GriddedField], target: GridSpec | None = None) -> list[GriddedField]:
    """Regrid every field onto ``target`` (or onto :func:`common_grid` of their specs)."""
    fields = list(fields)
    if not fields:
        return []
    target = target or common_grid([f.spec for f in fields])
    return [regrid_bilinear(f, target) for f in fields]
