"""Hexagonal two-tier site layout and UAV placement in the central cell."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from uavloc.errors import ConfigError

SQRT3 = math.sqrt(3.0)

# Unit normals of the three pairs of parallel edges of the central cell.
# First-tier neighbours sit at 0, 60, ..., 300 degrees, so each edge is the
# perpendicular bisector towards one of them.
_EDGE_NORMALS = np.array(
    [[math.cos(math.radians(a)), math.sin(math.radians(a))] for a in (0.0, 60.0, 120.0)]
)


@dataclass(frozen=True)
class NetworkLayout:
    """Immutable set of BS sites; ``sites`` has one ``(x, y)`` row per BS."""

    sites: np.ndarray
    isd: float
    h_bs: float
    tiers: int | None = None

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=float).reshape(-1, 2)
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def cell_circumradius(self) -> float:
        return self.isd / SQRT3

    @property
    def cell_area(self) -> float:
        return SQRT3 / 2.0 * self.isd**2


@dataclass(frozen=True)
class UavPosition:
    x: float
    y: float
    h_ut: float


def build_hex_layout(isd: float, tiers: int, h_bs: float) -> NetworkLayout:
    """Sites of a hexagonal grid with ``tiers`` rings around the origin.

    Ordering is by ring, then by angle in ``[0, 360)`` degrees, so site 0 is
    the centre and sites 1..6 are the first tier.
    """
    if tiers not in (0, 1, 2):
        raise ConfigError(f"layout.tiers must be 0, 1 or 2, got {tiers!r}")
    if not isd > 0:
        raise ConfigError(f"layout.isd_m must be positive, got {isd!r}")

    # Axial lattice: basis vectors at 0 and 60 degrees, length isd.
    e1 = np.array([isd, 0.0])
    e2 = np.array([isd / 2.0, isd * SQRT3 / 2.0])
    keyed = []
    for a in range(-tiers, tiers + 1):
        for b in range(-tiers, tiers + 1):
            ring = max(abs(a), abs(b), abs(a + b))
            if ring > tiers:
                continue
            xy = a * e1 + b * e2
            angle = math.degrees(math.atan2(xy[1], xy[0])) % 360.0
            keyed.append((ring, round(angle, 9) if ring else 0.0, xy))
    keyed.sort(key=lambda item: (item[0], item[1]))
    sites = np.array([xy for _, _, xy in keyed])
    return NetworkLayout(sites=sites, isd=float(isd), h_bs=float(h_bs), tiers=tiers)


def in_central_cell(xy, isd: float) -> np.ndarray:
    """Point-in-hexagon test for the cell centred at the origin (flat-to-flat ``isd``)."""
    xy = np.asarray(xy, dtype=float)
    proj = np.abs(xy @ _EDGE_NORMALS.T)
    return np.all(proj <= isd / 2.0, axis=-1)


def sample_uav_position(layout: NetworkLayout, h_ut: float, rng: np.random.Generator) -> UavPosition:
    """Draw one position uniformly over the central cell by rejection."""
    if not h_ut > 0:
        raise ConfigError(f"h_ut must be positive, got {h_ut!r}")
    half_w = layout.isd / 2.0
    half_h = layout.cell_circumradius
    while True:
        x = rng.uniform(-half_w, half_w)
        y = rng.uniform(-half_h, half_h)
        if in_central_cell((x, y), layout.isd):
            return UavPosition(float(x), float(y), float(h_ut))


def sample_uav_positions(layout: NetworkLayout, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised version of :func:`sample_uav_position`; returns an ``(n, 2)`` array."""
    half_w = layout.isd / 2.0
    half_h = layout.cell_circumradius
    accepted = []
    have = 0
    while have < n:
        # bounding-box acceptance is 3/4
        m = int((n - have) * 1.4) + 16
        cand = np.column_stack(
            (rng.uniform(-half_w, half_w, m), rng.uniform(-half_h, half_h, m))
        )
        cand = cand[in_central_cell(cand, layout.isd)]
        accepted.append(cand)
        have += len(cand)
    return np.concatenate(accepted)[:n]


def link_distances(layout: NetworkLayout, uav: UavPosition | np.ndarray, h_ut: float | None = None):
    """2D and 3D distances from the UAV to every site.

    ``uav`` is either a :class:`UavPosition` or an array of planar positions
    with shape ``(..., 2)``, in which case ``h_ut`` must be given. Returns
    ``(d2d, d3d)`` arrays with a trailing axis over sites in layout order.
    """
    if isinstance(uav, UavPosition):
        xy = np.array([uav.x, uav.y])
        h_ut = uav.h_ut
    else:
        xy = np.asarray(uav, dtype=float)
        if h_ut is None:
            raise TypeError("h_ut is required when passing raw coordinates")
    delta = xy[..., None, :] - layout.sites
    d2d = np.hypot(delta[..., 0], delta[..., 1])
    d3d = np.hypot(d2d, h_ut - layout.h_bs)
    return d2d, d3d
