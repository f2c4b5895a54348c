"""Binary occupancy grid with vertex-coordinate geometry.

Cell (cx, cy) spans [cx, cx+1] x [cy, cy+1] in vertex space, so all
planner coordinates are integer vertices and every sidedness test is
exact.  Cells outside the raster are free space terminated by a hard
boundary: traces stop at boundary vertices and die when stepped onward.

A trace with side L keeps the obstacle on its right; side R on its left.
Checkerboard vertices host two coincident opposite-facing corners and
traces pass through them diagonally, hugging their own obstacle cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Set, Tuple

import numpy as np

from .geometry import L, R

Vertex = Tuple[int, int]
Vec = Tuple[int, int]

# Quadrant diagonal directions around a vertex.
_NE = (1, 1)
_NW = (-1, 1)
_SW = (-1, -1)
_SE = (1, -1)
_QUADS = (_NE, _NW, _SW, _SE)


def rot_left(d: Vec) -> Vec:
    return (-d[1], d[0])


def rot_right(d: Vec) -> Vec:
    return (d[1], -d[0])


class CornerKind(enum.Enum):
    CONVEX = "convex"
    NONCONVEX = "nonconvex"
    CHECKERBOARD = "checkerboard"
    FLAT = "flat"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class CornerInfo:
    at: Vertex
    kind: CornerKind
    v_crn: Vec                  # ordinal bisector of the occupied sector
    v_edge_l: Vec               # full edge vector to the next corner on the L side
    v_edge_r: Vec               # same on the R side


class GridError(ValueError):
    pass


class Grid:
    """Immutable binary occupancy raster with a lazy corner-step cache."""

    __slots__ = ("width", "height", "_occ", "_step_cache", "_next_cache", "_cells")

    def __init__(self, width: int, height: int, occupied_cells: Iterable[Tuple[int, int]] = ()):
        if width < 1 or height < 1:
            raise GridError(f"grid must be at least 1x1, got {width}x{height}")
        self.width = width
        self.height = height
        occ = bytearray(width * height)
        cells: Set[Tuple[int, int]] = set()
        for cx, cy in occupied_cells:
            if not (0 <= cx < width and 0 <= cy < height):
                raise GridError(f"occupied cell ({cx}, {cy}) outside {width}x{height} grid")
            occ[cx + cy * width] = 1
            cells.add((cx, cy))
        self._occ = bytes(occ)
        self._cells = frozenset(cells)
        # (vertex, incoming dir, side) -> (next corner vertex | None, arrival dir | None)
        self._step_cache: Dict[Tuple[int, int, Vec, int], Tuple[Optional[Vertex], Optional[Vec]]] = {}
        # (vertex, side) -> next corner vertex | None, for the public API
        self._next_cache: Dict[Tuple[int, int, int], Optional[Vertex]] = {}

    # -- occupancy ---------------------------------------------------------

    def occupied(self, cx: int, cy: int) -> bool:
        if 0 <= cx < self.width and 0 <= cy < self.height:
            return self._occ[cx + cy * self.width] != 0
        return False

    @property
    def occupied_cells(self) -> frozenset:
        return self._cells

    @property
    def free_cell_count(self) -> int:
        return self.width * self.height - len(self._cells)

    def as_array(self) -> np.ndarray:
        """Occupancy as a uint8 array indexed [cx, cy]."""
        arr = np.frombuffer(self._occ, dtype=np.uint8).reshape(self.height, self.width)
        return np.ascontiguousarray(arr.T)

    def in_vertex_range(self, v: Vertex) -> bool:
        return 0 <= v[0] <= self.width and 0 <= v[1] <= self.height

    def on_boundary(self, v: Vertex) -> bool:
        return v[0] in (0, self.width) or v[1] in (0, self.height)

    # -- vertex-local geometry ---------------------------------------------

    def quad_cell(self, v: Vertex, diag: Vec) -> Tuple[int, int]:
        return (v[0] + (diag[0] - 1) // 2, v[1] + (diag[1] - 1) // 2)

    def quad_occ(self, v: Vertex, diag: Vec) -> bool:
        return self.occupied(*self.quad_cell(v, diag))

    def occ_mask(self, v: Vertex) -> Tuple[bool, bool, bool, bool]:
        """(NE, NW, SW, SE) occupancy around vertex v."""
        return tuple(self.quad_occ(v, q) for q in _QUADS)  # type: ignore[return-value]

    def corner_kind(self, v: Vertex) -> CornerKind:
        ne, nw, sw, se = self.occ_mask(v)
        n = ne + nw + sw + se
        if n == 1:
            return CornerKind.CONVEX
        if n == 3:
            return CornerKind.NONCONVEX
        if n == 2 and ((ne and sw) or (nw and se)):
            return CornerKind.CHECKERBOARD
        if self.on_boundary(v):
            return CornerKind.BOUNDARY
        return CornerKind.FLAT

    def checker_quad(self, v: Vertex, sigma: int) -> Vec:
        """Occupied quadrant hugged by the (v, sigma) checkerboard corner.

        Convention: L takes the first occupied quadrant counterclockwise
        from east, R the first clockwise, which keeps mirror reflections
        consistent.
        """
        ccw = (_NE, _NW, _SW, _SE)
        order = ccw if sigma == L else tuple(reversed(ccw))
        for q in order:
            if self.quad_occ(v, q):
                return q
        raise GridError(f"vertex {v} is not a checkerboard corner")

    def bisector(self, v: Vertex, hug: Optional[Vec] = None, side_hint: int = L) -> Vec:
        """Smallest integer vector bisecting the occupied sector at v.

        hug names the obstacle quadrant for checkerboard vertices; falls
        back to the side_hint convention when absent.  Flat wall vertices
        get the inward wall normal; vertices with no adjacent obstacle
        get (0, 0).
        """
        occ = [q for q in _QUADS if self.quad_occ(v, q)]
        if not occ:
            return (0, 0)
        if len(occ) == 1:
            return occ[0]
        if len(occ) == 3:
            free = next(q for q in _QUADS if not self.quad_occ(v, q))
            return (-free[0], -free[1])
        if len(occ) == 4:
            return (0, 0)
        a, b = occ
        if a[0] == -b[0] and a[1] == -b[1]:  # checkerboard
            q = hug if hug is not None else self.checker_quad(v, side_hint)
            return q
        return ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)

    def in_occupied_sector(self, v: Vertex, direction: Vec) -> bool:
        """Does the ray from vertex v along direction immediately enter
        obstacle interior?  The occupied sector is the cone into the
        obstacle bounded by, and not including, the two adjacent edges:
        travel exactly along an edge needs both flanking cells occupied.
        """
        dx, dy = direction
        if dx == 0 and dy == 0:
            return False
        sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
        sy = 1 if dy > 0 else (-1 if dy < 0 else 0)
        if sx != 0 and sy != 0:
            return self.quad_occ(v, (sx, sy))
        if sx == 0:
            return self.quad_occ(v, (1, sy)) and self.quad_occ(v, (-1, sy))
        return self.quad_occ(v, (sx, 1)) and self.quad_occ(v, (sx, -1))

    # -- contour walking -----------------------------------------------------

    def _edge_flanks(self, v: Vertex, d: Vec) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Cells flanking the edge from v in direction d: (right, left)."""
        right = self.quad_cell(v, (d[0] + rot_right(d)[0], d[1] + rot_right(d)[1]))
        left = self.quad_cell(v, (d[0] + rot_left(d)[0], d[1] + rot_left(d)[1]))
        return right, left

    def departures(self, v: Vertex, sigma: int) -> Tuple[Vec, ...]:
        """All directions in which a sigma-trace may leave corner v."""
        out = []
        for d in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            right, left = self._edge_flanks(v, d)
            r_occ, l_occ = self.occupied(*right), self.occupied(*left)
            if sigma == L and r_occ and not l_occ:
                out.append(d)
            elif sigma == R and l_occ and not r_occ:
                out.append(d)
        return tuple(out)

    def departure(self, v: Vertex, sigma: int, hug: Optional[Vec] = None) -> Vec:
        """The sigma-side departure direction at corner v.

        hug disambiguates checkerboard corners (and is otherwise checked
        when supplied).  Raises if v is not on an obstacle contour.
        """
        cands = self.departures(v, sigma)
        if not cands:
            raise GridError(f"vertex {v} is not on an obstacle contour")
        if len(cands) == 1:
            return cands[0]
        kind = self.corner_kind(v)
        if kind == CornerKind.CHECKERBOARD:
            q = hug if hug is not None else self.checker_quad(v, sigma)
            for d in cands:
                right, left = self._edge_flanks(v, d)
                hug_cell = right if sigma == L else left
                if hug_cell == self.quad_cell(v, q):
                    return d
        # flat vertex mid-wall: both along-wall directions qualify; pick the
        # one matching hug orientation if given, else the first.
        if hug is not None:
            for d in cands:
                if d == hug:
                    return d
        return cands[0]

    def _turn(self, v: Vertex, d: Vec, sigma: int) -> Vec:
        """Outgoing direction at vertex v for a sigma-trace arriving along d."""
        ar = self.quad_cell(v, (d[0] + rot_right(d)[0], d[1] + rot_right(d)[1]))
        al = self.quad_cell(v, (d[0] + rot_left(d)[0], d[1] + rot_left(d)[1]))
        ar_occ, al_occ = self.occupied(*ar), self.occupied(*al)
        if sigma == L:
            if ar_occ:
                return d if not al_occ else rot_left(d)
            return rot_right(d)
        if al_occ:
            return d if not ar_occ else rot_right(d)
        return rot_left(d)

    def walk_to_corner(self, v: Vertex, d: Vec, sigma: int) -> Tuple[Vertex, Vec]:
        """Walk from v along d to the first corner or boundary vertex.

        v itself is not examined; the walk steps at least once.  Returns
        the stop vertex and the arrival direction.
        """
        x, y = v
        dx, dy = d
        while True:
            x += dx
            y += dy
            if x in (0, self.width) or y in (0, self.height):
                return (x, y), (dx, dy)
            if self._turn((x, y), (dx, dy), sigma) != (dx, dy):
                return (x, y), (dx, dy)

    def edge_leaves_map(self, v: Vertex, d: Vec) -> bool:
        """True if walking from v along d immediately exits the free in-map
        space: the edge runs along a boundary line or out of vertex range."""
        w = (v[0] + d[0], v[1] + d[1])
        if not self.in_vertex_range(w):
            return True
        if d[0] == 0 and v[0] in (0, self.width):
            return True
        if d[1] == 0 and v[1] in (0, self.height):
            return True
        return False

    def step_from(self, v: Vertex, d_in: Optional[Vec], sigma: int,
                  hug: Optional[Vec] = None) -> Tuple[Optional[Vertex], Optional[Vec]]:
        """One trace step: from corner v to the next corner on side sigma.

        d_in is the arrival direction at v when known (it resolves
        checkerboard corners exactly); hug is an obstacle-quadrant hint
        used otherwise.  Returns (next corner, arrival direction there),
        or (None, None) once the trace leaves the map, which happens when
        the outgoing contour edge runs along or beyond the boundary.
        """
        key = (v[0], v[1], d_in if d_in is not None else hug, sigma)
        hit = self._step_cache.get(key)
        if hit is not None:
            return hit
        if d_in is not None:
            d_out = self._turn(v, d_in, sigma)
        else:
            try:
                d_out = self.departure(v, sigma, hug)
            except GridError:
                self._step_cache[key] = (None, None)
                return None, None
        if self.edge_leaves_map(v, d_out):
            res: Tuple[Optional[Vertex], Optional[Vec]] = (None, None)
        else:
            res = self.walk_to_corner(v, d_out, sigma)
        self._step_cache[key] = res
        return res

    def trace_next(self, v: Vertex, sigma: int) -> Optional[Vertex]:
        """Position of the first corner walking the contour from corner v.

        The obstacle stays on the -sigma side.  Map-boundary intersections
        count as corners; stepping onward from a boundary corner returns
        None (out of map).  Results are memoized.
        """
        key = (v[0], v[1], sigma)
        if key in self._next_cache:
            return self._next_cache[key]
        nxt, _ = self.step_from(v, None, sigma)
        self._next_cache[key] = nxt
        return nxt

    def clear_caches(self) -> None:
        self._step_cache.clear()
        self._next_cache.clear()

    # -- corner info ---------------------------------------------------------

    def corner_at(self, v: Vertex, side_hint: int = L) -> CornerInfo:
        """Classify vertex v and report bisector and adjacent edge vectors."""
        if not self.in_vertex_range(v):
            raise GridError(f"vertex {v} outside vertex range")
        kind = self.corner_kind(v)
        hug = None
        if kind == CornerKind.CHECKERBOARD:
            hug = self.checker_quad(v, side_hint)
        v_crn = self.bisector(v, hug=hug, side_hint=side_hint)
        v_edge_l: Vec = (0, 0)
        v_edge_r: Vec = (0, 0)
        if self.departures(v, L):
            d = self.departure(v, L, hug=hug)
            nxt, _ = self.walk_to_corner(v, d, L)
            v_edge_l = (nxt[0] - v[0], nxt[1] - v[1])
        if self.departures(v, R):
            d = self.departure(v, R, hug=hug)
            nxt, _ = self.walk_to_corner(v, d, R)
            v_edge_r = (nxt[0] - v[0], nxt[1] - v[1])
        return CornerInfo(at=v, kind=kind, v_crn=v_crn, v_edge_l=v_edge_l, v_edge_r=v_edge_r)

    def edge_dir(self, v: Vertex, sigma: int, hug: Optional[Vec] = None) -> Vec:
        """Unit direction of the sigma-side contour edge at corner v."""
        return self.departure(v, sigma, hug)

    def convex_corners(self) -> Tuple[Vertex, ...]:
        """All vertices where a taut path can turn: convex and checkerboard."""
        out = []
        for y in range(self.height + 1):
            for x in range(self.width + 1):
                k = self.corner_kind((x, y))
                if k in (CornerKind.CONVEX, CornerKind.CHECKERBOARD):
                    out.append((x, y))
        return tuple(out)

    def __repr__(self) -> str:
        return f"Grid({self.width}x{self.height}, {len(self._cells)} occupied)"


def build_grid(width: int, height: int, occupied_cells: Iterable[Tuple[int, int]]) -> Grid:
    return Grid(width, height, occupied_cells)
