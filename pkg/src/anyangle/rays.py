"""Collision detection for segments on occupancy grids.

Two layers live here.  ``ray_nd`` is the general D-dimensional symmetric
tracer over a boolean raster: it advances all axes that cross a grid
hyperplane at the same generalized distance k together, and while the ray
travels along cell boundaries it requires every adjacent front cell to be
occupied before reporting a hit, which removes the corner and boundary
artifacts of driving-axis tracers.  ``cast_2d``/``project_2d`` are the 2D
planner primitives: exact integer arithmetic end to end, and on collision
they resolve the first contour corner on each side of the hit under the
contour assumption (obstacles sit an infinitesimal step inside their grid
outline, so ties against corners are broken by the occupied-sector
bisector).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import L, R, cross, sgn
from .grid import Grid, Vertex, Vec

_EPS = 1e-9


class RayState(enum.Enum):
    PENDING = "pending"   # not yet cast
    CLEAR = "clear"       # cast reached its target
    BLOCKED = "blocked"   # cast collided


@dataclass
class Ray:
    """A cast record, reused as a sector-ray by the planner."""

    x_s: Vertex
    x_t: Vertex
    state: RayState = RayState.PENDING
    x_l: Optional[Vertex] = None
    x_r: Optional[Vertex] = None
    # exact collision point (numerator pair over col_den) and the initial
    # contour-walk directions toward x_l / x_r; filled on collision
    col_num: Optional[Tuple[int, int]] = None
    col_den: int = 1
    col_quad: Optional[Vec] = None      # blocking quadrant for vertex hits
    walk_l: Optional[Vec] = None
    walk_r: Optional[Vec] = None

    @property
    def vec(self) -> Vec:
        return (self.x_t[0] - self.x_s[0], self.x_t[1] - self.x_s[1])

    def side_corner(self, sigma: int) -> Optional[Vertex]:
        return self.x_l if sigma == L else self.x_r

    def side_walk(self, sigma: int) -> Optional[Vec]:
        return self.walk_l if sigma == L else self.walk_r


class RayError(ValueError):
    pass


# ---------------------------------------------------------------------------
# D-dimensional extended symmetric tracer
# ---------------------------------------------------------------------------

@dataclass
class HitReport:
    collided: bool
    k_hit: float
    cells_checked: List[Tuple[int, ...]] = field(default_factory=list)


def ray_nd(occ: np.ndarray, frm: Sequence, to: Sequence) -> HitReport:
    """Trace a segment through a D-dimensional boolean cell raster.

    Collides only when every front cell of a crossed position is occupied;
    simultaneous hyperplane crossings advance all affected axes together,
    and travel along n cell boundaries enumerates 2^n front cells.
    Endpoints must lie inside the raster's closed bounding box.  Integer
    endpoints are traced with exact rational distances; real endpoints
    fall back to floats with a 1e-9 boundary-coincidence epsilon.
    """
    dims = occ.ndim
    if len(frm) != dims or len(to) != dims:
        raise RayError(f"expected {dims}-dimensional endpoints")
    for d in range(dims):
        if not (0 <= frm[d] <= occ.shape[d] and 0 <= to[d] <= occ.shape[d]):
            raise RayError(f"endpoint outside raster bounding box on axis {d}")

    exact = all(float(frm[d]).is_integer() and float(to[d]).is_integer() for d in range(dims))
    if exact:
        frm = [int(frm[d]) for d in range(dims)]
        to = [int(to[d]) for d in range(dims)]
    delta = [to[d] - frm[d] for d in range(dims)]
    if exact:
        delta_sgn = [sgn(delta[d]) for d in range(dims)]
    else:
        delta_sgn = [0 if abs(delta[d]) < _EPS else sgn(delta[d]) for d in range(dims)]

    root = [int(floor(frm[d])) if delta[d] >= 0 else int(ceil(frm[d])) for d in range(dims)]
    queue: List[Tuple[object, int]] = []   # (k, axis); at most D entries, scanned linearly
    for d in range(dims):
        if delta_sgn[d] != 0:
            queue.append((Fraction(0) if exact else 0.0, d))
            root[d] -= delta_sgn[d]

    # front cell directions, fanned out where the ray rides a boundary
    fronts: List[List[int]] = [[]]
    for d in range(dims):
        err = frm[d] - (root[d] + delta_sgn[d] if delta_sgn[d] != 0 else root[d])
        on_plane = (err == 0) if exact else (abs(err) < _EPS)
        opts = (-1, 1) if (on_plane and delta_sgn[d] == 0) else (delta_sgn[d],)
        fronts = [f + [o] for f in fronts for o in opts]
    front_dirs = [tuple(f) for f in fronts]

    def occupied(cell: Tuple[int, ...]) -> bool:
        for d in range(dims):
            if not (0 <= cell[d] < occ.shape[d]):
                return False
        return bool(occ[cell])

    report = HitReport(collided=False, k_hit=1.0)
    while queue:
        k_min = min(q[0] for q in queue)
        same = [d for k, d in queue if k == k_min]
        queue = [(k, d) for k, d in queue if k != k_min]
        for d in same:
            root[d] += delta_sgn[d]
        for d in same:
            num = root[d] + delta_sgn[d] - frm[d]
            k_next = Fraction(num, delta[d]) if exact else num / delta[d]
            if k_next < 1:
                queue.append((k_next, d))
        hit = True
        for f in front_dirs:
            cell = tuple(root[d] + min(f[d], 0) for d in range(dims))
            report.cells_checked.append(cell)
            if not occupied(cell):
                hit = False
        if hit:
            report.collided = True
            report.k_hit = float(k_min)
            return report
    return report


# ---------------------------------------------------------------------------
# 2D cast / project with corner resolution
# ---------------------------------------------------------------------------

class _Collision:
    __slots__ = ("x_l", "x_r", "col_num", "col_den", "walk_l", "walk_r", "col_quad")

    def __init__(self, x_l: Vertex, x_r: Vertex,
                 col_num: Tuple[int, int], col_den: int,
                 walk_l: Optional[Vec], walk_r: Optional[Vec],
                 col_quad: Optional[Vec] = None):
        self.x_l = x_l
        self.x_r = x_r
        self.col_num = col_num
        self.col_den = col_den
        self.walk_l = walk_l
        self.walk_r = walk_r
        self.col_quad = col_quad


def _first_corner_from(grid: Grid, v0: Vertex, d: Vec, sigma: int) -> Vertex:
    """First corner at or after v0 walking the contour in direction d."""
    if grid.on_boundary(v0):
        return v0
    if grid._turn(v0, d, sigma) != d:
        return v0
    return grid.walk_to_corner(v0, d, sigma)[0]


def _edge_hit_corners(grid: Grid, ray_vec: Vec, axis: int, lo_vertex: Vertex,
                      frac: bool) -> Tuple[Vertex, Vertex, Vec, Vec]:
    """Resolve x_l/x_r for a hit on a grid-line face.

    axis is the crossed axis (0 means the face lies on a vertical line).
    lo_vertex is the face vertex at or below/left of the hit point; frac
    says whether the hit is strictly between lattice vertices.  Also
    returns the walk directions used for each side.
    """
    tangent: Vec = (0, 1) if axis == 0 else (1, 0)
    neg: Vec = (-tangent[0], -tangent[1])
    e_l, e_r = (tangent, neg) if cross(ray_vec, tangent) > 0 else (neg, tangent)
    hi_vertex = (lo_vertex[0] + tangent[0], lo_vertex[1] + tangent[1])

    def start_for(e: Vec) -> Vertex:
        if not frac:
            return lo_vertex
        return hi_vertex if e == tangent else lo_vertex

    x_l = _first_corner_from(grid, start_for(e_l), e_l, L)
    x_r = _first_corner_from(grid, start_for(e_r), e_r, R)
    return x_l, x_r, e_l, e_r


def _corner_hit_corners(grid: Grid, ray_vec: Vec, v: Vertex,
                        front_quad: Vec) -> Tuple[Vertex, Vertex, Optional[Vec], Optional[Vec]]:
    """Resolve x_l/x_r for a collision exactly at vertex v.

    front_quad is the occupied quadrant the ray ran into.  A flat-wall
    vertex is a mid-edge hit on the wall through v; contour corners use
    the bisector rule: the side the ray leans toward has its first corner
    one trace step onward, the other side stays at v.
    """
    ne, nw, sw, se = grid.occ_mask(v)
    count = ne + nw + sw + se
    if count == 4:
        return v, v, None, None     # sealed vertex: cast started inside a pocket
    if count == 2:
        partner_h = (-front_quad[0], front_quad[1])   # same-row pair: horizontal wall
        partner_v = (front_quad[0], -front_quad[1])   # same-column pair: vertical wall
        if grid.quad_occ(v, partner_h):
            return _edge_hit_corners(grid, ray_vec, 1, v, frac=False)
        if grid.quad_occ(v, partner_v):
            return _edge_hit_corners(grid, ray_vec, 0, v, frac=False)
        v_crn = front_quad      # checkerboard: the front cell's corner blocks
    elif count == 3:
        free = next(q for q in ((1, 1), (-1, 1), (-1, -1), (1, -1)) if not grid.quad_occ(v, q))
        v_crn = (-free[0], -free[1])
    else:
        v_crn = front_quad

    walk_l = grid.departure(v, L, hug=front_quad)
    walk_r = grid.departure(v, R, hug=front_quad)

    def trace_side(sigma: int) -> Vertex:
        nxt, _ = grid.step_from(v, None, sigma, hug=front_quad)
        return nxt if nxt is not None else v

    u = cross(v_crn, ray_vec)
    if u < 0:
        return v, trace_side(R), walk_l, walk_r
    if u > 0:
        return trace_side(L), v, walk_l, walk_r
    return v, v, walk_l, walk_r


def _boundary_hit(ray_vec: Vec, axis: int, line: int,
                  other_num: int, other_den: int) -> _Collision:
    """A projection ran into the map boundary: both side corners become
    boundary points (the lattice vertices around the hit)."""
    col_num = (line * other_den, other_num) if axis == 0 else (other_num, line * other_den)
    tangent: Vec = (0, 1) if axis == 0 else (1, 0)
    neg: Vec = (-tangent[0], -tangent[1])
    e_l, e_r = (tangent, neg) if cross(ray_vec, tangent) > 0 else (neg, tangent)
    if other_num % other_den == 0:
        o = other_num // other_den
        v = (line, o) if axis == 0 else (o, line)
        return _Collision(v, v, col_num, other_den, e_l, e_r)
    lo = other_num // other_den
    lo_v = (line, lo) if axis == 0 else (lo, line)
    hi_v = (line, lo + 1) if axis == 0 else (lo + 1, line)
    if e_l == tangent:
        return _Collision(hi_v, lo_v, col_num, other_den, e_l, e_r)
    return _Collision(lo_v, hi_v, col_num, other_den, e_l, e_r)


def _los_2d(grid: Grid, origin: Vertex, direction: Vec,
            bounded: bool) -> Optional[_Collision]:
    """Integer 2D traversal from origin along direction.

    bounded traversals (casts) stop at origin + direction and return None
    when it is reached; unbounded ones (projections) always return a
    collision, at latest with the map boundary.
    """
    ox, oy = origin
    dx, dy = direction
    if dx == 0 and dy == 0:
        return None
    sx, sy = sgn(dx), sgn(dy)

    if dx == 0 or dy == 0:
        # travel along a grid line: both flanking cells must be occupied
        axis = 0 if dy == 0 else 1
        s = sx if axis == 0 else sy
        pos0 = ox if axis == 0 else oy
        lc = oy if axis == 0 else ox
        steps = abs(dx) + abs(dy)
        bound = (grid.width if axis == 0 else grid.height) if s > 0 else 0
        i = 0
        while True:
            if bounded and i >= steps:
                return None
            n = pos0 + s * i
            if not bounded and n == bound:
                return _boundary_hit(direction, axis, n, lc, 1)
            c = n + (s - 1) // 2
            cells = ((c, lc), (c, lc - 1)) if axis == 0 else ((lc, c), (lc - 1, c))
            if grid.occupied(*cells[0]) and grid.occupied(*cells[1]):
                hit_v = (n, lc) if axis == 0 else (lc, n)
                x_l, x_r, e_l, e_r = _edge_hit_corners(grid, direction, axis, hit_v, frac=False)
                return _Collision(x_l, x_r, hit_v, 1, e_l, e_r)
            i += 1

    adx, ady = abs(dx), abs(dy)
    prod = adx * ady
    i = j = 0   # vertical / horizontal crossings done
    while True:
        kx = i * ady
        ky = j * adx
        if bounded and min(kx, ky) >= prod:
            return None
        if kx == ky:
            v = (ox + sx * i, oy + sy * j)
            if not bounded:
                out_x = (sx > 0 and v[0] == grid.width) or (sx < 0 and v[0] == 0)
                out_y = (sy > 0 and v[1] == grid.height) or (sy < 0 and v[1] == 0)
                if out_x or out_y:
                    return _Collision(v, v, v, 1, None, None)
            front = grid.quad_cell(v, (sx, sy))
            if grid.occupied(*front):
                x_l, x_r, w_l, w_r = _corner_hit_corners(grid, direction, v, (sx, sy))
                return _Collision(x_l, x_r, v, 1, w_l, w_r, col_quad=(sx, sy))
            i += 1
            j += 1
        elif kx < ky:
            n = ox + sx * i
            ynum = oy * adx + dy * i
            if not bounded and ((sx > 0 and n == grid.width) or (sx < 0 and n == 0)):
                return _boundary_hit(direction, 0, n, ynum, adx)
            row = ynum // adx       # y at the crossing is strictly non-integer
            col = n + (sx - 1) // 2
            if grid.occupied(col, row):
                x_l, x_r, e_l, e_r = _edge_hit_corners(grid, direction, 0, (n, row), frac=True)
                return _Collision(x_l, x_r, (n * adx, ynum), adx, e_l, e_r)
            i += 1
        else:
            n = oy + sy * j
            xnum = ox * ady + dx * j
            if not bounded and ((sy > 0 and n == grid.height) or (sy < 0 and n == 0)):
                return _boundary_hit(direction, 1, n, xnum, ady)
            col = xnum // ady
            row = n + (sy - 1) // 2
            if grid.occupied(col, row):
                x_l, x_r, e_l, e_r = _edge_hit_corners(grid, direction, 1, (col, n), frac=True)
                return _Collision(x_l, x_r, (xnum, n * ady), ady, e_l, e_r)
            j += 1


def cast_2d(grid: Grid, ray: Ray) -> Ray:
    """Cast a pending ray between in-map vertices; no-op if already cast."""
    if ray.state != RayState.PENDING:
        return ray
    for p in (ray.x_s, ray.x_t):
        if not grid.in_vertex_range(p):
            raise RayError(f"ray endpoint {p} outside map")
    hit = _los_2d(grid, ray.x_s, ray.vec, bounded=True)
    if hit is None:
        ray.state = RayState.CLEAR
    else:
        ray.state = RayState.BLOCKED
        ray.x_l = hit.x_l
        ray.x_r = hit.x_r
        ray.col_num = hit.col_num
        ray.col_den = hit.col_den
        ray.walk_l = hit.walk_l
        ray.walk_r = hit.walk_r
    return ray


def project_2d(grid: Grid, ray: Ray) -> Ray:
    """Extend a clear ray beyond its target until it collides.

    In a rectangular map every projection collides at latest at the map
    boundary, whose intersection counts as both first corners.  A ray
    whose side corners are already known is left unchanged.
    """
    if ray.x_l is not None:
        return ray      # already resolved (collided casts fill x_l themselves)
    if ray.vec == (0, 0):
        raise RayError("cannot project a zero-length ray")
    hit = _los_2d(grid, ray.x_t, ray.vec, bounded=False)
    assert hit is not None
    ray.x_l = hit.x_l
    ray.x_r = hit.x_r
    ray.col_num = hit.col_num
    ray.col_den = hit.col_den
    ray.col_quad = hit.col_quad
    ray.walk_l = hit.walk_l
    ray.walk_r = hit.walk_r
    return ray
