"""Non-convex navigation primitives in discrete (octant) form.

Headings on an occupancy grid are discretized into octants so that the
pledge-style winding bookkeeping needs no trigonometry: cardinal
directions map to even values and the open ranges between them to odd
values, monotone over one rotation.  The frame follows mobile-robot
convention with north along +x, so south/east/north/west discretize to
0/2/4/6.

A target-pledge accumulates the difference between changes of the
goal-heading and changes of the trace direction; a trace may leave the
contour and cast when the accumulated value crosses zero against its
side.  The source-pledge mirrors this against the last turning point and
gates placement of new turning points.  ``pledge_navigate`` combines the
pieces into a complete (at the expense of optimality) navigator that
examines all casts and traces breadth-first.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from math import dist
from typing import Deque, List, Optional, Sequence, Tuple

from .geometry import L, R
from .grid import CornerKind, Grid, Vertex, Vec
from .rays import Ray, RayState, cast_2d


def octant(v: Sequence[int]) -> int:
    """Discrete heading of a nonzero vector: S,E,N,W -> 0,2,4,6 (north=+x),
    strictly interior directions -> 1,3,5,7."""
    x, y = v[0], v[1]
    if x == 0 and y == 0:
        raise ValueError("octant of zero vector")
    if y == 0:
        return 0 if x < 0 else 4
    if x == 0:
        return 2 if y < 0 else 6
    if x < 0 and y < 0:
        return 1
    if x > 0 and y < 0:
        return 3
    if x > 0 and y > 0:
        return 5
    return 7


def _wrap(d: int) -> int:
    """Constrain a discrete heading difference to [-4, 4)."""
    return (d + 4) % 8 - 4


@dataclass
class PledgeState:
    """Discrete pledge accumulators and the previous-heading caches."""

    z_t: Optional[int] = None   # target-pledge
    z_s: Optional[int] = None   # source-pledge
    z_t_prev: int = 0
    z_s_prev: int = 0
    z_e_prev: int = 0

    def copy(self) -> "PledgeState":
        return PledgeState(self.z_t, self.z_s, self.z_t_prev, self.z_s_prev, self.z_e_prev)


def target_pledge_init(v_target: Sequence[int], edge0: Sequence[int]) -> PledgeState:
    """Start a target-pledge at a collision point.

    v_target points from the collision point to the target; edge0 is the
    initial trace direction.  Vectors may be scaled by any positive factor
    (useful for exact fractional collision points).
    """
    z_t0 = octant(v_target)
    z_e0 = octant(edge0)
    return PledgeState(z_t=_wrap(z_t0 - z_e0), z_t_prev=z_t0, z_e_prev=z_e0)


def source_pledge_init(v_from_source: Sequence[int], edge0: Sequence[int]) -> PledgeState:
    """Start a source-pledge at a collision point; v_from_source points
    from the source point to the collision point."""
    z_s0 = octant(v_from_source)
    z_e0 = octant(edge0)
    return PledgeState(z_s=_wrap(z_s0 - z_e0), z_s_prev=z_s0, z_e_prev=z_e0)


def pledge_advance(s: PledgeState, edge_next: Sequence[int],
                   v_target: Optional[Sequence[int]] = None,
                   v_from_source: Optional[Sequence[int]] = None) -> PledgeState:
    """Update the tracked pledges on arrival at a corner.

    edge_next is the outgoing trace direction at the corner; v_target /
    v_from_source are the new heading vectors for whichever pledges the
    state tracks.  Heading changes are differenced and wrapped so angles
    are never double counted.
    """
    z_e = octant(edge_next)
    d_e = _wrap(z_e - s.z_e_prev)
    if s.z_t is not None:
        if v_target is None:
            raise ValueError("state tracks a target-pledge: v_target required")
        z_t = octant(v_target)
        s.z_t += _wrap(z_t - s.z_t_prev) - d_e
        s.z_t_prev = z_t
    if s.z_s is not None:
        if v_from_source is None:
            raise ValueError("state tracks a source-pledge: v_from_source required")
        z_s = octant(v_from_source)
        s.z_s += _wrap(z_s - s.z_s_prev) - d_e
        s.z_s_prev = z_s
    s.z_e_prev = z_e
    return s


def target_pledge_step(s: PledgeState, x: Vertex, x_t: Vertex,
                       edge_next: Sequence[int]) -> PledgeState:
    return pledge_advance(s, edge_next, v_target=(x_t[0] - x[0], x_t[1] - x[1]))


def source_pledge_step(s: PledgeState, x: Vertex, x_s: Vertex,
                       edge_next: Sequence[int]) -> PledgeState:
    return pledge_advance(s, edge_next, v_from_source=(x[0] - x_s[0], x[1] - x_s[1]))


def target_pledge_on_prune(s: PledgeState, v_new_target: Sequence[int]) -> PledgeState:
    """Re-aim the target-pledge at the exposed target after a prune."""
    z_tt = octant(v_new_target)
    s.z_t += _wrap(z_tt - s.z_t_prev)
    s.z_t_prev = z_tt
    return s


def source_pledge_on_prune(s: PledgeState, v_from_new_source: Sequence[int]) -> PledgeState:
    z_ss = octant(v_from_new_source)
    s.z_s += _wrap(z_ss - s.z_s_prev)
    s.z_s_prev = z_ss
    return s


def place_check(s: PledgeState, sigma: int) -> bool:
    """True when a sigma-sided trace may place a turning point here."""
    if s.z_s is None:
        raise ValueError("state tracks no source-pledge")
    return sigma * s.z_s < 0


def source_pledge_on_place(s: PledgeState) -> PledgeState:
    """A placed turning point becomes the new source: accumulator resets."""
    s.z_s = 0
    return s


# ---------------------------------------------------------------------------
# Greedy breadth-first navigator
# ---------------------------------------------------------------------------

class NavStatus(enum.Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"


@dataclass
class NavResult:
    status: NavStatus
    path: List[Vertex]
    casts: int
    trace_steps: int

    @property
    def cost(self) -> float:
        return sum(dist(a, b) for a, b in zip(self.path, self.path[1:]))


def _cast_leave_ok(grid: Grid, x: Vertex) -> bool:
    k = grid.corner_kind(x)
    return k in (CornerKind.CONVEX, CornerKind.CHECKERBOARD)


def pledge_navigate(grid: Grid, start: Vertex, goal: Vertex,
                    step_budget: Optional[int] = None) -> NavResult:
    """Find some start-goal polyline by casts plus pledge-guided traces.

    All casts and trace steps share one FIFO so they are examined
    simultaneously; each trace leaves the contour and casts at corners
    where its side times the target-pledge turns negative.  The result is
    feasible, not shortest.  Unreachable goals exhaust the budget (the
    method is not refutation-complete).
    """
    if step_budget is None:
        step_budget = 50 * grid.free_cell_count
    if start == goal:
        return NavResult(NavStatus.FOUND, [start], 0, 0)

    casts = 0
    trace_steps = 0
    # items: ("cast", path, frm, to)
    #      | ("trace", sigma, pos, d_out, state, path, anchor, target, visited)
    # where d_out is the outgoing contour direction at pos; a trace walks
    # the contour of whatever blocked the cast (frm -> target) and, at
    # corners where the pledge allows leaving, casts anchor -> corner.
    # visited holds (pos, d_out, z_t) marks for exact cycle termination.
    queue: Deque[tuple] = deque()
    queue.append(("cast", (start,), start, goal))
    seen_casts = set()
    seen_traces = set()
    budget = step_budget

    def enqueue_cast(path: tuple, frm: Vertex, to: Vertex) -> None:
        if frm != to and (frm, to) not in seen_casts:
            seen_casts.add((frm, to))
            queue.append(("cast", path, frm, to))

    def spawn_traces(path: tuple, frm: Vertex, target: Vertex, ray: Ray) -> None:
        den = ray.col_den
        col = ray.col_num
        for sigma in (L, R):
            x0 = ray.side_corner(sigma)
            walk = ray.side_walk(sigma)
            if x0 is None or walk is None:
                continue
            key = (sigma, x0, frm, target)
            if key in seen_traces:
                continue
            seen_traces.add(key)
            # exact target heading from the collision point, scaled by den
            v_tgt0 = (target[0] * den - col[0], target[1] * den - col[1])
            if v_tgt0 == (0, 0):
                continue
            state = target_pledge_init(v_tgt0, walk)
            if (x0[0] * den, x0[1] * den) != col:
                # straight walk from the collision onto its first corner
                v_t = (target[0] - x0[0], target[1] - x0[1])
                if v_t == (0, 0):
                    continue
                d_out = grid._turn(x0, walk, sigma) if not grid.on_boundary(x0) else walk
                pledge_advance(state, d_out, v_target=v_t)
            else:
                d_out = walk    # the collision corner itself starts the trace
            visited = {(x0, d_out, state.z_t)}
            queue.append(("trace", sigma, x0, d_out, state, path, frm, target, visited))

    deferred: Deque[tuple] = deque()
    while queue or deferred:
        if not queue:
            # pledge-guided search stalled: sweep the remembered corners
            path, frm, to = deferred.popleft()
            enqueue_cast(path, frm, to)
            continue
        if budget <= 0:
            return NavResult(NavStatus.EXHAUSTED, [], casts, trace_steps)
        budget -= 1
        item = queue.popleft()
        if item[0] == "cast":
            _, path, frm, to = item
            ray = cast_2d(grid, Ray(frm, to))
            casts += 1
            if ray.state == RayState.CLEAR:
                if to == goal:
                    return NavResult(NavStatus.FOUND, list(path) + [goal], casts, trace_steps)
                enqueue_cast(path + (to,), to, goal)
            else:
                spawn_traces(path, frm, to, ray)
        else:
            _, sigma, pos, d_out, state, path, anchor, target, visited = item
            trace_steps += 1
            if grid.edge_leaves_map(pos, d_out):
                # the contour continues along or beyond the boundary: the
                # trace ends here, so offer the leave cast unconditionally
                # (the pledge descent can never re-arm at a dead end)
                if _cast_leave_ok(grid, pos) and pos != anchor:
                    enqueue_cast(path, anchor, pos)
                continue
            if _cast_leave_ok(grid, pos) and pos != anchor:
                if sigma * state.z_t < 0:
                    enqueue_cast(path, anchor, pos)
                else:
                    # remembered for the sweep phase: if the pledge-guided
                    # search stalls, stale corners are retried breadth-first
                    deferred.append((path, anchor, pos))
            if sigma * state.z_t < -16:
                continue    # two full laps below zero: every corner was offered
            nxt, d_arr = grid.walk_to_corner(pos, d_out, sigma)
            if d_arr[0] * (target[0] - pos[0]) + d_arr[1] * (target[1] - pos[1]) > 0 and \
                    (pos[0] == target[0] == nxt[0] or pos[1] == target[1] == nxt[1]):
                between = abs(target[0] - pos[0]) + abs(target[1] - pos[1]) < \
                    abs(nxt[0] - pos[0]) + abs(nxt[1] - pos[1])
                if between:
                    nxt, d_arr = target, d_out      # the walk runs over the target
            d_out_next = grid._turn(nxt, d_arr, sigma) if not grid.on_boundary(nxt) else d_arr
            v_t = (target[0] - nxt[0], target[1] - nxt[1])
            if v_t == (0, 0):
                # walked onto the target vertex: offer the leave cast and keep
                # walking with only the edge part of the update; the heading
                # cache stays on the approach value (a lap with the target on
                # the hugged contour is pledge-neutral, so cycle detection
                # below terminates the trace)
                enqueue_cast(path, anchor, target)
                z_e = octant(d_out_next)
                state.z_t += -_wrap(z_e - state.z_e_prev)
                state.z_e_prev = z_e
            else:
                pledge_advance(state, d_out_next, v_target=v_t)
            mark = (nxt, d_out_next, state.z_t)
            if mark in visited:
                continue
            visited.add(mark)
            queue.append(("trace", sigma, nxt, d_out_next, state, path, anchor, target, visited))
    return NavResult(NavStatus.EXHAUSTED, [], casts, trace_steps)
