"""Optimal any-angle planner with delayed line-of-sight checks.

Instead of verifying sight lines at expansion time, casting queries are
queued over links between a source tree rooted at the start and a target
tree rooted at the goal; collided casts spawn contour traces that place
turning points, phantom points and guard nodes while keeping per-parent
angular progression, tautness, occupied-sector and angular-sector rules.
Cost estimates grow monotonically, so the first time a cast joins two
verified chains the path is optimal.

The search is deterministic: the open-list breaks f ties by insertion
order and every collection iterates in insertion order.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .geometry import L, R, SRC, TGT, cross, dot, is_rev, is_taut, is_vis, ray_not_crossed, sgn
from .grid import CornerKind, Grid, Vertex, Vec
from .rays import Ray, RayState
from .searchtree import (
    Arena, BACK, CAST, DEAD, EXP, EXP_UNK, FRONT, GUARD, INF, Link, Node,
    Nodelet, NodeType, Pos, Query, TEMP, TRACE, TraceState, UNK, VIS,
)

NUM_INTERRUPT = 10      # corners traced before a trace is requeued
_REL_TOL = 1e-9


def _cmp(a: float, b: float) -> int:
    """Three-way float comparison with relative tolerance."""
    tol = _REL_TOL * max(1.0, abs(a), abs(b))
    if a < b - tol:
        return -1
    if a > b + tol:
        return 1
    return 0


class PlanStatus(enum.Enum):
    FOUND = "found"
    NO_PATH_BUDGET = "no_path_budget"
    NO_PATH_TRAPPED = "no_path_trapped"


@dataclass
class PlanStats:
    polls: int = 0
    casts: int = 0
    collided_casts: int = 0
    trace_corners: int = 0
    max_open: int = 0


@dataclass
class PlanResult:
    status: PlanStatus
    path: List[Vertex] = field(default_factory=list)
    cost: float = INF
    stats: PlanStats = field(default_factory=PlanStats)

    @property
    def found(self) -> bool:
        return self.status == PlanStatus.FOUND


def _vsub(a: Vertex, b: Vertex) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


class Planner:
    """One shortest-path query; not reusable across runs."""

    def __init__(self, grid: Grid, start: Vertex, goal: Vertex,
                 poll_budget: int = 1_000_000, record_events: bool = False):
        self.grid = grid
        self.start = start
        self.goal = goal
        self.budget = poll_budget
        self.arena = Arena(grid, record_events=record_events)
        self.arena.x_start = start
        self.arena.x_goal = goal
        self.path: List[Vertex] = []
        self.stats = PlanStats()
        self._poll_f: Optional[float] = None
        self.monotone_violations: List[Tuple[float, float]] = []

    # -- helpers ---------------------------------------------------------------

    def _node_of(self, link: Link, kappa: int) -> Node:
        parent = link.any_link(kappa)
        assert parent is not None, "link missing its root/leaf side"
        return parent.anchor

    def _queue(self, y: str, f: float, link: Link) -> None:
        if self._poll_f is not None and f < self._poll_f - _REL_TOL * max(1.0, abs(f)):
            self.monotone_violations.append((self._poll_f, f))
        self.arena.queue(y, f, link)

    def _edge_dir(self, x: Vertex, sigma: int, d: Optional[TraceState] = None) -> Vec:
        """Direction of the sigma-side contour edge at x.  The running
        trace resolves its own checkerboard passage from the carried
        arrival direction."""
        if d is not None and d.x == x:
            if sigma == d.sigma and d.d_in is not None:
                return self.grid._turn(x, d.d_in, d.sigma)
            if sigma == -d.sigma and d.d_in is not None:
                return (-d.d_in[0], -d.d_in[1])
            return self.grid.departure(x, sigma, hug=d.hug)
        return self.grid.departure(x, sigma)

    def _bisector(self, x: Vertex, side_hint: int = L) -> Vec:
        return self.grid.bisector(x, side_hint=side_hint)

    def _trace_step(self, d: TraceState) -> None:
        nxt, d_arr = self.grid.step_from(d.x, d.d_in, d.sigma, hug=d.hug)
        d.x = nxt
        d.d_in = d_arr
        d.hug = None

    def _trace_entry(self, ray: Ray, sigma: int) -> Optional[TraceState]:
        """Trace state at the first corner on one side of a collision.

        A collision exactly at the cast's source vertex (the source hugs
        the obstacle) starts the walk one corner onward: under the contour
        assumption the endpoint lies an infinitesimal step off the contour
        and the walk passes it.
        """
        x0 = ray.side_corner(sigma)
        walk = ray.side_walk(sigma)
        if x0 is None:
            return None
        col = ray.col_num
        den = ray.col_den
        if (x0[0] * den, x0[1] * den) == col:
            d = self.arena.create_trace(x0, sigma, d_in=None, hug=ray.col_quad)
        else:
            d = self.arena.create_trace(x0, sigma, d_in=walk)
        if d.x == ray.x_s:
            self._trace_step(d)
            if d.x is None:
                return None
        return d

    def _next_corner(self, x: Vertex, sigma: int) -> Optional[Vertex]:
        nxt, _ = self.grid.step_from(x, None, sigma)
        return nxt

    # -- main loop ---------------------------------------------------------------

    def run(self) -> PlanResult:
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
        if not (self.grid.in_vertex_range(self.start) and self.grid.in_vertex_range(self.goal)):
            raise ValueError("start or goal outside the map")
        if self.start == self.goal:
            return self._result(PlanStatus.FOUND, [self.start])
        if all(self.grid.quad_occ(self.start, q) for q in ((1, 1), (-1, 1), (-1, -1), (1, -1))):
            return self._result(PlanStatus.NO_PATH_TRAPPED)

        found = self.initial_caster()
        while not found:
            if len(self.arena.open) == 0:
                return self._result(PlanStatus.NO_PATH_TRAPPED)
            if self.stats.polls >= self.budget:
                return self._result(PlanStatus.NO_PATH_BUDGET)
            q = self.arena.poll()
            self.stats.polls += 1
            self._poll_f = q.f
            self.arena.log("poll", q.y, q.f, q.link.uid)
            if q.y == TRACE:
                self.tracer_from_link(q.link)
            elif self.caster(q.link):
                found = True
            if self.arena.overlap:
                self.shrink_source_tree()
        return self._result(PlanStatus.FOUND, self.path)

    def _result(self, status: PlanStatus, raw_path: Optional[List[Vertex]] = None) -> PlanResult:
        self.stats.casts = self.arena.casts_run
        self.stats.max_open = self.arena.open.max_size
        if status != PlanStatus.FOUND:
            return PlanResult(status, [], INF, self.stats)
        path = self.extract_path(raw_path if raw_path is not None else self.path)
        cost = sum(math.dist(a, b) for a, b in zip(path, path[1:]))
        return PlanResult(status, path, cost, self.stats)

    @staticmethod
    def extract_path(raw: List[Vertex]) -> List[Vertex]:
        """Goal-to-start walk order reversed, consecutive duplicates and
        collinear interior vertices removed."""
        pts: List[Vertex] = []
        for p in raw:
            if not pts or pts[-1] != p:
                pts.append(p)
        out: List[Vertex] = []
        for p in pts:
            while len(out) >= 2 and cross(_vsub(out[-1], out[-2]), _vsub(p, out[-1])) == 0 \
                    and dot(_vsub(out[-1], out[-2]), _vsub(p, out[-1])) >= 0:
                out.pop()
            out.append(p)
        out.reverse()
        return out

    # -- initialization -------------------------------------------------------------

    def initial_caster(self) -> bool:
        lam = self.arena.get_ray(self.start, self.goal)
        self.arena.cast(lam)
        if lam.state == RayState.CLEAR:
            self.path = [self.goal, self.start]
            return True
        self.stats.collided_casts += 1
        lam_rev = self.arena.get_ray(self.goal, self.start)
        n_goal = self.arena.get_node(self.goal, VIS, L, TGT)
        self.initial_trace(L, lam, lam_rev, n_goal)
        self.initial_trace(R, lam, lam_rev, n_goal)
        return False

    def initial_trace(self, sigma: int, lam: Ray, lam_rev: Ray, n_goal: Node) -> None:
        d = self._trace_entry(lam, sigma)
        if d is None:
            return

        tlink_s = self.arena.create_link(d.tnode_s)
        tlink_s.set_ray(sigma, lam_rev)
        tlink_s.set_ray(-sigma, lam)
        v_ray = lam.vec

        # start node with two 180-degree angular sectors
        n_s = self.arena.get_node(self.start, VIS, sigma, SRC)
        l_s = self.arena.create_link(n_s)
        l_s.set_ray(sigma, lam)
        l_s.set_ray(-sigma, lam_rev)
        l_s.c = 0.0
        self.arena.connect(TGT, l_s, tlink_s)

        l_ss = self.arena.create_link(n_s)
        l_ss.c = 0.0
        self.arena.connect(TGT, l_ss, l_s)

        tlink_t = self.arena.create_link(d.tnode_t)
        l_goal = self.arena.create_link(n_goal)
        l_goal.c = 0.0
        self.arena.connect(TGT, tlink_t, l_goal)

        self.arena.create_nodelet(tlink_s, v_ray, BACK, d.m_src)
        self.arena.create_nodelet(tlink_t, (-v_ray[0], -v_ray[1]), BACK, d.m_tgt)
        self.tracer(d)

    # -- casting queries ---------------------------------------------------------------

    def caster(self, link: Link) -> bool:
        n_s = self._node_of(link, SRC)
        n_t = self._node_of(link, TGT)
        lam = self.arena.get_ray(n_s.x, n_t.x)
        self.arena.cast(lam)
        if lam.state == RayState.CLEAR:
            return self.cast_reached(lam, link)
        self.stats.collided_casts += 1
        self.cast_collided(lam, link)
        return False

    def cast_reached(self, lam: Ray, link: Link) -> bool:
        n_s = self._node_of(link, SRC)
        n_t = self._node_of(link, TGT)
        if n_s.eta is VIS and n_t.eta is VIS:
            self.path_found(link)
            return True
        if n_t.eta is DEAD:
            self.discard_reached(link)
        elif n_t.eta is TEMP:
            self.reached_temp(lam, link)
        elif n_s.eta not in (VIS, EXP) and n_t.eta not in (VIS, EXP):
            kappa_next, _ = self.no_cml_vis(lam, link)
            self.queue_reached(kappa_next, link)
        else:
            kappa_next, n_next = self.single_cml_vis(lam, link)
            if n_next is not None:
                self.queue_reached(kappa_next, link)
        return False

    def path_found(self, link: Link) -> None:
        path = []
        li = link.any_link(TGT)
        path.append(li.anchor.x)
        while path[0] != self.goal:
            li = li.any_link(TGT)
            path.insert(0, li.anchor.x)
        li = link.any_link(SRC)
        path.append(li.anchor.x)
        while path[-1] != self.start:
            li = li.any_link(SRC)
            path.append(li.anchor.x)
        self.path = path
        self.arena.log("path_found", tuple(path))

    def reached_temp(self, lam: Ray, link: Link) -> None:
        """The cast reached a marker left by an interrupted trace."""
        n_s = self._node_of(link, SRC)
        n_t = self._node_of(link, TGT)
        v_ray = lam.vec
        x_d = n_t.x
        sigma_d = n_t.sigma
        kind = self.grid.corner_kind(x_d)
        placeable = kind in (CornerKind.CONVEX, CornerKind.CHECKERBOARD)
        if placeable:
            v_edge = self.grid.departure(x_d, sigma_d)
            placeable = is_rev(SRC, sigma_d, v_ray, v_edge)
        if not placeable:
            self.tracer_from_link(link)
            return

        if n_s.eta not in (VIS, EXP):
            _, n_next = self.no_cml_vis(lam, link)
        else:
            _, n_next = self.single_cml_vis(lam, link)
            if n_next is None:
                return
        leftover = self.cast_from_temp(link, x_d, sigma_d, v_edge)
        if leftover:
            self.trace_from_temp(link, x_d, sigma_d, v_edge, leftover)

    def cast_from_temp(self, link: Link, x_d: Vertex, sigma_d: int,
                       v_edge: Vec) -> List[Link]:
        leftover: List[Link] = []
        for l_t in list(link.targets):
            n_par = self._node_of(l_t, TGT)
            v_par = _vsub(x_d, n_par.x)
            if v_par != (0, 0) and is_vis(sigma_d, v_par, v_edge):
                n_new = self.arena.get_node(x_d, UNK, sigma_d, TGT)
                self.arena.anchor(l_t, n_new)
                self._queue(CAST, link.c + l_t.c, l_t)
            else:
                leftover.append(l_t)
        return leftover

    def trace_from_temp(self, link: Link, x_d: Vertex, sigma_d: int,
                        v_edge: Vec, leftover: List[Link]) -> None:
        d = self.arena.create_trace(x_d, sigma_d)
        tlink_s = self.arena.create_link(d.tnode_s)
        self.arena.connect(TGT, link, tlink_s)
        self.arena.create_nodelet(tlink_s, v_edge, BACK, d.m_src)
        for l_t in leftover:
            n_t = self._node_of(l_t, TGT)
            self.arena.disconnect(TGT, link, l_t)
            self.arena.anchor(l_t, d.tnode_t)
            self.arena.create_nodelet(l_t, _vsub(x_d, n_t.x), BACK, d.m_tgt)
        self._trace_step(d)
        self.tracer(d)

    def no_cml_vis(self, lam: Ray, link: Link) -> Tuple[int, Node]:
        n_t = self._node_of(link, TGT)
        n_next = self.arena.get_node(n_t.x, UNK, n_t.sigma, SRC)
        self.finish_reached(TGT, n_next, link, lam)
        return TGT, n_next

    def single_cml_vis(self, lam: Ray, link: Link) -> Tuple[int, Optional[Node]]:
        n_s = self._node_of(link, SRC)
        n_t = self._node_of(link, TGT)
        kappa_next = TGT if n_s.eta in (VIS, EXP) else SRC
        n_next = n_s if kappa_next == SRC else n_t
        n_prev = n_t if kappa_next == SRC else n_s

        if n_prev.eta is EXP and n_prev.sigma != n_next.sigma:
            # consecutive expensive nodes with different sides: the path
            # would cross the cheaper one and can never win
            self.arena.log("discard_ey_sides", n_next.x)
            self.discard_reached(link)
            return kappa_next, None

        c_next = self.arena.min_cost(-kappa_next, link) + math.dist(lam.x_s, lam.x_t)
        p_next = self.arena.get_pos(n_next.x)
        b_next = p_next.best(-kappa_next)
        v_test = _vsub(n_next.x, n_prev.x)
        order = _cmp(b_next.c, c_next)
        if order < 0:
            sigma_b = b_next.node.sigma
            v_b = _vsub(n_next.x, b_next.x_from)
            if n_next.sigma == sigma_b and v_b != (0, 0) and \
                    kappa_next * sigma_b * cross(v_b, v_test) > 0:
                self.arena.log("discard_crossing", n_next.x)
                self.discard_reached(link)
                return kappa_next, None
            n_next = self.arena.get_node(n_next.x, EXP, n_next.sigma, -kappa_next)
        elif order > 0:
            n_new = self.arena.get_node(n_next.x, VIS, n_next.sigma, -kappa_next)
            b_next.c = c_next
            b_next.node = n_new
            b_next.x_from = n_prev.x
            self.conv_to_ex_branch(-kappa_next, p_next, exclude=n_new)
            n_next = n_new
        else:
            if b_next.node is not None and n_next.sigma == b_next.node.sigma:
                v_b = _vsub(n_next.x, b_next.x_from)
                if kappa_next * b_next.node.sigma * cross(v_b, v_test) <= 0:
                    b_next.x_from = n_prev.x
            n_next = self.arena.get_node(n_next.x, n_prev.eta, n_next.sigma, -kappa_next)
        self.finish_reached(kappa_next, n_next, link, lam)
        return kappa_next, n_next

    def discard_reached(self, link: Link) -> None:
        l_s = link.any_link(SRC)
        self.arena.disconnect(TGT, l_s, link)
        self.arena.erase_tree(SRC, l_s)
        self.arena.erase_tree(TGT, link)

    def finish_reached(self, kappa_next: int, n_next: Node, link: Link, lam: Ray) -> None:
        self.arena.anchor(link, n_next)
        link.c = self.arena.cost(link)
        for l_next in list(link.links(kappa_next)):
            self.arena.isolate(-kappa_next, l_next, link)
        if self._node_of(link, SRC).eta in (VIS, EXP):
            self.arena.merge_ray(-n_next.sigma, link, lam)
            for l_next in link.targets:
                self.arena.merge_ray(n_next.sigma, l_next, lam)
        pos = self.arena.get_pos(n_next.pos.x)
        num_all = sum(len(n.links) for n in pos.nodes)
        num_mine = 1 + len(link.links(kappa_next))
        if num_all > num_mine:
            self.arena.push_overlap(pos)

    def queue_reached(self, kappa_next: int, link: Link) -> None:
        for l_next in link.links(kappa_next):
            if not l_next.links(kappa_next):
                continue    # root link (start/goal): nothing further to cast
            self._queue(CAST, link.c + l_next.c, l_next)

    # -- collided casts -------------------------------------------------------------

    def cast_collided(self, lam: Ray, link: Link) -> None:
        refound = self.minor_trace(lam, link)
        if not refound:
            self.third_trace(lam, link)
        self.major_trace(lam, link)

    def minor_trace(self, lam: Ray, link: Link) -> bool:
        n_s = self._node_of(link, SRC)
        sigma = -n_s.sigma
        if n_s.eta is EXP:
            return False
        x_col = lam.side_corner(sigma)
        if x_col is None or self.grid.on_boundary(x_col):
            return False    # boundary-side trace dies immediately
        d = self._trace_entry(lam, sigma)
        if d is None:
            return False
        tlink_s = self.arena.copy_link(link, d.tnode_s, (SRC,))
        self.arena.merge_ray(-sigma, tlink_s, lam)
        self.arena.create_nodelet(tlink_s, lam.vec, BACK, d.m_src)
        tlink_t = self.arena.create_link(d.tnode_t)
        for l_t in list(link.targets):
            self.arena.connect(TGT, tlink_t, l_t)
        v = lam.vec
        self.arena.create_nodelet(tlink_t, (-v[0], -v[1]), BACK, d.m_tgt)
        self.tracer(d)
        return d.refound

    def third_trace(self, lam: Ray, link: Link) -> None:
        n_s = self._node_of(link, SRC)
        if lam.x_t != self.goal or n_s.eta is EXP or n_s.x == self.start:
            return
        sigma = n_s.sigma
        nxt, d_arr = self.grid.step_from(n_s.x, None, sigma)
        if nxt is None:
            return
        d = self.arena.create_trace(nxt, sigma, d_in=d_arr)

        tlink_s = self.arena.copy_link(link, d.tnode_s, (SRC,))
        self.arena.merge_ray(sigma, tlink_s, lam)
        self.arena.create_nodelet(tlink_s, _vsub(nxt, n_s.x), BACK, d.m_src)

        n_dead = self.arena.get_node(n_s.x, DEAD, sigma, TGT)
        l_dead = self.arena.create_link(n_dead)
        for l_t in list(link.targets):
            self.arena.connect(TGT, l_dead, l_t)
        l_dead.c = self.arena.cost(l_dead)

        x_guard = self._next_corner(n_s.x, -sigma)
        if x_guard is None:
            self.arena.erase_tree(TGT, l_dead)
            self.arena.erase_tree(SRC, tlink_s)
            return
        n_guard = self.arena.get_node(x_guard, GUARD, sigma, TGT)
        l_guard = self.arena.create_link(n_guard)
        self.arena.connect(TGT, l_guard, l_dead)
        l_guard.c = self.arena.cost(l_guard)

        tlink_t = self.arena.create_link(d.tnode_t)
        self.arena.connect(TGT, tlink_t, l_guard)
        self.arena.create_nodelet(tlink_t, _vsub(nxt, x_guard), BACK, d.m_tgt)
        self.tracer(d)

    def major_trace(self, lam: Ray, link: Link) -> None:
        n_s = self._node_of(link, SRC)
        sigma = n_s.sigma
        d = self._trace_entry(lam, sigma)
        if d is None:
            self.discard_reached(link)
            return
        self.arena.anchor(link, d.tnode_s)
        self.arena.merge_ray(-sigma, link, lam)
        self.arena.create_nodelet(link, lam.vec, BACK, d.m_src)
        tlink_t = self.arena.create_link(d.tnode_t)
        for l_t in list(link.targets):
            self.arena.disconnect(TGT, link, l_t)
            self.arena.connect(TGT, tlink_t, l_t)
        v = lam.vec
        self.arena.create_nodelet(tlink_t, (-v[0], -v[1]), BACK, d.m_tgt)
        self.tracer(d)

    # -- tracing queries -------------------------------------------------------------

    def tracer_from_link(self, link: Link) -> None:
        """Resume a trace from a parked or reached marker.

        The resume corner is where the interrupted trace stopped: the
        anchor of the link's target fan when it sits on a marker node
        (a cast link itself anchors at its source end), else the link's
        own anchor.
        """
        n = link.anchor
        fan = link.any_link(TGT)
        if fan is not None and fan.anchor.pos is not None and fan.anchor.eta is TEMP:
            n = fan.anchor
        n_s = self._node_of(link, SRC)
        d = self.arena.create_trace(n.x, n.sigma)
        self.arena.anchor(link, d.tnode_s)
        self.arena.create_nodelet(link, _vsub(n.x, n_s.x), BACK, d.m_src)
        for l_t in list(link.targets):
            n_t = self._node_of(l_t, TGT)
            self.arena.disconnect(TGT, link, l_t)
            self.arena.anchor(l_t, d.tnode_t)
            self.arena.create_nodelet(l_t, _vsub(n.x, n_t.x), BACK, d.m_tgt)
        self.tracer(d)

    def tracer(self, d: TraceState) -> None:
        while d.x is not None:
            d.i_crn += 1
            self.stats.trace_corners += 1
            self.arena.log("trace", d.x, d.sigma)
            if not d.m_src or not d.m_tgt:
                break
            if not any(self.grid.quad_occ(d.x, q)
                       for q in ((1, 1), (-1, 1), (-1, -1), (1, -1))):
                break   # bare boundary point from a map-edge projection
            if self.refound_src(d):
                d.refound = True
                break
            if self.prog_rule(d, d.m_src[0]):
                if self.src_prog_cast(d):
                    break
            else:
                if self.tracer_proc(TGT, d):
                    break
                if self.tracer_proc(SRC, d):
                    break
                if self.interrupt_rule(d):
                    break
                if self.place_rule(d):
                    break
            self._trace_step(d)
        for kappa in (SRC, TGT):
            for m in list(d.nodelets(kappa)):
                self.arena.erase_tree(kappa, m.tlink)

    def refound_src(self, d: TraceState) -> bool:
        m_s = d.m_src[0]
        n_s = self._node_of(m_s.tlink, SRC)
        return d.x == n_s.x

    def tracer_proc(self, kappa_par: int, d: TraceState) -> bool:
        mlist = d.nodelets(kappa_par)
        idx = 0
        while idx < len(mlist):
            m = mlist[idx]
            n_par = self._node_of(m.tlink, kappa_par)
            sigma_par = n_par.sigma
            if kappa_par == TGT and self.prog_rule(d, m):
                pass
            elif kappa_par == SRC and self.ang_sec_rule(d, m):
                pass
            elif n_par.x in (self.start, self.goal):
                pass
            elif sigma_par == d.sigma:
                self.prune_rule(d, m)
            else:
                self.oc_sec_rule(d, m)
            if idx < len(mlist) and mlist[idx] is m:
                idx += 1
        return not d.nodelets(kappa_par)

    def src_prog_cast(self, d: TraceState) -> bool:
        m_s = d.m_src[0]
        if m_s.i_prog <= 1:
            return False
        self.arena.log("src_prog_cast", d.x)
        m_t = d.m_tgt[0]
        l_t = m_t.tlink.any_link(TGT)
        n_t = l_t.anchor
        n_dead = self.arena.get_node(n_t.x, DEAD, n_t.sigma, TGT)
        self.arena.anchor(l_t, n_dead)

        l_new = m_s.tlink
        l_s = l_new.any_link(SRC)
        n_s = l_s.anchor
        n_vu = self.arena.get_node(n_s.x, UNK, n_s.sigma, TGT)
        self.arena.anchor(l_new, n_vu)
        self.arena.connect(TGT, l_new, l_t)
        l_new.c = self.arena.cost(l_new)
        self._queue(CAST, l_s.c + l_new.c, l_new)
        d.m_src.remove(m_s)
        return True

    def prog_rule(self, d: TraceState, m: Nodelet) -> bool:
        """True when the trace has not progressed with respect to the
        nodelet's parent; winds and unwinds the counter."""
        kappa_par = TGT if m in d.m_tgt else SRC
        n_par = self._node_of(m.tlink, kappa_par)
        v_par = _vsub(d.x, n_par.x)
        if d.d_in is not None:
            v_edge_in = d.d_in
        else:
            v_edge_in = self._edge_dir(d.x, -d.sigma, d)
            v_edge_in = (-v_edge_in[0], -v_edge_in[1])
        if v_par == (0, 0):
            v_par = self._bisector(d.x, side_hint=d.sigma)
        v_prog = m.v_prog
        u = kappa_par * d.sigma * cross(v_par, v_prog)
        is_prog = u < 0 or (u == 0 and dot(v_par, v_prog) > 0)
        was_prog = m.i_prog == 0
        itx = sgn(cross(v_edge_in, v_par)) * sgn(cross(v_edge_in, v_prog))
        if is_prog and was_prog:
            m.v_prog = v_par
        elif is_prog and not was_prog:
            if itx >= 0:
                m.i_prog -= 1
                if m.i_prog > 0:
                    m.v_prog = (-v_prog[0], -v_prog[1])
                    is_prog = False
                else:
                    m.v_prog = v_par
            else:
                m.i_prog += 1
                m.v_prog = (-v_prog[0], -v_prog[1])
                is_prog = False
        elif not is_prog and was_prog:
            if itx <= 0:
                m.v_prog = (-v_prog[0], -v_prog[1])
                is_prog = True
            else:
                m.i_prog += 1
        return not is_prog

    def prune_rule(self, d: TraceState, m: Nodelet) -> None:
        kappa_par = TGT if m in d.m_tgt else SRC
        tlink = m.tlink
        n_par = self._node_of(tlink, kappa_par)
        sigma_par = n_par.sigma
        v_par = _vsub(d.x, n_par.x)
        if kappa_par == SRC and n_par.eta is VIS:
            return      # source VIS nodes are pruned by the angular-sector rule
        if v_par == (0, 0):
            return
        for l_par in list(tlink.links(kappa_par)):
            n_gpar = self._node_of(l_par, kappa_par)
            v_gpar = _vsub(n_par.x, n_gpar.x)
            if v_gpar == (0, 0) or is_taut(kappa_par, sigma_par, v_par, v_gpar):
                continue
            self.arena.log("prune", d.x, n_par.x, n_gpar.x)
            self.arena.disconnect(-kappa_par, l_par, tlink)
            l_new = self.arena.isolate(-kappa_par, l_par, None, d.tnode(kappa_par))
            if kappa_par == TGT:
                l_new.ray_l = None
                l_new.ray_r = None
            self.arena.create_nodelet(l_new, _vsub(d.x, n_gpar.x), BACK,
                                      d.nodelets(kappa_par))
        if not tlink.links(kappa_par):
            d.tnode(kappa_par).links.remove(tlink)
            tlink.anchor = None
            tlink.alive = False
            d.nodelets(kappa_par).remove(m)

    def oc_sec_rule(self, d: TraceState, m: Nodelet) -> None:
        kappa_par = TGT if m in d.m_tgt else SRC
        tlink = m.tlink
        n_par = self._node_of(tlink, kappa_par)
        sigma_par = n_par.sigma
        v_par = _vsub(d.x, n_par.x)
        if v_par == (0, 0):
            return
        if n_par.eta is GUARD:
            gpar_link = tlink.any_link(TGT).any_link(TGT)
            n_gpar = gpar_link.anchor
            v_gpar = _vsub(n_par.x, n_gpar.x)
            if v_gpar != (0, 0) and sigma_par * cross(v_par, v_gpar) <= 0:
                self.arena.log("oc_guard_discard", d.x, n_par.x)
                self.arena.erase_tree(TGT, tlink)
                d.m_tgt.remove(m)
            return
        if not self.grid.in_occupied_sector(n_par.x, v_par):
            return      # outside the occupied sector
        try:
            v_oc = self.grid.edge_dir(n_par.x, -kappa_par * sigma_par)
        except Exception:
            return
        if kappa_par == SRC:
            self.arena.log("oc_recursive", d.x, n_par.x)
            d_new = self.arena.create_trace(n_par.x, sigma_par)
            self.arena.anchor(tlink, d_new.tnode_s)
            d.m_src.remove(m)
            d_new.m_src.append(m)
            m.v_prog = v_oc
            m.i_prog = 0
            n_temp = self.arena.get_node(d.x, TEMP, d.sigma, TGT)
            tlink_t = self.arena.create_link(d_new.tnode_t)
            self.arena.create_nodelet(tlink_t, (-v_par[0], -v_par[1]), BACK, d_new.m_tgt)
            for m_t in list(d.m_tgt):
                l_new = m_t.tlink
                self.arena.anchor(l_new, n_temp)
                l_new.c = self.arena.cost(l_new)
                self.arena.connect(TGT, tlink_t, l_new)
                d.m_tgt.remove(m_t)
            self._trace_step(d_new)
            self.tracer(d_new)
        else:
            x_guard = self._next_corner(n_par.x, -sigma_par)
            if x_guard is None:
                return
            self.arena.log("oc_guard_place", d.x, x_guard)
            n_guard = self.arena.get_node(x_guard, GUARD, sigma_par, TGT)
            self.arena.anchor(tlink, n_guard)
            tlink.c = self.arena.cost(tlink)
            tlink_new = self.arena.create_link(d.tnode_t)
            self.arena.connect(TGT, tlink_new, tlink)
            m.tlink = tlink_new
            m.v_prog = v_par
            m.i_prog = 0

    # -- angular-sector rule ------------------------------------------------------

    def ang_sec_rule(self, d: TraceState, m: Nodelet) -> bool:
        lam = m.tlink.ray(d.sigma)
        if self._ray_not_crossed(lam, d, m):
            return False
        self.arena.log("ang_sec", d.x)
        self.ang_sec_prune(lam, d, m)
        self.arena.project(lam)
        self.recur_ang_sec_trace(lam, d, m)
        return True

    def _ray_not_crossed(self, lam: Optional[Ray], d: TraceState, m: Nodelet) -> bool:
        if lam is None:
            return True
        l_s = m.tlink.any_link(SRC)
        v_par = _vsub(d.x, l_s.anchor.x)
        if v_par == (0, 0):
            return True
        u = d.sigma * cross(lam.vec, v_par)
        if u > 0:
            return True
        if u == 0 and lam.x_l is not None:
            # trace exactly on a resolved ray's line: it has crossed only
            # when standing at the first corner past the ray's collision;
            # corners the ray grazed on the way are still inside
            return d.x != lam.side_corner(d.sigma)
        if u == 0:
            return ray_not_crossed(lam.vec, d.sigma, v_par,
                                   self._bisector(d.x, side_hint=d.sigma))
        return False

    def ang_sec_prune(self, lam: Ray, d: TraceState, m: Nodelet) -> None:
        l_s = m.tlink.any_link(SRC)
        n_s = l_s.anchor
        prunable = lam.x_t == n_s.x
        prunable = prunable or (lam.x_t == self.start and lam.x_s == self.goal
                                and d.sigma == n_s.sigma)
        if not prunable:
            return
        self.arena.log("ang_sec_prune", d.x, n_s.x)
        tlink_new = self.arena.isolate(TGT, l_s, None, d.tnode_s)
        parent = tlink_new.any_link(SRC)
        if parent is None:
            return
        n_new = parent.anchor
        self.arena.create_nodelet(tlink_new, _vsub(d.x, n_new.x), BACK, d.m_src)

    def recur_ang_sec_trace(self, lam: Ray, d: TraceState, m: Nodelet) -> None:
        tlink = m.tlink
        n_s = self._node_of(tlink, SRC)
        if lam.side_corner(d.sigma) == d.x or n_s.eta is EXP:
            self.arena.erase_tree(SRC, tlink)
            if m in d.m_src:
                d.m_src.remove(m)
            return
        entry = self._trace_entry(lam, -d.sigma)
        if entry is None:
            self.arena.erase_tree(SRC, tlink)
            if m in d.m_src:
                d.m_src.remove(m)
            return
        d_new = entry
        self.arena.log("ang_sec_recur", d.x, d_new.x)
        # move the source nodelet into the recursive trace
        self.arena.anchor(tlink, d_new.tnode_s)
        d.m_src.remove(m)
        d_new.m_src.append(m)
        m.v_prog = _vsub(d_new.x, n_s.x)
        m.i_prog = 0

        x_dead = lam.side_corner(d.sigma)
        if x_dead == lam.side_corner(-d.sigma):
            stepped = self._next_corner(x_dead, d.sigma)
            if stepped is not None:
                x_dead = stepped
        n_dead = self.arena.get_node(x_dead, DEAD, -d.sigma, TGT)
        l_new_t = self.arena.create_link(n_dead)

        n_temp = self.arena.get_node(d.x, TEMP, d.sigma, TGT)
        for m_t in d.m_tgt:
            l_copy = self.arena.copy_link(m_t.tlink, n_temp, (TGT,))
            l_copy.c = self.arena.cost(l_copy)
            self.arena.connect(TGT, l_new_t, l_copy)
        l_new_t.c = self.arena.cost(l_new_t)

        tlink_t = self.arena.create_link(d_new.tnode_t)
        self.arena.connect(TGT, tlink_t, l_new_t)
        self.arena.create_nodelet(tlink_t, _vsub(d_new.x, x_dead), FRONT, d_new.m_tgt)
        self.tracer(d_new)

    # -- interrupt rule -----------------------------------------------------------

    def interrupt_rule(self, d: TraceState) -> bool:
        if d.i_crn < NUM_INTERRUPT:
            return False
        if any(m.i_prog != 0 for m in d.m_src) or any(m.i_prog != 0 for m in d.m_tgt):
            return False
        self.arena.log("interrupt", d.x, d.i_crn)
        l_s = d.m_src[0].tlink
        src_parent = self._node_of(l_s, SRC)
        eta = EXP_UNK if src_parent.eta in (EXP, EXP_UNK) else UNK
        n_new_s = self.arena.get_node(d.x, eta, d.sigma, SRC)
        self.arena.anchor(l_s, n_new_s)
        l_s.c = self.arena.cost(l_s)

        n_new_t = self.arena.get_node(d.x, TEMP, d.sigma, TGT)
        for m_t in list(d.m_tgt):
            l_t = m_t.tlink
            self.arena.anchor(l_t, n_new_t)
            l_t.c = self.arena.cost(l_t)
            self.arena.connect(TGT, l_s, l_t)
            d.m_tgt.remove(m_t)
        d.m_src.clear()

        if d.b_over:
            self.arena.push_overlap(self.arena.get_pos(d.x))
        else:
            f = l_s.c + self.arena.min_cost(TGT, l_s)
            self._queue(TRACE, f, l_s)
        return True

    # -- placement rule ------------------------------------------------------------

    def place_rule(self, d: TraceState) -> bool:
        kind = self.grid.corner_kind(d.x)
        convex = kind in (CornerKind.CONVEX, CornerKind.CHECKERBOARD)
        kappa_par = SRC if convex else TGT
        m_new = self.place_node(kappa_par, d)
        if m_new is None or kappa_par == TGT:
            return False
        pos = self.arena.get_pos(d.x)
        total = sum(len(n.links) for n in pos.nodes)
        if total > 1:
            d.b_over = True
        self.cast_from_trace(d, m_new)
        return not d.m_tgt

    def place_node(self, kappa_par: int, d: TraceState) -> Optional[Nodelet]:
        try:
            v_edge = self._edge_dir(d.x, d.sigma, d)
        except Exception:
            return None
        m_new: Optional[Nodelet] = None
        n_new_par: Optional[Node] = None
        mlist = d.nodelets(kappa_par)
        idx = 0
        while idx < len(mlist):
            m = mlist[idx]
            n_par = self._node_of(m.tlink, kappa_par)
            v_par = _vsub(d.x, n_par.x)
            if v_par == (0, 0):
                v_par = self._bisector(d.x, side_hint=d.sigma)
            if m.i_prog > 0 or not is_rev(kappa_par, d.sigma, v_par, v_edge):
                idx += 1
                continue
            l_new_par = m.tlink
            if m_new is None:
                m_new = m
                if kappa_par == TGT:
                    eta = TEMP
                elif n_par.eta in (EXP_UNK, EXP):
                    eta = EXP_UNK
                else:
                    eta = UNK
                n_new_par = self.arena.get_node(d.x, eta, d.sigma, kappa_par)
                m_new.tlink = self.arena.create_link(d.tnode(kappa_par))
                m_new.v_prog = v_edge
                m_new.i_prog = 0
            else:
                mlist.remove(m)
            self.arena.anchor(l_new_par, n_new_par)
            l_new_par.c = self.arena.cost(l_new_par)
            self.arena.connect(kappa_par, m_new.tlink, l_new_par)
            if mlist and idx < len(mlist) and mlist[idx] is m:
                idx += 1
        if m_new is not None:
            self.arena.log("place", d.x,
                           "turn" if kappa_par == SRC else "phantom")
        return m_new

    def cast_from_trace(self, d: TraceState, m_new: Nodelet) -> None:
        v_edge = self._edge_dir(d.x, d.sigma, d)
        l_s = m_new.tlink.any_link(SRC)
        n_s = l_s.anchor
        n_vu: Optional[Node] = None
        for m_t in list(d.m_tgt):
            l_new_t = m_t.tlink
            n_t = self._node_of(l_new_t, TGT)
            v_par = _vsub(d.x, n_t.x)
            if v_par == (0, 0) or not is_vis(d.sigma, v_par, v_edge):
                continue
            if n_vu is None:
                n_vu = self.arena.get_node(d.x, UNK, d.sigma, TGT)
            self.arena.anchor(l_new_t, n_vu)
            l_new_t.c = self.arena.cost(l_new_t)
            self.arena.connect(TGT, l_s, l_new_t)
            if d.b_over or n_s.eta is EXP_UNK:
                d.b_over = False
                self.arena.push_overlap(self.arena.get_pos(d.x))
            else:
                self._queue(CAST, l_s.c + l_new_t.c, l_new_t)
            d.m_tgt.remove(m_t)

    # -- overlap pass -----------------------------------------------------------------

    def shrink_source_tree(self) -> None:
        for pos in self.arena.drain_overlap():
            for n in list(pos.nodes):
                if n.kappa == TGT or n.eta not in (EXP_UNK, UNK):
                    continue
                for link in list(n.links):
                    if not link.alive or link.anchor is None:
                        continue
                    if link.anchor.kappa == TGT:
                        continue
                    l_i = link
                    guard = 0
                    while True:
                        parent = l_i.any_link(SRC)
                        if parent is None or parent.anchor is None:
                            l_i = None
                            break
                        if parent.anchor.eta in (VIS, EXP):
                            break
                        l_i = parent
                        guard += 1
                        if guard > 100000:
                            raise RuntimeError("source chain loop")
                    if l_i is None:
                        continue
                    l_sy = l_i.any_link(SRC)
                    self.arena.log("shrink", pos.x, l_i.uid)
                    self.conv_to_tgt_branch(l_i)
                    if l_i.alive:
                        self._queue(CAST, l_sy.c + l_i.c, l_i)

    def conv_to_tgt_branch(self, link: Link) -> None:
        self.arena.unqueue_link(link)
        if link.anchor.kappa == TGT:
            return
        for l_t in list(link.targets):
            self.conv_to_tgt_branch(l_t)
        n_s = self._node_of(link, SRC)
        n_new = self.arena.get_node(n_s.x, UNK, n_s.sigma, TGT)
        self.arena.anchor(link, n_new)
        link.c = self.arena.cost(link)

    def conv_to_ex_branch(self, kappa: int, pos: Pos, exclude: Optional[Node]) -> None:
        b = pos.best(kappa)
        for n in list(pos.nodes):
            if n.eta is not VIS or n.kappa != kappa or n is exclude:
                continue
            sigma_b = b.node.sigma if b.node is not None else n.sigma
            v_b = _vsub(pos.x, b.x_from) if b.x_from is not None else (0, 0)
            for link in list(n.links):
                if not link.alive:
                    continue
                l_par = link.any_link(kappa)
                if l_par is None:
                    continue
                n_par = l_par.anchor
                v_par = _vsub(pos.x, n_par.x)
                if n.sigma == sigma_b and v_b != (0, 0) and v_par != (0, 0) and \
                        kappa * sigma_b * cross(v_b, v_par) > 0:
                    self.arena.log("ex_discard", pos.x)
                    self.arena.disconnect(kappa, link, l_par)
                    self.arena.erase_tree(-kappa, link)
                else:
                    self.conv_to_ex_branch_aux(kappa, l_par, link, n.sigma)
                self.arena.erase_tree(kappa, l_par)

    def conv_to_ex_branch_aux(self, kappa: int, l_par: Link, link: Link, sigma: int) -> None:
        n = link.anchor
        if n.sigma != sigma and n.eta in (VIS, EXP):
            self.arena.disconnect(kappa, link, l_par)
            self.arena.erase_tree(-kappa, link)
            return
        if n.eta is not VIS:
            if kappa == SRC and n.eta is UNK:
                self.conv_to_tgt_branch(link)
                if link.alive:
                    self._queue(CAST, link.c + l_par.c, link)
            return
        for l_chd in list(link.links(-kappa)):
            self.conv_to_ex_branch_aux(kappa, link, l_chd, sigma)
        if not link.links(-kappa):
            self.arena.disconnect(kappa, link, l_par)
            self.arena.erase(link)
        else:
            n_new = self.arena.get_node(n.x, EXP, sigma, kappa)
            self.arena.anchor(link, n_new)


def plan(grid: Grid, start: Vertex, goal: Vertex, poll_budget: int = 1_000_000,
         record_events: bool = False) -> PlanResult:
    """Shortest any-angle path between two vertices; optimal when found."""
    return Planner(grid, start, goal, poll_budget, record_events).run()
