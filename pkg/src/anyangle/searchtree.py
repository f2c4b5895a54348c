"""Search substrate for the delayed line-of-sight planner.

Two trees of typed nodes rooted at the start and goal grow toward each
other; links are path segments anchored at one node and connected to
links at neighbouring path vertices.  This module owns the object arena
(positions, nodes, links, rays, traces, open-list, overlap buffer), the
graph surgery utilities, and a structural audit.

All collections are plain lists so iteration order, and therefore the
whole search, is deterministic.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .geometry import L, R, SRC, TGT, cross
from .grid import Grid, Vertex, Vec
from .rays import Ray, RayState, cast_2d, project_2d

INF = math.inf

CAST = "cast"
TRACE = "trace"

FRONT = "front"
BACK = "back"


class NodeType(enum.Enum):
    VIS = "vis"           # turning point, cumulative visibility, cheapest known
    UNK = "unk"           # turning point, visibility unknown
    EXP = "exp"           # cumulative visibility but costlier than the best
    EXP_UNK = "exp_unk"   # unknown visibility below an expensive ancestor
    TEMP = "temp"         # interrupted-trace marker
    DEAD = "dead"         # unreachable guard: discards queries that reach it
    GUARD = "guard"       # guard placed by a target occupied-sector step


VIS = NodeType.VIS
UNK = NodeType.UNK
EXP = NodeType.EXP
EXP_UNK = NodeType.EXP_UNK
TEMP = NodeType.TEMP
DEAD = NodeType.DEAD
GUARD = NodeType.GUARD

# admissible (node, parent-in-same-tree) pairs and the trees they may
# appear in; connections across the junction are not constrained
_ALLOWED_PARENTS: Dict[Tuple[NodeType, NodeType], Tuple[int, ...]] = {
    (VIS, VIS): (SRC, TGT),
    (UNK, VIS): (SRC, TGT), (UNK, UNK): (SRC, TGT),
    (UNK, DEAD): (TGT,), (UNK, GUARD): (TGT,), (UNK, TEMP): (TGT,),
    (EXP, VIS): (SRC, TGT), (EXP, EXP): (SRC, TGT),
    (EXP_UNK, EXP): (SRC,), (EXP_UNK, EXP_UNK): (SRC,),
    (DEAD, VIS): (TGT,), (DEAD, UNK): (TGT,), (DEAD, TEMP): (TGT,),
    (GUARD, VIS): (TGT,), (GUARD, UNK): (TGT,), (GUARD, EXP): (TGT,),
    (GUARD, DEAD): (TGT,), (GUARD, TEMP): (TGT,),
    (TEMP, VIS): (TGT,), (TEMP, UNK): (TGT,), (TEMP, EXP): (TGT,),
    (TEMP, DEAD): (TGT,), (TEMP, GUARD): (TGT,), (TEMP, TEMP): (TGT,),
}


class Best:
    """Cheapest known cost-to-come (source side) or cost-to-go (target
    side) at one corner, with the node and predecessor that achieved it."""

    __slots__ = ("c", "node", "x_from")

    def __init__(self) -> None:
        self.c: float = INF
        self.node: Optional["Node"] = None
        self.x_from: Optional[Vertex] = None


class Pos:
    __slots__ = ("x", "nodes", "best_s", "best_t")

    def __init__(self, x: Vertex) -> None:
        self.x = x
        self.nodes: List[Node] = []
        self.best_s = Best()
        self.best_t = Best()

    def best(self, kappa: int) -> Best:
        return self.best_s if kappa == SRC else self.best_t


class Node:
    __slots__ = ("eta", "sigma", "kappa", "links", "pos")

    def __init__(self, eta: NodeType, sigma: int, kappa: int, pos: Optional[Pos]) -> None:
        self.eta = eta
        self.sigma = sigma
        self.kappa = kappa
        self.links: List[Link] = []
        self.pos = pos      # None for the floating trace-nodes

    @property
    def x(self) -> Vertex:
        assert self.pos is not None, "floating trace-node has no fixed position"
        return self.pos.x

    def __repr__(self) -> str:
        where = self.pos.x if self.pos else "~"
        return f"Node({self.eta.value},{'L' if self.sigma == L else 'R'}," \
               f"{'S' if self.kappa == SRC else 'T'}@{where})"


class Link:
    """A path segment anchored at one node; connected source links lead
    toward the start, target links toward the goal."""

    __slots__ = ("sources", "targets", "c", "ray_l", "ray_r", "anchor",
                 "queued", "alive", "uid")
    _uids = itertools.count()

    def __init__(self) -> None:
        self.sources: List[Link] = []
        self.targets: List[Link] = []
        self.c: float = INF
        self.ray_l: Optional[Ray] = None
        self.ray_r: Optional[Ray] = None
        self.anchor: Optional[Node] = None
        self.queued: Optional[Query] = None
        self.alive = True
        self.uid = next(Link._uids)

    def links(self, kappa: int) -> List["Link"]:
        return self.sources if kappa == SRC else self.targets

    def any_link(self, kappa: int) -> Optional["Link"]:
        lst = self.links(kappa)
        return lst[0] if lst else None

    def ray(self, sigma: int) -> Optional[Ray]:
        return self.ray_l if sigma == L else self.ray_r

    def set_ray(self, sigma: int, ray: Optional[Ray]) -> None:
        if sigma == L:
            self.ray_l = ray
        else:
            self.ray_r = ray

    def __repr__(self) -> str:
        a = self.anchor and (self.anchor.pos and self.anchor.pos.x)
        return f"Link#{self.uid}@{a}(c={self.c:.3f})"


class Nodelet:
    """A trace's view of one parent: the dangling trace-link to it, the
    progression ray and the winding counter."""

    __slots__ = ("tlink", "v_prog", "i_prog")

    def __init__(self, tlink: Link, v_prog: Vec) -> None:
        self.tlink = tlink
        self.v_prog = v_prog
        self.i_prog = 0


class TraceState:
    __slots__ = ("x", "sigma", "d_in", "hug", "tnode_s", "tnode_t",
                 "m_src", "m_tgt", "i_crn", "b_over", "refound")

    def __init__(self, x: Vertex, sigma: int,
                 d_in: Optional[Vec] = None, hug: Optional[Vec] = None) -> None:
        self.x: Optional[Vertex] = x
        self.sigma = sigma
        self.d_in = d_in        # arrival direction at x, when the walk is live
        self.hug = hug          # obstacle-quadrant hint for the first step
        self.tnode_s = Node(TEMP, sigma, SRC, None)
        self.tnode_t = Node(TEMP, sigma, TGT, None)
        self.m_src: List[Nodelet] = []
        self.m_tgt: List[Nodelet] = []
        self.i_crn = 0
        self.b_over = False
        self.refound = False

    def tnode(self, kappa: int) -> Node:
        return self.tnode_s if kappa == SRC else self.tnode_t

    def nodelets(self, kappa: int) -> List[Nodelet]:
        return self.m_src if kappa == SRC else self.m_tgt


class Query:
    __slots__ = ("y", "f", "link", "seq", "removed")

    def __init__(self, y: str, f: float, link: Link, seq: int) -> None:
        self.y = y
        self.f = f
        self.link = link
        self.seq = seq
        self.removed = False


class OpenList:
    """Min-f priority queue with insertion-order tie break and removal."""

    def __init__(self) -> None:
        import heapq
        self._heapq = heapq
        self._heap: List[Tuple[float, int, Query]] = []
        self._seq = itertools.count()
        self._live = 0
        self.max_size = 0

    def __len__(self) -> int:
        return self._live

    def push(self, y: str, f: float, link: Link) -> Query:
        q = Query(y, f, link, next(self._seq))
        self._heapq.heappush(self._heap, (f, q.seq, q))
        self._live += 1
        self.max_size = max(self.max_size, self._live)
        return q

    def remove(self, q: Query) -> None:
        if not q.removed:
            q.removed = True
            self._live -= 1

    def poll(self) -> Query:
        while self._heap:
            _, _, q = self._heapq.heappop(self._heap)
            if not q.removed:
                q.removed = True
                self._live -= 1
                return q
        raise IndexError("poll from empty open-list")


class TreeError(RuntimeError):
    pass


class Arena:
    """Owns every search object of one planner run."""

    def __init__(self, grid: Grid, record_events: bool = False) -> None:
        self.grid = grid
        self.positions: Dict[Vertex, Pos] = {}
        self.rays: Dict[Tuple[Vertex, Vertex], Ray] = {}
        self.open = OpenList()
        self.overlap: List[Pos] = []
        self._overlap_ids = set()
        self.events: Optional[List[tuple]] = [] if record_events else None
        self.casts_run = 0
        self.x_start: Optional[Vertex] = None
        self.x_goal: Optional[Vertex] = None

    # -- logging -------------------------------------------------------------

    def log(self, kind: str, *args) -> None:
        if self.events is not None:
            self.events.append((kind, *args))

    # -- constructors (memoizing) ---------------------------------------------

    def get_pos(self, x: Vertex) -> Pos:
        p = self.positions.get(x)
        if p is None:
            p = Pos(x)
            self.positions[x] = p
        return p

    def get_node(self, x: Vertex, eta: NodeType, sigma: int, kappa: int) -> Node:
        p = self.get_pos(x)
        for n in p.nodes:
            if n.eta is eta and n.sigma == sigma and n.kappa == kappa:
                return n
        n = Node(eta, sigma, kappa, p)
        p.nodes.append(n)
        return n

    def create_link(self, node: Node) -> Link:
        link = Link()
        self.anchor(link, node)
        return link

    def get_ray(self, x_s: Vertex, x_t: Vertex) -> Ray:
        key = (x_s, x_t)
        ray = self.rays.get(key)
        if ray is None:
            ray = Ray(x_s, x_t)
            self.rays[key] = ray
        return ray

    def cast(self, ray: Ray) -> Ray:
        if ray.state == RayState.PENDING:
            self.casts_run += 1
            cast_2d(self.grid, ray)
            self.log("cast", ray.x_s, ray.x_t, ray.state.value)
        return ray

    def project(self, ray: Ray) -> Ray:
        if ray.x_l is None:
            self.log("project", ray.x_s, ray.x_t)
        return project_2d(self.grid, ray)

    def create_trace(self, x: Vertex, sigma: int,
                     d_in: Optional[Vec] = None, hug: Optional[Vec] = None) -> TraceState:
        return TraceState(x, sigma, d_in=d_in, hug=hug)

    def create_nodelet(self, tlink: Link, v_prog: Vec, where: str,
                       mlist: List[Nodelet]) -> Nodelet:
        m = Nodelet(tlink, v_prog)
        if where == FRONT:
            mlist.insert(0, m)
        else:
            mlist.append(m)
        return m

    # -- graph surgery ---------------------------------------------------------

    def anchor(self, link: Link, node: Node) -> None:
        if link.anchor is not None:
            link.anchor.links.remove(link)
        link.anchor = node
        node.links.append(link)

    def connect(self, kappa: int, link: Link, other: Link) -> None:
        link.links(kappa).append(other)
        other.links(-kappa).append(link)

    def disconnect(self, kappa: int, link: Link, other: Link) -> None:
        link.links(kappa).remove(other)
        other.links(-kappa).remove(link)

    def copy_link(self, link: Link, node: Optional[Node], kappas: Tuple[int, ...]) -> Link:
        new = self.create_link(node if node is not None else link.anchor)
        new.c = link.c
        new.ray_l = link.ray_l
        new.ray_r = link.ray_r
        for kappa in kappas:
            for lk in link.links(kappa):
                self.connect(kappa, new, lk)
        return new

    def isolate(self, kappa: int, link: Link, other: Optional[Link],
                node: Optional[Node] = None) -> Link:
        """Make the (link, other) connection exclusive in direction kappa.

        Returns link itself when it is already exclusively connected (or
        has no kappa links and other is None); otherwise a duplicate that
        carries cost, rays and the opposite-side connections, with the
        (link, other) edge moved onto the duplicate.  The result is
        re-anchored at node when given.
        """
        n = len(link.links(kappa))
        if (n == 0 and other is None) or (n == 1 and other is not None):
            new = link
        else:
            new = Link()
            new.c = link.c
            new.ray_l = link.ray_l
            new.ray_r = link.ray_r
            self.anchor(new, link.anchor)
            for lk in link.links(-kappa):
                self.connect(-kappa, new, lk)
            if other is not None:
                self.connect(kappa, new, other)
                self.disconnect(kappa, link, other)
        if node is not None:
            self.anchor(new, node)
        return new

    def merge_ray(self, sigma: int, link: Link, new_ray: Ray) -> None:
        """Replace the sigma-side sector ray iff the sector shrinks."""
        old = link.ray(sigma)
        if old is None:
            link.set_ray(sigma, new_ray)
            return
        if sigma * cross(old.vec, new_ray.vec) >= 0:
            link.set_ray(sigma, new_ray)

    def min_cost(self, kappa: int, link: Link) -> float:
        best = INF
        for lk in link.links(kappa):
            if lk.c < best:
                best = lk.c
        return best

    def cost(self, link: Link) -> float:
        """Segment length to the root point plus the cheapest root cost."""
        n = link.anchor
        parent = link.any_link(n.kappa)
        if parent is None:
            raise TreeError("cost of a root link")
        root = parent.anchor
        return math.dist(n.x, root.x) + self.min_cost(n.kappa, link)

    def erase(self, link: Link) -> None:
        if link.queued is not None:
            self.open.remove(link.queued)
            link.queued = None
        if link.anchor is not None:
            link.anchor.links.remove(link)
            link.anchor = None
        for lk in list(link.sources):
            self.disconnect(SRC, link, lk)
        for lk in list(link.targets):
            self.disconnect(TGT, link, lk)
        link.alive = False

    def erase_tree(self, kappa: int, link: Link) -> None:
        """Delete link if it dangles (no links against kappa), cascading
        into the kappa direction."""
        if not link.alive or link.links(-kappa):
            return
        onward = list(link.links(kappa))
        self.erase(link)
        for lk in onward:
            self.erase_tree(kappa, lk)

    # -- open-list and overlap buffer -------------------------------------------

    def queue(self, y: str, f: float, link: Link) -> None:
        assert link.queued is None or link.queued.removed, "link already queued"
        q = self.open.push(y, f, link)
        link.queued = q
        self.log("queue", y, f, link.uid)

    def unqueue_link(self, link: Link) -> None:
        if link.queued is not None:
            self.open.remove(link.queued)
            link.queued = None

    def poll(self) -> Query:
        q = self.open.poll()
        q.link.queued = None
        return q

    def push_overlap(self, pos: Pos) -> None:
        if id(pos) not in self._overlap_ids:
            self._overlap_ids.add(id(pos))
            self.overlap.append(pos)
            self.log("overlap_push", pos.x)

    def drain_overlap(self) -> List[Pos]:
        out = self.overlap
        self.overlap = []
        self._overlap_ids = set()
        return out

    # -- structural audit ---------------------------------------------------------

    def audit(self) -> List[str]:
        """Full-graph consistency check; returns human-readable violations."""
        issues: List[str] = []
        seen_links: Dict[int, Link] = {}
        for x, pos in self.positions.items():
            for n in pos.nodes:
                if n.pos is not pos:
                    issues.append(f"node {n} not backed by its position {x}")
                for link in n.links:
                    if not link.alive:
                        issues.append(f"dead link {link.uid} anchored at {x}")
                    if link.anchor is not n:
                        issues.append(f"link {link.uid} anchored elsewhere than {x}")
                    if link.uid in seen_links:
                        issues.append(f"link {link.uid} anchored twice")
                    seen_links[link.uid] = link
        for link in seen_links.values():
            for kappa in (SRC, TGT):
                for lk in link.links(kappa):
                    if not lk.alive:
                        issues.append(f"link {link.uid} connected to dead {lk.uid}")
                        continue
                    if link not in lk.links(-kappa):
                        issues.append(f"one-way edge {link.uid}->{lk.uid}")
            if link.queued is not None and link.queued.removed:
                issues.append(f"link {link.uid} points at a removed query")
            n = link.anchor
            if n is None or n.pos is None:
                continue
            # admissible parent pairs within one tree
            for parent_link in link.links(n.kappa):
                p = parent_link.anchor
                if p is None or p.pos is None:
                    continue
                if p.kappa != n.kappa:
                    continue
                allowed = _ALLOWED_PARENTS.get((n.eta, p.eta))
                if allowed is None or n.kappa not in allowed:
                    issues.append(
                        f"connection {n.eta.value}<-{p.eta.value} in tree "
                        f"{'S' if n.kappa == SRC else 'T'} at {n.pos.x}")
            # the root-side fan must sit at one corner (cost is length to
            # the root point plus the cheapest root cost)
            anchors = {lk.anchor.pos.x for lk in link.links(n.kappa)
                       if lk.anchor is not None and lk.anchor.pos is not None}
            if len(anchors) > 1:
                issues.append(f"link {link.uid} root fan at {anchors}")
        # no dangling queued links
        for entry in self.open._heap:
            q = entry[2]
            if not q.removed:
                if not q.link.alive:
                    issues.append(f"queued query on dead link {q.link.uid}")
                elif q.link.queued is not q:
                    issues.append(f"queued query not referenced by link {q.link.uid}")
        return issues
