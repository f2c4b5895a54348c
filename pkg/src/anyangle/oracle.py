"""Ground-truth any-angle shortest paths via an explicit visibility graph.

Taut any-angle paths turn only at convex corners (checkerboard vertices
host two such corners and are passable), so the graph over those corners
plus the query endpoints, with edges wherever a cast succeeds, yields the
exact shortest cost.  Pairwise visibility runs in a compiled kernel that
mirrors the cast verdict semantics: boundary travel needs both flanking
cells occupied to block, and diagonal passage through corner vertices is
decided by the entered quadrant cell.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from numba import njit

from .grid import Grid, Vertex


@njit(cache=True, inline="always")
def _occ_at(occ: np.ndarray, cx: int, cy: int) -> bool:
    if cx < 0 or cy < 0 or cx >= occ.shape[0] or cy >= occ.shape[1]:
        return False
    return occ[cx, cy] != 0


@njit(cache=True)
def _blocked(occ: np.ndarray, ax: int, ay: int, bx: int, by: int) -> bool:
    dx = bx - ax
    dy = by - ay
    if dx == 0 and dy == 0:
        return False
    sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
    sy = 1 if dy > 0 else (-1 if dy < 0 else 0)

    if dx == 0 or dy == 0:
        along_x = dy == 0
        s = sx if along_x else sy
        pos0 = ax if along_x else ay
        lc = ay if along_x else ax
        steps = abs(dx) + abs(dy)
        for i in range(steps):
            n = pos0 + s * i
            c = n + (s - 1) // 2
            if along_x:
                if _occ_at(occ, c, lc) and _occ_at(occ, c, lc - 1):
                    return True
            else:
                if _occ_at(occ, lc, c) and _occ_at(occ, lc - 1, c):
                    return True
        return False

    adx = abs(dx)
    ady = abs(dy)
    prod = adx * ady
    i = 0
    j = 0
    while True:
        kx = i * ady
        ky = j * adx
        if kx >= prod and ky >= prod:
            return False
        if kx == ky:
            vx = ax + sx * i
            vy = ay + sy * j
            if _occ_at(occ, vx + (sx - 1) // 2, vy + (sy - 1) // 2):
                return True
            i += 1
            j += 1
        elif kx < ky:
            if kx >= prod:
                return False
            n = ax + sx * i
            row = (ay * adx + dy * i) // adx
            if _occ_at(occ, n + (sx - 1) // 2, row):
                return True
            i += 1
        else:
            if ky >= prod:
                return False
            n = ay + sy * j
            col = (ax * ady + dx * j) // ady
            if _occ_at(occ, col, n + (sy - 1) // 2):
                return True
            j += 1


@njit(cache=True)
def _pairwise_vis(occ: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    n = xs.shape[0]
    out = np.zeros((n, n), dtype=np.uint8)
    for i in range(n):
        for j in range(i + 1, n):
            if not _blocked(occ, xs[i], ys[i], xs[j], ys[j]):
                out[i, j] = 1
                out[j, i] = 1
    return out


@njit(cache=True)
def _vis_from(occ: np.ndarray, px: int, py: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    n = xs.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        if not _blocked(occ, px, py, xs[i], ys[i]):
            out[i] = 1
    return out


@dataclass
class OracleResult:
    cost: float
    path: List[Vertex]


class VisibilityOracle:
    """Shortest any-angle paths on one grid; the corner graph is built once
    and reused across queries."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self._occ = grid.as_array()
        self.corners: List[Vertex] = list(grid.convex_corners())
        self._xs = np.array([c[0] for c in self.corners], dtype=np.int64)
        self._ys = np.array([c[1] for c in self.corners], dtype=np.int64)
        self._vis = _pairwise_vis(self._occ, self._xs, self._ys)
        self._adj: List[List[Tuple[int, float]]] = []
        n = len(self.corners)
        for i in range(n):
            row = []
            for j in range(n):
                if self._vis[i, j]:
                    d = math.dist(self.corners[i], self.corners[j])
                    row.append((j, d))
            self._adj.append(row)

    def visible(self, a: Vertex, b: Vertex) -> bool:
        return not _blocked(self._occ, a[0], a[1], b[0], b[1])

    def shortest(self, start: Vertex, goal: Vertex) -> Optional[OracleResult]:
        if not (self.grid.in_vertex_range(start) and self.grid.in_vertex_range(goal)):
            raise ValueError("query endpoint outside the map")
        if start == goal:
            return OracleResult(0.0, [start])
        if self.visible(start, goal):
            return OracleResult(math.dist(start, goal), [start, goal])

        n = len(self.corners)
        S, G = n, n + 1
        vis_s = _vis_from(self._occ, start[0], start[1], self._xs, self._ys)
        vis_g = _vis_from(self._occ, goal[0], goal[1], self._xs, self._ys)

        def coords(i: int) -> Vertex:
            if i == S:
                return start
            if i == G:
                return goal
            return self.corners[i]

        dist: Dict[int, float] = {S: 0.0}
        prev: Dict[int, int] = {}
        heap: List[Tuple[float, int]] = [(0.0, S)]
        done = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            if u == G:
                break
            done.add(u)
            cu = coords(u)
            if u == S:
                nbrs = [(i, math.dist(start, self.corners[i]))
                        for i in range(n) if vis_s[i]]
            else:
                nbrs = list(self._adj[u])
                if vis_g[u]:
                    nbrs.append((G, math.dist(cu, goal)))
            for v, w in nbrs:
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if G not in dist or dist[G] == math.inf:
            return None
        path = [goal]
        node = G
        while node != S:
            node = prev[node]
            path.append(coords(node))
        path.reverse()
        return OracleResult(dist[G], path)


def oracle_shortest(grid: Grid, start: Vertex, goal: Vertex) -> Optional[OracleResult]:
    """One-shot exact shortest any-angle cost and path; None if unreachable."""
    return VisibilityOracle(grid).shortest(start, goal)
