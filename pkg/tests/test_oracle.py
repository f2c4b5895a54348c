import itertools
import math
import random

from anyangle.grid import Grid
from anyangle.oracle import VisibilityOracle, oracle_shortest
from anyangle.rays import Ray, RayState, cast_2d

from helpers import brute_blocked, random_grid


def test_oracle_empty_grid():
    g = Grid(8, 8, set())
    res = oracle_shortest(g, (0, 0), (7, 5))
    assert res is not None
    assert math.isclose(res.cost, math.hypot(7, 5))
    assert res.path == [(0, 0), (7, 5)]


def test_oracle_single_cell():
    g = Grid(3, 3, {(1, 1)})
    res = oracle_shortest(g, (0, 0), (3, 3))
    assert res is not None
    assert math.isclose(res.cost, 2 * math.sqrt(5), rel_tol=1e-12)
    assert res.path in ([(0, 0), (2, 1), (3, 3)], [(0, 0), (1, 2), (3, 3)])


def test_oracle_sealed_goal():
    cells = {(1, 1)}
    box = {(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)}
    g = Grid(5, 5, cells | box)
    assert oracle_shortest(g, (4, 4), (1, 1)) is None


def test_oracle_start_equals_goal():
    g = Grid(4, 4, set())
    res = oracle_shortest(g, (2, 2), (2, 2))
    assert res.cost == 0.0 and res.path == [(2, 2)]


def test_oracle_kernel_matches_cast():
    """The compiled visibility kernel and cast_2d implement one semantics."""
    rng = random.Random(21)
    for trial in range(4000):
        if trial % 50 == 0:
            g = random_grid(rng, 12, 12, rng.uniform(0.05, 0.35))
            orc = VisibilityOracle(g)
        a = (rng.randint(0, 12), rng.randint(0, 12))
        b = (rng.randint(0, 12), rng.randint(0, 12))
        got = orc.visible(a, b)
        want = cast_2d(g, Ray(a, b)).state == RayState.CLEAR
        assert got == want, (sorted(g.occupied_cells), a, b)


def test_oracle_path_is_los_valid():
    rng = random.Random(22)
    checked = 0
    while checked < 60:
        g = random_grid(rng, 10, 10, 0.2)
        orc = VisibilityOracle(g)
        a = (rng.randint(0, 10), rng.randint(0, 10))
        b = (rng.randint(0, 10), rng.randint(0, 10))
        res = orc.shortest(a, b)
        if res is None:
            continue
        for u, v in zip(res.path, res.path[1:]):
            assert cast_2d(g, Ray(u, v)).state == RayState.CLEAR
        assert math.isclose(res.cost, sum(math.dist(u, v) for u, v in zip(res.path, res.path[1:])))
        checked += 1


def _enumerate_shortest(g: Grid, start, goal, max_interior=4):
    """Independent second oracle: exhaustive simple corner sequences."""
    corners = [c for c in g.convex_corners() if c not in (start, goal)]

    def vis(a, b):
        return not brute_blocked(g, a, b)

    best = math.inf
    if vis(start, goal):
        best = math.dist(start, goal)
    for k in range(1, max_interior + 1):
        for seq in itertools.permutations(corners, k):
            pts = [start, *seq, goal]
            ok = all(vis(u, v) for u, v in zip(pts, pts[1:]))
            if ok:
                cost = sum(math.dist(u, v) for u, v in zip(pts, pts[1:]))
                best = min(best, cost)
    return best


def test_oracle_agrees_with_exhaustive_enumeration():
    rng = random.Random(23)
    done = 0
    while done < 12:
        g = random_grid(rng, 5, 5, 0.16)
        if len(g.convex_corners()) > 8:
            continue
        a = (rng.randint(0, 5), rng.randint(0, 5))
        b = (rng.randint(0, 5), rng.randint(0, 5))
        res = oracle_shortest(g, a, b)
        enum_best = _enumerate_shortest(g, a, b)
        if res is None:
            assert math.isinf(enum_best)
        else:
            if len(res.path) - 2 <= 4:
                assert math.isclose(res.cost, enum_best, rel_tol=1e-12), \
                    (sorted(g.occupied_cells), a, b)
            else:
                assert res.cost <= enum_best + 1e-12
        done += 1
