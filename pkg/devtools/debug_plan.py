"""Developer harness: run the planner against the oracle, print event
streams, shrink failing fuzz cases.  Not part of the package."""

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from anyangle.grid import Grid
from anyangle.oracle import VisibilityOracle
from anyangle.planner import Planner, PlanStatus, plan
from anyangle.rays import Ray, RayState, cast_2d


def show(grid, start=None, goal=None, path=()):
    path = set(path)
    for y in range(grid.height - 1, -1, -1):
        row = []
        for x in range(grid.width):
            row.append('#' if grid.occupied(x, y) else '.')
        print(f"{y:3d} " + ''.join(row))
    print("    " + ''.join(str(x % 10) for x in range(grid.width)))
    print("start", start, "goal", goal, "path pts", sorted(path))


def run_case(grid, start, goal, verbose=False, budget=1_000_000):
    p = Planner(grid, start, goal, poll_budget=budget, record_events=verbose)
    res = p.run()
    if verbose:
        for e in p.arena.events:
            print("   ", e)
        print("monotone violations:", p.monotone_violations)
        issues = p.arena.audit()
        for i in issues:
            print("AUDIT:", i)
    return res, p


def check(grid, start, goal, orc=None):
    orc = orc or VisibilityOracle(grid)
    want = orc.shortest(start, goal)
    res, p = run_case(grid, start, goal)
    issues = p.arena.audit()
    if issues:
        return f"audit: {issues[0]}"
    if want is None:
        if res.found:
            return f"planner found {res.cost} on unreachable instance"
        return None
    if not res.found:
        return f"planner {res.status.value}, oracle {want.cost:.6f}"
    if abs(res.cost - want.cost) > 1e-9 * max(1.0, want.cost):
        return f"cost {res.cost:.9f} != oracle {want.cost:.9f}"
    for a, b in zip(res.path, res.path[1:]):
        if cast_2d(grid, Ray(a, b)).state != RayState.CLEAR:
            return f"path segment {a}->{b} not clear"
    return None


def shrink(cells, width, height, start, goal):
    """Greedy removal of obstacle cells while the failure persists."""
    cells = set(cells)
    err = check(Grid(width, height, cells), start, goal)
    assert err, "case does not fail"
    changed = True
    while changed:
        changed = False
        for c in sorted(cells):
            trial = cells - {c}
            g = Grid(width, height, trial)
            try:
                if check(g, start, goal):
                    cells = trial
                    changed = True
            except Exception:
                cells = trial
                changed = True
    return cells


def fuzz(seed, n, size=16, dmin=0.05, dmax=0.3, pad=True, shrink_fail=True):
    from helpers import random_grid
    rng = random.Random(seed)
    orc = None
    g = None
    for trial in range(n):
        if trial % 10 == 0 or g is None:
            g = random_grid(rng, size, size, rng.uniform(dmin, dmax), clear_border=pad)
            orc = VisibilityOracle(g)
        start = (rng.randint(0, size), rng.randint(0, size))
        goal = (rng.randint(0, size), rng.randint(0, size))
        try:
            err = check(g, start, goal, orc)
        except Exception as exc:
            err = f"exception: {type(exc).__name__}: {exc}"
        if err:
            print(f"trial {trial}: {err}")
            print("start", start, "goal", goal)
            if shrink_fail:
                small = shrink(g.occupied_cells, size, size, start, goal)
                gs = Grid(size, size, small)
                print("shrunk to", sorted(small))
                try:
                    print("shrunk err:", check(gs, start, goal))
                except Exception as exc:
                    print("shrunk err: exception:", exc)
                show(gs, start, goal)
            else:
                show(g, start, goal)
            return False
    print(f"fuzz ok: {n} trials")
    return True


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--size", type=int, default=16)
    ap.add_argument("--dmax", type=float, default=0.3)
    ap.add_argument("--no-shrink", action="store_true")
    args = ap.parse_args()
    fuzz(args.seed, args.n, size=args.size, dmax=args.dmax,
         shrink_fail=not args.no_shrink)
