"""Exact integer 2D predicates shared by the planners.

All tests are sign tests on 64-bit integer cross/dot products, so results
are exact for vertex coordinates up to 2^15 per side.  Sides and tree
directions are plain ints (L/R, SRC/TGT) so they can multiply directly
into the sign arithmetic.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

Vec = Tuple[int, int]

# Side of a trace / node: L keeps the obstacle on its right, R on its left.
L: int = -1
R: int = 1

# Tree direction along a candidate path: toward the start or toward the goal.
SRC: int = -1
TGT: int = 1

SIDES = (L, R)
TREES = (SRC, TGT)


def side_name(sigma: int) -> str:
    return "L" if sigma == L else "R"


def tree_name(kappa: int) -> str:
    return "S" if kappa == SRC else "T"


def cross(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[0] + a[1] * b[1]


def sgn(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _require_nonzero(*vecs: Sequence[int]) -> None:
    for v in vecs:
        if v[0] == 0 and v[1] == 0:
            raise ValueError("zero vector argument")


def is_taut(kappa: int, sigma: int, v_par: Sequence[int], v_gpar: Sequence[int]) -> bool:
    """True if the bend (parent -> grandparent) keeps the path segment taut.

    v_par points from the grandchild position to the parent node's side of
    the bend; v_gpar from the parent to the grandparent.  Collinear vectors
    are taut only when they point the same way (a 180-degree fold is not).
    """
    _require_nonzero(v_par, v_gpar)
    u = kappa * sigma * cross(v_par, v_gpar)
    if u == 0:
        return dot(v_par, v_gpar) >= 0
    return u > 0


def is_rev(kappa: int, sigma: int, v_par: Sequence[int], v_edge: Sequence[int]) -> bool:
    """True if walking the next contour edge reverses angular progression."""
    _require_nonzero(v_par, v_edge)
    return kappa * sigma * cross(v_par, v_edge) < 0


def is_vis(sigma: int, v_par: Sequence[int], v_edge: Sequence[int]) -> bool:
    """True if a goal-side node at v_par behind the next edge can be cast to.

    Assumes the trace has progressed with respect to that node.
    """
    _require_nonzero(v_par, v_edge)
    return sigma * cross(v_par, v_edge) <= 0


def ray_not_crossed(
    ray_vec: Optional[Sequence[int]],
    sigma: int,
    v_par: Sequence[int],
    corner_bisector: Sequence[int],
) -> bool:
    """True while a sigma-sided trace stays inside a sector bounded by a ray.

    ray_vec is the ray direction (None means no ray recorded, which never
    blocks).  v_par points from the ray's origin to the trace position.
    When the trace lies exactly on the ray line the tie is broken with the
    occupied-sector bisector of the corner under the trace, matching the
    contour assumption: the contour sits an infinitesimal step inside the
    obstacle, off the ray line.
    """
    if ray_vec is None:
        return True
    u = sigma * cross(ray_vec, v_par)
    if u > 0:
        return True
    if u == 0:
        u_crn = sigma * cross(ray_vec, corner_bisector)
        if u_crn > 0:
            return True
        if u_crn == 0:
            # fully collinear: a position behind the ray's origin cannot
            # have crossed it; otherwise the bisector direction decides
            if dot(ray_vec, v_par) < 0:
                return True
            if dot(ray_vec, corner_bisector) > 0:
                return True
    return False
