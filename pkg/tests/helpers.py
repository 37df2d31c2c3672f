"""Independent oracles shared by the test modules.

Everything here avoids the code paths under test: cell enumeration uses
only child_order recursion, and the quantile oracle only evaluates the
CDF forward on mesh points.
"""

from fractions import Fraction

from cubefold.curve import OrientationState, child_order


def brute_force_cells(d: int, depth: int) -> dict:
    """Map digit tuple -> integer lower corner (scale 2**depth), by
    recursive enumeration through child_order only."""
    out = {}

    def rec(state, corner, digits, level):
        if level == depth:
            out[tuple(digits)] = tuple(corner)
            return
        side = 1 << (depth - level - 1)
        for j, (octant, child) in enumerate(child_order(state)):
            shifted = [corner[a] + ((octant >> a) & 1) * side for a in range(d)]
            rec(child, shifted, digits + [j], level + 1)

    rec(OrientationState.identity(d), [0] * d, [], 0)
    return out


def brute_force_locate(cells: dict, point, depth: int):
    """Digit tuple of the half-open brute-force cell containing the point."""
    side = Fraction(1, 1 << depth)
    for digits, corner in cells.items():
        if all(Fraction(c, 1 << depth) <= x < Fraction(c, 1 << depth) + side
               for c, x in zip(corner, point)):
            return digits
    raise AssertionError(f"no cell contains {point}")


def mesh_scan_quantile(spec, u, step: Fraction, scan: bool = False):
    """Literal supremum of {mesh t : F(t) < u} over a uniform mesh.

    With scan=True every mesh point is visited; otherwise binary search
    over the mesh exploits F's monotonicity (validated at construction)
    and returns the identical mesh point.
    """
    u = Fraction(u)
    lo = spec.support_lo - 1
    hi = spec.support_hi + 1
    count = int((hi - lo) / step)

    def mesh(i):
        return lo + i * step

    if scan:
        best = None
        for i in range(count + 1):
            if spec.cdf(mesh(i)) < u:
                best = mesh(i)
            else:
                break
        return best
    # F(mesh(0)) = 0 < u and F(mesh(count)) = 1 >= u
    a, b = 0, count
    while b - a > 1:
        m = (a + b) // 2
        if spec.cdf(mesh(m)) < u:
            a = m
        else:
            b = m
    return mesh(a)
