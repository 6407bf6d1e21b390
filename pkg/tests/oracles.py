"""Independent brute-force oracles used to pin expected values.

These deliberately share no code with the library paths they check.
"""

from functools import lru_cache


def emd_by_plan_enumeration(cost):
    """Exact uniform-weight EMD by exhaustive enumeration of integral plans.

    Scaling row masses to n and column masses to m makes every margin an
    integer, and the transportation constraint matrix is totally
    unimodular, so every vertex of the polytope is an integral plan. The
    recursion below walks every integral plan column by column (memoized on
    the residual supplies), which therefore visits every vertex; the
    minimum over them is the exact optimum. Feasible only for tiny
    instances (at most ~5 rows per side).
    """
    m = len(cost)
    n = len(cost[0])
    col_demand = m  # integer-scaled masses: supplies are n each

    def splits(total, caps):
        """All ways to split `total` across slots with per-slot caps."""
        if len(caps) == 1:
            if total <= caps[0]:
                yield (total,)
            return
        for q in range(min(total, caps[0]) + 1):
            for rest in splits(total - q, caps[1:]):
                yield (q,) + rest

    @lru_cache(maxsize=None)
    def fill(j, remaining):
        if j == n:
            return 0.0
        best = None
        for comp in splits(col_demand, remaining):
            here = sum(q * cost[i][j] for i, q in enumerate(comp) if q)
            rest = fill(j + 1, tuple(r - q for r, q in zip(remaining, comp)))
            total = here + rest
            if best is None or total < best:
                best = total
        return best

    return fill(0, (n,) * m) / (m * n)
