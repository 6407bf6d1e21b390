"""Exact earth mover's distance via the transportation network simplex.

The distance between two row sets with uniform weights (1/m per row on one
side, 1/n on the other) is a balanced transportation problem. Masses are
scaled to integers (every supply becomes n, every demand m) so basic flows
stay exactly integral throughout the pivots, which makes degeneracy
detection exact. The simplex starts from a least-cost greedy basis, keeps
MODI duals plus parent pointers from one tree traversal per pivot, and
enters on the most negative reduced cost; after a long run of degenerate
pivots it falls back to Bland's rule, which guarantees termination.
"""

from __future__ import annotations

import numpy as np

_DEGENERATE_SWITCH = 200  # consecutive zero-theta pivots before Bland's rule


def _least_cost_start(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray):
    """Greedy initial basis: repeatedly saturate the cheapest active cell,
    crossing out exactly one exhausted line per step. Produces m+n-1 basic
    cells forming a spanning tree, zero-flow cells included."""
    m, n = cost.shape
    a, b = supply.copy(), demand.copy()
    work = cost.copy()
    flows: dict[tuple[int, int], float] = {}
    rows_active, cols_active = m, n
    while True:
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        q = min(a[i], b[j])
        flows[(i, j)] = q
        a[i] -= q
        b[j] -= q
        if rows_active == 1 and cols_active == 1:
            break
        if a[i] == 0 and rows_active > 1:
            work[i, :] = np.inf
            rows_active -= 1
        else:
            work[:, j] = np.inf
            cols_active -= 1
    return flows


def _duals_and_parents(cost, row_basic, col_basic, m, n):
    """One traversal of the basis tree rooted at row 0: dual values plus
    parent pointers and depths for cycle walks."""
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    row_parent = [-1] * m  # column toward the root
    col_parent = [-1] * n  # row toward the root
    row_depth = [0] * m
    col_depth = [0] * n
    u[0] = 0.0
    stack = [(True, 0)]
    while stack:
        is_row, k = stack.pop()
        if is_row:
            uk = u[k]
            d = row_depth[k]
            for j in row_basic[k]:
                if np.isnan(v[j]):
                    v[j] = cost[k, j] - uk
                    col_parent[j] = k
                    col_depth[j] = d + 1
                    stack.append((False, j))
        else:
            vk = v[k]
            d = col_depth[k]
            for i in col_basic[k]:
                if np.isnan(u[i]):
                    u[i] = cost[i, k] - vk
                    row_parent[i] = k
                    row_depth[i] = d + 1
                    stack.append((True, i))
    return u, v, row_parent, col_parent, row_depth, col_depth


def _cycle_edges(ei, ej, row_parent, col_parent, row_depth, col_depth):
    """Edges of the unique cycle closed by the entering cell (ei, ej),
    ordered so that even indexes carry -theta and odd indexes +theta."""
    # climb both endpoints to equal depth, then in lockstep to the meeting
    # node; arm_a starts at the row side, arm_b at the column side
    arm_a: list[tuple[int, int]] = []
    arm_b: list[tuple[int, int]] = []
    a_is_row, a_node, a_depth = True, ei, row_depth[ei]
    b_is_row, b_node, b_depth = False, ej, col_depth[ej]

    def step(is_row, node, edges):
        if is_row:
            j = row_parent[node]
            edges.append((node, j))
            return False, j
        i = col_parent[node]
        edges.append((i, node))
        return True, i

    while a_depth > b_depth:
        a_is_row, a_node = step(a_is_row, a_node, arm_a)
        a_depth -= 1
    while b_depth > a_depth:
        b_is_row, b_node = step(b_is_row, b_node, arm_b)
        b_depth -= 1
    while (a_is_row, a_node) != (b_is_row, b_node):
        a_is_row, a_node = step(a_is_row, a_node, arm_a)
        b_is_row, b_node = step(b_is_row, b_node, arm_b)
    # walk the cycle in one direction: down arm_a, back up arm_b; the
    # alternation starts with -theta next to the entering cell's row
    return arm_a + arm_b[::-1]


def transport(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray):
    """Solve min sum(cost * flow) with fixed row and column sums.

    Returns (objective, flow matrix). Supplies and demands must balance;
    integral values keep the arithmetic exact.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    if supply.shape != (m,) or demand.shape != (n,):
        raise ValueError("cost shape does not match supply/demand lengths")
    if abs(supply.sum() - demand.sum()) > 1e-9 * max(1.0, supply.sum()):
        raise ValueError("transportation problem must be balanced")

    flows = _least_cost_start(supply, demand, cost)
    row_basic = [set() for _ in range(m)]
    col_basic = [set() for _ in range(n)]
    for (i, j) in flows:
        row_basic[i].add(j)
        col_basic[j].add(i)

    tol = 1e-10 * (1.0 + float(np.abs(cost).max(initial=0.0)))
    bland = False
    degenerate_run = 0
    max_pivots = 1000 * (m + n) + 100_000

    for _ in range(max_pivots):
        u, v, row_parent, col_parent, row_depth, col_depth = _duals_and_parents(
            cost, row_basic, col_basic, m, n
        )
        reduced = cost - u[:, None] - v[None, :]
        if bland:
            below = np.argwhere(reduced < -tol)
            if below.size == 0:
                break
            ei, ej = map(int, below[0])
        else:
            flat = int(np.argmin(reduced))
            ei, ej = divmod(flat, n)
            if reduced[ei, ej] >= -tol:
                break

        edges = _cycle_edges(ei, ej, row_parent, col_parent, row_depth, col_depth)
        minus = edges[0::2]
        theta = min(flows[e] for e in minus)
        leaving = min(e for e in minus if flows[e] == theta)

        flows[(ei, ej)] = theta
        row_basic[ei].add(ej)
        col_basic[ej].add(ei)
        for k, e in enumerate(edges):
            flows[e] += theta if k % 2 else -theta
        del flows[leaving]
        row_basic[leaving[0]].discard(leaving[1])
        col_basic[leaving[1]].discard(leaving[0])

        if theta == 0:
            degenerate_run += 1
            if degenerate_run >= _DEGENERATE_SWITCH:
                bland = True
        else:
            degenerate_run = 0
    else:
        raise RuntimeError("transportation simplex failed to converge")

    flow = np.zeros((m, n))
    for (i, j), q in flows.items():
        flow[i, j] = q
    return float(np.sum(cost * flow)), flow


def emd_uniform(cost: np.ndarray):
    """EMD between two uniformly weighted point sets given ground costs.

    Row i carries mass 1/m, column j mass 1/n. Returns (distance, flow)
    where flow row sums are 1/m and column sums 1/n.
    """
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    if m == 0 or n == 0:
        raise ValueError("emd is undefined for empty point sets")
    supply = np.full(m, float(n))
    demand = np.full(n, float(m))
    objective, flow = transport(supply, demand, cost)
    total = float(m * n)
    return objective / total, flow / total
