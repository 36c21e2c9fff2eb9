"""Exhaustive enumeration of weighted walks, static and temporal.

Ground truth for every matrix-based counting route in the package: plain
depth-first search over node or edge sequences, multiplying edge weights
along the way.  Deliberately simple and guarded against explosion; built to
be obviously correct, not fast.
"""

from __future__ import annotations

import numpy as np

from .errors import ExplosionGuardError, ValidationError
from .graph import WeightedGraph
from .temporal import BacktrackRegime, TemporalGraph

MAX_WALKS = 10**7


def count_nbt_walks_bruteforce(graph: WeightedGraph, kmax: int) -> list[np.ndarray]:
    """Dense nonbacktracking walk-count matrices for lengths 0..kmax.

    A walk backtracks when its node sequence contains i, j, i; the search
    simply never steps back to the node it just came from.  Length 0 is the
    identity by convention.
    """
    if kmax < 0:
        raise ValidationError(f"kmax must be nonnegative, got {kmax}")
    n = graph.n
    out_edges: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for src, dst, w in graph.edges:
        out_edges[src].append((dst, w))

    _check_guard(n, max((len(e) for e in out_edges), default=0), kmax)

    counts = [np.eye(n)] + [np.zeros((n, n)) for _ in range(kmax)]

    def extend(start: int, node: int, came_from: int, depth: int, weight: float) -> None:
        for nxt, w in out_edges[node]:
            if nxt == came_from:
                continue
            total = weight * w
            counts[depth + 1][start, nxt] += total
            if depth + 1 < kmax:
                extend(start, nxt, node, depth + 1, total)

    if kmax >= 1:
        for start in range(n):
            extend(start, start, -1, 0, 1.0)
    return counts


def count_temporal_walks_bruteforce(
    tg: TemporalGraph, regime: BacktrackRegime, kmax: int
) -> dict[int, np.ndarray]:
    """Weighted counts of permitted temporal walks between global edges.

    Returns one dense matrix per walk length 1..kmax; entry (e, f) sums the
    weight products of permitted walks that start with global edge e and end
    with global edge f.  Global edges enumerate each snapshot's canonical
    edge order in snapshot order, so an edge present in several snapshots is
    counted once per snapshot label, and a walk may pause across snapshots
    (consecutive edges only need non-decreasing snapshot indices).
    """
    regime = BacktrackRegime(regime)
    if kmax < 1:
        raise ValidationError(f"kmax must be at least 1, got {kmax}")

    edges: list[tuple[int, int, int, float]] = []  # (snapshot, src, dst, weight)
    for tau, g in enumerate(tg.snapshots):
        edges.extend((tau, s, d, w) for s, d, w in g.edges)
    m_total = len(edges)

    successors: list[list[int]] = [[] for _ in range(m_total)]
    for e, (tau_e, src_e, dst_e, _) in enumerate(edges):
        for f, (tau_f, src_f, dst_f, _) in enumerate(edges):
            if tau_f < tau_e or src_f != dst_e:
                continue
            reversal = dst_f == src_e and src_f == dst_e
            if reversal:
                if tau_f == tau_e and regime.forbids_space:
                    continue
                if tau_f > tau_e and regime.forbids_time:
                    continue
            successors[e].append(f)

    _check_guard(m_total, max((len(s) for s in successors), default=0), kmax - 1)

    out = {length: np.zeros((m_total, m_total)) for length in range(1, kmax + 1)}

    def extend(start: int, last: int, length: int, weight: float) -> None:
        for nxt in successors[last]:
            total = weight * edges[nxt][3]
            out[length + 1][start, nxt] += total
            if length + 1 < kmax:
                extend(start, nxt, length + 1, total)

    for e, (_, _, _, w) in enumerate(edges):
        out[1][e, e] = w
        if kmax > 1:
            extend(e, e, 1, w)
    return out


def _check_guard(starts: int, branching: int, depth: int) -> None:
    estimate = float(starts)
    if depth > 0 and branching > 1:
        estimate = starts * float(branching) ** depth
    elif depth > 0:
        estimate = starts * max(depth, 1)
    if estimate > MAX_WALKS:
        raise ExplosionGuardError(
            f"estimated walk count {estimate:.2e} exceeds the enumeration budget {MAX_WALKS:.0e}"
        )
