"""Cross-validation battery: every counting route checked against the others
and against brute-force enumeration.  Used by the ``oracle-check`` CLI
command and by the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edge_level import (
    CentralityPlan,
    CoefficientSeries,
    f_centrality,
    generating_matrix_via_line_graph,
    nbt_counts_via_line_graph,
    walk_counts_via_line_graph,
)
from .graph import WeightedGraph, adjacency, line_graph
from .linalg import spectral_radius
from .node_level import generating_matrix, nbt_katz, nbt_walk_counts
from .oracle import count_nbt_walks_bruteforce, count_temporal_walks_bruteforce
from .temporal import (
    BacktrackRegime,
    TemporalGraph,
    build_global_transition,
    classical_temporal_katz,
    forbid_all_transition_fast,
    temporal_walk_counts,
)

__all__ = ["CheckResult", "static_battery", "temporal_battery"]


@dataclass
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def deviation(a, b) -> float:
    """Max-norm difference scaled by the larger matrix magnitude (floor 1)."""
    da = a.toarray() if hasattr(a, "toarray") else np.asarray(a, dtype=np.float64)
    db = b.toarray() if hasattr(b, "toarray") else np.asarray(b, dtype=np.float64)
    if da.shape != db.shape:
        return math.inf
    if da.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(da))), float(np.max(np.abs(db))))
    return float(np.max(np.abs(da - db))) / scale


def _safe_t(graph: WeightedGraph, rho_v: float) -> float:
    """An attenuation factor inside both the series radius and the
    elementwise pole."""
    if rho_v > 0:
        return 0.5 / rho_v
    a = adjacency(graph)
    mutual = a.multiply(a.T)
    peak = float(mutual.data.max()) if mutual.nnz else 0.0
    return 0.5 if peak == 0.0 else 0.5 / math.sqrt(peak)


def static_battery(
    graph: WeightedGraph,
    kmax: int = 5,
    tol: float = 1e-10,
    decomposition=None,
) -> list[CheckResult]:
    """All static cross-checks on one graph.

    ``decomposition`` may inject a prebuilt (possibly tampered) line-graph
    decomposition for fault-detection testing.
    """
    a = adjacency(graph)
    d = decomposition if decomposition is not None else line_graph(graph)
    results: list[CheckResult] = []

    oracle = count_nbt_walks_bruteforce(graph, kmax)
    recurrence = nbt_walk_counts(a, kmax)
    dev = max(deviation(recurrence[k], oracle[k]) for k in range(kmax + 1))
    results.append(CheckResult("nbt recurrence vs enumeration", dev, tol))

    projected = [nbt_counts_via_line_graph(d, k) for k in range(kmax)]
    dev = max(
        (deviation(projected[k], oracle[k + 1]) for k in range(kmax)), default=0.0
    )
    results.append(CheckResult("line-graph nbt projection vs enumeration", dev, tol))

    dev = max(
        (deviation(projected[k], recurrence[k + 1]) for k in range(kmax)), default=0.0
    )
    results.append(CheckResult("nbt recurrence vs line-graph projection", dev, tol))

    dense_a = a.toarray()
    power = dense_a.copy()
    dev = 0.0
    for k in range(kmax):
        dev = max(dev, deviation(walk_counts_via_line_graph(d, k), power))
        power = power @ dense_a
    results.append(CheckResult("line-graph walk projection vs adjacency powers", dev, tol))

    rho_v = spectral_radius(d.V)
    t = _safe_t(graph, rho_v)
    phi_node = generating_matrix(a, t, rho_v=rho_v)
    phi_edge = generating_matrix_via_line_graph(d, t, rho_v=rho_v)
    results.append(
        CheckResult("generating function node route vs line-graph route",
                    deviation(phi_node, phi_edge), tol)
    )

    katz_node = nbt_katz(a, t, tol=min(tol, 1e-12), rho_v=rho_v)
    plan = CentralityPlan(d, CoefficientSeries.resolvent(), t, rho_v=rho_v)
    katz_edge = f_centrality(plan, tol=min(tol, 1e-12))
    results.append(
        CheckResult("nbt katz node route vs line-graph route",
                    deviation(katz_node, katz_edge), tol)
    )
    return results


def temporal_battery(
    tg: TemporalGraph, kmax: int = 3, tol: float = 1e-10
) -> list[CheckResult]:
    """All temporal cross-checks on one temporal graph."""
    results: list[CheckResult] = []

    for regime in BacktrackRegime:
        gd = build_global_transition(tg, regime)
        oracle = count_temporal_walks_bruteforce(tg, regime, kmax + 1)
        dev = max(
            deviation(temporal_walk_counts(gd, k), oracle[k + 1])
            for k in range(kmax + 1)
        )
        results.append(
            CheckResult(f"temporal transition counts vs enumeration [{regime.value}]", dev, tol)
        )

    direct = build_global_transition(tg, BacktrackRegime.FORBID_ALL).M
    fast = forbid_all_transition_fast(tg)
    same_pattern = (
        np.array_equal(direct.indptr, fast.indptr)
        and np.array_equal(direct.indices, fast.indices)
    )
    dev = deviation(direct, fast) if same_pattern else math.inf
    if same_pattern and direct.nnz and np.array_equal(direct.data, fast.data):
        dev = 0.0
    results.append(CheckResult("fast forbid-all assembly vs block assembly", dev, 0.0))

    rho_max = max(spectral_radius(adjacency(g)) for g in tg.snapshots)
    t = 0.5 if rho_max == 0 else 0.5 / rho_max
    katz = classical_temporal_katz(tg, t, tol=min(tol, 1e-12))
    x = np.ones(tg.n)
    for g in reversed(tg.snapshots):
        x = np.linalg.solve(np.eye(tg.n) - t * adjacency(g).toarray(), x)
    results.append(
        CheckResult("classical temporal katz vs dense resolvent product",
                    deviation(katz, x), tol)
    )
    return results
