"""Time-evolving graphs: the global edge-level transition matrix under the
four backtracking regimes, temporal walk counts, series-weighted
communicability, and the classical product-of-resolvents Katz measure.

A temporal input is either a single file of ``time src dst [weight]``
records, split into snapshots by the distinct sorted time values, or a
manifest file listing one edge-list path per snapshot in order.  All
snapshots share one node universe (the union of node IDs seen anywhere).
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .edge_level import CoefficientSeries, apply_shifted_series
from .errors import ValidationError
from .graph import LineGraphDecomposition, WeightedGraph, adjacency, graph_from_records, line_graph
from .linalg import diag_matrix, matmul, solve_linear, spectral_radius, identity

__all__ = [
    "BacktrackRegime",
    "TemporalGraph",
    "GlobalDecomposition",
    "build_global_transition",
    "forbid_all_transition_fast",
    "temporal_walk_counts",
    "temporal_f_centrality",
    "classical_temporal_katz",
    "permitted_t_range",
    "parse_temporal_edge_list",
    "load_temporal_manifest",
]


class BacktrackRegime(enum.Enum):
    """Which length-two reversals are forbidden along a temporal walk."""

    ALLOW_ALL = "allow-all"
    FORBID_SPACE = "forbid-space"   # no reversal within one snapshot
    FORBID_TIME = "forbid-time"     # no reversal across snapshots
    FORBID_ALL = "forbid-all"

    @property
    def forbids_space(self) -> bool:
        return self in (BacktrackRegime.FORBID_SPACE, BacktrackRegime.FORBID_ALL)

    @property
    def forbids_time(self) -> bool:
        return self in (BacktrackRegime.FORBID_TIME, BacktrackRegime.FORBID_ALL)


@dataclass
class TemporalGraph:
    """Ordered snapshot sequence over one shared node set."""

    snapshots: list[WeightedGraph]
    timestamps: list[float]

    def __post_init__(self):
        if len(self.snapshots) != len(self.timestamps):
            raise ValidationError("one timestamp per snapshot required")
        if not self.snapshots:
            raise ValidationError("a temporal graph needs at least one snapshot")
        labels = self.snapshots[0].node_labels
        for g in self.snapshots[1:]:
            if g.node_labels != labels:
                raise ValidationError("all snapshots must share one node set")
        ts = list(self.timestamps)
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValidationError("timestamps must be non-decreasing")

    @property
    def n(self) -> int:
        return self.snapshots[0].n

    @property
    def node_labels(self) -> list[str]:
        return self.snapshots[0].node_labels


@dataclass
class GlobalDecomposition:
    """Stacked edge-level matrices of a temporal graph for one regime.

    Global edge indices concatenate the per-snapshot canonical edge orders;
    ``offsets[tau]`` is where snapshot tau's block starts.  ``M`` is the
    block upper-triangular transition matrix in half-power form: entry
    (e, f) equals ``sqrt(w_e) * sqrt(w_f)`` whenever edge f may follow edge e
    under the regime, so ``sqrt_Z @ M**k @ sqrt_Z`` counts weighted walks.
    """

    temporal: TemporalGraph
    regime: BacktrackRegime
    per_snapshot: list[LineGraphDecomposition]
    offsets: np.ndarray
    L: sp.csr_array
    R: sp.csr_array
    weights: np.ndarray
    sqrt_weights: np.ndarray
    Z: sp.csr_array
    sqrt_Z: sp.csr_array
    M: sp.csr_array

    @property
    def m_total(self) -> int:
        return int(self.offsets[-1])

    @property
    def n(self) -> int:
        return self.temporal.n

    def edge_labels(self) -> list[str]:
        labels = []
        for tau, d in enumerate(self.per_snapshot):
            node = d.graph.node_labels
            labels.extend(f"{tau}:{node[s]}->{node[d_]}" for s, d_ in d.edge_order)
        return labels


def _masked(values: sp.csr_array, mask_pattern: sp.csr_array) -> sp.csr_array:
    out = sp.csr_array(values - values.multiply(mask_pattern))
    out.eliminate_zeros()
    out.sort_indices()
    return out


def _stack(per: list[LineGraphDecomposition], tg: TemporalGraph):
    offsets = np.concatenate([[0], np.cumsum([d.m for d in per])]).astype(np.int64)
    n = tg.n
    L = sp.csr_array(sp.vstack([d.L for d in per], format="csr"), shape=(offsets[-1], n))
    R = sp.csr_array(sp.vstack([d.R for d in per], format="csr"), shape=(offsets[-1], n))
    weights = (
        np.concatenate([d.weights for d in per]) if offsets[-1] else np.zeros(0)
    )
    sqrt_weights = (
        np.concatenate([d.sqrt_weights for d in per]) if offsets[-1] else np.zeros(0)
    )
    return offsets, L, R, weights, sqrt_weights


def build_global_transition(tg: TemporalGraph, regime: BacktrackRegime) -> GlobalDecomposition:
    """Assemble the global temporal transition matrix for one regime.

    Diagonal blocks step within a snapshot (backtrack-pruned when the regime
    forbids backtracking in space); upper blocks step from an earlier to a
    later snapshot (pruned of reversal pairs when the regime forbids
    backtracking in time).  Blocks below the diagonal are zero: walks may
    not move back in time.
    """
    regime = BacktrackRegime(regime)
    per = [line_graph(g) for g in tg.snapshots]
    offsets, L, R, weights, sqrt_weights = _stack(per, tg)
    count = len(per)

    blocks: list[list] = [[None] * count for _ in range(count)]
    for t1, d1 in enumerate(per):
        blocks[t1][t1] = d1.V if regime.forbids_space else d1.half_walk_matrix()
        for t2 in range(t1 + 1, count):
            d2 = per[t2]
            chain = matmul(d1.R, d2.L.T)
            half = matmul(matmul(d1.sqrt_Z, chain), d2.sqrt_Z)
            if regime.forbids_time:
                # Reversal pairs across snapshots: f runs opposite to e.
                reverse_chain = matmul(d2.R, d1.L.T)
                half = _masked(half, sp.csr_array(reverse_chain.T != 0))
            blocks[t1][t2] = half

    m_total = int(offsets[-1])
    if m_total:
        M = sp.csr_array(sp.block_array(blocks, format="csr"))
    else:
        M = sp.csr_array((0, 0), dtype=np.float64)
    M.sort_indices()

    return GlobalDecomposition(
        temporal=tg,
        regime=regime,
        per_snapshot=per,
        offsets=offsets,
        L=L,
        R=R,
        weights=weights,
        sqrt_weights=sqrt_weights,
        Z=diag_matrix(weights),
        sqrt_Z=diag_matrix(sqrt_weights),
        M=M,
    )


def forbid_all_transition_fast(tg: TemporalGraph) -> sp.csr_array:
    """Fully-forbidden transition matrix by the two-step global construction.

    One incidence product finds all edge continuations, one Hadamard product
    flags every reversal pair, and the square-rooted weights are applied by
    diagonal scaling; entries below the block diagonal are then dropped.
    Identical, entry for entry, to ``build_global_transition(tg, FORBID_ALL).M``.
    """
    per = [line_graph(g) for g in tg.snapshots]
    offsets, L, R, _, sqrt_weights = _stack(per, tg)
    m_total = int(offsets[-1])
    if m_total == 0:
        return sp.csr_array((0, 0), dtype=np.float64)

    chain = matmul(R, L.T)
    reversal = sp.csr_array(matmul(L, R.T) != 0)
    pruned = _masked(chain, reversal)
    sqrt_z = diag_matrix(sqrt_weights)
    hat = matmul(matmul(sqrt_z, pruned), sqrt_z)

    block_of = np.repeat(np.arange(len(per)), [d.m for d in per])
    coo = hat.tocoo()
    keep = block_of[coo.row] <= block_of[coo.col]
    out = sp.csr_array(
        (coo.data[keep], (coo.row[keep], coo.col[keep])), shape=(m_total, m_total)
    )
    out.sort_indices()
    return out


def temporal_walk_counts(gd: GlobalDecomposition, k: int) -> sp.csr_array:
    """Weighted counts of permitted temporal walks of length k+1 between
    ordered pairs of global edges."""
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    acc = gd.sqrt_Z
    for _ in range(k):
        acc = matmul(acc, gd.M)
    return matmul(acc, gd.sqrt_Z)


def temporal_f_centrality(
    gd: GlobalDecomposition,
    series: CoefficientSeries,
    t: float,
    tol: float = 1e-10,
    *,
    rho_m: float | None = None,
) -> np.ndarray:
    """Series-weighted temporal communicability of each node.

    Gated on the spectral radius of the assembled transition matrix itself,
    which is the tight bound for the resolvent; per-snapshot block radii are
    available through :func:`permitted_t_range` for reporting.
    """
    if rho_m is None:
        rho_m = spectral_radius(gd.M)
    if t * rho_m >= series.radius:
        hi = series.radius / rho_m if rho_m > 0 else math.inf
        raise ValidationError(
            f"t = {t} is outside the permitted range [0, {hi}) for this series"
        )
    # The shifted series acts on the transition matrix (sum_k c_{k+1} t^k M^k,
    # matching the walk-length expansion); applying the shift to the
    # projection instead would not reproduce the length-(k+1) walk counts.
    w = gd.sqrt_Z @ (gd.R @ np.ones(gd.n))
    y = apply_shifted_series(series, gd.M, t, w, tol, rho=rho_m)
    return series.c0 * np.ones(gd.n) + t * (gd.L.T @ (gd.sqrt_Z @ y))


def classical_temporal_katz(tg: TemporalGraph, t: float, tol: float = 1e-10) -> np.ndarray:
    """Backtracking-permitted temporal Katz: the ordered product of snapshot
    resolvents applied to the all-ones vector, right to left, one sparse
    solve per snapshot."""
    adjs = [adjacency(g) for g in tg.snapshots]
    rho_max = max(spectral_radius(a) for a in adjs)
    if rho_max > 0 and t >= 1.0 / rho_max:
        raise ValidationError(
            f"t = {t} is outside the permitted range [0, {1.0 / rho_max}) "
            "for the classical temporal measure"
        )
    if t < 0:
        raise ValidationError(f"attenuation factor must be nonnegative, got {t}")
    x = np.ones(tg.n)
    eye = identity(tg.n)
    for a in reversed(adjs):
        x = solve_linear(eye - t * a, x, tol)
    return x


def permitted_t_range(
    tg: TemporalGraph,
    regime: BacktrackRegime | None = None,
    *,
    classical: bool = False,
    gd: GlobalDecomposition | None = None,
) -> tuple[float, float]:
    """Half-open interval [0, hi) of admissible attenuation factors.

    ``classical=True`` bounds by the largest snapshot adjacency radius;
    otherwise the bound is the reciprocal radius of the regime's transition
    matrix (a prebuilt decomposition can be passed to avoid reassembly).
    """
    if classical:
        rho = max(spectral_radius(adjacency(g)) for g in tg.snapshots)
    else:
        if gd is None:
            if regime is None:
                raise ValidationError("a backtracking regime is required")
            gd = build_global_transition(tg, regime)
        rho = spectral_radius(gd.M)
    return (0.0, math.inf if rho == 0.0 else 1.0 / rho)


def block_radius_bound(gd: GlobalDecomposition) -> float:
    """Largest spectral radius over the full-weight diagonal blocks (the
    conservative per-snapshot bound quoted for series convergence)."""
    radii = [0.0]
    for d in gd.per_snapshot:
        block = d.B if gd.regime.forbids_space else d.W
        radii.append(spectral_radius(block))
    return max(radii)


def parse_temporal_edge_list(
    source,
    *,
    default_weight: float = 1.0,
    merge: str = "reject",
    drop_loops: bool = False,
    sort_nodes: bool = False,
) -> TemporalGraph:
    """Parse ``time src dst [weight]`` records into snapshots by distinct
    sorted time values."""
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    records: list[tuple[float, str, str, float]] = []
    for lineno, line in enumerate(lines, start=1):
        fields = _split_fields(line)
        if not fields:
            continue
        if len(fields) == 3:
            tstamp, src, dst = fields
            weight = default_weight
        elif len(fields) == 4:
            tstamp, src, dst, wtext = fields
            try:
                weight = float(wtext)
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad weight {wtext!r}") from exc
        else:
            raise ValidationError(
                f"line {lineno}: expected 'time src dst [weight]', got {len(fields)} fields"
            )
        try:
            stamp = float(tstamp)
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: bad time stamp {tstamp!r}") from exc
        records.append((stamp, src, dst, weight))
    if not records:
        raise ValidationError("no temporal records found")

    labels: list[str] = []
    seen: set[str] = set()
    for _, src, dst, _ in records:
        for lab in (src, dst):
            if lab not in seen:
                seen.add(lab)
                labels.append(lab)
    if sort_nodes:
        labels = sorted(labels)

    stamps = sorted({r[0] for r in records})
    snapshots = []
    for stamp in stamps:
        snap_records = [(s, d, w) for st, s, d, w in records if st == stamp]
        snapshots.append(
            graph_from_records(
                snap_records, node_labels=labels, merge=merge, drop_loops=drop_loops
            )
        )
    return TemporalGraph(snapshots=snapshots, timestamps=list(stamps))


def load_temporal_edge_list(path, **options) -> TemporalGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_temporal_edge_list(handle, **options)


def load_temporal_manifest(
    path,
    *,
    default_weight: float = 1.0,
    merge: str = "reject",
    drop_loops: bool = False,
    sort_nodes: bool = False,
) -> TemporalGraph:
    """Build a temporal graph from a manifest listing per-snapshot edge-list
    files in order (paths resolved relative to the manifest)."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as handle:
        entries = [line.split("#", 1)[0].strip() for line in handle]
    entries = [e for e in entries if e]
    if not entries:
        raise ValidationError("empty temporal manifest")

    per_file_records = []
    labels: list[str] = []
    seen: set[str] = set()
    for entry in entries:
        fname = entry if os.path.isabs(entry) else os.path.join(base, entry)
        with open(fname, "r", encoding="utf-8") as handle:
            records = []
            for lineno, line in enumerate(handle, start=1):
                fields = _split_fields(line)
                if not fields:
                    continue
                if len(fields) == 2:
                    src, dst = fields
                    weight = default_weight
                elif len(fields) == 3:
                    src, dst, wtext = fields
                    try:
                        weight = float(wtext)
                    except ValueError as exc:
                        raise ValidationError(
                            f"{entry} line {lineno}: bad weight {wtext!r}"
                        ) from exc
                else:
                    raise ValidationError(
                        f"{entry} line {lineno}: expected 'src dst [weight]'"
                    )
                records.append((src, dst, weight))
                for lab in (src, dst):
                    if lab not in seen:
                        seen.add(lab)
                        labels.append(lab)
        per_file_records.append(records)

    if sort_nodes:
        labels = sorted(labels)
    snapshots = [
        graph_from_records(records, node_labels=labels, merge=merge, drop_loops=drop_loops)
        for records in per_file_records
    ]
    return TemporalGraph(snapshots=snapshots, timestamps=[float(i) for i in range(len(snapshots))])


def _split_fields(line: str) -> list[str]:
    body = line.split("#", 1)[0].strip()
    if not body:
        return []
    if "," in body:
        return [f.strip() for f in body.split(",") if f.strip()]
    return body.split()
