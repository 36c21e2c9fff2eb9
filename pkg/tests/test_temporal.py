import math

import numpy as np
import pytest

from nbtwalks.edge_level import CentralityPlan, CoefficientSeries, f_centrality
from nbtwalks.errors import ValidationError
from nbtwalks.graph import WeightedGraph, adjacency, line_graph
from nbtwalks.linalg import spectral_radius
from nbtwalks.oracle import count_temporal_walks_bruteforce
from nbtwalks.temporal import (
    BacktrackRegime,
    TemporalGraph,
    build_global_transition,
    classical_temporal_katz,
    forbid_all_transition_fast,
    load_temporal_manifest,
    parse_temporal_edge_list,
    permitted_t_range,
    temporal_f_centrality,
    temporal_walk_counts,
)

from conftest import random_digraph, rel_dev

RESOLVENT = CoefficientSeries.resolvent()


def two_snapshot_example() -> TemporalGraph:
    g1 = WeightedGraph(["1", "2"], [(0, 1, 2.0)])
    g2 = WeightedGraph(["1", "2"], [(1, 0, 3.0)])
    return TemporalGraph([g1, g2], [0.0, 1.0])


def random_temporal(rng, n_snapshots=None, n=None) -> TemporalGraph:
    count = n_snapshots or int(rng.integers(1, 4))
    size = n or int(rng.integers(2, 6))
    labels = [str(i) for i in range(size)]
    snaps = []
    for _ in range(count):
        g = random_digraph(rng, size, p=0.35)
        snaps.append(WeightedGraph(labels, list(g.edges)))
    return TemporalGraph(snaps, [float(i) for i in range(count)])


class TestValidation:
    def test_mismatched_node_sets(self):
        g1 = WeightedGraph(["a", "b"], [])
        g2 = WeightedGraph(["a", "c"], [])
        with pytest.raises(ValidationError, match="share"):
            TemporalGraph([g1, g2], [0.0, 1.0])

    def test_decreasing_timestamps(self):
        g = WeightedGraph(["a"], [])
        with pytest.raises(ValidationError, match="non-decreasing"):
            TemporalGraph([g, g], [1.0, 0.0])

    def test_equal_timestamps_permitted(self):
        g = WeightedGraph(["a"], [])
        TemporalGraph([g, g], [1.0, 1.0])


class TestGlobalAssembly:
    def test_forbid_all_kills_the_time_reversal(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.FORBID_ALL)
        assert gd.M.nnz == 0

    def test_allow_all_single_cross_entry(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.ALLOW_ALL)
        m = gd.M.toarray()
        assert np.count_nonzero(m) == 1
        # built from square-rooted weights, so the witness uses the same form
        assert m[0, 1] == math.sqrt(2.0) * math.sqrt(3.0)

    def test_single_snapshot_reduces_to_static(self, rng):
        g = random_digraph(rng, 5)
        tg = TemporalGraph([g], [0.0])
        d = line_graph(g)
        forbid = build_global_transition(tg, BacktrackRegime.FORBID_SPACE)
        assert (forbid.M - d.V).count_nonzero() == 0
        allow = build_global_transition(tg, BacktrackRegime.ALLOW_ALL)
        assert (allow.M - d.half_walk_matrix()).count_nonzero() == 0

    def test_block_triangular(self, rng):
        tg = random_temporal(rng, 3, 4)
        gd = build_global_transition(tg, BacktrackRegime.ALLOW_ALL)
        block_of = np.repeat(np.arange(3), [d.m for d in gd.per_snapshot])
        coo = gd.M.tocoo()
        assert np.all(block_of[coo.row] <= block_of[coo.col])

    def test_regime_monotonicity(self, rng):
        for _ in range(6):
            tg = random_temporal(rng)
            mats = {
                regime: build_global_transition(tg, regime).M.toarray()
                for regime in BacktrackRegime
            }
            forbid_all = mats[BacktrackRegime.FORBID_ALL]
            allow = mats[BacktrackRegime.ALLOW_ALL]
            for mid in (BacktrackRegime.FORBID_SPACE, BacktrackRegime.FORBID_TIME):
                assert np.all(forbid_all <= mats[mid] + 1e-15)
                assert np.all(mats[mid] <= allow + 1e-15)
            assert np.all(forbid_all >= 0.0)

    def test_empty_snapshot_keeps_indices(self):
        labels = ["a", "b"]
        g1 = WeightedGraph(labels, [(0, 1, 2.0)])
        empty = WeightedGraph(labels, [])
        g3 = WeightedGraph(labels, [(1, 0, 3.0)])
        tg = TemporalGraph([g1, empty, g3], [0.0, 1.0, 2.0])
        gd = build_global_transition(tg, BacktrackRegime.ALLOW_ALL)
        assert gd.m_total == 2
        assert list(gd.offsets) == [0, 1, 1, 2]
        assert gd.M[0, 1] == math.sqrt(2.0) * math.sqrt(3.0)

    def test_spectrum_is_max_over_diagonal_blocks(self, rng):
        for _ in range(6):
            tg = random_temporal(rng, 3, 4)
            for regime in (BacktrackRegime.FORBID_ALL, BacktrackRegime.ALLOW_ALL):
                gd = build_global_transition(tg, regime)
                if gd.m_total == 0:
                    continue
                rho = spectral_radius(gd.M)
                dense_blocks = []
                for tau, d in enumerate(gd.per_snapshot):
                    lo, hi = gd.offsets[tau], gd.offsets[tau + 1]
                    dense_blocks.append(gd.M[lo:hi, lo:hi].toarray())
                want = max(
                    (max(np.abs(np.linalg.eigvals(b))) if b.size else 0.0)
                    for b in dense_blocks
                )
                assert rho == pytest.approx(want, rel=1e-6, abs=1e-8)


class TestFastConstruction:
    def test_example_is_zero(self):
        fast = forbid_all_transition_fast(two_snapshot_example())
        assert fast.nnz == 0

    def test_single_snapshot_is_static_pruned(self, rng):
        g = random_digraph(rng, 5)
        fast = forbid_all_transition_fast(TemporalGraph([g], [0.0]))
        assert (fast - line_graph(g).V).count_nonzero() == 0

    def test_bitwise_equal_to_block_assembly(self, rng):
        for _ in range(10):
            tg = random_temporal(rng)
            direct = build_global_transition(tg, BacktrackRegime.FORBID_ALL).M
            fast = forbid_all_transition_fast(tg)
            assert np.array_equal(direct.indptr, fast.indptr)
            assert np.array_equal(direct.indices, fast.indices)
            assert np.array_equal(direct.data, fast.data)


class TestWalkCounts:
    def test_example_allow_all(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.ALLOW_ALL)
        counts = temporal_walk_counts(gd, 1)
        assert counts[0, 1] == pytest.approx(6.0, rel=1e-14)
        assert counts.nnz == 1

    def test_example_forbid_all_vanishes(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.FORBID_ALL)
        for k in (1, 2, 3):
            assert temporal_walk_counts(gd, k).nnz == 0

    def test_nilpotent_beyond_longest_walk(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.ALLOW_ALL)
        assert temporal_walk_counts(gd, 2).nnz == 0

    def test_matches_oracle_all_regimes(self, rng):
        for _ in range(8):
            tg = random_temporal(rng)
            for regime in BacktrackRegime:
                gd = build_global_transition(tg, regime)
                oracle = count_temporal_walks_bruteforce(tg, regime, 5)
                for k in range(5):
                    assert rel_dev(temporal_walk_counts(gd, k), oracle[k + 1]) <= 1e-12


class TestCentrality:
    def test_example_forbid_all(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.FORBID_ALL)
        for t in (0.05, 0.2):
            v = temporal_f_centrality(gd, RESOLVENT, t)
            assert np.allclose(v, [1 + 2 * t, 1 + 3 * t], atol=1e-13)

    def test_example_allow_all(self):
        gd = build_global_transition(two_snapshot_example(), BacktrackRegime.ALLOW_ALL)
        for t in (0.05, 0.2):
            v = temporal_f_centrality(gd, RESOLVENT, t)
            assert np.allclose(v, [1 + 2 * t + 6 * t * t, 1 + 3 * t], atol=1e-13)

    def test_empty_temporal_graph(self):
        g = WeightedGraph(["a", "b"], [])
        gd = build_global_transition(TemporalGraph([g, g], [0.0, 1.0]), BacktrackRegime.FORBID_ALL)
        assert np.allclose(temporal_f_centrality(gd, RESOLVENT, 0.4), 1.0)

    def test_single_snapshot_matches_static(self, rng):
        for regime in (BacktrackRegime.FORBID_SPACE, BacktrackRegime.FORBID_ALL):
            g = random_digraph(rng, 5)
            tg = TemporalGraph([g], [0.0])
            gd = build_global_transition(tg, regime)
            d = line_graph(g)
            rho = spectral_radius(d.V)
            t = 0.3 if rho == 0 else 0.5 / rho
            temporal = temporal_f_centrality(gd, RESOLVENT, t, tol=1e-12)
            plan = CentralityPlan(d, RESOLVENT, t, rho_v=rho)
            static = f_centrality(plan, tol=1e-12)
            assert np.allclose(temporal, static, rtol=1e-12, atol=1e-12)

    def test_out_of_range_rejected(self):
        pair = WeightedGraph(["1", "2"], [(0, 1, 2.0), (1, 0, 2.0)])
        tg = TemporalGraph([pair, pair], [0.0, 1.0])
        gd = build_global_transition(tg, BacktrackRegime.ALLOW_ALL)
        rho = spectral_radius(gd.M)
        assert rho > 0
        with pytest.raises(ValidationError, match="permitted range"):
            temporal_f_centrality(gd, RESOLVENT, 1.01 / rho)

    def test_exponential_series_runs(self, rng):
        tg = random_temporal(rng, 2, 4)
        gd = build_global_transition(tg, BacktrackRegime.FORBID_ALL)
        v = temporal_f_centrality(gd, CoefficientSeries.exponential(), 0.2, tol=1e-12)
        assert np.all(v >= 1.0 - 1e-12)


class TestClassicalKatz:
    def test_single_snapshot_is_static_katz(self, rng):
        g = random_digraph(rng, 5)
        tg = TemporalGraph([g], [0.0])
        a = adjacency(g).toarray()
        rho = spectral_radius(adjacency(g))
        t = 0.3 if rho == 0 else 0.5 / rho
        x = classical_temporal_katz(tg, t)
        want = np.linalg.solve(np.eye(5) - t * a, np.ones(5))
        assert np.allclose(x, want, rtol=1e-11, atol=1e-11)

    def test_all_snapshots_empty(self):
        g = WeightedGraph(["a", "b"], [])
        tg = TemporalGraph([g, g, g], [0.0, 1.0, 2.0])
        assert np.allclose(classical_temporal_katz(tg, 0.7), 1.0)

    def test_two_snapshot_hand_solve(self):
        tg = two_snapshot_example()
        t = 0.1
        x = classical_temporal_katz(tg, t)
        inner = np.linalg.solve(np.eye(2) - t * adjacency(tg.snapshots[1]).toarray(), np.ones(2))
        want = np.linalg.solve(np.eye(2) - t * adjacency(tg.snapshots[0]).toarray(), inner)
        assert np.allclose(x, want, atol=1e-13)
        assert np.allclose(x, [1 + 2 * t * (1 + 3 * t), 1 + 3 * t], atol=1e-13)

    def test_out_of_range_rejected(self):
        pair = WeightedGraph(["1", "2"], [(0, 1, 4.0), (1, 0, 4.0)])
        tg = TemporalGraph([pair], [0.0])  # rho(A) = 4, range [0, 0.25)
        with pytest.raises(ValidationError, match="permitted range"):
            classical_temporal_katz(tg, 0.5)


class TestPermittedRange:
    def test_zero_transition_is_unbounded(self):
        tg = two_snapshot_example()
        lo, hi = permitted_t_range(tg, BacktrackRegime.FORBID_ALL)
        assert lo == 0.0 and hi == math.inf

    def test_classical_uses_largest_snapshot_radius(self):
        tg = two_snapshot_example()
        lo, hi = permitted_t_range(tg, classical=True)
        assert (lo, hi) == (0.0, math.inf)  # single edges have radius zero
        tri = WeightedGraph(["1", "2"], [(0, 1, 4.0), (1, 0, 4.0)])
        tg2 = TemporalGraph([tri, tri], [0.0, 1.0])
        lo, hi = permitted_t_range(tg2, classical=True)
        assert hi == pytest.approx(0.25, rel=1e-8)

    def test_regime_required_without_gd(self):
        with pytest.raises(ValidationError):
            permitted_t_range(two_snapshot_example())


class TestIngestion:
    def test_single_file_split_by_time(self):
        tg = parse_temporal_edge_list("0 a b 2\n1 b a 3\n0 b c 1\n")
        assert len(tg.snapshots) == 2
        assert tg.node_labels == ["a", "b", "c"]
        assert tg.snapshots[0].m == 2 and tg.snapshots[1].m == 1
        assert tg.timestamps == [0.0, 1.0]

    def test_manifest(self, tmp_path):
        (tmp_path / "s0.txt").write_text("a b 2\n")
        (tmp_path / "s1.txt").write_text("b a 3\nc a 1\n")
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("s0.txt\ns1.txt\n")
        tg = load_temporal_manifest(manifest)
        assert len(tg.snapshots) == 2
        assert tg.node_labels == ["a", "b", "c"]
        assert tg.snapshots[1].m == 2

    def test_oracle_matches_on_parsed_input(self):
        tg = parse_temporal_edge_list("0 1 2 2\n1 2 1 3\n")
        gd = build_global_transition(tg, BacktrackRegime.ALLOW_ALL)
        oracle = count_temporal_walks_bruteforce(tg, BacktrackRegime.ALLOW_ALL, 2)
        assert rel_dev(temporal_walk_counts(gd, 1), oracle[2]) <= 1e-12
