import json

import numpy as np
import pytest

from extrack.correspond import CorrespondenceMatrix, _csr_from_entries
from extrack.field import GridDomain
from extrack.trackgraph import (
    ConnectivityPolicy,
    GraphEdge,
    GraphNode,
    SemanticPredicate,
    TrackingGraph,
    assemble,
    export,
    extremum_layers,
    import_graph,
    semantic_filter,
    strength_bin,
    threshold_filter,
)


def cm(dense, direction, denom=1000):
    """CorrespondenceMatrix from a dense probability array."""
    dense = np.asarray(dense, dtype=float)
    ii, jj = np.nonzero(dense)
    cc = np.rint(dense[ii, jj] * denom).astype(np.int64)
    indptr, indices, counts = _csr_from_entries(dense.shape[0], ii, jj, cc)
    return CorrespondenceMatrix(
        dense.shape[0], dense.shape[1], direction, "manifold-overlap",
        indptr, indices, counts, np.full(dense.shape[0], denom, np.int64), counts / denom,
    )


def mk_layers(sizes):
    return [
        [GraphNode(t, i, "extremum", i, float(i), (float(i), 0.0)) for i in range(n)]
        for t, n in enumerate(sizes)
    ]


def track_of(g, t, i):
    (node,) = [n for n in g.nodes if (n.t, n.id) == (t, i)]
    return node.track


class TestAssembly:
    def test_identity_chain_keeps_tracks(self):
        eye = np.eye(2)
        g = assemble(mk_layers([2, 2, 2]),
                     [cm(eye, "forward")] * 2, [cm(eye, "backward")] * 2,
                     ConnectivityPolicy())
        assert g.n_layers == 3
        assert len(g.edges) == 4
        assert all(e.strength == 1.0 for e in g.edges)
        for i in range(2):
            assert len({track_of(g, t, i) for t in range(3)}) == 1
        assert {n.track for n in g.nodes} == {0, 1}

    def test_bidirectional_needs_both_directions(self):
        fwd = cm([[1.0, 0.0], [0.0, 1.0]], "forward")
        bwd = cm([[0.6, 0.4], [0.0, 0.0]], "backward")  # rows are t+1 nodes
        strict = assemble(mk_layers([2, 2]), [fwd], [bwd], ConnectivityPolicy(bidirectional=True))
        assert strict.edge_set() == {(0, 0, 0)}
        loose = assemble(mk_layers([2, 2]), [fwd], [bwd], ConnectivityPolicy(bidirectional=False))
        assert loose.edge_set() == {(0, 0, 0), (0, 1, 0), (0, 1, 1)}
        by_pair = {(e.i, e.j): e for e in loose.edges}
        assert by_pair[(1, 1)].p_backward is None  # forward-only pair
        assert by_pair[(1, 0)].p_forward is None  # backward-only pair

    @pytest.mark.parametrize("rule,expect", [("max", 0.8), ("avg", 0.6), ("min", 0.4)])
    def test_strength_rules(self, rule, expect):
        fwd = cm([[0.8]], "forward")
        bwd = cm([[0.4]], "backward")
        g = assemble(mk_layers([1, 1]), [fwd], [bwd], ConnectivityPolicy(strength=rule))
        assert g.edges[0].strength == pytest.approx(expect)

    @pytest.mark.parametrize("rule", ["max", "avg", "min"])
    def test_one_sided_strength_is_the_lone_probability(self, rule):
        fwd = cm([[0.8, 0.2]], "forward")
        bwd = cm([[1.0], [0.0]], "backward")
        g = assemble(mk_layers([1, 2]), [fwd], [bwd],
                     ConnectivityPolicy(bidirectional=False, strength=rule))
        (lone,) = [e for e in g.edges if e.j == 1]
        assert lone.p_backward is None and lone.strength == pytest.approx(0.2)

    def test_matrix_count_must_match_layers(self):
        with pytest.raises(ValueError, match="matrix pair"):
            assemble(mk_layers([1, 1, 1]), [cm([[1.0]], "forward")],
                     [cm([[1.0]], "backward")], ConnectivityPolicy())

    def test_matrix_shape_must_match_layers(self):
        with pytest.raises(ValueError, match="shape"):
            assemble(mk_layers([2, 2]), [cm([[1.0]], "forward")],
                     [cm([[1.0]], "backward")], ConnectivityPolicy())

    def test_meta_records_strategy_and_policy(self):
        g = assemble(mk_layers([1, 1]), [cm([[1.0]], "forward")],
                     [cm([[1.0]], "backward")],
                     ConnectivityPolicy(bidirectional=False, strength="avg"),
                     strategy="manifold-overlap")
        assert g.meta["strategy"] == "manifold-overlap"
        assert g.meta["policy"] == {"bidirectional": False, "strength": "avg"}
        assert g.meta["thresholds"] == {}

    def test_unknown_strength_rule_rejected(self):
        with pytest.raises(ValueError):
            ConnectivityPolicy(strength="median")


class TestTrackPropagation:
    def assemble_edges(self, sizes, fwd_dense_list):
        """Any-direction graph from forward matrices alone."""
        layers = mk_layers(sizes)
        fwds = [cm(d, "forward") for d in fwd_dense_list]
        bwds = [cm(np.zeros((d.shape[1] if hasattr(d, 'shape') else len(d[0]),
                             len(d))), "backward")
                for d in (np.asarray(x) for x in fwd_dense_list)]
        return assemble(layers, fwds, bwds, ConnectivityPolicy(bidirectional=False))

    def test_split_stronger_branch_inherits(self):
        g = self.assemble_edges([1, 2], [[[0.7, 0.3]]])
        assert track_of(g, 1, 0) == track_of(g, 0, 0)
        assert track_of(g, 1, 1) != track_of(g, 0, 0)

    def test_split_tie_goes_to_lower_id(self):
        g = self.assemble_edges([1, 2], [[[0.5, 0.5]]])
        assert track_of(g, 1, 0) == track_of(g, 0, 0)
        assert track_of(g, 1, 1) != track_of(g, 0, 0)

    def test_ambiguous_merge_starts_fresh(self):
        g = self.assemble_edges([2, 1], [[[0.5], [0.5]]])
        tracks = {track_of(g, 0, 0), track_of(g, 0, 1)}
        assert track_of(g, 1, 0) not in tracks

    def test_merge_follows_stronger_predecessor(self):
        g = self.assemble_edges([2, 1], [[[0.9], [0.1]]])
        assert track_of(g, 1, 0) == track_of(g, 0, 0)

    def test_strongest_pred_must_reciprocate(self):
        # node j0's only predecessor also has a stronger successor j1,
        # so j0 cannot continue that track
        g = self.assemble_edges([1, 2], [[[0.6, 0.9]]])
        assert track_of(g, 1, 1) == track_of(g, 0, 0)
        assert track_of(g, 1, 0) != track_of(g, 0, 0)

    def test_parallel_chains_do_not_cross(self):
        dense = [[0.9, 0.8], [0.0, 0.95]]
        g = self.assemble_edges([2, 2], [dense])
        assert track_of(g, 1, 0) == track_of(g, 0, 0)
        assert track_of(g, 1, 1) == track_of(g, 0, 1)

    def test_fresh_ids_count_up_in_layer_order(self):
        g = self.assemble_edges([2, 2], [np.zeros((2, 2))])
        order = [n.track for n in sorted(g.nodes, key=lambda n: (n.t, n.id))]
        assert order == [0, 1, 2, 3]


class TestThresholdFilter:
    def graph(self):
        fwd = cm([[0.8, 0.2], [0.0, 1.0]], "forward")
        bwd = cm([[1.0, 0.0], [0.25, 0.75]], "backward")
        return assemble(mk_layers([2, 2]), [fwd], [bwd], ConnectivityPolicy())

    def test_strictly_greater_than(self):
        g = self.graph()
        # pair (0,1): pf 0.2, pb 0.25; any-direction bar at exactly 0.25 kills it
        assert (0, 0, 1) in g.edge_set()
        out = threshold_filter(g, 0.25, "any")
        assert out.edge_set() == {(0, 0, 0), (0, 1, 1)}

    def test_any_versus_both(self):
        g = self.graph()
        keep_any = threshold_filter(g, 0.2, "any").edge_set()
        keep_both = threshold_filter(g, 0.2, "both").edge_set()
        assert (0, 0, 1) in keep_any  # pb 0.25 clears the bar alone
        assert (0, 0, 1) not in keep_both  # pf 0.2 does not strictly clear it

    def test_both_requires_two_directions(self):
        fwd = cm([[1.0]], "forward")
        bwd = cm(np.zeros((1, 1)), "backward")
        g = assemble(mk_layers([1, 1]), [fwd], [bwd], ConnectivityPolicy(bidirectional=False))
        assert threshold_filter(g, 0.0, "any").edge_set() == {(0, 0, 0)}
        assert threshold_filter(g, 0.0, "both").edge_set() == set()

    def test_zero_bar_keeps_everything(self):
        g = self.graph()
        assert threshold_filter(g, 0.0, "any").edge_set() == g.edge_set()

    def test_unit_bar_drops_everything_and_recomputes_tracks(self):
        g = self.graph()
        out = threshold_filter(g, 1.0, "any")
        assert out.edge_set() == set()
        assert sorted(n.track for n in out.nodes) == [0, 1, 2, 3]

    def test_filter_is_idempotent(self):
        g = self.graph()
        once = threshold_filter(g, 0.25, "any")
        twice = threshold_filter(once, 0.25, "any")
        assert export(once, "json") == export(twice, "json")

    def test_meta_shows_latest_threshold_only(self):
        g = threshold_filter(threshold_filter(self.graph(), 0.1, "any"), 0.3, "both")
        assert g.meta["thresholds"]["probability"] == {"p_min": 0.3, "require": "both"}

    def test_invalid_arguments(self):
        g = self.graph()
        with pytest.raises(ValueError):
            threshold_filter(g, -0.1)
        with pytest.raises(ValueError):
            threshold_filter(g, 0.5, "either")


class TestSemanticFilter:
    def graph(self):
        layers = [
            [GraphNode(0, 0, "extremum", 0, -5.0, (0.0, 0.0)),
             GraphNode(0, 1, "extremum", 5, -1.0, (1.0, 1.0))],
            [GraphNode(1, 0, "extremum", 0, -4.0, (0.0, 0.0)),
             GraphNode(1, 1, "extremum", 10, -0.5, (2.0, 2.0))],
        ]
        fwd = cm([[0.9, 0.1], [0.2, 0.8]], "forward")
        bwd = cm([[0.9, 0.2], [0.1, 0.8]], "backward")
        return assemble(layers, [fwd], [bwd], ConnectivityPolicy())

    def test_empty_predicate_changes_nothing(self):
        g = self.graph()
        out = semantic_filter(g, GridDomain((4, 4)), SemanticPredicate())
        assert out.edge_set() == g.edge_set()
        assert {(n.t, n.id) for n in out.nodes} == {(n.t, n.id) for n in g.nodes}
        assert out.meta["thresholds"]["semantic"] == {}

    def test_value_window_drops_nodes_and_their_edges(self):
        g = self.graph()
        out = semantic_filter(g, GridDomain((4, 4)), SemanticPredicate(value_max=-2.0))
        assert {(n.t, n.id) for n in out.nodes} == {(0, 0), (1, 0)}
        assert out.edge_set() == {(0, 0, 0)}

    def test_box_filter_uses_world_positions(self):
        g = self.graph()
        pred = SemanticPredicate(box_min=(0.0, 0.0), box_max=(1.5, 1.5))
        out = semantic_filter(g, GridDomain((4, 4)), pred)
        assert {(n.t, n.id) for n in out.nodes} == {(0, 0), (0, 1), (1, 0)}

    def test_zero_jump_keeps_only_stationary_edges(self):
        g = self.graph()
        out = semantic_filter(g, GridDomain((4, 4)), SemanticPredicate(max_jump=0.0))
        assert out.edge_set() == {(0, 0, 0)}

    def test_jump_measures_minimum_image(self):
        dom = GridDomain((2, 10), periodic=(False, True))
        layers = [
            [GraphNode(0, 0, "extremum", 0, 0.0, (0.0, 0.0))],
            [GraphNode(1, 0, "extremum", 9, 0.0, (0.0, 9.0))],
        ]
        g = assemble(layers, [cm([[1.0]], "forward")], [cm([[1.0]], "backward")],
                     ConnectivityPolicy())
        # wrap distance is 1, straight-line would be 9
        assert semantic_filter(g, dom, SemanticPredicate(max_jump=1.0)).edge_set() == {(0, 0, 0)}
        no_wrap = GridDomain((2, 10))
        assert semantic_filter(g, no_wrap, SemanticPredicate(max_jump=1.0)).edge_set() == set()

    def test_inverted_ranges_rejected(self):
        with pytest.raises(ValueError, match="value"):
            SemanticPredicate(value_min=1.0, value_max=0.0)
        with pytest.raises(ValueError, match="box"):
            SemanticPredicate(box_min=(0.0, 2.0), box_max=(1.0, 1.0))

    def test_node_only_filters_commute_with_threshold(self):
        g = self.graph()
        dom = GridDomain((4, 4))
        pred = SemanticPredicate(value_max=-0.9)
        a = semantic_filter(threshold_filter(g, 0.15, "any"), dom, pred)
        b = threshold_filter(semantic_filter(g, dom, pred), 0.15, "any")
        assert export(a, "json") == export(b, "json")


class TestExport:
    def graph(self):
        fwd = cm([[0.9, 0.1], [0.0, 0.6]], "forward")
        bwd = cm([[1.0, 0.0], [0.2, 0.8]], "backward")
        return assemble(mk_layers([2, 2]), [fwd], [bwd], ConnectivityPolicy(),
                        strategy="manifold-overlap")

    def test_json_round_trip_is_byte_identical(self):
        g = self.graph()
        text = export(g, "json")
        again = export(import_graph(text), "json")
        assert again == text

    def test_import_preserves_stored_tracks(self):
        g = self.graph()
        doc = json.loads(export(g, "json"))
        doc["nodes"][0]["track"] = 41
        back = import_graph(json.dumps(doc))
        assert track_of(back, doc["nodes"][0]["t"], doc["nodes"][0]["id"]) == 41

    def test_one_sided_probabilities_are_omitted(self):
        fwd = cm([[1.0]], "forward")
        bwd = cm(np.zeros((1, 1)), "backward")
        g = assemble(mk_layers([1, 1]), [fwd], [bwd], ConnectivityPolicy(bidirectional=False))
        doc = json.loads(export(g, "json"))
        assert "pf" in doc["edges"][0] and "pb" not in doc["edges"][0]

    def test_dot_output_shape(self):
        text = export(self.graph(), "dot")
        assert text.startswith("// tracking graph")
        assert "rankdir=LR;" in text
        assert "subgraph layer_0" in text and "subgraph layer_1" in text
        assert "n0_0 -> n1_0" in text
        for line in text.splitlines():
            if "->" in line:
                assert "penwidth=" in line
                assert line.rstrip().endswith('"];') and 'label="' in line

    def test_dot_penwidth_bins(self):
        text = export(self.graph(), "dot")
        widths = {line.split("penwidth=")[1].split(",")[0]
                  for line in text.splitlines() if "->" in line}
        assert widths <= {"1.0", "2.0", "3.5", "5.0"}
        # strengths 0.9/1.0 -> widest bin, 0.6/0.8 present too
        assert "5.0" in widths

    def test_strength_bins(self):
        assert [strength_bin(s) for s in (0.1, 0.25, 0.26, 0.5, 0.6, 0.75, 0.76, 1.0)] \
            == [0, 0, 1, 1, 2, 2, 3, 3]

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            export(self.graph(), "gexf")

    def test_empty_graph_documents(self):
        g = TrackingGraph((), ())
        assert g.n_layers == 0
        assert export(import_graph(export(g, "json")), "json") == export(g, "json")
        dot = export(g, "dot")
        assert dot.rstrip().endswith("}")


class TestGraphInvariants:
    def test_edges_must_reference_known_nodes(self):
        node = GraphNode(0, 0, "extremum", 0, 0.0, (0.0, 0.0))
        with pytest.raises(AssertionError):
            TrackingGraph((node,), (GraphEdge(0, 0, 1, 1.0, None, 1.0),))

    def test_edges_need_at_least_one_probability(self):
        nodes = (GraphNode(0, 0, "extremum", 0, 0.0, (0.0,)),
                 GraphNode(1, 0, "extremum", 0, 0.0, (0.0,)))
        with pytest.raises(AssertionError):
            TrackingGraph(nodes, (GraphEdge(0, 0, 0, None, None, 0.5),))

    def test_extremum_layers_carry_positions(self):
        from extrack.morse import label_manifolds
        from helpers import random_series

        series = random_series(np.random.default_rng(40), (5, 6), 2)
        labs = [label_manifolds(s, series.domain, "minimum") for s in series.steps]
        layers = extremum_layers(labs)
        assert [n.t for layer in layers for n in layer] == \
            [t for t, layer in enumerate(layers) for _ in layer]
        for t, layer in enumerate(layers):
            for n in layer:
                assert n.pos == series.domain.position(n.vertex)
                assert labs[t].label[n.vertex] == n.id
