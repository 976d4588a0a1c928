"""Time-layered tracking graph: assembly, filtering, and export.

Nodes are the extrema (or features) of each time step; edges connect
consecutive steps wherever the correspondence matrices allow it under the
connectivity policy. Track ids flow along the strongest edges: a node
whose strongest predecessor is unique, and which is in turn that
predecessor's strongest successor, continues the predecessor's track;
every other node starts a fresh track. All tie-breaks go to the lower id,
so identical inputs always produce identical graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

from .field import GridDomain, minimum_image_distance
from .correspond import CorrespondenceMatrix
from .morse import ManifoldLabeling

Strength = Literal["max", "avg", "min"]

# DOT styling: probability bins (0,.25], (.25,.5], (.5,.75], (.75,1]
_BIN_EDGES = (0.25, 0.5, 0.75)
_BIN_WIDTHS = (1.0, 2.0, 3.5, 5.0)
_TRACK_COLORS = (
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
    "#aa3377", "#bbbbbb", "#222255", "#225555", "#555522",
)


@dataclass(frozen=True)
class GraphNode:
    t: int
    id: int
    kind: Literal["extremum", "feature"]
    vertex: int
    value: float
    pos: tuple[float, ...]
    track: int = -1


@dataclass(frozen=True)
class GraphEdge:
    t: int  # connects layer t to layer t+1
    i: int
    j: int
    p_forward: float | None
    p_backward: float | None
    strength: float


@dataclass(frozen=True)
class ConnectivityPolicy:
    bidirectional: bool = True
    strength: Strength = "max"

    def __post_init__(self):
        if self.strength not in ("max", "avg", "min"):
            raise ValueError(f"unknown strength rule {self.strength!r}")


@dataclass(frozen=True, eq=False)
class TrackingGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = {(n.t, n.id) for n in self.nodes}
        for e in self.edges:
            # edges may only span one step, between known nodes
            assert (e.t, e.i) in ids and (e.t + 1, e.j) in ids
            assert 0.0 <= e.strength <= 1.0
            assert e.p_forward is not None or e.p_backward is not None

    @property
    def n_layers(self) -> int:
        return 1 + max((n.t for n in self.nodes), default=-1)

    def layer(self, t: int) -> list[GraphNode]:
        return [n for n in self.nodes if n.t == t]

    def edge_set(self) -> set[tuple[int, int, int]]:
        return {(e.t, e.i, e.j) for e in self.edges}


def _edge_strength(rule: Strength, pf: float | None, pb: float | None) -> float:
    present = [p for p in (pf, pb) if p is not None]
    if rule == "max":
        return max(present)
    if rule == "min":
        return min(present)
    return sum(present) / len(present)


def extremum_layers(labelings: Sequence[ManifoldLabeling]) -> list[list[GraphNode]]:
    """Node stubs (track unset) for each step's extrema."""
    layers = []
    for t, lab in enumerate(labelings):
        layers.append(
            [
                GraphNode(t, e.id, "extremum", e.vertex, e.value, lab.domain.position(e.vertex))
                for e in lab.extrema
            ]
        )
    return layers


def _propagate_tracks(
    layers: list[list[GraphNode]], edges: list[GraphEdge]
) -> tuple[GraphNode, ...]:
    """Assign track ids layer by layer along strongest edges."""
    incoming: dict[int, dict[int, list[GraphEdge]]] = {}
    for e in edges:
        incoming.setdefault(e.t + 1, {}).setdefault(e.j, []).append(e)

    next_track = 0
    track_of: dict[tuple[int, int], int] = {}
    out = []
    for t, layer in enumerate(layers):
        # resolve which node, if any, continues each predecessor's track
        heir_of: dict[int, tuple[float, int]] = {}
        best_pred: dict[int, tuple[float, int]] = {}
        for node in sorted(layer, key=lambda n: n.id):
            cands = incoming.get(t, {}).get(node.id, [])
            if not cands:
                continue
            top = max(e.strength for e in cands)
            winners = [e.i for e in cands if e.strength == top]
            if len(winners) != 1:
                continue  # ambiguous merge: fresh track
            i = winners[0]
            best_pred[node.id] = (top, i)
            cur = heir_of.get(i)
            if cur is None or (top, -node.id) > (cur[0], -cur[1]):
                heir_of[i] = (top, node.id)
        for node in sorted(layer, key=lambda n: n.id):
            pred = best_pred.get(node.id)
            if pred is not None and heir_of[pred[1]][1] == node.id:
                track = track_of[(t - 1, pred[1])]
            else:
                track = next_track
                next_track += 1
            track_of[(t, node.id)] = track
            out.append(replace(node, track=track))
    return tuple(out)


def assemble(
    layers: list[list[GraphNode]],
    cm_forward: Sequence[CorrespondenceMatrix],
    cm_backward: Sequence[CorrespondenceMatrix],
    policy: ConnectivityPolicy,
    strategy: str | None = None,
) -> TrackingGraph:
    """Connect consecutive layers per the policy and propagate track ids.

    ``cm_forward[t]`` maps layer t to t+1; ``cm_backward[t]`` maps layer
    t+1 back to t. A bidirectional policy requires both entries for an
    edge; otherwise either direction suffices.
    """
    if len(cm_forward) != len(layers) - 1 or len(cm_backward) != len(layers) - 1:
        raise ValueError("need exactly one matrix pair per consecutive layer pair")
    edges: list[GraphEdge] = []
    for t in range(len(layers) - 1):
        fwd, bwd = cm_forward[t], cm_backward[t]
        n_t, n_n = len(layers[t]), len(layers[t + 1])
        if (fwd.rows, fwd.cols) != (n_t, n_n) or (bwd.rows, bwd.cols) != (n_n, n_t):
            raise ValueError(f"matrix shape mismatch at step {t}")
        pairs = {(i, j) for i, j, _ in fwd.items()}
        back_pairs = {(i, j) for j, i, _ in bwd.items()}
        keep = pairs & back_pairs if policy.bidirectional else pairs | back_pairs
        for i, j in sorted(keep):
            pf = fwd.prob(i, j) or None
            pb = bwd.prob(j, i) or None
            edges.append(GraphEdge(t, i, j, pf, pb, _edge_strength(policy.strength, pf, pb)))
    nodes = _propagate_tracks(layers, edges)
    meta = {
        "strategy": strategy,
        "policy": {"bidirectional": policy.bidirectional, "strength": policy.strength},
        "thresholds": {},
    }
    return TrackingGraph(nodes, tuple(edges), meta)


def threshold_filter(g: TrackingGraph, p_min: float, require: Literal["any", "both"] = "any") -> TrackingGraph:
    """Keep edges whose probabilities strictly exceed p_min, then redo tracks.

    ``require="any"`` passes an edge if one present direction clears the
    bar; ``"both"`` insists on two directions, both above it.
    """
    if not 0.0 <= p_min <= 1.0:
        raise ValueError(f"p_min must be in [0, 1], got {p_min}")
    if require not in ("any", "both"):
        raise ValueError(f"unknown requirement {require!r}")

    def keep(e: GraphEdge) -> bool:
        present = [p for p in (e.p_forward, e.p_backward) if p is not None]
        if require == "both" and len(present) < 2:
            return False
        hits = [p > p_min for p in present]
        return all(hits) if require == "both" else any(hits)

    edges = tuple(e for e in g.edges if keep(e))
    layers = [g.layer(t) for t in range(g.n_layers)]
    nodes = _propagate_tracks(layers, list(edges))
    meta = {**g.meta, "thresholds": {**g.meta.get("thresholds", {})}}
    meta["thresholds"]["probability"] = {"p_min": p_min, "require": require}
    return TrackingGraph(nodes, edges, meta)


@dataclass(frozen=True)
class SemanticPredicate:
    value_min: float | None = None
    value_max: float | None = None
    box_min: tuple[float, ...] | None = None
    box_max: tuple[float, ...] | None = None
    max_jump: float | None = None

    def __post_init__(self):
        if self.value_min is not None and self.value_max is not None:
            if self.value_min > self.value_max:
                raise ValueError("inverted value range")
        if self.box_min is not None and self.box_max is not None:
            if any(a > b for a, b in zip(self.box_min, self.box_max)):
                raise ValueError("inverted spatial box")

    def admits_node(self, n: GraphNode) -> bool:
        if self.value_min is not None and n.value < self.value_min:
            return False
        if self.value_max is not None and n.value > self.value_max:
            return False
        if self.box_min is not None and any(x < b for x, b in zip(n.pos, self.box_min)):
            return False
        if self.box_max is not None and any(x > b for x, b in zip(n.pos, self.box_max)):
            return False
        return True


def semantic_filter(g: TrackingGraph, domain: GridDomain, predicate: SemanticPredicate) -> TrackingGraph:
    """Drop nodes outside the value/box constraints and edges that jump
    farther than allowed (minimum-image distance on periodic axes)."""
    kept_nodes = tuple(n for n in g.nodes if predicate.admits_node(n))
    alive = {(n.t, n.id) for n in kept_nodes}
    pos_of = {(n.t, n.id): n.pos for n in g.nodes}

    def keep(e: GraphEdge) -> bool:
        if (e.t, e.i) not in alive or (e.t + 1, e.j) not in alive:
            return False
        if predicate.max_jump is not None:
            jump = minimum_image_distance(domain, pos_of[(e.t, e.i)], pos_of[(e.t + 1, e.j)])
            if jump > predicate.max_jump:
                return False
        return True

    edges = tuple(e for e in g.edges if keep(e))
    n_layers = g.n_layers
    layers = [[n for n in kept_nodes if n.t == t] for t in range(n_layers)]
    nodes = _propagate_tracks(layers, list(edges))
    meta = {**g.meta, "thresholds": {**g.meta.get("thresholds", {})}}
    meta["thresholds"]["semantic"] = {
        k: list(v) if isinstance(v, tuple) else v
        for k, v in (
            ("value_min", predicate.value_min),
            ("value_max", predicate.value_max),
            ("box_min", predicate.box_min),
            ("box_max", predicate.box_max),
            ("max_jump", predicate.max_jump),
        )
        if v is not None
    }
    return TrackingGraph(nodes, edges, meta)


def strength_bin(s: float) -> int:
    """Quartile bin of a probability, 0..3."""
    for b, edge in enumerate(_BIN_EDGES):
        if s <= edge:
            return b
    return 3


def export(g: TrackingGraph, format: Literal["json", "dot"]) -> str:
    if format == "json":
        return _export_json(g)
    if format == "dot":
        return _export_dot(g)
    raise ValueError(f"unknown export format {format!r}")


def _export_json(g: TrackingGraph) -> str:
    nodes = [
        {
            "t": n.t, "id": n.id, "kind": n.kind, "vertex": n.vertex,
            "value": n.value, "pos": list(n.pos), "track": n.track,
        }
        for n in sorted(g.nodes, key=lambda n: (n.t, n.id))
    ]
    edges = []
    for e in sorted(g.edges, key=lambda e: (e.t, e.i, e.j)):
        doc = {"t": e.t, "i": e.i, "j": e.j, "strength": e.strength}
        if e.p_forward is not None:
            doc["pf"] = e.p_forward
        if e.p_backward is not None:
            doc["pb"] = e.p_backward
        edges.append(doc)
    return json.dumps({"meta": g.meta, "nodes": nodes, "edges": edges},
                      sort_keys=True, indent=2) + "\n"


def import_graph(text: str) -> TrackingGraph:
    """Inverse of the JSON export; stored track ids are kept as-is."""
    doc = json.loads(text)
    nodes = tuple(
        GraphNode(n["t"], n["id"], n["kind"], n["vertex"], n["value"],
                  tuple(n["pos"]), n["track"])
        for n in doc["nodes"]
    )
    edges = tuple(
        GraphEdge(e["t"], e["i"], e["j"], e.get("pf"), e.get("pb"), e["strength"])
        for e in doc["edges"]
    )
    return TrackingGraph(nodes, edges, doc.get("meta", {}))


def _export_dot(g: TrackingGraph) -> str:
    lines = [
        "// tracking graph: layers = time steps, columns left to right",
        "// edge width bins by strength: (0,0.25] (0.25,0.5] (0.5,0.75] (0.75,1]",
        "// node fill keyed by track id",
        "digraph tracking {",
        "  rankdir=LR;",
        "  node [shape=circle, style=filled];",
    ]
    for t in range(g.n_layers):
        layer = sorted(g.layer(t), key=lambda n: n.id)
        lines.append(f"  subgraph layer_{t} {{")
        lines.append("    rank=same;")
        for n in layer:
            color = _TRACK_COLORS[n.track % len(_TRACK_COLORS)]
            label = f"t{n.t} #{n.id}\\n{n.value:.4g}"
            lines.append(
                f'    n{n.t}_{n.id} [label="{label}", fillcolor="{color}", tooltip="track {n.track}"];'
            )
        lines.append("  }")
    for e in sorted(g.edges, key=lambda e: (e.t, e.i, e.j)):
        width = _BIN_WIDTHS[strength_bin(e.strength)]
        lines.append(
            f"  n{e.t}_{e.i} -> n{e.t + 1}_{e.j} "
            f'[penwidth={width}, label="{e.strength:.3f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
