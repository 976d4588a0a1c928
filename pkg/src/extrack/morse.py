"""Extrema extraction, manifold labeling, and persistence simplification.

One time step at a time: find the minima (or maxima) of a scalar field on a
grid domain, assign every vertex to its extremum by discrete steepest
descent, and optionally cancel low-persistence extrema by relabeling their
basin into the merge partner's basin.

Ties are broken by vertex index everywhere (simulation of simplicity), so
flat plateaus resolve deterministically. Maxima reuse the minima path on
the negated field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .field import GridDomain, neighbor_table

ExtremumKind = Literal["minimum", "maximum"]
ManifoldKind = Literal["ascending", "descending"]

_MANIFOLD_OF = {"minimum": "ascending", "maximum": "descending"}


class TotalOrder:
    """Strict total order on vertices: lexicographic (value, vertex id)."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64).reshape(-1)

    def less(self, u: int, v: int) -> bool:
        return (self.values[u], u) < (self.values[v], v)

    def ascending(self) -> np.ndarray:
        """All vertex ids sorted ascending under the order."""
        return np.argsort(self.values, kind="stable")


@dataclass(frozen=True)
class Extremum:
    id: int
    vertex: int
    value: float
    persistence: float
    kind: ExtremumKind


@dataclass(frozen=True, eq=False)
class ManifoldLabeling:
    """Partition of the domain's vertices into extremum basins.

    ``label[v]`` is the dense id of the extremum whose manifold contains
    vertex v; ``sizes[i]`` counts the vertices labeled i. The private
    arrays record, per extremum, the merge saddle and the extremum it
    merges into (-1 for the global extremum), which lets ``simplify``
    relabel without re-running the sweep.
    """

    kind: ManifoldKind
    domain: GridDomain
    label: np.ndarray
    extrema: tuple[Extremum, ...]
    sizes: np.ndarray
    _saddles: np.ndarray = field(repr=False, default=None)
    _partners: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        assert self.label.size == self.domain.vertex_count
        assert int(self.sizes.sum()) == self.domain.vertex_count
        assert len(self.extrema) == self.sizes.size
        for e in self.extrema:
            assert self.label[e.vertex] == e.id
        self.label.flags.writeable = False
        self.sizes.flags.writeable = False

    @property
    def extremum_kind(self) -> ExtremumKind:
        return "minimum" if self.kind == "ascending" else "maximum"

    @property
    def n_extrema(self) -> int:
        return len(self.extrema)


def _descent_pointers(w: np.ndarray, domain: GridDomain) -> np.ndarray:
    """One steepest-descent step per vertex under the (value, id) order.

    Returns ptr where ptr[v] is the lexicographically smallest neighbor if
    that neighbor precedes v, else v itself (v is a minimum of w).
    """
    nbr, valid = neighbor_table(domain)
    v_ids = np.arange(w.size)
    nv = np.where(valid, w[nbr], np.inf)
    # argmin of (value, id) per row: min value first, min id among those
    row_min = nv.min(axis=1)
    tied_ids = np.where(nv == row_min[:, None], nbr, w.size)
    best = tied_ids.min(axis=1)
    move = (row_min < w) | ((row_min == w) & (best < v_ids))
    return np.where(move, best, v_ids)


def _resolve_roots(ptr: np.ndarray) -> np.ndarray:
    # pointer doubling; chains strictly descend so this terminates
    root = ptr
    while True:
        nxt = root[root]
        if np.array_equal(nxt, root):
            return root
        root = nxt


def _merge_sweep(w: np.ndarray, domain: GridDomain, label: np.ndarray, ex_vertices: np.ndarray):
    """0-dimensional persistence of the minima of w by basin merging.

    Only edges between different basins can merge sublevel components
    (each basin's sublevel slice stays connected through its descent
    paths), so a union-find over basins processing boundary edges in
    ascending saddle order reproduces the vertex sweep.

    Returns (persistence, saddles, partners) per extremum; the global
    minimum gets +inf persistence, saddle and partner -1.
    """
    n_ex = ex_vertices.size
    pers = np.full(n_ex, np.inf)
    saddles = np.full(n_ex, -1, dtype=np.int64)
    partners = np.full(n_ex, -1, dtype=np.int64)
    if n_ex == 1:
        return pers, saddles, partners

    nbr, valid = neighbor_table(domain)
    boundary = valid & (label[nbr] != label[:, None])
    vv, kk = np.nonzero(boundary)
    uu = nbr[vv, kk]
    # the saddle of an edge is its TotalOrder-larger endpoint; each
    # undirected edge shows up twice, the second hit is a no-op union
    swap = (w[uu] > w[vv]) | ((w[uu] == w[vv]) & (uu > vv))
    sad = np.where(swap, uu, vv)
    order = np.lexsort((sad, w[sad]))
    lab_a = label[vv][order]
    lab_b = label[uu][order]
    sad = sad[order]

    uf = np.arange(n_ex)

    def find(x: int) -> int:
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    ex_w = w[ex_vertices]
    for e in range(sad.size):
        ra, rb = find(int(lab_a[e])), find(int(lab_b[e]))
        if ra == rb:
            continue
        # elder rule: the younger component representative dies here
        if (ex_w[ra], ra) < (ex_w[rb], rb):
            elder, young = ra, rb
        else:
            elder, young = rb, ra
        s = int(sad[e])
        pers[young] = w[s] - ex_w[young]
        saddles[young] = s
        partners[young] = elder
        uf[young] = elder
    return pers, saddles, partners


def label_manifolds(step, domain: GridDomain, kind: ExtremumKind) -> ManifoldLabeling:
    """Assign every vertex to an extremum by discrete steepest descent.

    Minima produce ascending manifolds, maxima descending ones (computed
    on the negated field). Each vertex moves to its (value, id)-smallest
    neighbor while one precedes it; the terminal vertices are the extrema,
    numbered densely in vertex order.
    """
    values = np.asarray(step, dtype=np.float64).reshape(-1)
    if values.size != domain.vertex_count:
        raise ValueError("step length does not match the domain")
    w = -values if kind == "maximum" else values

    ptr = _descent_pointers(w, domain)
    root = _resolve_roots(ptr)
    ex_vertices = np.flatnonzero(ptr == np.arange(w.size))
    label = np.searchsorted(ex_vertices, root)
    sizes = np.bincount(label, minlength=ex_vertices.size)

    pers, saddles, partners = _merge_sweep(w, domain, label, ex_vertices)
    extrema = tuple(
        Extremum(i, int(v), float(values[v]), float(pers[i]), kind)
        for i, v in enumerate(ex_vertices)
    )
    return ManifoldLabeling(_MANIFOLD_OF[kind], domain, label, extrema, sizes, saddles, partners)


def persistence_pairs(step, domain: GridDomain, kind: ExtremumKind):
    """Extremum/saddle pairs as (extremum vertex, saddle vertex, persistence).

    The global extremum pairs with no saddle and reports +inf. Listed in
    extremum-vertex order.
    """
    lab = label_manifolds(step, domain, kind)
    out = []
    for e in lab.extrema:
        s = int(lab._saddles[e.id])
        out.append((e.vertex, None if s < 0 else s, e.persistence))
    return out


def simplify(
    labeling: ManifoldLabeling,
    step,
    threshold_pct: float,
    value_range: float | None = None,
) -> ManifoldLabeling:
    """Cancel extrema with persistence below a percentage of the range.

    The threshold is threshold_pct/100 times the step's value range (or an
    explicit ``value_range``, e.g. a series-global one). Each cancelled
    extremum's basin is relabeled to the surviving extremum its component
    merged into, following merge partners transitively. The global
    extremum (+inf persistence) always survives.
    """
    if not 0.0 <= threshold_pct <= 100.0:
        raise ValueError(f"threshold_pct must be in [0, 100], got {threshold_pct}")
    values = np.asarray(step, dtype=np.float64).reshape(-1)
    if values.size != labeling.domain.vertex_count:
        raise ValueError("step length does not match the labeling's domain")
    for e in labeling.extrema:
        if values[e.vertex] != e.value:
            raise ValueError("labeling was not produced from this step")
    if value_range is None:
        value_range = float(values.max() - values.min())
    threshold = threshold_pct / 100.0 * value_range

    pers = np.array([e.persistence for e in labeling.extrema])
    cancel = pers < threshold
    if not cancel.any():
        return labeling

    partners = labeling._partners
    resolved: dict[int, int] = {}

    def resolve(i: int) -> int:
        # partner persistence is >= own persistence, so chains stay short
        if i not in resolved:
            resolved[i] = i if not cancel[i] else resolve(int(partners[i]))
        return resolved[i]

    survivors = np.flatnonzero(~cancel)
    new_id = np.full(labeling.n_extrema, -1, dtype=np.int64)
    new_id[survivors] = np.arange(survivors.size)
    remap = np.array([new_id[resolve(i)] for i in range(labeling.n_extrema)])

    label = remap[labeling.label]
    sizes = np.bincount(label, minlength=survivors.size)
    extrema = tuple(
        Extremum(int(new_id[i]), labeling.extrema[i].vertex, labeling.extrema[i].value,
                 labeling.extrema[i].persistence, labeling.extrema[i].kind)
        for i in survivors
    )
    saddles = labeling._saddles[survivors]
    partners = np.array(
        [-1 if labeling._partners[i] < 0 else int(new_id[resolve(int(labeling._partners[i]))])
         for i in survivors],
        dtype=np.int64,
    )
    return ManifoldLabeling(labeling.kind, labeling.domain, label, extrema, sizes, saddles, partners)
