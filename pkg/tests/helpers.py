"""Shared builders and brute-force oracles used across the test suite.

Oracles here are deliberately slow and dumb: plain Python loops over
explicit definitions, so library results are checked against independent
arithmetic rather than against themselves.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from extrack.field import GridDomain, ScalarFieldSeries
from extrack.morse import Extremum, ManifoldLabeling


def grid_series(values_per_step, spacing=None, periodic=None) -> ScalarFieldSeries:
    """Build a series from a list of 2D/3D nested lists."""
    first = np.asarray(values_per_step[0], dtype=np.float64)
    domain = GridDomain(first.shape, spacing, periodic)
    return ScalarFieldSeries(domain, tuple(np.asarray(v, dtype=np.float64).reshape(-1) for v in values_per_step))


def random_series(rng, dims, n_steps, periodic=None) -> ScalarFieldSeries:
    domain = GridDomain(dims, periodic=periodic)
    steps = tuple(rng.standard_normal(domain.vertex_count) for _ in range(n_steps))
    return ScalarFieldSeries(domain, steps)


def brute_ball(domain: GridDomain, center: int, d: float) -> list[int]:
    """Euclidean ball by checking every vertex with explicit minimum image."""
    cc = domain.coords_of(center)
    out = []
    for v in range(domain.vertex_count):
        vc = domain.coords_of(v)
        d2 = 0.0
        for a in range(domain.rank):
            delta = abs(vc[a] - cc[a])
            if domain.periodic[a]:
                delta = min(delta, domain.dims[a] - delta)
            d2 += (delta * domain.spacing[a]) ** 2
        if d2 <= d * d + 1e-12:
            out.append(v)
    return out


def brute_neighbors(domain: GridDomain, v: int) -> list[int]:
    """Freudenthal 1-ring from the offset definition, one offset at a time."""
    ups = [o for o in product((0, 1), repeat=domain.rank) if any(o)]
    offsets = ups + [tuple(-x for x in o) for o in ups]
    vc = domain.coords_of(v)
    out = set()
    for off in offsets:
        nc = []
        ok = True
        for a in range(domain.rank):
            c = vc[a] + off[a]
            if domain.periodic[a]:
                c %= domain.dims[a]
            elif not 0 <= c < domain.dims[a]:
                ok = False
                break
            nc.append(c)
        if ok:
            u = domain.vertex_at(nc)
            if u != v:
                out.add(u)
    return sorted(out)


def brute_minimum_image(domain: GridDomain, pa, pb) -> float:
    d2 = 0.0
    for a in range(domain.rank):
        delta = abs(pa[a] - pb[a])
        if domain.periodic[a]:
            period = domain.dims[a] * domain.spacing[a]
            delta = delta % period
            delta = min(delta, period - delta)
        d2 += delta * delta
    return math.sqrt(d2)


def fake_labeling(domain: GridDomain, label, kind="ascending", values=None) -> ManifoldLabeling:
    """Hand-built labeling: extremum i sits at the first vertex labeled i."""
    label = np.asarray(label, dtype=np.int64).reshape(-1)
    n = int(label.max()) + 1
    ex_kind = "minimum" if kind == "ascending" else "maximum"
    extrema = []
    for i in range(n):
        v = int(np.flatnonzero(label == i)[0])
        val = 0.0 if values is None else float(values[i])
        extrema.append(Extremum(i, v, val, math.inf, ex_kind))
    sizes = np.bincount(label, minlength=n)
    return ManifoldLabeling(kind, domain, label.copy(), tuple(extrema), sizes)


def brute_combinatorial_ball(domain: GridDomain, center: int, depth: int) -> list[int]:
    """Hop-limited breadth-first search using the brute neighbor walk."""
    dist = {center: 0}
    frontier = [center]
    for k in range(depth):
        nxt = []
        for v in frontier:
            for u in brute_neighbors(domain, v):
                if u not in dist:
                    dist[u] = k + 1
                    nxt.append(u)
        frontier = nxt
    return sorted(dist)
