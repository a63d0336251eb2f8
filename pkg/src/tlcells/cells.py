"""
Left, right and two-sided Kazhdan-Lusztig preorders and their cells.

An edge w -> x records x <=_L w elementarily: C'_x occurs in C'_s C'_w for
some s with sw > w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable

import networkx as nx

from .coxeter import CoxeterElement, CoxeterGraph, CoxeterGroup, group_of
from .hecke import KLCache

__all__ = [
    "PreorderGraph", "CellPartition", "ClosureVerdict", "build_preorder",
    "compute_cells", "is_closed", "fc_cell_report", "involutions", "delta",
]

SIDES = ("left", "right", "two-sided")


@dataclass
class PreorderGraph:
    """
    Elementary edges of a KL preorder over group indices.

    `edges` maps (w, x) to the generators s witnessing it; for right edges
    the generator multiplies on the right.
    """
    side: str
    group: CoxeterGroup
    edges: dict[tuple[int, int], tuple[int, ...]]

    @cached_property
    def succ(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.group.order)]
        for w, x in self.edges:
            out[w].append(x)
        return out

    def digraph(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.group.order))
        G.add_edges_from(self.edges)
        return G

    def below(self, w: int) -> set[int]:
        """Everything <= w in this preorder."""
        seen = {w}
        stack = [w]
        while stack:
            u = stack.pop()
            for x in self.succ[u]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return seen

    def chain(self, w: int, x: int) -> list[int] | None:
        """A chain of elementary edges from w down to x, if x <= w."""
        return _bfs_path(self.succ, w, x)

    def leq(self, x: CoxeterElement, w: CoxeterElement) -> bool:
        g = self.group
        return g.idx(x) in self.below(g.idx(w))


def _bfs_path(succ, src, dst):
    prev = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            if u == dst:
                path = [u]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            for y in succ[u]:
                if y not in prev:
                    prev[y] = u
                    nxt.append(y)
        frontier = nxt
    return None


def _left_edges(cache: KLCache) -> dict[tuple[int, int], tuple[int, ...]]:
    g = cache.group
    cache.ensure_all()
    L = g.length
    edges: dict[tuple[int, int], list[int]] = {}
    for w in range(g.order):
        mu_row = sorted(cache.mu_row(w))
        for k in range(g.rank):
            sw = g.lmul[k][w]
            if L[sw] < L[w]:
                continue
            edges.setdefault((w, sw), []).append(k + 1)
            for z in mu_row:
                if L[g.lmul[k][z]] < L[z]:
                    edges.setdefault((w, z), []).append(k + 1)
    return {e: tuple(s) for e, s in sorted(edges.items())}


def build_preorder(graph: CoxeterGraph, side: str, cache: KLCache) -> PreorderGraph:
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    g = cache.group
    if g.graph != graph:
        raise ValueError("cache belongs to a different graph")
    left = _left_edges(cache)
    if side == "left":
        return PreorderGraph("left", g, left)
    inv = g.inv
    right = {(inv[w], inv[x]): s for (w, x), s in left.items()}
    right = dict(sorted(right.items()))
    if side == "right":
        return PreorderGraph("right", g, right)
    both: dict[tuple[int, int], tuple[int, ...]] = {}
    for e, s in list(left.items()) + list(right.items()):
        both[e] = tuple(sorted(set(both.get(e, ()) + s)))
    return PreorderGraph("two-sided", g, dict(sorted(both.items())))


@dataclass
class CellPartition:
    """
    Cells (sorted index lists, ordered by their least element) and the
    induced order: `order_edges` holds (i, j) when cell j <= cell i via one
    elementary edge.
    """
    side: str
    group: CoxeterGroup
    cells: list[list[int]]
    order_edges: set[tuple[int, int]] = field(default_factory=set)

    @cached_property
    def cell_of(self) -> list[int]:
        out = [0] * self.group.order
        for c, members in enumerate(self.cells):
            for w in members:
                out[w] = c
        return out

    def cell_leq(self, i: int, j: int) -> bool:
        """Is cell i <= cell j?"""
        G = nx.DiGraph()
        G.add_nodes_from(range(len(self.cells)))
        G.add_edges_from(self.order_edges)
        return i == j or nx.has_path(G, j, i)

    def is_dag(self) -> bool:
        G = nx.DiGraph()
        G.add_nodes_from(range(len(self.cells)))
        G.add_edges_from(self.order_edges)
        return nx.is_directed_acyclic_graph(G)

    def element_cells(self) -> list[list[CoxeterElement]]:
        return [[self.group.element(w) for w in c] for c in self.cells]


def compute_cells(pre: PreorderGraph) -> CellPartition:
    comps = [sorted(c) for c in nx.strongly_connected_components(pre.digraph())]
    comps.sort(key=lambda c: c[0])
    cell_of = [0] * pre.group.order
    for i, c in enumerate(comps):
        for w in c:
            cell_of[w] = i
    order = {(cell_of[w], cell_of[x]) for w, x in pre.edges if cell_of[w] != cell_of[x]}
    return CellPartition(pre.side, pre.group, comps, order)


@dataclass
class ClosureVerdict:
    closed: bool
    witness: tuple[CoxeterElement, CoxeterElement, tuple[int, ...]] | None = None

    def __bool__(self) -> bool:
        return self.closed


def is_closed(subset: Callable[[CoxeterElement], bool] | Iterable[int],
              pre: PreorderGraph, upward: bool = False) -> ClosureVerdict:
    """
    Whether `subset` is closed under the preorder: lam1 in subset and
    lam2 <= lam1 force lam2 in subset (with `upward`, lam2 >= lam1 instead).
    On failure the witness is a violating elementary edge
    (lam1, lam2, generators): the longest lam1, then the smallest
    generator, then the least (lam1, lam2) in (length, word) order.
    """
    g = pre.group
    if callable(subset):
        members = {i for i in range(g.order) if subset(g.element(i))}
    else:
        members = set(subset)
    bad = []
    for (w, x), s in pre.edges.items():
        lam1, lam2 = (x, w) if upward else (w, x)
        if lam1 in members and lam2 not in members:
            bad.append((lam1, lam2, s))
    if not bad:
        return ClosureVerdict(True)
    L = g.length
    lam1, lam2, s = min(bad, key=lambda t: (-L[t[0]], t[2][0], t[0], t[1]))
    return ClosureVerdict(False, (g.element(lam1), g.element(lam2), s))


def involutions(group: CoxeterGroup, members: Iterable[int]) -> list[int]:
    return [w for w in members if group.inv[w] == w]


def delta(cache: KLCache, z: int) -> int:
    """l(z) - 2 deg P_{e,z}: minus the top exponent of Pt_{e,z}."""
    return cache.group.length[z] - 2 * (len(cache.q_poly(0, z)) - 1)


def fc_cell_report(graph: CoxeterGraph, cache: KLCache) -> dict:
    """
    Left/right cell structure of the fully commutative two-sided cells.

    The distinguished involutions of a two-sided cell are taken to be its
    involutions z with delta(z) minimal over the cell. For type B, each
    right/left intersection size is compared with the rule predicted from
    the parabolic subgroup W' generated by s_2..s_n.
    """
    g = group_of(graph)
    fc = g.fc_flags()
    pre_l = build_preorder(graph, "left", cache)
    pre_r = build_preorder(graph, "right", cache)
    pre_t = build_preorder(graph, "two-sided", cache)
    left, right, two = compute_cells(pre_l), compute_cells(pre_r), compute_cells(pre_t)
    fc_set = {w for w in range(g.order) if fc[w]}
    union_ok = all(set(c) <= fc_set or not (set(c) & fc_set) for c in two.cells)
    report = {"graph": graph.name, "fc_union_of_two_sided_cells": union_ok, "cells": []}
    if not union_ok:
        report["supported"] = False
        return report
    report["supported"] = True
    in_wprime = [1 not in g.words[w] for w in range(g.order)]
    is_b = graph.type_tag == "B"
    for cell in two.cells:
        if not fc[cell[0]]:
            continue
        cset = set(cell)
        a = min(delta(cache, z) for z in cell)
        lcells = [c for c in left.cells if c[0] in cset]
        rcells = [c for c in right.cells if c[0] in cset]
        inv_left = [involutions(g, c) for c in lcells]
        inv_right = [involutions(g, c) for c in rcells]
        dist_left = [[z for z in i if delta(cache, z) == a] for i in inv_left]
        dist_right = [[z for z in i if delta(cache, z) == a] for i in inv_right]
        all_in = all(in_wprime[w] for w in cell)
        none_in = not any(in_wprime[w] for w in cell)
        pairs = []
        for rc, rd in zip(rcells, dist_right):
            for lc, ld in zip(lcells, dist_left):
                k = len(set(rc) & set(lc))
                entry = {"right_cell": g.element(rc[0]).text, "left_cell": g.element(lc[0]).text, "k": k}
                if len(rd) == 1 and len(ld) == 1:
                    d, d2 = rd[0], ld[0]
                    entry["d"] = g.element(d).text
                    entry["d_prime"] = g.element(d2).text
                    if is_b:
                        exactly_one = in_wprime[d] != in_wprime[d2]
                        entry["predicted_k"] = 1 if (exactly_one or all_in or none_in) else 2
                pairs.append(entry)
        report["cells"].append({
            "two_sided_cell": g.element(cell[0]).text,
            "size": len(cell),
            "a": a,
            "left_cells": [[g.element(w).text for w in c] for c in lcells],
            "right_cells": [[g.element(w).text for w in c] for c in rcells],
            "involutions_per_left_cell": [len(i) for i in inv_left],
            "involutions_per_right_cell": [len(i) for i in inv_right],
            "distinguished_per_left_cell": [len(i) for i in dist_left],
            "distinguished_per_right_cell": [len(i) for i in dist_right],
            "intersections": pairs,
        })
    return report
