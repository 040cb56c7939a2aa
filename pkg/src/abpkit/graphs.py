"""Small DAG utilities shared by the ABP models and the depth-reduction code."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Hashable, Iterable


class CyclicGraphError(ValueError):
    pass


@dataclass
class Dag:
    """Directed graph given by vertex list and edge list (no parallel edges)."""

    vertices: list
    edges: list[tuple]
    succ: dict = field(init=False, repr=False)
    pred: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = list(self.vertices)
        self.edges = list(dict.fromkeys(tuple(e) for e in self.edges))
        self.succ = defaultdict(list)
        self.pred = defaultdict(list)
        vs = set(self.vertices)
        for u, v in self.edges:
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u}, {v}) references an unknown vertex")
            self.succ[u].append(v)
            self.pred[v].append(u)

    def topological_order(self) -> list:
        ts = TopologicalSorter({v: self.pred.get(v, ()) for v in self.vertices})
        try:
            # static_order is deterministic for a fixed insertion order
            return list(ts.static_order())
        except CycleError as exc:
            raise CyclicGraphError(f"graph has a cycle: {exc.args[1]}") from None

    def depths_from(self, source: Hashable) -> dict:
        """Longest-path edge count from ``source`` to each reachable vertex."""
        order = self.topological_order()
        depth = {source: 0}
        for u in order:
            if u not in depth:
                continue
            for v in self.succ.get(u, ()):
                if depth.get(v, -1) < depth[u] + 1:
                    depth[v] = depth[u] + 1
        return depth

    def heights_to(self, sink: Hashable) -> dict:
        """Longest-path edge count from each vertex that reaches ``sink``."""
        order = self.topological_order()
        height = {sink: 0}
        for u in reversed(order):
            if u not in height:
                continue
            for w in self.pred.get(u, ()):
                if height.get(w, -1) < height[u] + 1:
                    height[w] = height[u] + 1
        return height

    def longest_path_length(self) -> int:
        """Edge count of a longest path anywhere in the graph."""
        longest: dict = {}
        best = 0
        for u in self.topological_order():
            lu = max((longest[w] + 1 for w in self.pred.get(u, ())), default=0)
            longest[u] = lu
            best = max(best, lu)
        return best

    def reachable_from(self, source: Hashable) -> set:
        seen = {source}
        stack = [source]
        while stack:
            u = stack.pop()
            for v in self.succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def reaching(self, sink: Hashable) -> set:
        seen = {sink}
        stack = [sink]
        while stack:
            u = stack.pop()
            for w in self.pred.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def without_edges(self, removed: Iterable[tuple]) -> "Dag":
        gone = set(map(tuple, removed))
        return Dag(self.vertices, [e for e in self.edges if e not in gone])

    def without_vertices(self, removed: Iterable) -> "Dag":
        gone = set(removed)
        return Dag(
            [v for v in self.vertices if v not in gone],
            [(u, v) for u, v in self.edges if u not in gone and v not in gone],
        )
