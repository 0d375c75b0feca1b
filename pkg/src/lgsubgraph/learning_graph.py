"""Learning-graph data model and exact complexity computations.

A learning graph is a rooted weighted DAG whose vertices carry variable sets
S(v) (query indices) and which carries one unit flow per positive input.
Edge lengths are |S(v) \\ S(u)|.  The negative/positive complexities of a
flow-preserving edge set E are

    C0(E) = sum_e  l(e) w(e)
    C1(E) = max_y sum_e (l(e)/w(e)) (p_y(e)/p_y(E))^2

and C(E) = sqrt(C0(E) C1(E)).

Numbers are whatever the caller stores: floats for quick work, ``Fraction``
(and ``SqrtSum`` weights after reweighting) for the no-tolerance property
tests.  The max over y in C1 ranges over the stored flow family only; for
symmetric constructions one flow per orbit is enough.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .radicals import SqrtSum

__all__ = [
    "LearningGraphError",
    "NotFlowPreserving",
    "ZeroWeight",
    "Violation",
    "LearningGraph",
]


class LearningGraphError(Exception):
    pass


class NotFlowPreserving(LearningGraphError):
    """Conservation fails at an internal vertex of the induced subgraph."""


class ZeroWeight(LearningGraphError):
    """Encountered an edge with weight <= 0 in a complexity computation."""


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str = ""

    def __str__(self):
        return f"{self.kind} at {self.where}" + (f": {self.detail}" if self.detail else "")


class LearningGraph:
    """Mutable while being built; ``freeze()`` before sharing."""

    def __init__(self, root="root", root_varset=frozenset()):
        self.root = root
        self._varsets = {root: frozenset(root_varset)}
        self._labels = {root: None}
        self._weights: dict[tuple, object] = {}
        self._lengths: dict[tuple, int] = {}
        self._out: dict[object, list] = {root: []}
        self._in: dict[object, list] = {root: []}
        self.flows: dict[object, dict[tuple, object]] = {}
        self._frozen = False

    # -- construction ---------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise LearningGraphError("graph is frozen")

    def add_vertex(self, vid, varset=frozenset(), label=None):
        self._check_mutable()
        if vid in self._varsets:
            raise LearningGraphError(f"duplicate vertex {vid!r}")
        self._varsets[vid] = frozenset(varset)
        self._labels[vid] = label
        self._out[vid] = []
        self._in[vid] = []
        return vid

    def add_edge(self, u, v, weight=1, length=None):
        self._check_mutable()
        if u not in self._varsets or v not in self._varsets:
            raise LearningGraphError(f"edge ({u!r},{v!r}) references unknown vertex")
        key = (u, v)
        if key in self._weights:
            raise LearningGraphError(f"duplicate edge {key!r}")
        if length is None:
            length = len(self._varsets[v] - self._varsets[u])
        self._weights[key] = weight
        self._lengths[key] = length
        self._out[u].append(v)
        self._in[v].append(u)
        return key

    def set_flow(self, y, edge_values: dict):
        self._check_mutable()
        clean = {}
        for e, value in edge_values.items():
            e = tuple(e)
            if e not in self._weights:
                raise LearningGraphError(f"flow {y!r} references unknown edge {e!r}")
            if value:
                clean[e] = value
        self.flows[y] = clean

    def freeze(self):
        self._topological_order()  # raises on cycles
        self._frozen = True
        return self

    # -- structure queries ------------------------------------------------

    def vertices(self):
        return list(self._varsets)

    def varset(self, vid) -> frozenset:
        return self._varsets[vid]

    def label(self, vid):
        return self._labels[vid]

    def edges(self):
        return list(self._weights)

    def weight(self, e):
        return self._weights[tuple(e)]

    def length(self, e) -> int:
        return self._lengths[tuple(e)]

    def out_edges(self, v):
        return [(v, w) for w in self._out[v]]

    def in_edges(self, v):
        return [(u, v) for u in self._in[v]]

    def flow(self, y, e):
        return self.flows[y].get(tuple(e), 0)

    def _topological_order(self):
        indeg = {v: len(self._in[v]) for v in self._varsets}
        queue = [v for v, d in indeg.items() if d == 0]
        order = []
        while queue:
            v = queue.pop()
            order.append(v)
            for w in self._out[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        if len(order) != len(self._varsets):
            raise LearningGraphError("graph has a cycle")
        return order

    def levels(self) -> dict:
        """Hop distance from the root (levels of a leveled construction)."""
        dist = {self.root: 0}
        frontier = [self.root]
        while frontier:
            new = []
            for v in frontier:
                for w in self._out[v]:
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        new.append(w)
            frontier = new
        return dist

    def stage_edges(self, lo: int, hi: int) -> frozenset:
        """All edges between level ``lo`` and level ``hi``."""
        lev = self.levels()
        return frozenset(
            (u, v)
            for (u, v) in self._weights
            if lo <= lev.get(u, -1) and lev.get(v, -1) <= hi
        )

    def descendants(self, v) -> set:
        out = set()
        stack = [v]
        while stack:
            x = stack.pop()
            for w in self._out[x]:
                if w not in out:
                    out.add(w)
                    stack.append(w)
        return out

    # -- flows over edge sets ----------------------------------------------

    def _induced(self, E):
        E = [tuple(e) for e in E]
        heads = {v for _, v in E}
        tails = {u for u, _ in E}
        internal = heads & tails
        sources = tails - heads
        return E, sources, internal

    def _conservation_gap(self, E, y, vertex):
        inflow = sum(self.flows[y].get((u, vertex), 0) for u in self._in[vertex] if (u, vertex) in E)
        outflow = sum(self.flows[y].get((vertex, w), 0) for w in self._out[vertex] if (vertex, w) in E)
        return inflow - outflow

    def flow_value(self, E, y):
        """Value of the flow p_y over a flow-preserving edge set."""
        E_list, sources, internal = self._induced(E)
        E_set = set(E_list)
        for v in internal:
            if self._conservation_gap(E_set, y, v) != 0:
                raise NotFlowPreserving(f"conservation fails at {v!r} for flow {y!r}")
        fy = self.flows[y]
        return sum(fy.get((u, w), 0) for (u, w) in E_set if u in sources)

    def is_flow_preserving(self, E) -> bool:
        E_list, _, internal = self._induced(E)
        E_set = set(E_list)
        for y in self.flows:
            for v in internal:
                if self._conservation_gap(E_set, y, v) != 0:
                    return False
        return True

    # -- complexities --------------------------------------------------------

    def c0(self, E):
        total = 0
        for e in E:
            e = tuple(e)
            w = self._weights[e]
            if not w > 0:
                raise ZeroWeight(f"edge {e!r} has weight {w!r}")
            total = total + self._lengths[e] * w
        return total

    def c1y(self, E, y):
        E = [tuple(e) for e in E]
        pE = self.flow_value(E, y)
        if pE == 0:
            return 0
        fy = self.flows[y]
        total = 0
        for e in E:
            p = fy.get(e, 0)
            if not p:
                continue
            w = self._weights[e]
            if not w > 0:
                raise ZeroWeight(f"edge {e!r} has weight {w!r}")
            rel = p / pE if pE != 1 else p
            total = total + (self._lengths[e] * rel * rel) / w
        return total

    def c1(self, E):
        best = 0
        for y in self.flows:
            candidate = self.c1y(E, y)
            if candidate > best:
                best = candidate
        return best

    def complexity_squared(self, E):
        """C0(E) * C1(E); stays exact for rational/radical data."""
        return self.c0(E) * self.c1(E)

    def complexity(self, E) -> float:
        return math.sqrt(float(self.complexity_squared(E)))

    # -- derived graphs --------------------------------------------------------

    def with_weights(self, new_weights: dict) -> "LearningGraph":
        """Copy of the graph with some edge weights replaced."""
        out = self._clone()
        for e, w in new_weights.items():
            e = tuple(e)
            if e not in out._weights:
                raise LearningGraphError(f"unknown edge {e!r}")
            out._weights[e] = w
        return out.freeze() if self._frozen else out

    def without_edges(self, drop) -> "LearningGraph":
        drop = {tuple(e) for e in drop}
        out = LearningGraph(root=self.root, root_varset=self._varsets[self.root])
        for vid in self._varsets:
            if vid != self.root:
                out.add_vertex(vid, self._varsets[vid], self._labels[vid])
        for e, w in self._weights.items():
            if e not in drop:
                out.add_edge(*e, weight=w, length=self._lengths[e])
        for y, fy in self.flows.items():
            out.set_flow(y, {e: v for e, v in fy.items() if e not in drop})
        return out.freeze() if self._frozen else out

    def _clone(self) -> "LearningGraph":
        out = LearningGraph(root=self.root, root_varset=self._varsets[self.root])
        for vid in self._varsets:
            if vid != self.root:
                out.add_vertex(vid, self._varsets[vid], self._labels[vid])
        for e, w in self._weights.items():
            out.add_edge(*e, weight=w, length=self._lengths[e])
        for y, fy in self.flows.items():
            out.set_flow(y, dict(fy))
        return out

    # -- validation ---------------------------------------------------------

    def validate(self, certificate_checker=None) -> list[Violation]:
        """Report every violated definitional invariant (empty list = valid).

        ``certificate_checker(varset, label, y) -> bool`` is applied to every
        sink of every flow when provided.
        """
        problems: list[Violation] = []
        try:
            self._topological_order()
        except LearningGraphError:
            problems.append(Violation("Acyclicity", "graph", "contains a cycle"))
        roots = [v for v in self._varsets if not self._in[v]]
        if roots != [self.root] and set(roots) != {self.root}:
            problems.append(
                Violation("RootUniqueness", "graph", f"in-degree-0 vertices: {roots!r}")
            )
        if self._varsets[self.root]:
            problems.append(Violation("RootVarset", repr(self.root), "S(root) must be empty"))
        for (u, v), w in self._weights.items():
            if not self._varsets[u] <= self._varsets[v]:
                problems.append(Violation("SMonotonic", f"({u!r},{v!r})"))
            expected = len(self._varsets[v] - self._varsets[u])
            if self._lengths[(u, v)] != expected:
                problems.append(
                    Violation(
                        "LengthMismatch",
                        f"({u!r},{v!r})",
                        f"length {self._lengths[(u, v)]} != |S(v)\\S(u)| = {expected}",
                    )
                )
            if not w > 0:
                problems.append(Violation("NonpositiveWeight", f"({u!r},{v!r})", repr(w)))
        for y, fy in self.flows.items():
            for e, value in fy.items():
                if value < 0:
                    problems.append(Violation("NegativeFlow", f"{e!r}", f"flow {y!r}"))
            unit = sum(fy.get((self.root, w), 0) for w in self._out[self.root])
            if unit != 1:
                problems.append(
                    Violation("FlowNotUnit", repr(self.root), f"flow {y!r} leaves root with {unit}")
                )
            for v in self._varsets:
                if self._in[v] and self._out[v]:
                    gap = self._conservation_gap(set(self._weights), y, v)
                    if gap != 0:
                        problems.append(
                            Violation("FlowConservation", repr(v), f"flow {y!r} gap {gap}")
                        )
            if certificate_checker is not None:
                for v in self._varsets:
                    inflow = sum(fy.get((u, v), 0) for u in self._in[v])
                    if inflow > 0 and not self._out[v]:
                        if not certificate_checker(self._varsets[v], self._labels[v], y):
                            problems.append(
                                Violation("SinkCertificate", repr(v), f"flow {y!r}")
                            )
        return problems

    # -- serialization ---------------------------------------------------------

    @staticmethod
    def _dump_number(x):
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, SqrtSum):
            raise LearningGraphError("SqrtSum weights are not serializable")
        return x

    @staticmethod
    def _load_number(x):
        if isinstance(x, str):
            return Fraction(x)
        return x

    @staticmethod
    def _dump_element(x):
        return list(x) if isinstance(x, (tuple, frozenset)) else x

    def to_json(self) -> str:
        def dump_varset(s):
            return sorted((self._dump_element(x) for x in s), key=repr)

        data = {
            "root": str(self.root),
            "vertices": {str(v): dump_varset(self._varsets[v]) for v in self._varsets},
            "edges": [
                {
                    "from": str(u),
                    "to": str(v),
                    "w": self._dump_number(w),
                    "l": self._lengths[(u, v)],
                }
                for (u, v), w in sorted(self._weights.items(), key=repr)
            ],
            "flows": {
                str(y): {f"{u}->{v}": self._dump_number(val) for (u, v), val in sorted(fy.items(), key=repr)}
                for y, fy in self.flows.items()
            },
        }
        return json.dumps(data, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "LearningGraph":
        data = json.loads(text)

        def load_varset(items):
            return frozenset(tuple(x) if isinstance(x, list) else x for x in items)

        g = cls(root=data["root"], root_varset=load_varset(data["vertices"][data["root"]]))
        for v, items in data["vertices"].items():
            if v != data["root"]:
                g.add_vertex(v, load_varset(items))
        for e in data["edges"]:
            g.add_edge(e["from"], e["to"], weight=cls._load_number(e["w"]), length=e["l"])
        for y, fy in data.get("flows", {}).items():
            g.set_flow(
                y,
                {tuple(k.split("->")): cls._load_number(v) for k, v in fy.items()},
            )
        return g.freeze()
