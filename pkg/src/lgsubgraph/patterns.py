"""Pattern graphs, host graphs, multipartite labels and the containment oracle.

A pattern is a fixed small graph H on vertices 1..k, canonicalized so that a
minimum-degree vertex sits at position k (the vertex-removal construction
peels exactly that vertex).  Host graphs are explicit n-vertex graphs stored
as per-vertex adjacency bitsets; they only ever get materialized at desk
scale, so n is capped.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

__all__ = [
    "PatternError",
    "PatternGraph",
    "pattern_from_edges",
    "parse_pattern",
    "TRIANGLE",
    "PATH3",
    "K4",
    "HostGraph",
    "find_subgraph",
    "contains_subgraph",
    "is_certificate",
    "PartiteLabel",
    "enumerate_patterns",
]


class PatternError(ValueError):
    """Invalid pattern description."""


def _normalize_pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class PatternGraph:
    """Simple graph on {1..k} with an ordered edge list e_1..e_m.

    Invariants (enforced by ``pattern_from_edges``): no loops or duplicate
    edges, no isolated vertices, k >= 3, and vertex k has minimum degree d.
    """

    k: int
    edges: tuple[tuple[int, int], ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def degrees(self) -> tuple[int, ...]:
        counts = [0] * (self.k + 1)
        for a, b in self.edges:
            counts[a] += 1
            counts[b] += 1
        return tuple(counts[1:])

    @property
    def min_degree(self) -> int:
        return min(self.degrees())

    @property
    def d(self) -> int:
        return self.min_degree

    def neighbors(self, v: int) -> tuple[int, ...]:
        out = [b if a == v else a for a, b in self.edges if v in (a, b)]
        return tuple(sorted(out))

    def prefix_edges(self, u: int) -> tuple[tuple[int, int], ...]:
        """Edges of the induced subgraph H_{[1,u]} in the fixed order."""
        return tuple(e for e in self.edges if e[0] <= u and e[1] <= u)

    def has_edge(self, a: int, b: int) -> bool:
        return _normalize_pair(a, b) in set(self.edges)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "edges": [list(e) for e in self.edges]})


def pattern_from_edges(k: int, edges) -> PatternGraph:
    """Validate and canonicalize a pattern: min-degree vertex moved to position k.

    Ties are broken by smallest original index; relabeling is the swap of
    that vertex with k, which keeps golden witnesses easy to read.
    """
    if not isinstance(k, int) or k < 3:
        raise PatternError(f"k must be >= 3, got {k}")
    seen: set[tuple[int, int]] = set()
    for e in edges:
        if len(e) != 2:
            raise PatternError(f"edge {e} is not a pair")
        a, b = int(e[0]), int(e[1])
        if a == b:
            raise PatternError(f"loop at vertex {a}")
        if not (1 <= a <= k and 1 <= b <= k):
            raise PatternError(f"edge {e} out of range 1..{k}")
        pair = _normalize_pair(a, b)
        if pair in seen:
            raise PatternError(f"duplicate edge {pair}")
        seen.add(pair)
    if not seen:
        raise PatternError("pattern has no edges")
    degree = {v: 0 for v in range(1, k + 1)}
    for a, b in seen:
        degree[a] += 1
        degree[b] += 1
    isolated = [v for v, deg in degree.items() if deg == 0]
    if isolated:
        raise PatternError(f"isolated vertices {isolated}: strip them before parsing")
    dmin = min(degree.values())
    pivot = min(v for v, deg in degree.items() if deg == dmin)
    swap = {pivot: k, k: pivot}
    relabeled = sorted(
        _normalize_pair(swap.get(a, a), swap.get(b, b)) for a, b in seen
    )
    return PatternGraph(k=k, edges=tuple(relabeled))


def parse_pattern(text: str) -> PatternGraph:
    """Parse the JSON form {"k": int, "edges": [[a,b], ...]} (1-based)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatternError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict) or "k" not in data or "edges" not in data:
        raise PatternError('pattern JSON must be {"k": int, "edges": [[a,b], ...]}')
    k = data["k"]
    if not isinstance(k, int):
        raise PatternError(f"k must be an integer, got {k!r}")
    return pattern_from_edges(k, data["edges"])


TRIANGLE = pattern_from_edges(3, [(1, 2), (1, 3), (2, 3)])
PATH3 = pattern_from_edges(3, [(1, 2), (2, 3)])
K4 = pattern_from_edges(4, [(a, b) for a in range(1, 5) for b in range(a + 1, 5)])


class HostGraph:
    """Undirected simple graph on 1..n with bitset adjacency.

    Explicit hosts exist only for the brute-force oracle and tiny fixtures,
    so n defaults to a 64-vertex cap.
    """

    __slots__ = ("n", "_adj")

    def __init__(self, n: int, edges=(), max_n: int = 64):
        if n < 1:
            raise ValueError("n must be positive")
        if n > max_n:
            raise ValueError(f"n={n} exceeds explicit-host cap {max_n}")
        self.n = n
        self._adj = [0] * (n + 1)
        for e in edges:
            a, b = int(e[0]), int(e[1])
            self._add_edge(a, b)

    def _add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError(f"loop at {a}")
        if not (1 <= a <= self.n and 1 <= b <= self.n):
            raise ValueError(f"edge ({a},{b}) out of range 1..{self.n}")
        self._adj[a] |= 1 << b
        self._adj[b] |= 1 << a

    @classmethod
    def from_text(cls, text: str, n: int | None = None, max_n: int = 64) -> "HostGraph":
        """Edge-list text, one "u v" pair per line, 1-based."""
        pairs = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            a, b = line.split()
            pairs.append((int(a), int(b)))
        if n is None:
            n = max(max(p) for p in pairs) if pairs else 1
        return cls(n, pairs, max_n=max_n)

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self._adj[a] >> b & 1)

    def neighbors_mask(self, v: int) -> int:
        return self._adj[v]

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for a in range(1, self.n + 1):
            mask = self._adj[a] >> (a + 1)
            b = a + 1
            while mask:
                if mask & 1:
                    out.append((a, b))
                mask >>= 1
                b += 1
        return out

    def degree(self, v: int) -> int:
        return bin(self._adj[v]).count("1")


def find_subgraph(host: HostGraph, pattern: PatternGraph):
    """Lexicographically first injective map a_1..a_k sending pattern edges to
    host edges, or None.  Subgraph containment, not induced."""
    if host.n < pattern.k:
        return None
    adj_pattern = [pattern.neighbors(v) for v in range(pattern.k + 1)]
    assignment = [0] * (pattern.k + 1)
    used = 0

    def extend(v: int):
        nonlocal used
        if v > pattern.k:
            return tuple(assignment[1:])
        for candidate in range(1, host.n + 1):
            bit = 1 << candidate
            if used & bit:
                continue
            ok = True
            for w in adj_pattern[v]:
                if w < v and not host.has_edge(candidate, assignment[w]):
                    ok = False
                    break
            if not ok:
                continue
            assignment[v] = candidate
            used |= bit
            result = extend(v + 1)
            if result is not None:
                return result
            used &= ~bit
        return None

    return extend(1)


def contains_subgraph(host: HostGraph, pattern: PatternGraph) -> bool:
    return find_subgraph(host, pattern) is not None


def is_certificate(slots, answers, pattern: PatternGraph) -> bool:
    """True iff the positive answers inside the queried slots already contain
    a copy of the pattern (so every host agreeing on the slots contains it).

    ``slots``: iterable of unordered host-vertex pairs.
    ``answers``: either a set of positive pairs or a mapping pair -> bool;
    pairs outside ``slots`` are ignored.
    """
    slot_set = {_normalize_pair(*p) for p in slots}
    if hasattr(answers, "items"):
        positives = {_normalize_pair(*p) for p, v in answers.items() if v}
    else:
        positives = {_normalize_pair(*p) for p in answers}
    positives &= slot_set
    if len(positives) < pattern.m:
        return False
    vertices = sorted({v for p in positives for v in p})
    relabel = {v: i + 1 for i, v in enumerate(vertices)}
    host = HostGraph(len(vertices), [(relabel[a], relabel[b]) for a, b in positives])
    return contains_subgraph(host, pattern)


@dataclass(frozen=True)
class PartiteLabel:
    """Label of a learning-graph vertex: disjoint classes X_i over [n] plus a
    concrete bipartite edge set Q for each pattern edge with both classes
    present.  ``classes`` maps pattern vertex -> frozenset of host vertices,
    ``blocks`` maps a pattern edge (i, j) -> frozenset of host pairs.
    """

    classes: dict[int, frozenset] = field(default_factory=dict)
    blocks: dict[tuple[int, int], frozenset] = field(default_factory=dict)

    def var_set(self) -> frozenset:
        out = set()
        for block in self.blocks.values():
            out |= set(block)
        return frozenset(out)

    def edge_count(self) -> int:
        return sum(len(b) for b in self.blocks.values())

    def block_degree(self, pattern_edge: tuple[int, int], vertex: int) -> int:
        block = self.blocks.get(_normalize_pair(*pattern_edge), frozenset())
        return sum(1 for pair in block if vertex in pair)

    def apply_permutation(self, sigma: dict[int, int]) -> "PartiteLabel":
        classes = {
            i: frozenset(sigma[v] for v in members) for i, members in self.classes.items()
        }
        blocks = {
            e: frozenset(frozenset(sigma[v] for v in pair) for pair in block)
            for e, block in self.blocks.items()
        }
        return PartiteLabel(classes=classes, blocks=blocks)

    def check(self, pattern: PatternGraph) -> list[str]:
        """Structural violations: overlapping classes or blocks off pattern edges."""
        problems = []
        seen: set[int] = set()
        for i, members in sorted(self.classes.items()):
            overlap = seen & set(members)
            if overlap:
                problems.append(f"class {i} overlaps earlier classes at {sorted(overlap)}")
            seen |= set(members)
        pattern_edges = set(pattern.edges)
        for (i, j), block in self.blocks.items():
            if (i, j) not in pattern_edges:
                problems.append(f"block for non-edge ({i},{j}) of the pattern")
                continue
            left = self.classes.get(i, frozenset())
            right = self.classes.get(j, frozenset())
            for pair in block:
                a, b = tuple(pair)
                if not ((a in left and b in right) or (a in right and b in left)):
                    problems.append(f"block ({i},{j}) pair {sorted(pair)} leaves its classes")
        return problems


def enumerate_patterns(max_k: int = 7, min_k: int = 3, connected_only: bool = False):
    """Isomorphism-class representatives with min degree >= 1 and k <= max_k.

    Backed by the networkx small-graph atlas (complete up to 7 vertices).
    """
    if max_k > 7:
        raise ValueError("atlas enumeration only covers k <= 7")
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    for g in graph_atlas_g():
        k = g.number_of_nodes()
        if not (min_k <= k <= max_k) or g.number_of_edges() == 0:
            continue
        degrees = dict(g.degree())
        if min(degrees.values()) < 1:
            continue
        if connected_only and not nx.is_connected(g):
            continue
        yield pattern_from_edges(k, [(a + 1, b + 1) for a, b in g.edges()])
