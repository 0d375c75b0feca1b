"""Bipartite degree types and exact-uniform samplers.

The probability space of the constructions consists of bipartite graphs drawn
uniformly from all graphs of a given *type*: a listing of how many vertices
of each degree appear on either side.  Both sampling and enumeration work on
the 0-1 matrix picture (rows = left side, columns = right side) and share a
memoized count of matrices with prescribed margins, so samples are exactly
uniform rather than MCMC-approximate.  Everything here runs at desk scale
(side sizes well under 20).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "BipartiteType",
    "plain_type",
    "count_matrices",
    "sample_graph_of_type",
    "enumerate_graphs_of_type",
    "count_graphs_of_type",
    "slot_probability_by_enumeration",
    "count_nonedge_matchings",
    "sample_nonedge_matching",
]


@dataclass(frozen=True)
class BipartiteType:
    """Degree-sequence descriptor: ``left``/``right`` are tuples of
    (count, degree) pairs, a complete listing of each side."""

    left: tuple[tuple[int, int], ...]
    right: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for side_name, side in (("left", self.left), ("right", self.right)):
            for count, degree in side:
                if count < 0 or degree < 0:
                    raise ValueError(f"{side_name} entry ({count},{degree}) negative")
        if self.left_size() <= 0 or self.right_size() <= 0:
            raise ValueError("side sizes must be positive")
        if self.edge_count() != sum(c * d for c, d in self.right):
            raise ValueError(
                f"handshake violated: left total {self.edge_count()} != "
                f"right total {sum(c * d for c, d in self.right)}"
            )
        if any(d > self.right_size() for _, d in self.left):
            raise ValueError("left degree exceeds right side size")
        if any(d > self.left_size() for _, d in self.right):
            raise ValueError("right degree exceeds left side size")

    def left_size(self) -> int:
        return sum(c for c, _ in self.left)

    def right_size(self) -> int:
        return sum(c for c, _ in self.right)

    def edge_count(self) -> int:
        return sum(c * d for c, d in self.left)

    def left_degrees(self) -> tuple[int, ...]:
        return tuple(d for c, d in self.left for _ in range(c))

    def right_degrees(self) -> tuple[int, ...]:
        return tuple(d for c, d in self.right for _ in range(c))

    def describe(self) -> str:
        fmt = lambda side: "{" + ", ".join(f"({c},{d})" for c, d in side) + "}"
        return f"({fmt(self.left)}, {fmt(self.right)})"


def plain_type(size: int, degree: int) -> BipartiteType:
    """All ``size`` vertices of both sides have the same ``degree``."""
    return BipartiteType(left=((size, degree),), right=((size, degree),))


# ---------------------------------------------------------------------------
# 0-1 matrices with prescribed margins
# ---------------------------------------------------------------------------


def _class_counts(cols: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    out: dict[int, int] = {}
    for c in cols:
        out[c] = out.get(c, 0) + 1
    return tuple(sorted(out.items()))


def _compositions(classes, need):
    """All ways to draw ``need`` columns from capacity classes
    [(capacity, count), ...]; capacity-0 classes are never drawn from.
    Tuples always have one entry per class."""
    if not classes:
        if need == 0:
            yield ()
        return
    (cap, cnt), rest = classes[0], classes[1:]
    top = min(cnt, need) if cap > 0 else 0
    for take in range(top + 1):
        for tail in _compositions(rest, need - take):
            yield (take,) + tail


@lru_cache(maxsize=None)
def _count_rec(rows: tuple[int, ...], cols: tuple[int, ...]) -> int:
    if not rows:
        return 1 if all(c == 0 for c in cols) else 0
    need, rest = rows[0], rows[1:]
    classes = _class_counts(cols)
    total = 0
    for combo in _compositions(classes, need):
        ways = 1
        new_classes: list[int] = []
        for (cap, cnt), take in zip(classes, combo):
            ways *= math.comb(cnt, take)
            new_classes.extend([cap - 1] * take + [cap] * (cnt - take))
        total += ways * _count_rec(rest, tuple(sorted(new_classes)))
    return total


def count_matrices(row_sums, col_sums) -> int:
    """Number of 0-1 matrices with the given row and column sums."""
    rows = tuple(int(r) for r in row_sums)
    cols = tuple(sorted(int(c) for c in col_sums))
    if sum(rows) != sum(cols):
        return 0
    return _count_rec(rows, cols)


def _sample_matrix(row_sums, col_sums, rng):
    """Exactly uniform 0-1 matrix with prescribed margins, as a list of
    per-row column-index sets."""
    ncols = len(col_sums)
    remaining = list(col_sums)
    chosen_rows = []
    for i, need in enumerate(row_sums):
        rest = tuple(row_sums[i + 1 :])
        classes = _class_counts(tuple(remaining))
        options = []
        weights = []
        for combo in _compositions(classes, need):
            ways = 1
            new_classes: list[int] = []
            for (cap, cnt), take in zip(classes, combo):
                ways *= math.comb(cnt, take)
                new_classes.extend([cap - 1] * take + [cap] * (cnt - take))
            completions = _count_rec(rest, tuple(sorted(new_classes)))
            if ways * completions:
                options.append(combo)
                weights.append(ways * completions)
        if not options:
            raise ValueError("margins admit no matrix")
        combo = rng.choices(options, weights=weights, k=1)[0]
        cols_here: list[int] = []
        for (cap, cnt), take in zip(classes, combo):
            members = [j for j in range(ncols) if remaining[j] == cap]
            for j in rng.sample(members, take):
                cols_here.append(j)
                remaining[j] -= 1
        chosen_rows.append(set(cols_here))
    return chosen_rows


def _enumerate_matrices(row_sums, col_sums):
    ncols = len(col_sums)
    remaining = list(col_sums)
    row_sets: list[tuple[int, ...]] = []

    def rec(i):
        if i == len(row_sums):
            if all(c == 0 for c in remaining):
                yield list(row_sets)
            return
        candidates = [j for j in range(ncols) if remaining[j] > 0]
        for subset in itertools.combinations(candidates, row_sums[i]):
            for j in subset:
                remaining[j] -= 1
            row_sets.append(subset)
            yield from rec(i + 1)
            row_sets.pop()
            for j in subset:
                remaining[j] += 1

    yield from rec(0)


# ---------------------------------------------------------------------------
# Graphs of a type between concrete vertex sets
# ---------------------------------------------------------------------------


def _degree_assignments(side: tuple[tuple[int, int], ...], size: int):
    """All distinct ways to assign the degree multiset to ``size`` positions."""
    degrees = tuple(d for c, d in side for _ in range(c))
    seen = set()
    for perm in itertools.permutations(degrees):
        if perm not in seen:
            seen.add(perm)
            yield perm


def count_graphs_of_type(btype: BipartiteType) -> int:
    rows = btype.left_degrees()
    cols = btype.right_degrees()
    # matrix count is invariant under reordering degrees within a side
    per_assignment = count_matrices(rows, cols)
    left_assignments = _multinomial(btype.left)
    right_assignments = _multinomial(btype.right)
    return left_assignments * right_assignments * per_assignment


def _multinomial(side: tuple[tuple[int, int], ...]) -> int:
    total = sum(c for c, _ in side)
    out = 1
    for c, _ in side:
        out *= math.comb(total, c)
        total -= c
    return out


def sample_graph_of_type(btype: BipartiteType, left_vertices, right_vertices, rng):
    """Uniform graph of the given type between two concrete vertex tuples;
    returns a set of frozenset pairs."""
    left = list(left_vertices)
    right = list(right_vertices)
    if len(left) != btype.left_size() or len(right) != btype.right_size():
        raise ValueError("vertex sets do not match the type's side sizes")
    row_degrees = list(btype.left_degrees())
    col_degrees = list(btype.right_degrees())
    rng.shuffle(row_degrees)
    rng.shuffle(col_degrees)
    rows = _sample_matrix(row_degrees, col_degrees, rng)
    return {
        frozenset((left[i], right[j])) for i, cols in enumerate(rows) for j in cols
    }


def enumerate_graphs_of_type(btype: BipartiteType, left_vertices, right_vertices):
    """All graphs of the type (tiny sides only)."""
    left = list(left_vertices)
    right = list(right_vertices)
    for row_degrees in _degree_assignments(btype.left, len(left)):
        for col_degrees in _degree_assignments(btype.right, len(right)):
            for rows in _enumerate_matrices(row_degrees, col_degrees):
                yield {
                    frozenset((left[i], right[j]))
                    for i, cols in enumerate(rows)
                    for j in cols
                }


def slot_probability_by_enumeration(
    btype: BipartiteType, marked_degree: int | None = None
) -> Fraction:
    """Exact probability, over a uniform graph of the type, that a fixed slot
    is an edge (and, if ``marked_degree`` is given, that both endpoints have
    that degree).  Pure enumeration; intended as the independent oracle."""
    left = tuple(range(btype.left_size()))
    right = tuple(range(100, 100 + btype.right_size()))
    slot = frozenset((left[0], right[0]))
    total = 0
    hits = 0
    for graph in enumerate_graphs_of_type(btype, left, right):
        total += 1
        if slot not in graph:
            continue
        if marked_degree is not None:
            dl = sum(1 for pair in graph if left[0] in pair)
            dr = sum(1 for pair in graph if right[0] in pair)
            if dl != marked_degree or dr != marked_degree:
                continue
        hits += 1
    if total == 0:
        raise ValueError("type admits no graphs")
    return Fraction(hits, total)


# ---------------------------------------------------------------------------
# Vertex-disjoint non-edge matchings (hiding stage)
# ---------------------------------------------------------------------------


def _complement_masks(left, right, present_edges, forbidden):
    right_index = {v: j for j, v in enumerate(right)}
    masks = []
    for v in left:
        mask = 0
        if v not in forbidden:
            for w in right:
                if w in forbidden:
                    continue
                if frozenset((v, w)) not in present_edges:
                    mask |= 1 << right_index[w]
        masks.append(mask)
    return masks


def _matching_count(masks, i, used, need, memo):
    if need == 0:
        return 1
    if len(masks) - i < need:
        return 0
    key = (i, used, need)
    if key in memo:
        return memo[key]
    total = _matching_count(masks, i + 1, used, need, memo)  # leave i unmatched
    avail = masks[i] & ~used
    j = 0
    m = avail
    while m:
        if m & 1:
            total += _matching_count(masks, i + 1, used | (1 << j), need - 1, memo)
        m >>= 1
        j += 1
    memo[key] = total
    return total


def count_nonedge_matchings(left, right, present_edges, size, forbidden=frozenset()) -> int:
    masks = _complement_masks(tuple(left), tuple(right), set(present_edges), set(forbidden))
    return _matching_count(masks, 0, 0, size, {})


def sample_nonedge_matching(left, right, present_edges, size, rng, forbidden=frozenset()):
    """Uniform set of ``size`` vertex-disjoint non-edges avoiding ``forbidden``
    vertices.  Uniformity over the avoiding matchings equals the conditional
    distribution of a uniform unconstrained matching, so conditioning is done
    directly instead of by rejection."""
    left = tuple(left)
    right = tuple(right)
    masks = _complement_masks(left, right, set(present_edges), set(forbidden))
    memo: dict = {}
    total = _matching_count(masks, 0, 0, size, memo)
    if total == 0:
        raise ValueError("no qualifying matching exists")
    used = 0
    need = size
    picked = []
    for i in range(len(left)):
        if need == 0:
            break
        weight_skip = _matching_count(masks, i + 1, used, need, memo)
        options = [(None, weight_skip)]
        avail = masks[i] & ~used
        j = 0
        m = avail
        while m:
            if m & 1:
                w = _matching_count(masks, i + 1, used | (1 << j), need - 1, memo)
                if w:
                    options.append((j, w))
            m >>= 1
            j += 1
        choice = rng.choices([o for o, _ in options], weights=[w for _, w in options], k=1)[0]
        if choice is not None:
            picked.append(frozenset((left[i], right[choice])))
            used |= 1 << choice
            need -= 1
    return set(picked)
