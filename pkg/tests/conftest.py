"""Shared fixture machinery: random leveled learning graphs with a class
(block) structure that makes the flows consistent by construction.

The generator first draws a quotient DAG on classes with a fixed flow split
per class, then instantiates each class with several vertices and complete
bipartite edges between connected classes.  Per input y, the class-level
masses are fixed while the distribution onto individual vertices is
re-randomized, so p_y(class->) is independent of y: exactly the consistency
hypothesis of the reweighting lemma, with everything exact in Fractions.
Classes that carry flow always introduce fresh query indices, keeping every
stage's C0 and C1 positive (the balancing lemma's precondition); zero-mass
classes may sit on zero-length edges.
"""

import random
from fractions import Fraction

from lgsubgraph.learning_graph import LearningGraph


def random_toy_graph(seed: int, n_flows: int = 2):
    """Returns (graph, classes_per_level): <= 6 levels, <= 50 vertices."""
    rng = random.Random(seed)
    depth = rng.randint(2, 5)
    layout = [[1]] + [[rng.randint(1, 3) for _ in range(rng.randint(1, 3))] for _ in range(depth)]

    succ: dict = {}
    for lev in range(depth):
        next_count = len(layout[lev + 1])
        for c in range(len(layout[lev])):
            count = rng.randint(1, next_count)
            succ[(lev, c)] = sorted(rng.sample(range(next_count), count))
        covered = {x for c in range(len(layout[lev])) for x in succ[(lev, c)]}
        for c2 in range(next_count):
            if c2 not in covered:
                donor = rng.randrange(len(layout[lev]))
                succ[(lev, donor)] = sorted(set(succ[(lev, donor)]) | {c2})

    # per-class split fractions over successors; some successors may get zero
    split: dict = {}
    for key, targets in succ.items():
        positive = rng.sample(targets, rng.randint(1, len(targets)))
        raw = {c2: Fraction(rng.randint(1, 5)) if c2 in positive else Fraction(0) for c2 in targets}
        total = sum(raw.values())
        split[key] = {c2: val / total for c2, val in raw.items()}

    # class-level masses (independent of y)
    mass = {(0, 0): Fraction(1)}
    for lev in range(depth):
        for c in range(len(layout[lev])):
            m = mass.get((lev, c), Fraction(0))
            for c2, frac in split[(lev, c)].items():
                mass[(lev + 1, c2)] = mass.get((lev + 1, c2), Fraction(0)) + m * frac

    # variable sets per class: union of predecessors plus fresh indices for
    # every class that carries flow (occasionally also for dead classes)
    varsets = {(0, 0): frozenset()}
    fresh = 0
    for lev in range(1, depth + 1):
        for c in range(len(layout[lev])):
            preds = [
                (lev - 1, cp)
                for cp in range(len(layout[lev - 1]))
                if c in succ[(lev - 1, cp)]
            ]
            base = frozenset().union(*(varsets[p] for p in preds))
            extra = set()
            if mass.get((lev, c), Fraction(0)) > 0 or rng.random() < 0.5:
                for _ in range(rng.randint(1, 3)):
                    fresh += 1
                    extra.add(fresh)
            varsets[(lev, c)] = base | extra

    graph = LearningGraph(root=(0, 0, 0))
    classes_per_level = [[frozenset({(0, 0, 0)})]]
    for lev in range(1, depth + 1):
        level_classes = []
        for c, size in enumerate(layout[lev]):
            members = set()
            for i in range(size):
                vid = (lev, c, i)
                graph.add_vertex(vid, varsets[(lev, c)])
                members.add(vid)
            level_classes.append(frozenset(members))
        classes_per_level.append(level_classes)
    for lev in range(depth):
        for c in range(len(layout[lev])):
            for i in range(layout[lev][c]):
                for c2 in succ[(lev, c)]:
                    for i2 in range(layout[lev + 1][c2]):
                        graph.add_edge(
                            (lev, c, i),
                            (lev + 1, c2, i2),
                            weight=Fraction(rng.randint(1, 9), rng.randint(1, 4)),
                        )

    for y in range(n_flows):
        frng = random.Random(seed * 1000 + 17 * y + 1)
        vertex_mass = {(0, 0, 0): Fraction(1)}
        flow: dict = {}
        for lev in range(depth):
            for c in range(len(layout[lev])):
                for i in range(layout[lev][c]):
                    v = (lev, c, i)
                    m = vertex_mass.get(v, Fraction(0))
                    if m == 0:
                        continue
                    for c2, frac in split[(lev, c)].items():
                        md = m * frac
                        if md == 0:
                            continue
                        size = layout[lev + 1][c2]
                        targets = frng.sample(range(size), frng.randint(1, min(2, size)))
                        parts = [Fraction(frng.randint(1, 4)) for _ in targets]
                        total = sum(parts)
                        for i2, part in zip(targets, parts):
                            w = (lev + 1, c2, i2)
                            piece = md * part / total
                            flow[(v, w)] = flow.get((v, w), Fraction(0)) + piece
                            vertex_mass[w] = vertex_mass.get(w, Fraction(0)) + piece
        graph.set_flow(f"y{y}", flow)
    graph.freeze()
    return graph, classes_per_level
