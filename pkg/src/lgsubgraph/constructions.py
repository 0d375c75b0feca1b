"""Staged learning-graph constructions for subgraph finding.

Two builders:

* the direct construction (load all of H): setup classes of size r-1 with
  sparse typed blocks, load the witness vertices one by one, hide the
  eventual endpoint degrees, then load the pattern edges one by one;
* the vertex-removal construction: run the direct construction on H minus
  its last (minimum-degree) vertex, then attach a search-plus-collision
  subroutine that finds the missing vertex and its d linking edges.

Each construction exists in two representations.  ``ConstructionPlan`` holds
orbit-compressed stage specs whose cost terms use the leading-order degree
and vertex ratios (constants dropped, exponents exact), usable at any n.
``materialize_flow_path`` walks one unit-flow path through the staged
probability space at small n, producing concrete multipartite labels that
the audit functions check vertex by vertex against the declared block types.
The full learning graph itself is never materialized: its vertex count is
astronomical even for n around 14.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import rng as rng_mod
from .bipartite import BipartiteType, sample_graph_of_type, sample_nonedge_matching
from .costs import CostTerm
from .learning_graph import LearningGraph
from .lemmas import (
    InfeasibleParameters,
    MCEstimate,
    hidden_type,
    require_feasible,
    smallest_feasible_n,
)
from .patterns import PartiteLabel, PatternGraph, is_certificate

__all__ = [
    "WitnessClash",
    "StageSpec",
    "ConstructionPlan",
    "g1_stage_specs",
    "g2_plan",
    "collision_subroutine_specs",
    "collision_optimum",
    "WalkCosts",
    "quantum_walk_costs",
    "setup_type",
    "mixed_type",
    "regular_type",
    "hiding_type",
    "loaded_type",
    "block_types_after",
    "exact_stage_lengths",
    "PathStep",
    "FlowPath",
    "materialize_flow_path",
    "audit_flow_path",
    "position_condition_probability",
    "exact_flow_probability",
    "mc_flow_probability",
    "path_learning_graph",
]


class WitnessClash(Exception):
    """Degree-type sampling could not place the witness within the retry budget."""


# ---------------------------------------------------------------------------
# Block types, stage by stage
# ---------------------------------------------------------------------------


def setup_type(r: int, rs: int) -> BipartiteType:
    """Both classes still size r-1: rs vertices per side one edge short."""
    return BipartiteType(
        left=((r - 1 - rs, rs), (rs, rs - 1)),
        right=((r - 1 - rs, rs), (rs, rs - 1)),
    )


def mixed_type(r: int, rs: int) -> BipartiteType:
    """Loaded class (size r) against an unloaded one (size r-1, regular)."""
    return BipartiteType(left=((r - rs, rs), (rs, rs - 1)), right=((r - 1, rs),))


def regular_type(r: int, rs: int) -> BipartiteType:
    """Both classes loaded: rs-regular on r+r vertices."""
    return BipartiteType(left=((r, rs),), right=((r, rs),))


def hiding_type(r: int, rs: int) -> BipartiteType:
    """After the hiding matching: half of each side raised to degree rs+1."""
    return BipartiteType(
        left=((r // 2, rs), (r // 2, rs + 1)),
        right=((r // 2, rs), (r // 2, rs + 1)),
    )


loaded_type = hidden_type  # after the block's own edge is loaded


def block_types_after(pattern: PatternGraph, u: int, r: int, rs: int, step: int):
    """Expected BipartiteType per prefix edge after step ``step`` of the
    vertex/edge-loading part (0 = setup done, t = vertex t loaded,
    u+1 = hiding done, u+1+t = edge t loaded).  The left side of each type
    is the class of the smaller pattern vertex."""
    prefix = pattern.prefix_edges(u)
    out = {}
    for idx, (i, j) in enumerate(prefix, start=1):
        if step <= u:
            if step < i:
                out[(i, j)] = setup_type(r, rs)
            elif i <= step < j:
                out[(i, j)] = mixed_type(r, rs)
            else:
                out[(i, j)] = regular_type(r, rs)
        else:
            t = step - u - 1
            out[(i, j)] = loaded_type(r, rs) if idx <= t else hiding_type(r, rs)
    return out


def exact_stage_lengths(plan: "ConstructionPlan", r: int, rs: int, lam: int | None = None):
    """Exact number of queried slots added by each stage (the plan's cost
    terms carry only the leading order of these)."""
    return _exact_lengths(plan.pattern, plan.u, plan.kind, r, rs, lam)


def _exact_lengths(pattern, u, kind, r, rs, lam):
    prefix = pattern.prefix_edges(u)
    m_u = len(prefix)
    deg = {t: sum(1 for e in prefix if t in e) for t in range(1, u + 1)}
    lengths = [m_u * rs * (r - 2)]
    lengths += [rs * deg[t] for t in range(1, u + 1)]
    lengths += [m_u * (r // 2)]
    lengths += [1] * m_u
    if kind == "g2":
        if lam is None:
            raise ValueError("g2 plans need lambda for exact lengths")
        lengths += [lam * pattern.d]
        lengths += [1] * pattern.d
    return lengths


# ---------------------------------------------------------------------------
# Orbit-compressed stage specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageSpec:
    """One stage in length / degree-ratio / vertex-ratio form; the stage cost
    is length * sqrt(degree_ratio * vertex_ratio)."""

    stage: str
    index: int
    length: CostTerm
    degree_ratio: CostTerm
    vertex_ratio: CostTerm
    description: str

    @property
    def cost(self) -> CostTerm:
        return self.length * (self.degree_ratio * self.vertex_ratio).sqrt()

    def to_dict(self):
        return {
            "stage": self.stage,
            "index": self.index,
            "length": str(self.length),
            "degree_ratio": str(self.degree_ratio),
            "vertex_ratio": str(self.vertex_ratio),
            "cost": str(self.cost),
            "description": self.description,
        }


@dataclass(frozen=True)
class ConstructionPlan:
    pattern: PatternGraph
    u: int
    kind: str  # "g1" | "g2"
    stages: tuple[StageSpec, ...]
    subroutine: tuple[StageSpec, ...] = ()

    @property
    def stage_costs(self) -> tuple[CostTerm, ...]:
        return tuple(spec.cost for spec in self.stages)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "u": self.u,
                "pattern": {"k": self.pattern.k, "edges": [list(e) for e in self.pattern.edges]},
                "stages": [spec.to_dict() for spec in self.stages],
                "subroutine": [spec.to_dict() for spec in self.subroutine],
                "note": "costs are leading-order terms; constant factors dropped",
            },
            indent=1,
        )


def g1_stage_specs(pattern: PatternGraph, u: int) -> ConstructionPlan:
    """Stage specs for loading H_{[1,u]} directly (u = k loads all of H).

    Leading-order costs: setup s*r^2; vertex stage t has length rs, degree
    ratio n and vertex ratio (n/r)^(t-1); hiding has length r, constant
    degree ratio and vertex ratio (n/r)^u; edge stage t has length 1, degree
    ratio r^2 and vertex ratio (n/r)^u * s^-(t-1).
    """
    if not 1 <= u <= pattern.k:
        raise ValueError(f"u must be in 1..{pattern.k}, got {u}")
    prefix = pattern.prefix_edges(u)
    m_u = len(prefix)
    if m_u < 1:
        raise ValueError(f"H_[1,{u}] has no edges; the construction needs at least one")
    one = CostTerm()
    stages = [
        StageSpec(
            stage="setup",
            index=0,
            length=CostTerm(r=2, s=1),
            degree_ratio=one,
            vertex_ratio=one,
            description=f"load {u} classes of size r-1; each of the {m_u} blocks "
            f"gets type ({{(r-1-rs,rs),(rs,rs-1)}}, {{(r-1-rs,rs),(rs,rs-1)}})",
        )
    ]
    for t in range(1, u + 1):
        stages.append(
            StageSpec(
                stage=f"load-vertex-{t}",
                index=t,
                length=CostTerm(r=1, s=1),
                degree_ratio=CostTerm(n=1),
                vertex_ratio=CostTerm(n=t - 1, r=-(t - 1)),
                description=f"grow class {t} to size r; incident blocks move to "
                f"({{(r-rs,rs),(rs,rs-1)}}, {{(r-1,rs)}}) or ({{(r,rs)}}, {{(r,rs)}})",
            )
        )
    stages.append(
        StageSpec(
            stage="hiding",
            index=u + 1,
            length=CostTerm(r=1),
            degree_ratio=one,
            vertex_ratio=CostTerm(n=u, r=-u),
            description="add r/2 vertex-disjoint edges per block: types become "
            "({(r/2,rs),(r/2,rs+1)}, {(r/2,rs),(r/2,rs+1)})",
        )
    )
    for t in range(1, m_u + 1):
        i, j = prefix[t - 1]
        stages.append(
            StageSpec(
                stage=f"load-edge-{t}",
                index=u + 1 + t,
                length=one,
                degree_ratio=CostTerm(r=2),
                vertex_ratio=CostTerm(n=u, r=-u, s=-(t - 1)),
                description=f"load one edge between degree-rs vertices of classes {i} and {j}; "
                f"block {t} becomes ({{(r/2-1,rs),(r/2+1,rs+1)}}, {{(r/2-1,rs),(r/2+1,rs+1)}})",
            )
        )
    return ConstructionPlan(pattern=pattern, u=u, kind="g1", stages=tuple(stages))


def g2_plan(pattern: PatternGraph) -> ConstructionPlan:
    """Vertex-removal construction: the direct plan on H minus vertex k, plus
    one search-and-collision stage for the missing vertex."""
    k, d = pattern.k, pattern.d
    if pattern.degree(k) != d:
        raise ValueError("canonical patterns place a minimum-degree vertex last")
    base = g1_stage_specs(pattern, k - 1)
    m_prime = len(pattern.prefix_edges(k - 1))
    final = StageSpec(
        stage="collision",
        index=k + m_prime + 1,
        length=CostTerm(),
        degree_ratio=CostTerm(n=1, r=Fraction(2 * d, d + 1)),
        vertex_ratio=CostTerm(n=k - 1, r=-(k - 1), s=-m_prime),
        description="search the missing vertex and its d linking edges; degree ratio "
        "n * r^(2d/(d+1)) is the search ratio times the squared collision-subroutine cost",
    )
    return ConstructionPlan(
        pattern=pattern,
        u=k - 1,
        kind="g2",
        stages=base.stages + (final,),
        subroutine=collision_subroutine_specs(d),
    )


def collision_subroutine_specs(d: int, lam: CostTerm | None = None) -> tuple[StageSpec, ...]:
    """Stages of the collision subroutine attached below each end vertex:
    load lambda candidate edges per linking class, then confirm the d links
    one at a time.  ``lam`` substitutes a monomial for lambda (for example
    the optimum r^(d/(d+1)))."""
    if d < 1:
        raise ValueError("d must be >= 1")
    one = CostTerm()
    stages = [
        StageSpec(
            stage="collision-setup",
            index=0,
            length=CostTerm(lam=1),
            degree_ratio=CostTerm(n=1),
            vertex_ratio=one,
            description="choose the candidate vertex and load lambda edges into each "
            "of the d linking classes, avoiding the witness targets",
        )
    ]
    for t in range(1, d + 1):
        stages.append(
            StageSpec(
                stage=f"collision-link-{t}",
                index=t,
                length=one,
                degree_ratio=CostTerm(r=1),
                vertex_ratio=CostTerm(n=1, r=t - 1, lam=-(t - 1)),
                description=f"load one more edge into linking class {t}",
            )
        )
    if lam is not None:
        stages = [
            StageSpec(
                stage=sp.stage,
                index=sp.index,
                length=sp.length.substitute_lambda(lam),
                degree_ratio=sp.degree_ratio.substitute_lambda(lam),
                vertex_ratio=sp.vertex_ratio.substitute_lambda(lam),
                description=sp.description,
            )
            for sp in stages
        ]
    return tuple(stages)


def collision_optimum(d: int) -> tuple[CostTerm, CostTerm]:
    """(lambda*, cost at lambda*): balancing lambda*sqrt(n) against the last
    stage gives lambda* = r^(d/(d+1)) and cost sqrt(n) * r^(d/(d+1))."""
    lam_star = CostTerm(r=Fraction(d, d + 1))
    cost = CostTerm(n=Fraction(1, 2), r=Fraction(d, d + 1))
    return lam_star, cost


@dataclass(frozen=True)
class WalkCosts:
    """Setup / aggregated update / aggregated checking costs of the
    database-walk comparison point."""

    setup: CostTerm
    update: CostTerm
    checking: CostTerm

    def exponents_at(self, x) -> tuple[Fraction, Fraction, Fraction]:
        return (
            self.setup.exponent_at(x, 0),
            self.update.exponent_at(x, 0),
            self.checking.exponent_at(x, 0),
        )


def quantum_walk_costs(pattern: PatternGraph) -> WalkCosts:
    k, d = pattern.k, pattern.d
    half_km1 = Fraction(k - 1, 2)
    return WalkCosts(
        setup=CostTerm(r=2),
        update=CostTerm(n=half_km1, r=Fraction(3, 2) - half_km1),
        checking=CostTerm(n=half_km1 + Fraction(1, 2), r=Fraction(d, d + 1) - half_km1),
    )


# ---------------------------------------------------------------------------
# Flow-path materialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathStep:
    stage: str
    index: int
    label: PartiteLabel
    loaded: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FlowPath:
    kind: str
    pattern: PatternGraph
    u: int
    n: int
    r: int
    rs: int
    lam: int | None
    witness: tuple[int, ...]
    steps: tuple[PathStep, ...]

    @property
    def s(self) -> Fraction:
        return Fraction(self.rs, self.r)

    @property
    def sink(self) -> PartiteLabel:
        return self.steps[-1].label

    def apply_permutation(self, sigma: dict) -> "FlowPath":
        """Relabel the host vertices of every step (and the witness) by a
        permutation of [n]; fixture helper for the symmetry checkers."""
        steps = tuple(
            PathStep(
                stage=step.stage,
                index=step.index,
                label=step.label.apply_permutation(sigma),
                loaded=step.loaded,
            )
            for step in self.steps
        )
        return FlowPath(
            kind=self.kind,
            pattern=self.pattern,
            u=self.u,
            n=self.n,
            r=self.r,
            rs=self.rs,
            lam=self.lam,
            witness=tuple(sigma[a] for a in self.witness),
            steps=steps,
        )

    def dump_log(self) -> str:
        lines = [
            f"# {self.kind} path: n={self.n} r={self.r} s={self.s} lam={self.lam} "
            f"witness={self.witness}"
        ]
        previous: frozenset = frozenset()
        for step in self.steps:
            current = step.label.var_set()
            added = sorted(tuple(sorted(p)) for p in current - previous)
            lines.append(f"stage {step.stage}: +{len(added)} slots {step.loaded}")
            for a, b in added:
                lines.append(f"  {a} {b}")
            previous = current
        return "\n".join(lines)


def _default_lambda(r: int, d: int) -> int:
    lam = round(r ** (d / (d + 1)))
    return max(1, min(r // 2, lam))


def materialize_flow_path(
    plan: ConstructionPlan,
    n: int,
    r: int,
    s,
    witness,
    seed: int,
    lam: int | None = None,
    max_retries: int = 1000,
) -> FlowPath:
    """One uniformly random root-to-sink label sequence consistent with every
    stage's flow rule for the given witness; deterministic given the seed.

    The witness maps pattern vertex i to host vertex a_i; all of a_1..a_k are
    avoided at setup, so the host needs n >= u*(r-1) + k.  Retries cover the
    rare case where the sampled block structure leaves no room for the
    collision stage's candidate edges; exhaustion raises ``WitnessClash``.
    """
    pattern, u = plan.pattern, plan.u
    require_feasible(r, s, n=n, u=u, k=pattern.k)
    rs = int(Fraction(s) * r)
    witness = tuple(int(a) for a in witness)
    if len(witness) != pattern.k or len(set(witness)) != pattern.k:
        raise ValueError(f"witness must be {pattern.k} distinct vertices")
    if any(not 1 <= a <= n for a in witness):
        raise ValueError("witness vertices out of range")
    if plan.kind == "g2":
        if lam is None:
            lam = _default_lambda(r, pattern.d)
        if not 1 <= lam <= r // 2:
            raise InfeasibleParameters(
                f"materialization needs 1 <= lambda <= r/2 = {r // 2}, got {lam}"
            )
    else:
        lam = None
    for attempt in range(max_retries):
        rng = rng_mod.stream(seed, "flow-path", plan.kind, n, r, rs, witness, attempt)
        try:
            steps = _materialize_once(plan, n, r, rs, witness, lam, rng)
        except WitnessClash:
            continue
        return FlowPath(
            kind=plan.kind,
            pattern=pattern,
            u=u,
            n=n,
            r=r,
            rs=rs,
            lam=lam,
            witness=witness,
            steps=tuple(steps),
        )
    raise WitnessClash(f"no valid path after {max_retries} attempts")


def _materialize_once(plan, n, r, rs, witness, lam, rng):
    pattern, u = plan.pattern, plan.u
    prefix = plan.pattern.prefix_edges(u)
    steps: list[PathStep] = []

    # setup: u disjoint classes of size r-1 avoiding the whole witness
    pool = [v for v in range(1, n + 1) if v not in set(witness)]
    chosen = rng.sample(pool, u * (r - 1))
    classes = {
        i: set(chosen[(i - 1) * (r - 1) : i * (r - 1)]) for i in range(1, u + 1)
    }
    blocks: dict[tuple[int, int], set] = {}
    for (i, j) in prefix:
        blocks[(i, j)] = sample_graph_of_type(
            setup_type(r, rs), sorted(classes[i]), sorted(classes[j]), rng
        )
    steps.append(
        PathStep(
            stage="setup",
            index=0,
            label=_snapshot(classes, blocks),
            loaded={"classes": u, "block_edges": sum(len(b) for b in blocks.values())},
        )
    )

    # vertex stages: add a_t, wire it to the rs light vertices of each
    # neighboring class (flow rule: the new element is a_t)
    for t in range(1, u + 1):
        a_t = witness[t - 1]
        classes[t].add(a_t)
        added = 0
        for (i, j) in prefix:
            if t not in (i, j):
                continue
            other = j if i == t else i
            light = [
                v
                for v in sorted(classes[other])
                if _degree_in(blocks[(i, j)], v) == rs - 1
            ]
            if len(light) != rs:
                raise WitnessClash(
                    f"stage {t}: expected {rs} degree-(rs-1) vertices, found {len(light)}"
                )
            for v in light:
                blocks[(i, j)].add(frozenset((a_t, v)))
            added += rs
        steps.append(
            PathStep(
                stage=f"load-vertex-{t}",
                index=t,
                label=_snapshot(classes, blocks),
                loaded={"vertex": a_t, "edges": added},
            )
        )

    # hiding: per block, a uniform matching of r/2 vertex-disjoint non-edges
    # conditioned on missing the witness endpoints
    added = 0
    for (i, j) in prefix:
        matching = sample_nonedge_matching(
            sorted(classes[i]),
            sorted(classes[j]),
            blocks[(i, j)],
            r // 2,
            rng,
            forbidden={witness[i - 1], witness[j - 1]},
        )
        blocks[(i, j)] |= matching
        added += len(matching)
    steps.append(
        PathStep(
            stage="hiding",
            index=u + 1,
            label=_snapshot(classes, blocks),
            loaded={"edges": added},
        )
    )

    # edge stages: load {a_i, a_j} for prefix edge t (flow rule: exactly the
    # witness pair, both still at degree rs)
    for t, (i, j) in enumerate(prefix, start=1):
        a_i, a_j = witness[i - 1], witness[j - 1]
        pair = frozenset((a_i, a_j))
        if pair in blocks[(i, j)]:
            raise WitnessClash(f"witness edge ({a_i},{a_j}) present before its load stage")
        if _degree_in(blocks[(i, j)], a_i) != rs or _degree_in(blocks[(i, j)], a_j) != rs:
            raise WitnessClash(f"witness endpoints of block ({i},{j}) not at degree rs")
        blocks[(i, j)].add(pair)
        steps.append(
            PathStep(
                stage=f"load-edge-{t}",
                index=u + 1 + t,
                label=_snapshot(classes, blocks),
                loaded={"edge": tuple(sorted(pair)), "block": (i, j)},
            )
        )

    if plan.kind == "g2":
        _materialize_collision(pattern, u, r, rs, witness, lam, rng, classes, blocks, steps, prefix)
    return steps


def _materialize_collision(pattern, u, r, rs, witness, lam, rng, classes, blocks, steps, prefix):
    k, d = pattern.k, pattern.d
    a_k = witness[k - 1]
    linking = [i for i in pattern.neighbors(k)]
    classes[k] = {a_k}
    base_index = steps[-1].index

    # stage 0: lambda candidate edges per linking class, to vertices marked
    # (degree rs+1) in all their blocks, avoiding the witness targets
    added = 0
    for i in linking:
        incident = [e for e in prefix if i in e]
        candidates = [
            v
            for v in sorted(classes[i])
            if all(_degree_in(blocks[e], v) == rs + 1 for e in incident)
            and v != witness[i - 1]
        ]
        if len(candidates) < lam:
            raise WitnessClash(
                f"linking class {i} has {len(candidates)} marked non-witness vertices, "
                f"need lambda = {lam}"
            )
        targets = rng.sample(candidates, lam)
        blocks[(i, k)] = {frozenset((a_k, v)) for v in targets}
        added += lam
    steps.append(
        PathStep(
            stage="collision-setup",
            index=base_index + 1,
            label=_snapshot(classes, blocks),
            loaded={"vertex": a_k, "edges": added},
        )
    )

    # stages 1..d: confirm the witness link into each class in turn
    for t, i in enumerate(linking, start=1):
        pair = frozenset((a_k, witness[i - 1]))
        if pair in blocks[(i, k)]:
            raise WitnessClash(f"link ({a_k},{witness[i - 1]}) already loaded")
        blocks[(i, k)].add(pair)
        steps.append(
            PathStep(
                stage=f"collision-link-{t}",
                index=base_index + 1 + t,
                label=_snapshot(classes, blocks),
                loaded={"edge": tuple(sorted(pair)), "block": (i, k)},
            )
        )


def _snapshot(classes, blocks) -> PartiteLabel:
    return PartiteLabel(
        classes={i: frozenset(m) for i, m in classes.items()},
        blocks={e: frozenset(b) for e, b in blocks.items()},
    )


def _degree_in(block, vertex) -> int:
    return sum(1 for pair in block if vertex in pair)


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def audit_flow_path(path: FlowPath) -> list[str]:
    """Degree-type, stage-length, label-structure and sink-certificate audit;
    returns a list of problems (empty = pass)."""
    problems: list[str] = []
    pattern, u, r, rs = path.pattern, path.u, path.r, path.rs
    prefix = pattern.prefix_edges(u)
    expected_lengths = _exact_lengths(pattern, u, path.kind, r, rs, path.lam)
    if len(path.steps) != len(expected_lengths):
        problems.append(
            f"path has {len(path.steps)} steps, expected {len(expected_lengths)}"
        )
        return problems

    previous: frozenset = frozenset()
    for step_pos, step in enumerate(path.steps):
        label = step.label
        problems += [f"step {step.stage}: {p}" for p in label.check(pattern)]
        current = label.var_set()
        if not previous <= current:
            problems.append(f"step {step.stage}: variable set not monotone")
        grown = len(current) - len(previous)
        if grown != expected_lengths[step_pos]:
            problems.append(
                f"step {step.stage}: added {grown} slots, expected {expected_lengths[step_pos]}"
            )
        previous = current

        if step.index <= u + len(prefix) + 1:
            expected_classes = _expected_class_sizes(u, r, step.index)
            for i, size in expected_classes.items():
                actual = len(label.classes.get(i, ()))
                if actual != size:
                    problems.append(
                        f"step {step.stage}: class {i} has {actual} vertices, expected {size}"
                    )
            types = block_types_after(pattern, u, r, rs, step.index)
            for (i, j), btype in types.items():
                block = label.blocks.get((i, j), frozenset())
                problems += _audit_block(
                    label, (i, j), block, btype, f"step {step.stage} block ({i},{j})"
                )
        else:
            problems += _audit_collision_step(path, step_pos, step)

    problems += _audit_sink(path)
    return problems


def _expected_class_sizes(u, r, step):
    if step <= u:
        return {i: (r if i <= step else r - 1) for i in range(1, u + 1)}
    return {i: r for i in range(1, u + 1)}


def _audit_block(label, pattern_edge, block, btype: BipartiteType, where: str) -> list[str]:
    problems = []
    i, j = pattern_edge
    left = sorted(label.classes.get(i, frozenset()))
    right = sorted(label.classes.get(j, frozenset()))
    if len(left) != btype.left_size() or len(right) != btype.right_size():
        problems.append(
            f"{where}: sides {len(left)}x{len(right)}, expected "
            f"{btype.left_size()}x{btype.right_size()}"
        )
        return problems
    for side, vertices, expected in (
        ("left", left, btype.left_degrees()),
        ("right", right, btype.right_degrees()),
    ):
        actual = sorted(_degree_in(block, v) for v in vertices)
        if actual != sorted(expected):
            problems.append(
                f"{where}: {side} degrees {actual}, expected {sorted(expected)}"
            )
    return problems


def _audit_collision_step(path: FlowPath, step_pos: int, step: PathStep) -> list[str]:
    problems = []
    pattern, u, r, rs, lam = path.pattern, path.u, path.r, path.rs, path.lam
    prefix = pattern.prefix_edges(u)
    k = pattern.k
    a_k = path.witness[k - 1]
    linking = list(pattern.neighbors(k))
    base = u + len(prefix) + 1
    q = step.index - base  # 1 = collision setup, 1+t = link t loaded
    label = step.label
    if label.classes.get(k) != frozenset({a_k}):
        problems.append(f"step {step.stage}: class {k} is not the candidate vertex")
    for t, i in enumerate(linking, start=1):
        block = label.blocks.get((min(i, k), max(i, k)), frozenset())
        expected = lam + (1 if q - 1 >= t else 0)
        if len(block) != expected:
            problems.append(
                f"step {step.stage}: linking block ({i},{k}) has {len(block)} edges, "
                f"expected {expected}"
            )
        incident = [e for e in prefix if i in e]
        for pair in block:
            target = next(v for v in pair if v != a_k)
            if a_k not in pair:
                problems.append(f"step {step.stage}: edge {sorted(pair)} misses the candidate")
            if pair != frozenset((a_k, path.witness[i - 1])):
                for e in incident:
                    if label.block_degree(e, target) != rs + 1:
                        problems.append(
                            f"step {step.stage}: candidate edge target {target} not marked in block {e}"
                        )
                if target == path.witness[i - 1]:
                    problems.append(
                        f"step {step.stage}: setup edge touches witness target {target}"
                    )
    return problems


def _audit_sink(path: FlowPath) -> list[str]:
    problems = []
    pattern, rs = path.pattern, path.rs
    sink = path.sink
    witness_edges = {
        frozenset((path.witness[i - 1], path.witness[j - 1])) for (i, j) in pattern.edges
    }
    slots = {tuple(sorted(p)) for p in sink.var_set()}
    positives = {tuple(sorted(p)) for p in witness_edges}
    if not positives <= slots:
        problems.append("sink label misses some witness edges")
    if not is_certificate(slots, positives, pattern):
        problems.append("sink variable set is not a certificate for the witness copy")
    for (i, j) in pattern.prefix_edges(path.u):
        for v in (path.witness[i - 1], path.witness[j - 1]):
            if sink.block_degree((i, j), v) != rs + 1:
                problems.append(
                    f"sink: witness vertex {v} has degree "
                    f"{sink.block_degree((i, j), v)} in block ({i},{j}), expected rs+1 = {rs + 1}"
                )
    return problems


# ---------------------------------------------------------------------------
# Flow-condition probabilities (the vertex-ratio audit)
# ---------------------------------------------------------------------------


def _falling(n: int, terms: int) -> int:
    out = 1
    for i in range(terms):
        out *= n - i
    return out


def position_condition_probability(n: int, k: int, u: int, r: int, stage: int) -> Fraction:
    """Exact probability over a uniform placement that a stage-start label
    carries flow, for the vertex stages and the hiding stage (1 <= stage <=
    u+1): the first stage-1 witnesses sit in their grown classes and the rest
    avoid every class.  Leading order is (r/n)^(stage-1)."""
    if not 1 <= stage <= u + 1:
        raise ValueError(f"stage must be in 1..{u + 1}")
    loaded = stage - 1
    footprint = loaded * r + (u - loaded) * (r - 1)
    if n - footprint < k - loaded:
        return Fraction(0)
    return Fraction(r**loaded * _falling(n - footprint, k - loaded), _falling(n, k))


def _stage_block_condition(label, positions, prefix, rs, t) -> bool:
    """Slot condition at the start of edge stage t: earlier blocks hold the
    (marked) witness edge, later blocks still hide it."""
    for idx, (i, j) in enumerate(prefix, start=1):
        x_i, x_j = positions[i], positions[j]
        block = label.blocks[(i, j)]
        pair = frozenset((x_i, x_j))
        di = _degree_in(block, x_i)
        dj = _degree_in(block, x_j)
        if idx < t:
            if pair not in block or di != rs + 1 or dj != rs + 1:
                return False
        else:
            if pair in block or di != rs or dj != rs:
                return False
    return True


def exact_flow_probability(path: FlowPath, stage: int) -> Fraction:
    """Exact flow-support probability at the start of ``stage`` (1-based
    construction stage), combining the positional factor with enumeration of
    witness slots inside the fixed label."""
    pattern, u, n, r, rs = path.pattern, path.u, path.n, path.r, path.rs
    k = pattern.k
    prefix = pattern.prefix_edges(u)
    if 1 <= stage <= u + 1:
        return position_condition_probability(n, k, u, r, stage)
    t = stage - u - 1
    if not 1 <= t <= len(prefix):
        raise ValueError(f"stage {stage} out of range for the loading part")
    label = path.steps[stage - 1].label  # start of stage q = end of stage q-1
    positional = position_condition_probability(n, k, u, r, u + 1)
    classes = [sorted(label.classes[i]) for i in range(1, u + 1)]
    total = 0
    good = 0

    def rec(i, positions):
        nonlocal total, good
        if i > u:
            total += 1
            if _stage_block_condition(label, positions, prefix, rs, t):
                good += 1
            return
        for v in classes[i - 1]:
            positions[i] = v
            rec(i + 1, positions)
        del positions[i]

    rec(1, {})
    return positional * Fraction(good, total)


def mc_flow_probability(path: FlowPath, stage: int, samples: int, seed: int) -> MCEstimate:
    """Monte Carlo estimate of the same flow-support probability via random
    relabelings of the host, an independent route from the exact count."""
    pattern, u, n, r, rs = path.pattern, path.u, path.n, path.r, path.rs
    prefix = pattern.prefix_edges(u)
    label = path.steps[stage - 1].label
    witness = path.witness
    stream = rng_mod.stream(seed, "vertex-ratio", path.kind, stage)
    hits = 0
    base = list(range(1, n + 1))
    for _ in range(samples):
        shuffled = base[:]
        stream.shuffle(shuffled)
        sigma = dict(zip(base, shuffled))
        moved = label.apply_permutation(sigma)
        if _flow_support(moved, witness, pattern, u, rs, prefix, stage):
            hits += 1
    p_hat = hits / samples
    stderr = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / samples)
    return MCEstimate(value=p_hat, stderr=stderr, samples=samples)


def _flow_support(label, witness, pattern, u, rs, prefix, stage) -> bool:
    k = pattern.k
    loaded = min(stage - 1, u)
    all_members = set()
    for members in label.classes.values():
        all_members |= set(members)
    for i in range(1, loaded + 1):
        if witness[i - 1] not in label.classes[i]:
            return False
    for i in range(loaded + 1, k + 1):
        if witness[i - 1] in all_members:
            return False
    if stage <= u + 1:
        return True
    positions = {i: witness[i - 1] for i in range(1, u + 1)}
    return _stage_block_condition(label, positions, prefix, rs, stage - u - 1)


# ---------------------------------------------------------------------------
# Explicit tiny learning graphs from flow paths
# ---------------------------------------------------------------------------


def path_learning_graph(paths) -> LearningGraph:
    """Merge materialized paths into an explicit learning graph with one unit
    flow per witness; weights 1.  Vertices are identified by their labels."""
    graph = LearningGraph(root="root")
    seen: dict = {}
    for path in paths:
        previous = "root"
        flow = {}
        for step in path.steps:
            key = ("v", _label_sort_key(step.label))
            if key not in seen:
                varset = frozenset(tuple(sorted(p)) for p in step.label.var_set())
                graph.add_vertex(key, varset, label=step.label)
                seen[key] = True
            if (previous, key) not in set(graph.edges()):
                graph.add_edge(previous, key, weight=1)
            flow[(previous, key)] = 1
            previous = key
        graph.set_flow(path.witness, flow)
    return graph.freeze()


def _label_sort_key(label: PartiteLabel):
    classes = tuple(sorted((i, tuple(sorted(m))) for i, m in label.classes.items()))
    blocks = tuple(
        sorted(
            (e, tuple(sorted(tuple(sorted(p)) for p in b))) for e, b in label.blocks.items()
        )
    )
    return classes, blocks
