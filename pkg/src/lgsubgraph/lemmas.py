"""Executable forms of the learning-graph analysis lemmas.

Three groups of tools:

* reweighting transformations (stage balancing, per-class reweighting) whose
  claimed complexity bounds are re-verified by exact recomputation on the
  reweighted graph;
* stage-cost bounds (the sqrt(C0 C1 |V|/|W|) bound and its
  length/degree-ratio/vertex-ratio specialization);
* symmetry checkers for explicit tiny instances (transitive action of vertex
  permutations on flows, uniform-incoming-flow hypotheses), plus the edge
  probability claims for the bipartite types used by the constructions.

Exact mode keeps every quantity a Fraction or SqrtSum so the bound checks
carry no tolerance; float mode uses a relative tolerance where indicated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import rng as rng_mod
from .bipartite import BipartiteType, sample_graph_of_type
from .learning_graph import LearningGraph
from .radicals import SqrtSum

__all__ = [
    "LemmaError",
    "Inconsistent",
    "DegenerateStage",
    "HypothesisViolation",
    "InfeasibleParameters",
    "StagePartition",
    "stage_partition_by_levels",
    "e_v_arrow",
    "balance_stages",
    "verify_stage_balance",
    "OrbitPartition",
    "orbit_alphas",
    "reweight_by_classes",
    "verify_class_reweighting",
    "simple_stage_bound",
    "check_simple_stage_hypotheses",
    "verify_simple_stage_bound",
    "UniformStageCost",
    "uniform_stage_cost",
    "TransitivityResult",
    "check_transitive_action",
    "LemmaReport",
    "check_symmetry_hypotheses",
    "MCEstimate",
    "hidden_type",
    "uniform_edge_probability",
    "feasibility_violations",
    "require_feasible",
    "smallest_feasible_n",
    "round_parameters",
]

CONSISTENCY_RTOL = 1e-9


class LemmaError(Exception):
    pass


class Inconsistent(LemmaError):
    """Class flow mass alpha_i varies with the input y."""


class DegenerateStage(LemmaError):
    """A stage with C0 = 0 or no flow cannot be balanced."""


class HypothesisViolation(LemmaError):
    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        super().__init__(f"hypothesis ({clause}) fails" + (f": {detail}" if detail else ""))


class InfeasibleParameters(LemmaError):
    """(n, r, s, lambda) outside the feasible lattice."""


# ---------------------------------------------------------------------------
# Stages and E_V->
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StagePartition:
    """Ordered partition of all edges into stages (edges between two levels)."""

    stages: tuple[frozenset, ...]

    def validate(self, graph: LearningGraph) -> list[str]:
        problems = []
        seen: set = set()
        for idx, stage in enumerate(self.stages):
            overlap = seen & stage
            if overlap:
                problems.append(f"stage {idx} overlaps earlier stages")
            seen |= stage
        if seen != set(graph.edges()):
            problems.append("stages do not cover the edge set")
        lev = graph.levels()
        for idx, stage in enumerate(self.stages):
            if not stage:
                problems.append(f"stage {idx} is empty")
                continue
            lo = min(lev[u] for u, _ in stage)
            hi = max(lev[v] for _, v in stage)
            band = {
                (u, v)
                for (u, v) in graph.edges()
                if lev[u] >= lo and lev[v] <= hi
            }
            if band != set(stage):
                problems.append(f"stage {idx} is not the full band between levels {lo} and {hi}")
        return problems


def stage_partition_by_levels(graph: LearningGraph, boundaries=None) -> StagePartition:
    """Stage q = all edges between consecutive level boundaries (default: one
    stage per level gap)."""
    lev = graph.levels()
    top = max(lev.values())
    if boundaries is None:
        boundaries = list(range(top + 1))
    if boundaries[0] != 0 or boundaries[-1] != top or sorted(boundaries) != list(boundaries):
        raise ValueError(f"boundaries must increase from 0 to {top}")
    stages = []
    for lo, hi in zip(boundaries, boundaries[1:]):
        stages.append(
            frozenset(
                (u, v) for (u, v) in graph.edges() if lev[u] >= lo and lev[v] <= hi
            )
        )
    return StagePartition(stages=tuple(stages))


def e_v_arrow(graph: LearningGraph, E, V) -> frozenset:
    """Edges of E whose tail is in V or descends from a member of V."""
    allowed = set(V)
    for v in V:
        allowed |= graph.descendants(v)
    return frozenset((u, w) for (u, w) in (tuple(e) for e in E) if u in allowed)


# ---------------------------------------------------------------------------
# Stage balancing (sum-of-stage-costs bound)
# ---------------------------------------------------------------------------


def _sqrt(value, exact: bool):
    return SqrtSum.sqrt(value) if exact else math.sqrt(float(value))


def balance_stages(graph: LearningGraph, partition: StagePartition, exact: bool = True):
    """Rescale weights stage by stage with sqrt(C1(E_i)/C0(E_i)).

    Guarantees (re-verified by ``verify_stage_balance``): C0'(E_i) = C(E_i)
    for each stage, hence C'(all edges) <= sum_i C(E_i).
    """
    new_weights = {}
    infos = []
    for idx, stage in enumerate(partition.stages):
        c0 = graph.c0(stage)
        c1 = graph.c1(stage)
        if c0 == 0 or c1 == 0:
            raise DegenerateStage(f"stage {idx} has C0={c0}, C1={c1}")
        if exact:
            beta = _sqrt(Fraction(c1) / Fraction(c0), True)
        else:
            beta = math.sqrt(float(c1) / float(c0))
        for e in stage:
            new_weights[e] = beta * graph.weight(e)
        infos.append({"stage": idx, "c0": c0, "c1": c1, "beta": beta})
    return graph.with_weights(new_weights), infos


def verify_stage_balance(graph: LearningGraph, partition: StagePartition, exact: bool = True):
    """Recompute the balanced complexity and compare against sum_i C(E_i).

    Exact mode compares squared SqrtSum values with no tolerance.
    """
    reweighted, infos = balance_stages(graph, partition, exact=exact)
    if exact:
        stage_costs = [SqrtSum.sqrt(Fraction(info["c0"]) * Fraction(info["c1"])) for info in infos]
        total = SqrtSum.of(0)
        for c in stage_costs:
            total = total + c
        lhs_sq = reweighted.complexity_squared(reweighted.edges())
        rhs_sq = total * total
        per_stage_ok = all(
            (reweighted.c0(stage) - cost).sign() == 0
            for stage, cost in zip(partition.stages, stage_costs)
        )
        ok = per_stage_ok and lhs_sq <= rhs_sq
        return {
            "ok": bool(ok),
            "per_stage_c0_equals_cost": bool(per_stage_ok),
            "reweighted_complexity_sq": lhs_sq,
            "stage_cost_sum_sq": rhs_sq,
            "reweighted": reweighted,
        }
    lhs = reweighted.complexity(reweighted.edges())
    rhs = sum(math.sqrt(float(info["c0"]) * float(info["c1"])) for info in infos)
    return {
        "ok": lhs <= rhs * (1 + 1e-9),
        "reweighted_complexity": lhs,
        "stage_cost_sum": rhs,
        "reweighted": reweighted,
    }


# ---------------------------------------------------------------------------
# Convex-combination reweighting over consistent classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitPartition:
    """Partition of the vertices at the start of a stage, with per-class flow
    mass alpha_i = p_y(E_{V_i}->), required to be independent of y."""

    classes: tuple[frozenset, ...]
    alphas: tuple = ()

    @classmethod
    def from_graph(cls, graph: LearningGraph, E, classes, exact: bool = True):
        classes = tuple(frozenset(c) for c in classes)
        alphas = tuple(orbit_alphas(graph, E, classes, exact=exact))
        return cls(classes=classes, alphas=alphas)


def orbit_alphas(graph: LearningGraph, E, classes, exact: bool = True):
    """Per-class flow masses, raising ``Inconsistent`` when they depend on y."""
    alphas = []
    for idx, cls in enumerate(classes):
        sub = e_v_arrow(graph, E, cls)
        values = [graph.flow_value(sub, y) for y in graph.flows]
        first = values[0]
        for v in values[1:]:
            if exact:
                if v != first:
                    raise Inconsistent(f"class {idx}: masses {first} vs {v}")
            else:
                scale = max(abs(float(first)), abs(float(v)), 1e-300)
                if abs(float(v) - float(first)) > CONSISTENCY_RTOL * scale:
                    raise Inconsistent(f"class {idx}: masses {first} vs {v}")
        alphas.append(first)
    return alphas


def reweight_by_classes(graph: LearningGraph, E, classes, exact: bool = True):
    """New weights w'(e) = alpha_i C1(E_i) w(e) on a stage E; classes with
    alpha_i = 0 have their edges deleted (they carry no flow for any y).

    Post-bounds, all checkable exactly in rational arithmetic:
    C1'(E) <= 1 and C0'(E) <= max_i C(E_i)^2, hence C'(E) <= max_i C(E_i).
    """
    E = frozenset(tuple(e) for e in E)
    if isinstance(classes, OrbitPartition):
        classes = classes.classes
    alphas = orbit_alphas(graph, E, classes, exact=exact)
    new_weights = {}
    dropped: set = set()
    infos = []
    for idx, (cls, alpha) in enumerate(zip(classes, alphas)):
        sub = e_v_arrow(graph, E, cls)
        if alpha == 0:
            dropped |= set(sub)
            infos.append({"class": idx, "alpha": alpha, "dropped": True})
            continue
        c0 = graph.c0(sub)
        c1 = graph.c1(sub)
        if c1 == 0:
            raise DegenerateStage(
                f"class {idx} carries flow but only over zero-length edges (C1 = 0)"
            )
        for e in sub:
            new_weights[e] = alpha * c1 * graph.weight(e)
        infos.append({"class": idx, "alpha": alpha, "c0": c0, "c1": c1, "dropped": False})
    reweighted = graph.with_weights(new_weights)
    if dropped:
        reweighted = reweighted.without_edges(dropped)
    return reweighted, {"infos": infos, "dropped": frozenset(dropped), "kept_edges": E - dropped}


def verify_class_reweighting(graph: LearningGraph, E, classes, exact: bool = True):
    """Recompute both halves of the reweighting bound on the modified graph."""
    reweighted, info = reweight_by_classes(graph, E, classes, exact=exact)
    kept = info["kept_edges"]
    max_cost_sq = 0
    for entry in info["infos"]:
        if entry["dropped"]:
            continue
        cost_sq = entry["c0"] * entry["c1"]
        if cost_sq > max_cost_sq:
            max_cost_sq = cost_sq
    c1_new = reweighted.c1(kept)
    c0_new = reweighted.c0(kept)
    product = c0_new * c1_new
    if exact:
        ok = c1_new <= 1 and c0_new <= max_cost_sq and product <= max_cost_sq
    else:
        slack = 1 + 1e-9
        ok = (
            float(c1_new) <= slack
            and float(c0_new) <= float(max_cost_sq) * slack
            and float(product) <= float(max_cost_sq) * slack
        )
    return {
        "ok": bool(ok),
        "c1_reweighted": c1_new,
        "c0_reweighted": c0_new,
        "complexity_sq_reweighted": product,
        "max_class_cost_sq": max_cost_sq,
        "reweighted": reweighted,
    }


# ---------------------------------------------------------------------------
# Per-stage cost bounds
# ---------------------------------------------------------------------------


def simple_stage_bound(c0_max, c1_max, size_v: int, size_w: int, exact: bool = False):
    """sqrt(max C0(E_v->) * max C1(E_v->) * |V|/|W_y|)."""
    if size_w <= 0 or size_v < size_w:
        raise ValueError(f"need 0 < |W| <= |V|, got |V|={size_v}, |W|={size_w}")
    ratio = Fraction(size_v, size_w)
    if exact:
        return SqrtSum.sqrt(Fraction(c0_max) * Fraction(c1_max) * ratio)
    return math.sqrt(float(c0_max) * float(c1_max) * float(ratio))


def check_simple_stage_hypotheses(graph: LearningGraph, E, V):
    """Verify the three hypotheses of the uniform-split stage bound; returns
    per-flow W_y sets, raising ``HypothesisViolation`` on the failed clause."""
    E = frozenset(tuple(e) for e in E)
    V = list(V)
    subs = {v: e_v_arrow(graph, E, [v]) for v in V}
    for u, v in itertools.combinations(V, 2):
        if subs[u] & subs[v]:
            raise HypothesisViolation("1", f"E_{u!r}-> and E_{v!r}-> intersect")
    w_sets = {}
    for y in graph.flows:
        w_sets[y] = {v for v in V if graph.flow_value(subs[v], y) > 0}
    sizes = {len(w) for w in w_sets.values()}
    if len(sizes) != 1:
        raise HypothesisViolation("2", f"|W_y| varies: {sorted(sizes)}")
    full = e_v_arrow(graph, E, V)
    for y, w_set in w_sets.items():
        if not w_set:
            continue
        total = graph.flow_value(full, y)
        share = total / len(w_set)
        for v in w_set:
            if graph.flow_value(subs[v], y) != share:
                raise HypothesisViolation(
                    "3", f"flow {y!r} puts {graph.flow_value(subs[v], y)} on {v!r}, expected {share}"
                )
    return w_sets


def verify_simple_stage_bound(graph: LearningGraph, E, V, exact: bool = True):
    """Check hypotheses, then compare the bound against the exact C(E_V->)."""
    E = frozenset(tuple(e) for e in E)
    V = list(V)
    w_sets = check_simple_stage_hypotheses(graph, E, V)
    size_w = len(next(iter(w_sets.values())))
    subs = {v: e_v_arrow(graph, E, [v]) for v in V}
    c0_max = max(graph.c0(subs[v]) for v in V)
    c1_max = max(graph.c1(subs[v]) for v in V)
    full = e_v_arrow(graph, E, V)
    exact_sq = graph.complexity_squared(full)
    bound_sq = Fraction(c0_max) * Fraction(c1_max) * Fraction(len(V), size_w) if exact else (
        float(c0_max) * float(c1_max) * len(V) / size_w
    )
    ok = exact_sq <= bound_sq if exact else float(exact_sq) <= float(bound_sq) * (1 + 1e-9)
    return {
        "ok": bool(ok),
        "bound_sq": bound_sq,
        "exact_sq": exact_sq,
        "c0_max": c0_max,
        "c1_max": c1_max,
        "size_v": len(V),
        "size_w": size_w,
    }


@dataclass(frozen=True)
class UniformStageCost:
    """Three-factor stage cost: length, degree ratio, maximum vertex ratio."""

    length: object
    degree_ratio: object
    max_vertex_ratio: object
    value: object

    def as_dict(self):
        return {
            "length": self.length,
            "degree_ratio": self.degree_ratio,
            "max_vertex_ratio": self.max_vertex_ratio,
            "value": self.value,
        }


def uniform_stage_cost(length, out_degree, flow_degree, vertex_ratios, exact: bool = False):
    """max_i length * sqrt((d/g) * |V_i|/|W_{y,i}|) for a unit-weight stage
    between consecutive levels with uniform out-degree d and flow split g."""
    if flow_degree <= 0:
        raise ValueError("flow degree g must be positive")
    if out_degree < flow_degree:
        raise ValueError(f"out-degree {out_degree} < flow degree {flow_degree}")
    ratios = list(vertex_ratios)
    if not ratios:
        raise ValueError("need at least one vertex ratio")
    max_ratio = max(Fraction(r) for r in ratios)
    dg = Fraction(out_degree) / Fraction(flow_degree)
    if exact:
        value = Fraction(length) * SqrtSum.sqrt(dg * max_ratio)
    else:
        value = float(length) * math.sqrt(float(dg) * float(max_ratio))
    return UniformStageCost(length=length, degree_ratio=dg, max_vertex_ratio=max_ratio, value=value)


# ---------------------------------------------------------------------------
# Symmetry checkers (explicit tiny instances)
# ---------------------------------------------------------------------------


@dataclass
class TransitivityResult:
    found: bool
    inconclusive: bool
    taus: dict = field(default_factory=dict)
    consistency_ok: bool | None = None
    detail: str = ""


def _apply_tau_to_vertex(graph, label_to_vid, vid, sigma):
    label = graph.label(vid)
    if label is None:
        return None
    moved = label.apply_permutation(sigma)
    return label_to_vid.get(_label_key(moved))


def _label_key(label):
    classes = tuple(sorted((i, tuple(sorted(m))) for i, m in label.classes.items()))
    blocks = tuple(
        sorted((e, tuple(sorted(tuple(sorted(p)) for p in b))) for e, b in label.blocks.items())
    )
    return classes, blocks


def _tau_maps_flow(graph, label_to_vid, sigma, y, y2) -> bool:
    fy, fy2 = graph.flows[y], graph.flows[y2]
    mapped = {}
    for vid in graph.vertices():
        if graph.label(vid) is None:
            mapped[vid] = vid  # the root's empty label is fixed by every sigma
        else:
            target = _apply_tau_to_vertex(graph, label_to_vid, vid, sigma)
            if target is None:
                return False
            mapped[vid] = target
    for (u, v) in graph.edges():
        image = (mapped[u], mapped[v])
        if image not in set(graph.edges()):
            if fy.get((u, v), 0) != 0:
                return False
            continue
        if fy.get((u, v), 0) != fy2.get(image, 0):
            return False
    return True


def check_transitive_action(
    graph: LearningGraph, n: int, candidates=(), max_brute_n: int = 8
) -> TransitivityResult:
    """Search for permutations tau of [n] with p_y((u,v)) = p_y'((tau u, tau v)).

    Candidate permutations (dicts on 1..n) are tried first; exhaustive search
    only for n <= ``max_brute_n``.  Failure to find one is reported as
    inconclusive when the search was truncated.  On success the lemma's
    conclusion is asserted: p_y([u]^+/-) agrees across flows on the orbit
    classes generated by the found permutations.
    """
    ys = list(graph.flows)
    if len(ys) < 2:
        raise ValueError("need at least two flows")
    label_to_vid = {
        _label_key(graph.label(v)): v for v in graph.vertices() if graph.label(v) is not None
    }
    taus = {}
    truncated = False
    for y, y2 in itertools.permutations(ys, 2):
        found_tau = None
        for cand in candidates:
            if _tau_maps_flow(graph, label_to_vid, cand, y, y2):
                found_tau = dict(cand)
                break
        if found_tau is None:
            if n > max_brute_n:
                truncated = True
            else:
                base = list(range(1, n + 1))
                for perm in itertools.permutations(base):
                    sigma = dict(zip(base, perm))
                    if _tau_maps_flow(graph, label_to_vid, sigma, y, y2):
                        found_tau = sigma
                        break
        if found_tau is None:
            return TransitivityResult(
                found=False,
                inconclusive=truncated,
                detail=f"no tau found for pair ({y!r}, {y2!r})"
                + (" within the permutation budget" if truncated else ""),
            )
        taus[(y, y2)] = found_tau

    # Conclusion check: consistency of p_y([u]^+/-) on orbits of the found taus.
    label_vids = sorted(label_to_vid.values(), key=repr)
    parent = {v: v for v in label_vids}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for tau in taus.values():
        for vid in label_vids:
            image = _apply_tau_to_vertex(graph, label_to_vid, vid, tau)
            if image is not None:
                ru, rv = find(vid), find(image)
                if ru != rv:
                    parent[ru] = rv
    orbits: dict = {}
    for vid in label_vids:
        orbits.setdefault(find(vid), []).append(vid)
    consistency_ok = True
    for members in orbits.values():
        plus = [sum(graph.flow(y, e) for v in members for e in graph.out_edges(v)) for y in ys]
        minus = [sum(graph.flow(y, e) for v in members for e in graph.in_edges(v)) for y in ys]
        if len(set(plus)) != 1 or len(set(minus)) != 1:
            consistency_ok = False
    return TransitivityResult(found=True, inconclusive=False, taus=taus, consistency_ok=consistency_ok)


@dataclass(frozen=True)
class LemmaReport:
    lemma: str
    clause: str
    where: str
    measured: str
    expected: str
    ok: bool

    def to_dict(self):
        return {
            "lemma": self.lemma,
            "clause": self.clause,
            "where": self.where,
            "measured": self.measured,
            "expected": self.expected,
            "ok": self.ok,
        }


def check_symmetry_hypotheses(graph: LearningGraph, classes) -> list[LemmaReport]:
    """Verify the uniform-incoming-flow lemma on an explicit instance.

    ``classes``: iterable of vertex sets partitioning (part of) the vertices;
    the root is treated as carrying incoming flow 1.  Hypotheses checked:
    (1) each flow-carrying vertex splits its flow uniformly over a number of
    neighbors constant on its class; (2) in-edge counts from class to vertex
    depend only on the class pair.  Conclusion checked: incoming flow per
    vertex is 0 or a per-class constant, and the number of flow-carrying
    vertices per class is independent of y.
    """
    reports: list[LemmaReport] = []
    class_list = [frozenset(c) for c in classes]
    if not any(graph.root in cls for cls in class_list):
        class_list = [frozenset([graph.root])] + class_list
    class_of = {}
    for idx, cls in enumerate(class_list):
        for v in cls:
            class_of[v] = idx

    def inflow(y, v):
        if v == graph.root:
            return 1
        return sum(graph.flow(y, e) for e in graph.in_edges(v))

    # hypothesis 1: uniform split onto g+([u]) neighbors
    for y in graph.flows:
        g_plus: dict[int, set] = {}
        for v in graph.vertices():
            if v not in class_of or inflow(y, v) <= 0:
                continue
            values = [graph.flow(y, e) for e in graph.out_edges(v)]
            positive = [x for x in values if x > 0]
            if not positive and not graph.out_edges(v):
                continue  # sink
            uniform = len(set(positive)) <= 1
            reports.append(
                LemmaReport(
                    lemma="uniform-incoming-flow",
                    clause="1:uniform-split",
                    where=f"flow {y!r}, vertex {v!r}",
                    measured=f"splits {sorted(map(str, positive))}",
                    expected="all positive out-flows equal",
                    ok=uniform,
                )
            )
            g_plus.setdefault(class_of[v], set()).add(len(positive))
        for idx, counts in sorted(g_plus.items()):
            reports.append(
                LemmaReport(
                    lemma="uniform-incoming-flow",
                    clause="1:g+-constant",
                    where=f"flow {y!r}, class {idx}",
                    measured=f"g+ values {sorted(counts)}",
                    expected="single value per class",
                    ok=len(counts) == 1,
                )
            )

    # hypothesis 2: structural in-degree counting g-([w],[u])
    for target_idx, target in enumerate(class_list):
        counts_by_source: dict[int, set] = {}
        for v in target:
            per_source: dict[int, int] = {}
            for (u, _) in graph.in_edges(v):
                if u in class_of:
                    per_source[class_of[u]] = per_source.get(class_of[u], 0) + 1
            for src, cnt in per_source.items():
                counts_by_source.setdefault(src, set()).add(cnt)
            for src in counts_by_source:
                if src not in per_source:
                    counts_by_source[src].add(0)
        for src, counts in sorted(counts_by_source.items()):
            reports.append(
                LemmaReport(
                    lemma="uniform-incoming-flow",
                    clause="2:in-degree-counts",
                    where=f"class {src} -> class {target_idx}",
                    measured=f"counts {sorted(counts)}",
                    expected="single value per class pair",
                    ok=len(counts) == 1,
                )
            )

    # conclusion: inflow in {0, alpha_y([u])}, |W_{y,[u]}| independent of y
    for idx, cls in enumerate(class_list):
        w_sizes = set()
        for y in graph.flows:
            inflows = [inflow(y, v) for v in sorted(cls, key=repr)]
            positives = [x for x in inflows if x > 0]
            w_sizes.add(len(positives))
            reports.append(
                LemmaReport(
                    lemma="uniform-incoming-flow",
                    clause="conclusion:uniform-inflow",
                    where=f"flow {y!r}, class {idx}",
                    measured=f"positive inflows {sorted(map(str, positives))}",
                    expected="all positive inflows equal",
                    ok=len(set(positives)) <= 1,
                )
            )
        reports.append(
            LemmaReport(
                lemma="uniform-incoming-flow",
                clause="conclusion:W-size",
                where=f"class {idx}",
                measured=f"|W_y| values {sorted(w_sizes)}",
                expected="independent of y",
                ok=len(w_sizes) == 1,
            )
        )
    return reports


# ---------------------------------------------------------------------------
# Edge probability claims
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int
    threshold: float | None = None
    ok: bool | None = None

    def to_dict(self):
        return {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "threshold": self.threshold,
            "ok": self.ok,
        }


def hidden_type(r: int, rs: int) -> BipartiteType:
    """Block type after hiding and loading: half the vertices raised to rs+1,
    plus the loaded pair."""
    return BipartiteType(
        left=((r // 2 - 1, rs), (r // 2 + 1, rs + 1)),
        right=((r // 2 - 1, rs), (r // 2 + 1, rs + 1)),
    )


def uniform_edge_probability(r: int, s, mode: str = "plain", samples: int = 100_000, seed: int = 0):
    """Probability that a fixed edge slot survives a uniform placement of the
    block graph.

    plain:  exact value s (double-counting over all graphs of the regular
            type; every graph has s*r^2 of the r^2 slots as edges).
    hidden: Monte Carlo estimate of P(slot is an edge AND both endpoints have
            degree rs+1) for the hidden/loaded type, reported with its
            standard error and checked against the s/4 bound within three
            standard errors.
    """
    s = Fraction(s)
    rs = s * r
    if r < 2 or r % 2 != 0:
        raise InfeasibleParameters(f"r must be even and >= 2, got {r}")
    if rs.denominator != 1 or rs < 1:
        raise InfeasibleParameters(f"rs = r*s must be a positive integer, got {rs}")
    rs = int(rs)
    if mode == "plain":
        if rs > r:
            raise InfeasibleParameters(f"rs = {rs} exceeds side size {r}")
        return s
    if mode != "hidden":
        raise ValueError(f"unknown mode {mode!r}")
    if rs > r - 1:
        raise InfeasibleParameters(f"hidden type needs rs <= r-1, got rs={rs}, r={r}")
    btype = hidden_type(r, rs)
    left = tuple(range(r))
    right = tuple(range(r, 2 * r))
    slot = frozenset((left[0], right[0]))
    stream = rng_mod.stream(seed, "uniform_edge_probability", r, rs)
    hits = 0
    for _ in range(samples):
        graph = sample_graph_of_type(btype, left, right, stream)
        if slot not in graph:
            continue
        dl = sum(1 for pair in graph if left[0] in pair)
        dr = sum(1 for pair in graph if right[0] in pair)
        if dl == rs + 1 and dr == rs + 1:
            hits += 1
    p_hat = hits / samples
    stderr = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / samples)
    threshold = float(s) / 4
    return MCEstimate(
        value=p_hat,
        stderr=stderr,
        samples=samples,
        threshold=threshold,
        ok=p_hat >= threshold - 3 * stderr,
    )


# ---------------------------------------------------------------------------
# Feasible parameter lattice
# ---------------------------------------------------------------------------


def feasibility_violations(r: int, s, n: int | None = None, u: int | None = None, k: int | None = None):
    """Violated constraints of the feasible (n, r, s) lattice, empty if none:
    r even, rs integer with 1 <= rs <= r-1, r/2 >= 1, and enough host room
    n >= u*(r-1) + k to seed classes avoiding the witness."""
    problems = []
    s = Fraction(s)
    if r % 2 != 0:
        problems.append(f"r must be even (got {r})")
    if r // 2 - 1 < 0:
        problems.append(f"r/2 - 1 must be >= 0 (got r={r})")
    rs = s * r
    if rs.denominator != 1:
        problems.append(f"rs = r*s must be an integer (got {rs})")
    else:
        rs = int(rs)
        if rs < 1:
            problems.append(f"rs must be >= 1 (got {rs})")
        if r - 1 - rs < 0:
            problems.append(f"r - 1 - rs must be >= 0 (got {r - 1 - rs})")
    if n is not None and u is not None and k is not None:
        minimum = smallest_feasible_n(u, k, r)
        if n < minimum:
            problems.append(f"n must be >= u*(r-1) + k = {minimum} (got {n})")
    return problems


def require_feasible(r: int, s, n: int | None = None, u: int | None = None, k: int | None = None):
    problems = feasibility_violations(r, s, n=n, u=u, k=k)
    if problems:
        raise InfeasibleParameters("; ".join(problems))


def smallest_feasible_n(u: int, k: int, r: int) -> int:
    """Least n for which the setup stage has room: u classes of size r-1
    disjoint from the k witness vertices."""
    return u * (r - 1) + k


def round_parameters(n: int, x, t) -> tuple[int, Fraction]:
    """Round asymptotic targets r = n^x, s = n^-t to the feasible lattice
    (r even, rs integer, s rounded down)."""
    r = 2 * math.ceil(n ** float(x) / 2)
    r = max(2, r)
    rs = max(1, math.floor(r * n ** (-float(t))))
    rs = min(rs, r - 1)
    return r, Fraction(rs, r)
