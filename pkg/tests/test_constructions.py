import json
from fractions import Fraction

import pytest

from lgsubgraph.constructions import (
    FlowPath,
    audit_flow_path,
    block_types_after,
    collision_optimum,
    collision_subroutine_specs,
    exact_flow_probability,
    exact_stage_lengths,
    g1_stage_specs,
    g2_plan,
    materialize_flow_path,
    mc_flow_probability,
    path_learning_graph,
    position_condition_probability,
    quantum_walk_costs,
)
from lgsubgraph.costs import CostTerm
from lgsubgraph.lemmas import InfeasibleParameters
from lgsubgraph.patterns import (
    K4,
    PATH3,
    TRIANGLE,
    is_certificate,
    pattern_from_edges,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# stage specs
# ---------------------------------------------------------------------------


def test_g1_triangle_stage_structure():
    plan = g1_stage_specs(TRIANGLE, 3)
    assert len(plan.stages) == 8  # setup + 3 vertex + hiding + 3 edge stages
    assert plan.stages[0].cost == CostTerm(r=2, s=1)  # s r^2
    # stage t cost: s r sqrt(n) (n/r)^((t-1)/2)
    assert plan.stages[1].cost == CostTerm(n=HALF, r=1, s=1)
    assert plan.stages[3].cost == CostTerm(n=Fraction(3, 2), s=1)
    # hiding: r (n/r)^(u/2)
    assert plan.stages[4].cost == CostTerm(n=Fraction(3, 2), r=-HALF)
    # final edge stage: r (n/r)^(3/2) s^-1
    assert plan.stages[7].cost == CostTerm(n=Fraction(3, 2), r=-HALF, s=-1)


def test_g1_partial_prefix():
    plan = g1_stage_specs(TRIANGLE, 2)  # one pattern edge inside H_[1,2]
    assert len(plan.stages) == 5
    assert plan.stages[-1].cost == CostTerm(n=1)  # r (n/r) s^0


def test_g1_edge_stage_costs_collapse_at_s_one():
    plan = g1_stage_specs(K4, 4)
    edge_costs = [spec.cost for spec in plan.stages if spec.stage.startswith("load-edge")]
    values = {term.evaluate(10**6, r=100, s=1) for term in edge_costs}
    assert len(values) == 1  # s^0 makes them all r (n/r)^(u/2)


def test_g1_rejects_empty_prefix():
    lonely = pattern_from_edges(3, [(1, 2), (2, 3)])  # canonical: edge {1,2} then {2,3}
    with pytest.raises(ValueError, match="no edges"):
        g1_stage_specs(lonely, 1)


def test_g2_triangle_final_cost():
    plan = g2_plan(TRIANGLE)
    # s^(-1/2) (n/r) sqrt(n) r^(2/3)
    assert plan.stages[-1].cost == CostTerm(n=Fraction(3, 2), r=Fraction(-1, 3), s=-HALF)
    assert len(plan.stages) == 6  # 5 from the u=2 prefix + collision


def test_g2_k4_final_cost():
    plan = g2_plan(K4)
    assert plan.stages[-1].cost == CostTerm(n=2, r=Fraction(-3, 4), s=Fraction(-3, 2))


def test_g2_star_prefix_edge_count():
    star = pattern_from_edges(4, [(1, 2), (1, 3), (1, 4)])
    plan = g2_plan(star)
    # canonical star has a leaf last: m' = m - d = 2
    assert sum(1 for sp in plan.stages if sp.stage.startswith("load-edge")) == 2


def test_g2_prefix_stages_equal_g1():
    for pattern in (TRIANGLE, K4, PATH3):
        base = g1_stage_specs(pattern, pattern.k - 1)
        combined = g2_plan(pattern)
        assert combined.stages[:-1] == base.stages


def test_plan_json_is_symbolic():
    payload = json.loads(g2_plan(TRIANGLE).to_json())
    assert payload["kind"] == "g2"
    assert payload["stages"][-1]["cost"] == "n^3/2*r^-1/3*s^-1/2"
    assert "leading-order" in payload["note"]


def test_collision_subroutine_costs():
    specs = collision_subroutine_specs(2)
    assert [str(sp.cost) for sp in specs] == [
        "n^1/2*lambda",
        "n^1/2*r^1/2",
        "n^1/2*r*lambda^-1/2",
    ]
    lam_star, cost = collision_optimum(2)
    assert lam_star == CostTerm(r=Fraction(2, 3))
    assert cost == CostTerm(n=HALF, r=Fraction(2, 3))
    # at lambda = lambda* and r = n^(2/3) the subroutine costs n^(17/18):
    # the setup and the last confirmation stage balance, the rest are smaller
    substituted = collision_subroutine_specs(2, lam=lam_star)
    exponents = [sp.cost.exponent_at(Fraction(2, 3), 0) for sp in substituted]
    assert max(exponents) == Fraction(17, 18)
    assert exponents[0] == exponents[-1] == Fraction(17, 18)


def test_collision_degenerate_cases():
    # d = 1: lambda* = sqrt(r), both stages cost sqrt(n r)
    lam_star, cost = collision_optimum(1)
    assert lam_star == CostTerm(r=HALF)
    assert cost == CostTerm(n=HALF, r=HALF)
    specs = collision_subroutine_specs(1, lam=lam_star)
    assert {str(sp.cost) for sp in specs} == {"n^1/2*r^1/2"}
    # lambda = r: every confirmation stage costs sqrt(n r)
    specs_r = collision_subroutine_specs(3, lam=CostTerm(r=1))
    for sp in specs_r[1:]:
        assert sp.cost == CostTerm(n=HALF, r=HALF)


def test_quantum_walk_costs_triangle():
    walk = quantum_walk_costs(TRIANGLE)
    s_exp, u_exp, c_exp = walk.exponents_at(Fraction(3, 5))
    assert (s_exp, u_exp, c_exp) == (Fraction(6, 5), Fraction(13, 10), Fraction(13, 10))


def test_quantum_walk_checking_dominated():
    # at r = n^(1-1/k): S = U = 2-2/k and C < S for every d <= k-1
    for k in range(3, 8):
        edges = [(a, b) for a in range(1, k + 1) for b in range(a + 1, k + 1)]
        pattern = pattern_from_edges(k, edges)  # complete graph: d = k-1
        walk = quantum_walk_costs(pattern)
        x = 1 - Fraction(1, k)
        s_exp, u_exp, c_exp = walk.exponents_at(x)
        assert s_exp == u_exp == 2 - Fraction(2, k)
        assert c_exp < s_exp


# ---------------------------------------------------------------------------
# materialized flow paths
# ---------------------------------------------------------------------------


def test_g1_triangle_path_audits_clean():
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=7)
    assert audit_flow_path(path) == []
    assert exact_stage_lengths(plan, 4, 2) == [12, 4, 4, 4, 6, 1, 1, 1]
    assert len(path.sink.var_set()) == sum(exact_stage_lengths(plan, 4, 2))


def test_g2_triangle_path_audits_clean():
    plan = g2_plan(TRIANGLE)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=7, lam=2)
    assert audit_flow_path(path) == []
    assert exact_stage_lengths(plan, 4, 2, lam=2) == [4, 2, 2, 2, 1, 4, 1, 1]
    # sink holds the prefix edge, the missing vertex and its two links
    sink = path.sink
    assert frozenset((1, 2)) in sink.blocks[(1, 2)]
    assert frozenset((1, 3)) in sink.blocks[(1, 3)]
    assert frozenset((2, 3)) in sink.blocks[(2, 3)]


def test_k4_g2_path_with_retries():
    plan = g2_plan(K4)
    path = materialize_flow_path(plan, 16, 4, HALF, (1, 2, 3, 4), seed=3, lam=1)
    assert audit_flow_path(path) == []
    slots = {tuple(sorted(p)) for p in path.sink.var_set()}
    witness_edges = {(i, j) for i, j in K4.edges}
    assert is_certificate(slots, witness_edges, K4)


def test_dense_blocks_still_validate():
    # rs = r-1 drives the setup blocks to near-complete bipartite graphs
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 14, 4, Fraction(3, 4), (2, 5, 9), seed=11)
    assert audit_flow_path(path) == []


def test_tiny_r2_paths():
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 6, 2, HALF, (1, 2, 3), seed=5)
    assert audit_flow_path(path) == []


def test_path_determinism():
    plan = g1_stage_specs(TRIANGLE, 3)
    a = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=9)
    b = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=9)
    c = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=10)
    assert a.steps == b.steps
    assert a.steps != c.steps


def test_materialize_parameter_validation():
    plan = g1_stage_specs(TRIANGLE, 3)
    with pytest.raises(InfeasibleParameters, match="even"):
        materialize_flow_path(plan, 14, 5, Fraction(2, 5), (1, 2, 3), seed=0)
    with pytest.raises(InfeasibleParameters, match="n must be"):
        materialize_flow_path(plan, 11, 4, HALF, (1, 2, 3), seed=0)
    with pytest.raises(ValueError, match="distinct"):
        materialize_flow_path(plan, 14, 4, HALF, (1, 1, 3), seed=0)
    plan2 = g2_plan(TRIANGLE)
    with pytest.raises(InfeasibleParameters, match="lambda"):
        materialize_flow_path(plan2, 14, 4, HALF, (1, 2, 3), seed=0, lam=3)


def test_block_types_table_consistency():
    # handshake of every declared type at several parameter points
    for r, rs in ((4, 2), (6, 2), (8, 3)):
        for step in range(0, 3 + 3 + 2):
            for btype in block_types_after(TRIANGLE, 3, r, rs, step).values():
                assert btype.edge_count() >= 0


def test_witness_edge_absent_before_load():
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=21)
    hiding_label = path.steps[4].label
    for (i, j) in TRIANGLE.edges:
        assert frozenset((path.witness[i - 1], path.witness[j - 1])) not in hiding_label.blocks[(i, j)]


# ---------------------------------------------------------------------------
# vertex-ratio probabilities
# ---------------------------------------------------------------------------


def test_position_probability_matches_hand_count():
    # stage 1 of the triangle at n=14, r=4: all three witnesses avoid the
    # 9 occupied slots: (5*4*3)/(14*13*12)
    p = position_condition_probability(14, 3, 3, 4, 1)
    assert p == Fraction(5 * 4 * 3, 14 * 13 * 12)
    # stage 3: two witnesses placed (4 ways each), one avoids 11 slots
    p3 = position_condition_probability(14, 3, 3, 4, 3)
    assert p3 == Fraction(16 * 3, 14 * 13 * 12)


def test_position_probability_leading_order():
    # at large n the probability approaches (r/n)^(stage-1)
    n, r = 10**6, 100
    for u, k in ((3, 3), (2, 3)):
        for stage in range(1, u + 2):
            exact = position_condition_probability(n, k, u, r, stage)
            leading = Fraction(r, n) ** (stage - 1)
            assert abs(float(exact) / float(leading) - 1) < 0.01


def _exact_sd(exact: float, samples: int) -> float:
    import math

    return math.sqrt(exact * (1 - exact) / samples)


def test_exact_flow_probability_matches_mc():
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=2)
    for stage in (1, 3, 4, 5, 7):
        exact = float(exact_flow_probability(path, stage))
        estimate = mc_flow_probability(path, stage, 4000, seed=13)
        assert abs(estimate.value - exact) <= 3 * _exact_sd(exact, 4000) + 1e-9


def test_exact_flow_probability_g2():
    plan = g2_plan(TRIANGLE)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=2, lam=2)
    # u = 2: the missing witness vertex must avoid both classes
    p1 = exact_flow_probability(path, 1)
    assert p1 == Fraction(8 * 7 * 6, 14 * 13 * 12)
    estimate = mc_flow_probability(path, 3, 4000, seed=17)
    exact = float(exact_flow_probability(path, 3))
    assert abs(estimate.value - exact) <= 3 * _exact_sd(exact, 4000) + 1e-9


# ---------------------------------------------------------------------------
# paths as explicit learning graphs
# ---------------------------------------------------------------------------


def _certificate_checker(pattern):
    def check(varset, label, witness):
        edges = {
            tuple(sorted((witness[i - 1], witness[j - 1]))) for (i, j) in pattern.edges
        }
        return is_certificate(varset, edges, pattern)

    return check


def test_path_learning_graph_validates():
    plan = g1_stage_specs(TRIANGLE, 3)
    paths = [
        materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=31),
        materialize_flow_path(plan, 14, 4, HALF, (4, 5, 6), seed=32),
    ]
    graph = path_learning_graph(paths)
    assert graph.validate(certificate_checker=_certificate_checker(TRIANGLE)) == []
    levels = graph.levels()
    for y in graph.flows:
        for lev in range(max(levels.values())):
            cut = [e for e in graph.edges() if levels[e[0]] <= lev < levels[e[1]]]
            assert graph.flow_value(cut, y) == 1


def test_g2_path_learning_graph_validates():
    plan = g2_plan(TRIANGLE)
    paths = [
        materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=41, lam=2),
        materialize_flow_path(plan, 14, 4, HALF, (7, 8, 9), seed=42, lam=2),
    ]
    graph = path_learning_graph(paths)
    assert graph.validate(certificate_checker=_certificate_checker(TRIANGLE)) == []


def test_dump_log_mentions_stages():
    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, 14, 4, HALF, (1, 2, 3), seed=51)
    log = path.dump_log()
    assert "stage setup" in log and "stage hiding" in log and "stage load-edge-3" in log
