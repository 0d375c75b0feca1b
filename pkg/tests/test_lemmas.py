import random
from fractions import Fraction

import pytest

from conftest import random_toy_graph
from lgsubgraph.bipartite import slot_probability_by_enumeration
from lgsubgraph.learning_graph import LearningGraph
from lgsubgraph.lemmas import (
    DegenerateStage,
    HypothesisViolation,
    Inconsistent,
    InfeasibleParameters,
    balance_stages,
    check_simple_stage_hypotheses,
    check_symmetry_hypotheses,
    check_transitive_action,
    e_v_arrow,
    feasibility_violations,
    hidden_type,
    require_feasible,
    reweight_by_classes,
    round_parameters,
    simple_stage_bound,
    smallest_feasible_n,
    stage_partition_by_levels,
    uniform_edge_probability,
    uniform_stage_cost,
    verify_class_reweighting,
    verify_simple_stage_bound,
    verify_stage_balance,
)
from lgsubgraph.radicals import SqrtSum


# ---------------------------------------------------------------------------
# stage balancing
# ---------------------------------------------------------------------------


def two_stage_fixture():
    """Stage costs C = 10 and C = 40: 100 parallel edges, then fan-out 16."""
    g = LearningGraph(root="root")
    for i in range(100):
        g.add_vertex(("m", i), varset=frozenset({i}))
        g.add_edge("root", ("m", i), weight=Fraction(1))
        for j in range(16):
            g.add_vertex(("s", i, j), varset=frozenset({i, 1000 + j}))
            g.add_edge(("m", i), ("s", i, j), weight=Fraction(1))
    g.set_flow("y0", {("root", ("m", 0)): 1, (("m", 0), ("s", 0, 0)): 1})
    g.set_flow("y1", {("root", ("m", 3)): 1, (("m", 3), ("s", 3, 9)): 1})
    return g.freeze()


def test_balance_two_stages_bound():
    g = two_stage_fixture()
    partition = stage_partition_by_levels(g)
    assert partition.validate(g) == []
    assert g.complexity_squared(partition.stages[0]) == 100
    assert g.complexity_squared(partition.stages[1]) == 1600
    result = verify_stage_balance(g, partition, exact=True)
    assert result["ok"]
    assert result["reweighted_complexity_sq"] <= SqrtSum.of(2500)


def test_balance_single_stage_keeps_complexity():
    g = LearningGraph(root="root")
    for i in range(5):
        g.add_vertex(i, varset=frozenset({i}))
        g.add_edge("root", i, weight=Fraction(2, 3))
    g.set_flow("y", {("root", 2): 1})
    g.freeze()
    partition = stage_partition_by_levels(g)
    before = g.complexity_squared(g.edges())
    result = verify_stage_balance(g, partition, exact=True)
    assert result["ok"]
    assert result["reweighted_complexity_sq"] == before  # scale covariance


def test_balance_equal_stages_get_equal_c0():
    # both stages are 4 unit edges with unit relative flow: C = 2 each
    g = LearningGraph(root="root")
    for i in range(4):
        g.add_vertex(("m", i), varset=frozenset({i}))
        g.add_edge("root", ("m", i), weight=Fraction(1))
        g.add_vertex(("s", i), varset=frozenset({i, 100 + i}))
        g.add_edge(("m", i), ("s", i), weight=Fraction(1))
    g.set_flow("y", {("root", ("m", 1)): 1, (("m", 1), ("s", 1)): 1})
    g.freeze()
    partition = stage_partition_by_levels(g)
    reweighted, infos = balance_stages(g, partition, exact=True)
    c0s = [reweighted.c0(stage) for stage in partition.stages]
    assert c0s[0] == c0s[1] == SqrtSum.of(2)


def test_balance_rejects_degenerate_stage():
    g = LearningGraph(root="root")
    g.add_vertex("a", varset=frozenset())  # zero-length edge only: C0 = 0
    g.add_edge("root", "a", weight=1)
    g.set_flow("y", {("root", "a"): 1})
    g.freeze()
    with pytest.raises(DegenerateStage):
        balance_stages(g, stage_partition_by_levels(g))


def test_balance_random_toys_exact():
    for seed in range(30):
        graph, _ = random_toy_graph(seed=seed)
        partition = stage_partition_by_levels(graph)
        assert partition.validate(graph) == []
        assert verify_stage_balance(graph, partition, exact=True)["ok"]


# ---------------------------------------------------------------------------
# class reweighting
# ---------------------------------------------------------------------------


def class_fixture():
    """Two classes with alpha = 1/2 each and C(E_1) = 6, C(E_2) = 8."""
    g = LearningGraph(root="root")
    g.add_vertex("v1", varset=frozenset(range(6)))
    g.add_vertex("v2", varset=frozenset(range(100, 108)))
    g.add_edge("root", "v1", weight=Fraction(1))  # length 6: C0=6w, C1=6/w
    g.add_edge("root", "v2", weight=Fraction(1))  # length 8
    for y in ("ya", "yb"):
        g.set_flow(y, {("root", "v1"): Fraction(1, 2), ("root", "v2"): Fraction(1, 2)})
    return g.freeze()


def test_reweight_by_classes_bound():
    # per-class subtrees with alpha = 1/2 each; C(E_a) = 6 and C(E_b) = 8
    # (single unit-weight edge of length l has C^2 = l^2 under full relative flow)
    g2 = LearningGraph(root="root")
    varsets = {"a": frozenset(range(6)), "b": frozenset(range(50, 58))}
    extras = {"a": frozenset(range(100, 106)), "b": frozenset(range(200, 208))}
    for name in ("a", "b"):
        g2.add_vertex(name, varset=varsets[name])
        g2.add_vertex(name + "x", varset=varsets[name] | extras[name])
        g2.add_edge("root", name, weight=1)
        g2.add_edge(name, name + "x", weight=1)
    for y in ("ya", "yb"):
        g2.set_flow(
            y,
            {
                ("root", "a"): Fraction(1, 2),
                ("root", "b"): Fraction(1, 2),
                ("a", "ax"): Fraction(1, 2),
                ("b", "bx"): Fraction(1, 2),
            },
        )
    g2.freeze()
    stage = [("a", "ax"), ("b", "bx")]
    classes = [frozenset({"a"}), frozenset({"b"})]
    result = verify_class_reweighting(g2, stage, classes, exact=True)
    assert result["ok"]
    assert result["max_class_cost_sq"] == 64
    assert result["complexity_sq_reweighted"] <= 64


def test_reweight_single_class_is_scale_covariance():
    g = class_fixture()
    E = g.edges()
    result = verify_class_reweighting(g, E, [frozenset({"root"})], exact=True)
    assert result["ok"]
    assert result["complexity_sq_reweighted"] == g.complexity_squared(E)


def test_reweight_drops_zero_mass_classes():
    g = LearningGraph(root="root")
    for name in ("a", "b", "dead"):
        g.add_vertex(name, varset=frozenset({name}))
        g.add_vertex(name + "x", varset=frozenset({name, name + "x"}))
        g.add_edge("root", name, weight=1)
        g.add_edge(name, name + "x", weight=1)
    for y in ("y0", "y1"):
        g.set_flow(
            y,
            {
                ("root", "a"): Fraction(1, 2),
                ("root", "b"): Fraction(1, 2),
                ("a", "ax"): Fraction(1, 2),
                ("b", "bx"): Fraction(1, 2),
            },
        )
    g.freeze()
    stage = [("a", "ax"), ("b", "bx"), ("dead", "deadx")]
    classes = [frozenset({"a"}), frozenset({"b"}), frozenset({"dead"})]
    reweighted, info = reweight_by_classes(g, stage, classes, exact=True)
    assert info["dropped"] == frozenset({("dead", "deadx")})
    assert ("dead", "deadx") not in reweighted.edges()
    assert verify_class_reweighting(g, stage, classes, exact=True)["ok"]


def test_reweight_rejects_inconsistent_classes():
    # the two flows put their mass on different classes: alpha depends on y
    g2 = LearningGraph(root="root")
    for name in ("a", "b"):
        g2.add_vertex(name, varset=frozenset({name}))
        g2.add_vertex(name + "x", varset=frozenset({name, name + "x"}))
        g2.add_edge("root", name, weight=1)
        g2.add_edge(name, name + "x", weight=1)
    g2.set_flow("y0", {("root", "a"): 1, ("a", "ax"): 1})
    g2.set_flow("y1", {("root", "b"): 1, ("b", "bx"): 1})
    g2.freeze()
    stage = [("a", "ax"), ("b", "bx")]
    with pytest.raises(Inconsistent):
        reweight_by_classes(g2, stage, [frozenset({"a"}), frozenset({"b"})], exact=True)


def test_reweight_random_toys_exact():
    rng = random.Random(2)
    done = 0
    for seed in range(40):
        graph, classes_per_level = random_toy_graph(seed=100 + seed)
        lev = rng.randrange(len(classes_per_level) - 1)
        levels = graph.levels()
        stage = [e for e in graph.edges() if levels[e[0]] == lev]
        result = verify_class_reweighting(graph, stage, classes_per_level[lev], exact=True)
        assert result["ok"]
        done += 1
    assert done == 40


# ---------------------------------------------------------------------------
# stage-cost bounds
# ---------------------------------------------------------------------------


def test_simple_stage_bound_values():
    assert simple_stage_bound(6, Fraction(3, 2), 4, 4, exact=True) == 3
    assert simple_stage_bound(1, 1, 16, 1, exact=True) == 4
    assert simple_stage_bound(1, 1, 5, 1) == pytest.approx(5 ** 0.5)
    with pytest.raises(ValueError):
        simple_stage_bound(1, 1, 3, 0)


def search_fixture(n):
    g = LearningGraph(root="root")
    for i in range(n):
        g.add_vertex(i, varset=frozenset({i}))
        g.add_edge("root", i, weight=Fraction(1))
    for y in range(n):
        g.set_flow(f"y{y}", {("root", y): 1})
    return g.freeze()


@pytest.mark.parametrize("n", [4, 16, 64])
def test_search_fixture_bound_is_sqrt_n(n):
    g = search_fixture(n)
    E = frozenset(g.edges())
    V = ["root"]
    result = verify_simple_stage_bound(g, E, V, exact=True)
    assert result["ok"]
    assert result["bound_sq"] == n  # per-vertex C0 = C1 = ... gives |V|/|W| = 1
    assert g.complexity_squared(E) == n


def test_single_vertex_subtree_bound_equals_complexity():
    g = search_fixture(8)
    E = frozenset(g.edges())
    result = verify_simple_stage_bound(g, E, ["root"], exact=True)
    # |V| = |W_y| = 1: bound collapses to C(v->)
    assert result["size_v"] == result["size_w"] == 1
    assert result["bound_sq"] == g.complexity_squared(E)


def test_hypothesis_violations_reported():
    g = LearningGraph(root="root")
    for name in ("a", "b"):
        g.add_vertex(name, varset=frozenset({name}))
        g.add_edge("root", name, weight=1)
        g.add_vertex(name + "x", varset=frozenset({name, name + "x"}))
        g.add_edge(name, name + "x", weight=1)
    # non-uniform split across W_y: 2/3 and 1/3
    g.set_flow(
        "y",
        {
            ("root", "a"): Fraction(2, 3),
            ("root", "b"): Fraction(1, 3),
            ("a", "ax"): Fraction(2, 3),
            ("b", "bx"): Fraction(1, 3),
        },
    )
    g.freeze()
    stage = [("a", "ax"), ("b", "bx")]
    with pytest.raises(HypothesisViolation) as err:
        check_simple_stage_hypotheses(g, stage, ["a", "b"])
    assert err.value.clause == "3"


def test_e_v_arrow_descendants():
    g = LearningGraph(root="root")
    g.add_vertex("a", varset=frozenset({1}))
    g.add_vertex("b", varset=frozenset({1, 2}))
    g.add_vertex("c", varset=frozenset({1, 2, 3}))
    g.add_edge("root", "a")
    g.add_edge("a", "b")
    g.add_edge("b", "c")
    g.set_flow("y", {("root", "a"): 1, ("a", "b"): 1, ("b", "c"): 1})
    g.freeze()
    E = frozenset(g.edges())
    assert e_v_arrow(g, E, ["a"]) == {("a", "b"), ("b", "c")}
    assert e_v_arrow(g, E, ["root"]) == E


def test_uniform_stage_cost_values():
    assert uniform_stage_cost(1, 3, 3, [1], exact=True).value == 1
    search = uniform_stage_cost(1, 100, 1, [1], exact=True)
    assert search.value * search.value == 100
    with pytest.raises(ValueError):
        uniform_stage_cost(1, 2, 0, [1])
    with pytest.raises(ValueError):
        uniform_stage_cost(1, 1, 2, [1])


def test_uniform_stage_cost_equals_simple_bound_under_substitution():
    # C0(v+) = l*d and C1(v+) = l/g turn the subtree bound into the
    # three-factor formula
    cases = [(1, 4, 1, 16, 4), (2, 6, 3, 9, 3), (3, 10, 2, 25, 5), (1, 8, 8, 7, 7)]
    for length, d, flow_g, size_v, size_w in cases:
        lhs = uniform_stage_cost(length, d, flow_g, [Fraction(size_v, size_w)], exact=True)
        rhs = simple_stage_bound(
            Fraction(length * d), Fraction(length, flow_g), size_v, size_w, exact=True
        )
        assert lhs.value == rhs


# ---------------------------------------------------------------------------
# edge probabilities and the parameter lattice
# ---------------------------------------------------------------------------


def test_plain_probability_is_exactly_s():
    assert uniform_edge_probability(4, Fraction(1, 2), "plain") == Fraction(1, 2)
    assert uniform_edge_probability(4, 1, "plain") == 1
    assert uniform_edge_probability(2, Fraction(1, 2), "plain") == Fraction(1, 2)


def test_plain_probability_matches_enumeration():
    from lgsubgraph.bipartite import plain_type

    for r in (2, 4):
        for rs in range(1, r + 1):
            assert slot_probability_by_enumeration(plain_type(r, rs)) == Fraction(rs, r)


def test_hidden_probability_above_quarter_s():
    estimate = uniform_edge_probability(4, Fraction(1, 2), "hidden", samples=20000, seed=1)
    assert estimate.ok
    exact = slot_probability_by_enumeration(hidden_type(4, 2), marked_degree=3)
    assert exact == Fraction(11, 24)
    assert abs(estimate.value - float(exact)) <= 3 * estimate.stderr
    assert float(exact) >= 0.5 / 4


def test_probability_rejects_bad_parameters():
    with pytest.raises(InfeasibleParameters):
        uniform_edge_probability(3, Fraction(1, 3), "plain")
    with pytest.raises(InfeasibleParameters):
        uniform_edge_probability(4, Fraction(1, 3), "plain")  # rs not integer
    with pytest.raises(InfeasibleParameters):
        uniform_edge_probability(4, 1, "hidden")  # needs rs <= r-1


def test_feasibility_predicate():
    assert feasibility_violations(4, Fraction(1, 2)) == []
    assert any("even" in p for p in feasibility_violations(5, Fraction(2, 5)))
    assert any("integer" in p for p in feasibility_violations(4, Fraction(1, 3)))
    assert any(">= 1" in p for p in feasibility_violations(4, Fraction(0)))
    assert any("r - 1 - rs" in p for p in feasibility_violations(4, 1))
    assert any("n must be" in p for p in feasibility_violations(4, Fraction(1, 2), n=10, u=3, k=3))
    require_feasible(4, Fraction(1, 2), n=12, u=3, k=3)
    with pytest.raises(InfeasibleParameters):
        require_feasible(4, Fraction(1, 2), n=11, u=3, k=3)


def test_smallest_feasible_n_and_rounding():
    assert smallest_feasible_n(3, 3, 4) == 12
    assert smallest_feasible_n(2, 3, 4) == 9
    n = 10**6
    r, s = round_parameters(n, Fraction(2, 3), Fraction(1, 27))
    assert r % 2 == 0
    assert (Fraction(s) * r).denominator == 1
    assert 1 <= s * r <= r - 1
    assert abs(r - n ** (2 / 3)) <= 2
    assert float(s) <= n ** (-1 / 27)
    assert feasibility_violations(r, s) == []


# ---------------------------------------------------------------------------
# symmetry checkers
# ---------------------------------------------------------------------------


def _triangle_path_pair(n=6, seed=3):
    from lgsubgraph.constructions import g1_stage_specs, materialize_flow_path, path_learning_graph
    from lgsubgraph.patterns import TRIANGLE

    plan = g1_stage_specs(TRIANGLE, 3)
    path = materialize_flow_path(plan, n, 2, Fraction(1, 2), (1, 2, 3), seed=seed)
    sigma = {v: v for v in range(1, n + 1)}
    sigma[1], sigma[4] = 4, 1  # transposition moving the witness
    path2 = path.apply_permutation(sigma)
    graph = path_learning_graph([path, path2])
    return graph, sigma, n


def test_transitive_action_found_with_candidate():
    graph, sigma, n = _triangle_path_pair()
    result = check_transitive_action(graph, n, candidates=[sigma])
    assert result.found and not result.inconclusive
    assert result.consistency_ok


def test_transitive_action_found_by_brute_force():
    graph, _, n = _triangle_path_pair(n=6, seed=9)
    result = check_transitive_action(graph, n)
    assert result.found
    assert result.consistency_ok


def test_transitive_action_fails_on_asymmetric_flows():
    from lgsubgraph.patterns import PartiteLabel

    g = LearningGraph(root="root")
    la = PartiteLabel(classes={1: frozenset({1})}, blocks={})
    lb = PartiteLabel(classes={1: frozenset({2}), 2: frozenset({3})}, blocks={})
    g.add_vertex("a", varset=frozenset(), label=la)
    g.add_vertex("b", varset=frozenset(), label=lb)
    g.add_edge("root", "a")
    g.add_edge("root", "b")
    g.set_flow("y0", {("root", "a"): 1})
    g.set_flow("y1", {("root", "b"): 1})
    g.freeze()
    result = check_transitive_action(g, 4)
    # class layouts differ, so no permutation can map one flow onto the other
    assert not result.found and not result.inconclusive


def test_transitive_action_inconclusive_beyond_budget():
    graph, _, n = _triangle_path_pair(n=9, seed=5)
    result = check_transitive_action(graph, 9, max_brute_n=8)
    assert not result.found and result.inconclusive


def test_symmetry_hypotheses_on_path_fixture():
    graph, sigma, n = _triangle_path_pair()
    # classes: pairs of same-level path vertices
    levels = graph.levels()
    by_level: dict = {}
    for v in graph.vertices():
        if v != "root":
            by_level.setdefault(levels[v], set()).add(v)
    classes = [frozenset(group) for _, group in sorted(by_level.items())]
    reports = check_symmetry_hypotheses(graph, classes)
    assert reports and all(r.ok for r in reports)
    assert all(isinstance(r.to_dict(), dict) for r in reports)


def test_symmetry_hypotheses_flag_nonuniform_split():
    g = LearningGraph(root="root")
    for name in ("a", "b"):
        g.add_vertex(name, varset=frozenset({name}))
        g.add_edge("root", name, weight=1)
    g.set_flow("y", {("root", "a"): Fraction(2, 3), ("root", "b"): Fraction(1, 3)})
    g.freeze()
    reports = check_symmetry_hypotheses(g, [frozenset({"a", "b"})])
    bad = [r for r in reports if not r.ok]
    assert any(r.clause == "1:uniform-split" for r in bad)
