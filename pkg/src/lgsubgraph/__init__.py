"""Learning-graph complexity toolkit for constant-size subgraph finding.

Builds the staged learning-graph constructions for deciding whether an
n-vertex graph contains a fixed k-vertex pattern, computes their query
exponents exactly, optimizes the free parameters (r, s, lambda), and checks
the combinatorial claims behind the analysis at desk scale: flow
conservation, reweighting bounds, degree types of materialized flow paths,
and the edge-probability estimates.
"""

from .bipartite import BipartiteType, plain_type
from .constructions import (
    ConstructionPlan,
    FlowPath,
    StageSpec,
    WitnessClash,
    audit_flow_path,
    collision_optimum,
    collision_subroutine_specs,
    g1_stage_specs,
    g2_plan,
    materialize_flow_path,
    path_learning_graph,
    quantum_walk_costs,
)
from .costs import CostTerm
from .learning_graph import LearningGraph, NotFlowPreserving, ZeroWeight
from .lemmas import (
    InfeasibleParameters,
    OrbitPartition,
    StagePartition,
    balance_stages,
    check_symmetry_hypotheses,
    check_transitive_action,
    reweight_by_classes,
    simple_stage_bound,
    smallest_feasible_n,
    stage_partition_by_levels,
    uniform_edge_probability,
    uniform_stage_cost,
)
from .optimizer import (
    balance_exponents,
    compare_with_walk,
    g1_exponents,
    g2_exponents,
    numeric_optimize,
    theorem1_total,
    theorem2_total,
    theorem3_exponent,
)
from .patterns import (
    HostGraph,
    K4,
    PATH3,
    PartiteLabel,
    PatternGraph,
    TRIANGLE,
    contains_subgraph,
    find_subgraph,
    is_certificate,
    parse_pattern,
    pattern_from_edges,
)
from .radicals import SqrtSum

__version__ = "0.1.0"
