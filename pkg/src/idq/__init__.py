"""Exact inference on discrete influence diagrams by arc reversal."""
from idq.decision import DecisionProblem, Policy, solve_decision
from idq.diagram import (
    InfluenceDiagram,
    Node,
    ValidationReport,
    direct_predecessors,
    direct_successors,
    other_directed_path_exists,
    topological_order,
    validate,
    weak_predecessors,
    weak_successors,
)
from idq.errors import (
    CycleError,
    DiagramError,
    FormatError,
    IdqError,
    MissingDataError,
    PlanError,
    QueryError,
    TransformError,
)
from idq.query import (
    FunctionTable,
    Plan,
    Query,
    QueryResult,
    attach_function_node,
    execute_plan,
    plan_only,
    solve,
    topology_fingerprint,
)
from idq.requirements import MaximalReport, RequirementReport, maximal, removal_set, requirements
from idq.transforms import (
    TransformStep,
    expect_out,
    is_barren,
    remove_barren,
    remove_node,
    reverse_arc,
)

__version__ = "0.1.0"
