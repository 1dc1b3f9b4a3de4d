"""Exact counting, uniform sampling and average-sensitivity analysis of
bounded-depth non-redundant boolean decision trees, with closed-form tail
bounds and a reproducible Monte Carlo experiment harness."""

from .bounds import (
    BoundValue,
    TailBreakdown,
    assembled_concentration,
    leaf_depth_tail,
    lipschitz_bound,
    lipschitz_for_min_depth,
    loose_tail,
    mcdiarmid_tail,
    quantum_query_lower_bound,
    speedup_constant,
    typical_sensitivity_tail,
)
from .combinatorics import (
    Model,
    RandomStream,
    assign_uniform_bits,
    count_labeled,
    count_min_depth_shapes,
    count_shapes,
    count_structures,
    label_shape,
    leaf_count_profile,
    sample,
    sample_labeled,
    sample_shape,
    sample_structure,
    uniform_below,
)
from .dyadic import Dyadic
from .harness import (
    EXPERIMENTS,
    ExperimentConfig,
    binomial_sigma,
    config_echo,
    nearest_rank,
    run_experiment,
    run_and_render,
    shallow_leaf_probability,
    verify_report,
)
from .report import (
    SCHEMA,
    ExperimentReport,
    format_float,
    jsonable,
    parse_report,
    render,
    render_csv,
    render_json,
)
from .sensitivity import (
    TruthTable,
    avg_sensitivity_auto,
    avg_sensitivity_bruteforce,
    avg_sensitivity_structural,
    disagreement_probability,
    expected_path_length,
    expected_sensitivity_over_leaves,
    mean_sensitivity_over_assignments,
    truth_table,
)
from .trees import (
    OPEN,
    SHAPE_LEAF,
    DecisionTree,
    Leaf,
    LeafAssignment,
    LeafProfile,
    OpenLeaf,
    Query,
    Shape,
    Structure,
    TreeFormatError,
    assemble,
    complete_shape,
    complete_structure,
    depth,
    disassemble,
    evaluate,
    flip_leaf,
    gated_and_tree,
    leaf_count,
    leaf_depths,
    leaf_profile,
    leaves,
    min_leaf_depth,
    parse,
    serialize,
    shape_of,
    structure_of,
    trace,
    validate,
    variables_of,
)

__version__ = "0.1.0"
