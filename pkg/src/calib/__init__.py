"""Joint threshold calibration for ensembles combined by max score.

Given per-classifier scores of positive and negative samples, find one
threshold per classifier so that every positive is scored positively by at
least one classifier while as few negatives as possible are, then compare
that joint operating point against per-classifier calibration baselines.
"""

from .calibrators import (
    AffineParams,
    AssignmentSets,
    CalibrationModel,
    IsotonicParams,
    ShiftParams,
    SigmoidParams,
    apply_map,
    assignment_sets,
    calibrated_matrix,
    calibrated_score,
    ensemble_calibrated_score,
    ensemble_scores,
    fit_affine,
    fit_independent_sigmoid,
    fit_isotonic,
    fit_joint_sigmoid,
    fit_joint_thresholds,
    load_model,
    pava,
    save_model,
    smoothed_targets,
)
from .cover import CoverState
from .errors import (
    CalibError,
    DegenerateVariance,
    DimensionMismatch,
    EmptyJournal,
    EmptyPositives,
    InfeasibleSolution,
    InvalidSpec,
    IoError,
    MonotonicityViolation,
    ParseError,
    TooLarge,
    UnknownClassifier,
    UnreachableRecall,
    ValidationError,
)
from .evaluation import (
    ComparisonReport,
    CurvePoint,
    FpAtRecall,
    MethodRow,
    average_precision,
    compare_methods,
    fp_at_recall,
    pr_curve,
    recall_at_thresholds,
)
from .oracle import OracleResult, oracle_node_count, oracle_solve
from .problem import (
    Problem,
    ROOT_COVERED,
    SearchStats,
    Solution,
    ThresholdConfig,
    check_feasible,
    compute_loss,
    derive_assignment,
    ensemble_score,
    load_problem,
    load_solution,
    save_problem,
    save_solution,
)
from .search import (
    SearchOptions,
    SearchTreeSpec,
    plan_tree,
    redundant_classifiers,
    reduce_depth,
    solve_anytime,
    solve_exact,
)
from .synthgen import CounterRng, GenerateSpec, generate, plant_hardness
from .thresholds import (
    CandidateThresholdSet,
    ClassifierCandidates,
    DifficultyOrder,
    delta,
    difficulty_order,
    extract_candidates,
    tighten_to_cover,
)

__version__ = "0.1.0"
