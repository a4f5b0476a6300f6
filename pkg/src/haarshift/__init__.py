"""haarshift: exact dyadic combinatorics, Haar rearrangement numerics,
supporting trees, and the homogeneous colouring game."""

from .colour_game import (
    AdversaryScript,
    CapExceeded,
    ColouredCollection,
    DefectError,
    EngineTimeout,
    GameState,
    HomogeneityVerdict,
    PrevisibilityVerdict,
    StrategyInapplicable,
    adversary_instance,
    apply_move_A,
    brute_force_extensions,
    check_homogeneous,
    check_previsible,
    engine_turn,
    new_game,
    player_b_extend,
    round_robin,
)
from .dyadic_core import (
    MAX_LEVEL,
    DomainError,
    DyadicInterval,
    IncompleteFamilyError,
    NestedFamily,
    PointSet,
    Rearrangement,
    SupportCertificate,
    SupportRecord,
    level_intervals,
    make_interval,
    pointset_measure,
    q_collection,
    union_of,
    verify_dyadic_tree,
    verify_supporting_tree,
)
from .haar_numerics import (
    BlockedReport,
    GridFunction,
    HaarCoefficients,
    NormReport,
    RestrictedReport,
    TrendReport,
    apply_rearrangement,
    blocked_equivalence_report,
    estimate_norm,
    figiel_shift,
    figiel_trend,
    haar_analyze,
    haar_synthesize,
    lp_norm,
    restricted_isomorphism_report,
    square_function,
)
from .shift_analysis import (
    Decomposition,
    DecompositionResult,
    LevelSelection,
    ShiftSequence,
    compute_Nj,
    extract_decomposition,
    is_decomposable,
    n_profile,
    select_levels,
    semenov_constant,
    shift_map,
    shifted_q_measure,
)
from .service_cli import (
    SessionStore,
    create_app,
    norm_report,
    replay_events,
    shift_report,
    testing_diagnostics,
    tree_report_payload,
)
from .tree_builder import (
    LevelTranslation,
    SplitPlan,
    TreePiece,
    TreeReport,
    TreeStage,
    build_supporting_tree,
    horizontal_split,
    phi,
    psi,
    split_exclusion_violations,
    tree_report_to_wire,
)

__all__ = [
    "AdversaryScript",
    "CapExceeded",
    "ColouredCollection",
    "DefectError",
    "EngineTimeout",
    "GameState",
    "HomogeneityVerdict",
    "PrevisibilityVerdict",
    "StrategyInapplicable",
    "adversary_instance",
    "apply_move_A",
    "brute_force_extensions",
    "check_homogeneous",
    "check_previsible",
    "engine_turn",
    "new_game",
    "player_b_extend",
    "round_robin",
    "BlockedReport",
    "GridFunction",
    "HaarCoefficients",
    "NormReport",
    "RestrictedReport",
    "TrendReport",
    "apply_rearrangement",
    "blocked_equivalence_report",
    "estimate_norm",
    "figiel_shift",
    "figiel_trend",
    "haar_analyze",
    "haar_synthesize",
    "lp_norm",
    "restricted_isomorphism_report",
    "square_function",
    "Decomposition",
    "DecompositionResult",
    "LevelSelection",
    "ShiftSequence",
    "compute_Nj",
    "extract_decomposition",
    "is_decomposable",
    "n_profile",
    "select_levels",
    "semenov_constant",
    "shift_map",
    "shifted_q_measure",
    "SessionStore",
    "create_app",
    "norm_report",
    "replay_events",
    "shift_report",
    "testing_diagnostics",
    "tree_report_payload",
    "LevelTranslation",
    "SplitPlan",
    "TreePiece",
    "TreeReport",
    "TreeStage",
    "build_supporting_tree",
    "horizontal_split",
    "phi",
    "psi",
    "split_exclusion_violations",
    "tree_report_to_wire",
    "MAX_LEVEL",
    "DomainError",
    "DyadicInterval",
    "IncompleteFamilyError",
    "NestedFamily",
    "PointSet",
    "Rearrangement",
    "SupportCertificate",
    "SupportRecord",
    "level_intervals",
    "make_interval",
    "pointset_measure",
    "q_collection",
    "union_of",
    "verify_dyadic_tree",
    "verify_supporting_tree",
]
