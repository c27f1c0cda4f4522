"""Gridworld path planning: environments, search-trace text, evaluation."""

from .cogmap import (
    ALL_VARIANTS,
    CotVariant,
    CutReason,
    Direction,
    NeighborRecord,
    PlanParseError,
    SearchTrace,
    Verbosity,
    build_search_trace,
    parse_plan,
    render_parts,
    render_target,
    serialize_plan,
    serialize_thought,
)
from .generate import (
    GenParams,
    GenerationError,
    TEST_PARAMS,
    TRAIN_PARAMS,
    generate_environment,
    generate_indexed,
)
from .grid import (
    ACTIONS,
    Action,
    GridSpec,
    MoveKind,
    Position,
    TransitionResult,
    count_simple_paths,
    optimal_path,
    path_states,
    transition,
    valid_actions,
)
from .harness import (
    Agent,
    AgentTransportError,
    BatchReport,
    ConstantAgent,
    DfsAgent,
    EpisodeAborted,
    EpisodeResult,
    OracleAgent,
    Outcome,
    PlansAgent,
    RandomValidAgent,
    evaluate_batch,
    evaluate_optimal,
    load_plans,
    plans_agent_factory,
    run_episode,
    run_reachable,
    scripted_agent_factory,
)
from .prompts import (
    PromptText,
    RULES_TEXT,
    parse_action,
    parse_observation,
    render_instruction,
    render_observation,
)
from .stats import StatsReport, complexity, dataset_stats, export_heatmap

__version__ = "0.1.0"
