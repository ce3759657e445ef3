"""Companion-agent runtime: evolving emotional state drives behavior and talk."""

from .behavior import (
    BehaviorInventory,
    BehaviorPool,
    BehaviorSpec,
    ScoredBehavior,
    filter_redundant,
    load_pool,
    modulation_weight,
    plan_future,
    present_valid,
    score_behavior,
    select_present,
)
from .dynamics import RestConfig, apply_behavior_effects, nightly_rest, update_familiarity
from .engine import Engine, EngineConfig, TrajectoryRecord
from .interaction import (
    FeedbackFeatures,
    InteractionIntent,
    PromptBundle,
    ScriptedGenerator,
    build_character_prompt,
    build_state_prompt,
    compose_prompt,
    decide_intent,
    extract_feedback,
    generate_response,
)
from .memory import (
    DialogCluster,
    DialogTurn,
    EpisodicSummary,
    MemoryStore,
    cluster_dialogs,
    retrieve_context,
    summarize_day,
    update_memory,
)
from .safety import (
    KeywordLexicon,
    RiskLevel,
    SafetyAssessment,
    assess,
    consensus,
    dialog_rules,
    keyword_screen,
)
from .simulate import ScriptRunner, UserScript
from .state import (
    EmotionalState,
    MotivationalVector,
    PersonalityProfile,
    PhysioEmotionalState,
    ToneLabelSet,
    clamp_physio,
    init_state,
    tone_labels,
)

__version__ = "0.1.0"
