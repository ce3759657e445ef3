"""Feedback extraction, interaction intent, prompt assembly, text generation.

The prompt fed to the generator is an ordered bundle: character identity,
state tone, memory context, real-world context, safety constraints,
dialog rules, conversation tail. Numeric state never appears verbatim in
a prompt; only the discrete tone labels do, which is the whole point of
the state-to-text modulation.
"""

from __future__ import annotations

import datetime
import hashlib
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol, Sequence

from .errors import GeneratorUnavailableError, MissingRulesError
from .memory import DialogTurn
from .safety import (
    REFERRAL_TEMPLATE,
    RiskLevel,
    SafetyAssessment,
    keyword_screen,
)
from .state import EmotionalState, PersonalityProfile, ToneLabelSet, tone_labels

GENERATOR_URL_ENV = "CTEM_GENERATOR_URL"
GENERATOR_KEY_ENV = "CTEM_GENERATOR_KEY"

PROMPT_MAX_CHARS = 8000
PROACTIVE_P_BASE = 0.3
PROACTIVE_IDLE_MIN_SECONDS = 4 * 3600.0

STRANGER_BAND_MAX = 0.2
CLOSE_BAND_MIN = 0.6

ENGAGEMENT_LENGTH_NORM = 280.0
ENGAGEMENT_SILENCE_NORM = 3600.0

EMOJI_TAGS = (
    "good_night",
    "companionship",
    "emo",
    "happy",
    "scared",
    "angry",
    "finger_heart",
    "sad",
)

# (valence band, arousal band) -> tag. Overridable via engine config.
DEFAULT_EMOJI_MAP = {
    "positive/excited": "happy",
    "positive/moderate": "finger_heart",
    "positive/calm": "companionship",
    "neutral/excited": "companionship",
    "neutral/moderate": "companionship",
    "neutral/calm": "good_night",
    "low/excited": "scared",
    "low/moderate": "emo",
    "low/calm": "sad",
}

STOCK_REPLY = (
    "Mrr... my words got tangled just now. I'm still right here with you, "
    "tell me more in a moment?"
)

MODE_PROACTIVE = "proactive"
MODE_REACTIVE = "reactive"

STRATEGY_ACTIVE_LISTENING = "active_listening"
STRATEGY_DEEP_DIALOGUE = "deep_dialogue"
STRATEGY_PLAYFUL = "playful"
STRATEGY_NEUTRAL = "neutral"

CONFUSION_MARKERS = ("don't understand", "dont understand", "what do you mean")
DISMISSAL_MARKERS = ("leave me alone", "go away", "stop texting", "whatever")

# Tiny signed lexicon for the scripted sentiment stub.
POSITIVE_WORDS = frozenset(
    "great good happy love awesome nice fun glad excited wonderful amazing yay".split()
)
NEGATIVE_WORDS = frozenset(
    "bad sad awful hate terrible angry upset tired lonely cry stressed horrible".split()
)


@dataclass
class FeedbackFeatures:
    explicit_signals: set[str] = field(default_factory=set)
    sentiment_valence: float = 0.0
    sentiment_arousal: float = 0.0
    engagement: float = 0.0
    risk: RiskLevel = RiskLevel.NONE

    def to_dict(self) -> dict[str, Any]:
        return {
            "explicit_signals": sorted(self.explicit_signals),
            "sentiment_valence": self.sentiment_valence,
            "sentiment_arousal": self.sentiment_arousal,
            "engagement": self.engagement,
            "risk": self.risk.label,
        }


@dataclass(frozen=True)
class InteractionIntent:
    mode: str
    style: ToneLabelSet
    strategy: str


class SentimentClassifier(Protocol):
    def classify(self, text: str) -> tuple[float, float]:
        """Return (valence in [-1,1], arousal in [0,1])."""


class LexiconSentimentStub:
    """Sign-counting sentiment: (positives - negatives) / matches."""

    def classify(self, text: str) -> tuple[float, float]:
        words = [w.strip(".,!?").lower() for w in text.split()]
        pos = sum(1 for w in words if w in POSITIVE_WORDS)
        neg = sum(1 for w in words if w in NEGATIVE_WORDS)
        valence = (pos - neg) / (pos + neg) if pos + neg else 0.0
        arousal = min(1.0, 0.3 + 0.15 * text.count("!") + (0.2 if text.isupper() and text else 0.0))
        return valence, arousal


def extract_feedback(
    turn: DialogTurn,
    classifier: SentimentClassifier,
    risk: RiskLevel = RiskLevel.NONE,
    seconds_since_last_turn: float = 0.0,
    log: Optional[Callable[[str], None]] = None,
) -> FeedbackFeatures:
    """Condense one user turn into the unified feedback representation.

    Explicit signals come from surface markers (UI reactions, confusion
    or dismissal phrasing); sentiment from the classifier (or the turn's
    scripted hint); engagement blends message length with how quickly the
    user came back.
    """
    signals: set[str] = set()
    if turn.reaction == "like":
        signals.add("like")
    low = turn.text.lower()
    if turn.text.count("?") >= 2 or any(m in low for m in CONFUSION_MARKERS):
        signals.add("confusion")
    if any(m in low for m in DISMISSAL_MARKERS):
        signals.add("dismissal")

    try:
        valence, arousal = classifier.classify(turn.text)
    except Exception:
        valence, arousal = 0.0, 0.0
        if log is not None:
            log("sentiment classifier failed; defaulting to neutral")
    if turn.sentiment_hint is not None:
        valence = max(-1.0, min(1.0, float(turn.sentiment_hint)))

    length_part = min(1.0, len(turn.text) / ENGAGEMENT_LENGTH_NORM)
    recency_part = max(0.0, 1.0 - seconds_since_last_turn / ENGAGEMENT_SILENCE_NORM)
    engagement = 0.5 * length_part + 0.5 * recency_part

    return FeedbackFeatures(
        explicit_signals=signals,
        sentiment_valence=valence,
        sentiment_arousal=max(0.0, min(1.0, arousal)),
        engagement=engagement,
        risk=risk,
    )


def choose_strategy(
    state: EmotionalState, feedback: Optional[FeedbackFeatures]
) -> str:
    """Interaction strategy from risk and both parties' moods.

    Distress (risk or negative user sentiment) always wins and forces
    active listening; a clearly positive user invites deeper dialogue; a
    cheerful agent with a neutral user gets playful; otherwise neutral.
    """
    if feedback is not None:
        if feedback.risk >= RiskLevel.MEDIUM or feedback.sentiment_valence < -0.3:
            return STRATEGY_ACTIVE_LISTENING
        if feedback.sentiment_valence > 0.3:
            return STRATEGY_DEEP_DIALOGUE
    if state.physio.valence > 0.3:
        return STRATEGY_PLAYFUL
    return STRATEGY_NEUTRAL


def decide_intent(
    state: EmotionalState,
    idle_seconds: float,
    feedback: Optional[FeedbackFeatures],
    rng_stream,
    pending_user_turn: bool = False,
    p_base: float = PROACTIVE_P_BASE,
    idle_min_seconds: float = PROACTIVE_IDLE_MIN_SECONDS,
) -> Optional[InteractionIntent]:
    """Decide whether and how to speak this tick.

    An unanswered user turn always produces a reactive intent. Otherwise
    the agent may initiate, gated multiplicatively by familiarity (a
    stranger never gets pinged) and modulated by arousal, once idle time
    passes the minimum. Returns None when staying quiet.
    """
    style = tone_labels(state.physio)
    if pending_user_turn:
        return InteractionIntent(
            mode=MODE_REACTIVE, style=style, strategy=choose_strategy(state, feedback)
        )
    if idle_seconds <= idle_min_seconds or state.familiarity <= 0.0:
        return None
    p = p_base * state.familiarity * (0.5 + 0.5 * state.physio.arousal)
    if rng_stream.uniform() < p:
        return InteractionIntent(
            mode=MODE_PROACTIVE, style=style, strategy=choose_strategy(state, None)
        )
    return None


def familiarity_band(
    familiarity: float,
    stranger_max: float = STRANGER_BAND_MAX,
    close_min: float = CLOSE_BAND_MIN,
) -> str:
    if familiarity < stranger_max:
        return "stranger"
    if familiarity < close_min:
        return "acquaintance"
    return "close"


def build_character_prompt(
    profile: PersonalityProfile,
    nickname: str,
    familiarity: float,
    stranger_max: float = STRANGER_BAND_MAX,
    close_min: float = CLOSE_BAND_MIN,
) -> str:
    """Fixed identity block: who Auri is, how it speaks, who it speaks to."""
    lines = [
        "You are Auri, a small companion creature with a soft, pet-like look: "
        "round, fluffy, clearly not human.",
        "You live alongside your person through ordinary days: naps, snacks, "
        "small adventures, and conversation.",
    ]
    if profile.character_notes:
        lines.append(f"Your manner: {profile.character_notes}")
    lines.append(f"You call the user {nickname}.")
    lines.append(
        f"Your relationship so far: {familiarity_band(familiarity, stranger_max, close_min)}."
    )
    return "\n".join(lines)


_TONE_SENTENCES = {
    "tired": "You are tired and a little slow; keep replies short and soft.",
    "steady": "Your energy is steady.",
    "energetic": "You are energetic and lively.",
    "low": "Your mood is low; you speak quietly and honestly about it.",
    "neutral": "Your mood is even.",
    "positive": "Your mood is bright and warm.",
    "calm": "You feel calm.",
    "moderate": "You feel present and attentive.",
    "excited": "You feel excited, almost bouncy.",
}

_STRATEGY_SENTENCES = {
    STRATEGY_ACTIVE_LISTENING: (
        "Right now, listen first: reflect the user's feelings, ask gentle "
        "questions, and do not rush to fix anything."
    ),
    STRATEGY_DEEP_DIALOGUE: (
        "The user is in good spirits: go deeper, ask about meaning and plans, "
        "share your own small reflections."
    ),
    STRATEGY_PLAYFUL: (
        "Keep it light and playful: small jokes, warmth, an invitation to smile."
    ),
    STRATEGY_NEUTRAL: "Keep an easy, friendly conversational tone.",
}


def build_state_prompt(
    state: EmotionalState, feedback: Optional[FeedbackFeatures] = None
) -> str:
    """Render the adapted personality: tone labels plus the strategy line.

    Text only; the raw numbers stay inside the engine.
    """
    labels = tone_labels(state.physio)
    strategy = choose_strategy(state, feedback)
    lines = [
        _TONE_SENTENCES[labels.energy],
        _TONE_SENTENCES[labels.valence],
        _TONE_SENTENCES[labels.arousal],
        _STRATEGY_SENTENCES[strategy],
    ]
    return "\n".join(lines)


SECTION_ORDER = (
    "character",
    "state",
    "memory_context",
    "real_world_context",
    "safety_constraints",
    "dialog_rules",
    "conversation_tail",
)


@dataclass
class PromptBundle:
    sections: dict[str, str]
    rendered: str


def _delimit(name: str, body: str) -> str:
    return f"[[section:{name}]]\n{body}"


def compose_prompt(
    character: str,
    state: str,
    memory_context: Sequence[str],
    real_world_context: str,
    safety_constraints: str,
    rules: str,
    conversation_tail: str,
    max_chars: int = PROMPT_MAX_CHARS,
) -> PromptBundle:
    """Assemble the ordered, delimited prompt bundle.

    Section order is fixed; the safety section appears only when there is
    a constraint to apply; dialog rules are mandatory. Oversized prompts
    shed memory context oldest-first until they fit the cap.

    Raises:
        MissingRulesError: empty dialog rules section.
    """
    if not rules:
        raise MissingRulesError("dialog_rules section is required")

    memory_items = list(memory_context)

    def render(items: Sequence[str]) -> tuple[dict[str, str], str]:
        sections = {
            "character": character,
            "state": state,
            "memory_context": "\n".join(items),
            "real_world_context": real_world_context,
            "safety_constraints": safety_constraints,
            "dialog_rules": rules,
            "conversation_tail": conversation_tail,
        }
        parts = []
        for name in SECTION_ORDER:
            if name == "safety_constraints" and not sections[name]:
                continue
            parts.append(_delimit(name, sections[name]))
        return sections, "\n\n".join(parts)

    sections, rendered = render(memory_items)
    while len(rendered) > max_chars and memory_items:
        memory_items.pop(0)
        sections, rendered = render(memory_items)
    return PromptBundle(sections=sections, rendered=rendered)


class TextGenerator(Protocol):
    def generate(self, prompt: str, max_length: int) -> str: ...


class ScriptedGenerator:
    """Deterministic stand-in for a hosted model.

    Output is a pure function of (prompt hash, seed): summary prompts echo
    their embedded digest, chat prompts pick from canned reply shapes.
    """

    _REPLY_SHAPES = (
        "Mm, I hear you. {tail}",
        "Oh! Tell me more about that. {tail}",
        "I was just thinking about you. {tail}",
        "That stays with me. {tail}",
        "Hehe, noted in my little diary. {tail}",
    )

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _digest(self, prompt: str) -> int:
        payload = f"{self.seed}:{prompt}".encode("utf-8")
        return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")

    def generate(self, prompt: str, max_length: int) -> str:
        from .memory import CLUSTER_SUMMARY_DIRECTIVE, DAY_MERGE_DIRECTIVE

        for directive in (CLUSTER_SUMMARY_DIRECTIVE, DAY_MERGE_DIRECTIVE):
            if prompt.startswith(directive):
                body = prompt.split("\n", 1)
                return body[1] if len(body) > 1 else ""
        digest = self._digest(prompt)
        shape = self._REPLY_SHAPES[digest % len(self._REPLY_SHAPES)]
        tail_options = (
            "How is your day treating you?",
            "I'm right here.",
            "We can take it slow.",
            "Want to hear what I did today?",
        )
        text = shape.format(tail=tail_options[(digest // 7) % len(tail_options)])
        return text[:max_length]


class RemoteGenerator:
    """JSON-over-HTTP chat-completion client for hosted generators.

    Endpoint and key come from CTEM_GENERATOR_URL / CTEM_GENERATOR_KEY
    unless given explicitly.
    """

    def __init__(
        self,
        url: Optional[str] = None,
        api_key: Optional[str] = None,
        model: str = "default",
        timeout: float = 30.0,
    ):
        self.url = url or os.environ.get(GENERATOR_URL_ENV, "")
        self.api_key = api_key or os.environ.get(GENERATOR_KEY_ENV, "")
        self.model = model
        self.timeout = timeout
        if not self.url:
            raise GeneratorUnavailableError(
                f"remote generator needs {GENERATOR_URL_ENV} or an explicit url"
            )

    def generate(self, prompt: str, max_length: int) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": max_length,
        }
        try:
            response = httpx.post(self.url, headers=headers, json=body, timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
            return str(data["choices"][0]["message"]["content"])
        except Exception as exc:
            raise GeneratorUnavailableError(f"remote generator failed: {exc}") from exc


@dataclass
class AgentMessage:
    text: str
    strategy: str
    risk: RiskLevel
    emoji_tag: Optional[str] = None
    degraded: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "strategy": self.strategy,
            "risk": self.risk.label,
            "emoji_tag": self.emoji_tag,
            "degraded": self.degraded,
        }


def emoji_tag_for(
    state: EmotionalState, emoji_map: Optional[dict[str, str]] = None
) -> Optional[str]:
    labels = tone_labels(state.physio)
    table = emoji_map or DEFAULT_EMOJI_MAP
    return table.get(f"{labels.valence}/{labels.arousal}")


def generate_response(
    bundle: PromptBundle,
    generator: TextGenerator,
    safety: SafetyAssessment,
    strategy: str,
    state: EmotionalState,
    lexicon,
    emoji_map: Optional[dict[str, str]] = None,
    max_length: int = 600,
    log: Optional[Callable[[str], None]] = None,
) -> AgentMessage:
    """Produce the outgoing message under the safety policy.

    Medium/high risk prepends the de-escalation and referral text and
    suppresses playfulness. Generated text is screened against the
    lexicon; one regeneration is attempted, then the stock reply ships.
    A dead generator also falls back to the stock reply, never silence.
    """
    if safety.level >= RiskLevel.MEDIUM and strategy == STRATEGY_PLAYFUL:
        strategy = STRATEGY_ACTIVE_LISTENING

    degraded = False
    try:
        text = generator.generate(bundle.rendered, max_length)
    except Exception:
        degraded = True
        text = STOCK_REPLY
        if log is not None:
            log("generator unavailable; stock reply used")

    if not degraded:
        level, _ = keyword_screen(text, lexicon)
        if level > RiskLevel.NONE:
            try:
                text = generator.generate(bundle.rendered + "\n[[retry:safe]]", max_length)
            except Exception:
                text = STOCK_REPLY
                degraded = True
            if not degraded:
                level, _ = keyword_screen(text, lexicon)
                if level > RiskLevel.NONE:
                    text = STOCK_REPLY

    if safety.level >= RiskLevel.MEDIUM:
        text = f"{REFERRAL_TEMPLATE}\n{text}"

    return AgentMessage(
        text=text,
        strategy=strategy,
        risk=safety.level,
        emoji_tag=emoji_tag_for(state, emoji_map),
        degraded=degraded,
    )


def real_world_context(
    sim_time: float, holidays: Optional[dict[str, str]] = None
) -> str:
    """Simulated clock rendered for the prompt, plus any holiday tag."""
    dt = datetime.datetime.fromtimestamp(sim_time, tz=datetime.timezone.utc)
    line = f"It is {dt.strftime('%A %H:%M')} on day {dt.strftime('%Y-%m-%d')} (simulated)."
    if holidays:
        tag = holidays.get(dt.strftime("%m-%d"))
        if tag:
            line += f" Today is {tag}."
    return line
