"""The main loop: discrete ticks, day boundaries, snapshots, trajectory log.

Each tick senses inbound messages, keeps the behavior inventory planned
and valid, executes the active behavior when its duration elapses, runs
the safety and feedback pipeline over pending user text, and decides
whether to speak. Crossing simulated midnight additionally summarizes the
finished day, rests the state toward baseline, and grows familiarity.

Everything that can vary is derived from named RNG streams plus the
config, so a (config, seed, user script) triple fully determines the
trajectory log bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import behavior as bh
from . import dynamics, interaction, memory as mem, safety as sf
from .errors import ConfigError, EmptyPoolError, SnapshotCorruptError, SnapshotVersionError
from .randomness import StreamBundle
from .state import (
    Diagnostics,
    EmotionalState,
    PersonalityProfile,
    ToneLabelSet,
    init_state,
    load_profile,
    tone_labels,
)

SECONDS_PER_DAY = 86400.0
SNAPSHOT_SCHEMA_VERSION = 2

EVENT_TYPES = (
    "plan",
    "execute",
    "replan",
    "rest",
    "message_in",
    "message_out",
    "safety",
    "summary",
)

_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_POOL_PATH = _DATA_DIR / "pool.json"
DEFAULT_PERSONA_DIR = _DATA_DIR / "personas"
DEFAULT_LEXICON_PATH = _DATA_DIR / "lexicon.json"
DEFAULT_CALENDAR_PATH = _DATA_DIR / "calendar.json"


@dataclass
class EngineConfig:
    """Every tunable named by the runtime, overridable from one file."""

    tick_minutes: int = 15
    planning_horizon: int = 3
    replanning_threshold: float = 0.15
    softmax_temperature: float = 1.0
    logistic_steepness: float = 8.0
    normalized_dot: bool = True
    behavior_duration_ticks: int = 4
    rest: dynamics.RestConfig = field(default_factory=dynamics.RestConfig)
    familiarity_eta: float = 0.1
    proactive_p_base: float = 0.3
    proactive_idle_min_minutes: float = 240.0
    feedback_valence_gain: float = 0.2
    like_valence_gain: float = 0.05
    timeline_post_probability: float = 0.5
    prompt_max_chars: int = 8000
    memory_budget: int = 4
    gap_floor_seconds: float = 60.0
    familiarity_stranger_max: float = 0.2
    familiarity_close_min: float = 0.6
    redundancy_window_seconds: Optional[float] = None  # None = current simulated day
    nickname: str = "friend"
    generator: str = "scripted"
    generator_url: str = ""
    generator_model: str = "default"
    classifier_count: int = 3
    classifier_timeout_seconds: float = 2.0
    emoji_map: dict[str, str] = field(
        default_factory=lambda: dict(interaction.DEFAULT_EMOJI_MAP)
    )
    sim_start_time: float = 0.0
    rng_seed: int = 42
    debug: bool = False
    pool_path: str = str(DEFAULT_POOL_PATH)
    persona_path: str = str(DEFAULT_PERSONA_DIR / "default.json")
    lexicon_path: str = str(DEFAULT_LEXICON_PATH)
    calendar_path: str = str(DEFAULT_CALENDAR_PATH)
    data_dir: str = "."
    service_tick_wall_seconds: float = 0.0
    heartbeat_seconds: float = 30.0
    session_idle_persist_seconds: float = 300.0

    def __post_init__(self):
        if self.planning_horizon != 3:
            raise ConfigError("planning_horizon is fixed at 3")
        if not 0 < self.tick_minutes <= 1440:
            raise ConfigError("tick_minutes must be in (0, 1440]")
        self.rest.validate()

    @property
    def tick_seconds(self) -> float:
        return self.tick_minutes * 60.0

    def to_dict(self) -> dict[str, Any]:
        d = {
            "tick_minutes": self.tick_minutes,
            "planning_horizon": self.planning_horizon,
            "replanning_threshold": self.replanning_threshold,
            "softmax_temperature": self.softmax_temperature,
            "logistic_steepness": self.logistic_steepness,
            "normalized_dot": self.normalized_dot,
            "behavior_duration_ticks": self.behavior_duration_ticks,
            "rest": self.rest.to_dict(),
            "familiarity_eta": self.familiarity_eta,
            "proactive_p_base": self.proactive_p_base,
            "proactive_idle_min_minutes": self.proactive_idle_min_minutes,
            "feedback_valence_gain": self.feedback_valence_gain,
            "like_valence_gain": self.like_valence_gain,
            "timeline_post_probability": self.timeline_post_probability,
            "prompt_max_chars": self.prompt_max_chars,
            "memory_budget": self.memory_budget,
            "gap_floor_seconds": self.gap_floor_seconds,
            "familiarity_stranger_max": self.familiarity_stranger_max,
            "familiarity_close_min": self.familiarity_close_min,
            "redundancy_window_seconds": self.redundancy_window_seconds,
            "nickname": self.nickname,
            "generator": self.generator,
            "generator_url": self.generator_url,
            "generator_model": self.generator_model,
            "classifier_count": self.classifier_count,
            "classifier_timeout_seconds": self.classifier_timeout_seconds,
            "emoji_map": dict(self.emoji_map),
            "sim_start_time": self.sim_start_time,
            "rng_seed": self.rng_seed,
            "debug": self.debug,
            "pool_path": self.pool_path,
            "persona_path": self.persona_path,
            "lexicon_path": self.lexicon_path,
            "calendar_path": self.calendar_path,
            "data_dir": self.data_dir,
            "service_tick_wall_seconds": self.service_tick_wall_seconds,
            "heartbeat_seconds": self.heartbeat_seconds,
            "session_idle_persist_seconds": self.session_idle_persist_seconds,
        }
        return d

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EngineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(d)
        if "rest" in kwargs:
            kwargs["rest"] = dynamics.RestConfig.from_dict(kwargs["rest"])
        try:
            return cls(**kwargs)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}", path=str(p))
        if p.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib

            raw = tomllib.loads(p.read_text("utf-8"))
        else:
            try:
                raw = json.loads(p.read_text("utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {p}: {exc}", path=str(p))
        return cls.from_dict(raw)

    def check_paths(self) -> None:
        for name in ("pool_path", "persona_path", "lexicon_path", "calendar_path"):
            value = getattr(self, name)
            if not Path(value).exists():
                raise ConfigError(f"{name} does not exist: {value}", path=value)


@dataclass
class TrajectoryRecord:
    tick: int
    sim_time: float
    energy: float
    valence: float
    arousal: float
    familiarity: float
    present_behavior_id: Optional[str]
    event: str
    payload: dict[str, Any]

    def to_json(self) -> str:
        # Fixed key order keeps the log bit-stable for diffing.
        d = {
            "tick": self.tick,
            "sim_time": self.sim_time,
            "energy": self.energy,
            "valence": self.valence,
            "arousal": self.arousal,
            "familiarity": self.familiarity,
            "present_behavior_id": self.present_behavior_id,
            "event": self.event,
            "payload": self.payload,
        }
        return json.dumps(d, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "TrajectoryRecord":
        d = json.loads(line)
        return cls(**d)


@dataclass
class TimelinePost:
    id: int
    sim_time: float
    text: str
    behavior_id: str
    reactions: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "sim_time": self.sim_time,
            "text": self.text,
            "behavior_id": self.behavior_id,
            "reactions": list(self.reactions),
        }


class Engine:
    """One agent session's single-writer loop."""

    def __init__(
        self,
        config: EngineConfig,
        profile: Optional[PersonalityProfile] = None,
        pool: Optional[bh.BehaviorPool] = None,
        generator: Optional[interaction.TextGenerator] = None,
        lexicon: Optional[sf.KeywordLexicon] = None,
    ):
        self.config = config
        self.pool = pool or bh.load_pool(
            Path(config.pool_path).read_bytes(), config.behavior_duration_ticks
        )
        self.lexicon = lexicon or sf.KeywordLexicon.load(config.lexicon_path)
        self.profile = profile or load_profile(Path(config.persona_path).read_bytes())
        self.holidays = self._load_holidays(config.calendar_path)
        self.generator = generator or self._make_generator(config)
        self.sentiment = interaction.LexiconSentimentStub()
        self.classifiers = sf.make_stub_classifiers(self.lexicon, config.classifier_count)
        self.diagnostics = Diagnostics()
        self.streams = StreamBundle(config.rng_seed)

        self.state = init_state(self.profile, config.sim_start_time)
        self.inventory = bh.BehaviorInventory()
        self.memory = mem.MemoryStore()
        self.state.memory_ref = self.memory

        self.tick = 0
        self.present_started_tick: Optional[int] = None
        self.inbound: list[dict[str, Any]] = []
        self.last_interaction_at = config.sim_start_time
        self.last_feedback: Optional[interaction.FeedbackFeatures] = None
        self.timeline: list[TimelinePost] = []
        self._timeline_counter = 0
        self.event_seq = 0
        self.outbox: list[dict[str, Any]] = []
        self._last_tone = tone_labels(self.state.physio)
        self._last_rollover_day: Optional[int] = None
        self.log_messages: list[str] = []
        self.last_prompt = ""

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _load_holidays(path: str | Path) -> dict[str, str]:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"calendar file not found: {p}", path=str(p))
        raw = json.loads(p.read_text("utf-8"))
        return {str(k): str(v) for k, v in raw.get("holidays", {}).items()}

    @staticmethod
    def _make_generator(config: EngineConfig) -> interaction.TextGenerator:
        if config.generator == "remote":
            return interaction.RemoteGenerator(
                url=config.generator_url or None, model=config.generator_model
            )
        return interaction.ScriptedGenerator(seed=config.rng_seed)

    def _log(self, message: str) -> None:
        self.log_messages.append(message)

    # -- clock ----------------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.config.sim_start_time + self.tick * self.config.tick_seconds

    @staticmethod
    def day_of(t: float) -> int:
        return int(math.floor(t / SECONDS_PER_DAY))

    # -- inbound --------------------------------------------------------------

    def enqueue_message(self, text: str, at: Optional[float] = None,
                        sentiment_hint: Optional[float] = None) -> None:
        self.inbound.append(
            {
                "kind": "message",
                "at": self.sim_time if at is None else at,
                "text": text,
                "sentiment_hint": sentiment_hint,
            }
        )

    def enqueue_reaction(self, kind: str = "like", at: Optional[float] = None,
                         post_id: Optional[int] = None) -> None:
        self.inbound.append(
            {
                "kind": "reaction",
                "at": self.sim_time if at is None else at,
                "reaction": kind,
                "post_id": post_id,
            }
        )

    # -- events ---------------------------------------------------------------

    def _emit(self, event_type: str, data: dict[str, Any]) -> None:
        self.event_seq += 1
        self.outbox.append({"seq": self.event_seq, "type": event_type, **data})

    def _record(
        self,
        records: list[TrajectoryRecord],
        event: str,
        payload: dict[str, Any],
    ) -> None:
        records.append(
            TrajectoryRecord(
                tick=self.tick,
                sim_time=self.sim_time,
                energy=self.state.physio.energy,
                valence=self.state.physio.valence,
                arousal=self.state.physio.arousal,
                familiarity=self.state.familiarity,
                present_behavior_id=(
                    self.inventory.present.behavior.id if self.inventory.present else None
                ),
                event=event,
                payload=payload,
            )
        )

    # -- day rollover ----------------------------------------------------------

    def _rollover(self, finished_day: int, records: list[TrajectoryRecord]) -> None:
        day_turns = self.memory.turns_for_day(finished_day)
        clusters = mem.cluster_dialogs(day_turns, self.diagnostics, self.config.gap_floor_seconds)
        lo, hi = finished_day * SECONDS_PER_DAY, (finished_day + 1) * SECONDS_PER_DAY
        executed = [
            p.scored.behavior.label
            for p in self.inventory.past
            if p.executed and lo <= p.executed_at < hi
        ]
        if not self.memory.has_summary(finished_day):
            summary = mem.summarize_day(
                clusters,
                executed,
                self.generator,
                day=finished_day,
                diagnostics=self.diagnostics,
                log=self._log,
            )
            mem.update_memory(self.memory, summary)
            self._record(
                records,
                "summary",
                {
                    "day": finished_day,
                    "clusters": summary.clusters_covered,
                    "facts": summary.salient_facts,
                },
            )
        self.state = dynamics.nightly_rest(self.state, self.config.rest, self.diagnostics)
        self._record(
            records,
            "rest",
            {"day": finished_day, "baseline": self.config.rest.baseline.to_dict()},
        )
        active = any(t.speaker == "user" for t in day_turns)
        self.state = dynamics.update_familiarity(
            self.state, active, self.config.familiarity_eta
        )

    # -- planning -------------------------------------------------------------

    def _rescore_future(self) -> list[bh.ScoredBehavior]:
        rescored = [
            bh.score_behavior(f.behavior, self.state, self.config.logistic_steepness)
            for f in self.inventory.future
        ]
        self.inventory.future = rescored
        eligible = [c for c in rescored if c.score > bh.INELIGIBLE_SCORE]
        return bh.filter_redundant(
            eligible,
            self.inventory.past,
            self.sim_time,
            self.config.redundancy_window_seconds,
        )

    def _plan(self, records: list[TrajectoryRecord], event: str) -> None:
        try:
            bh.plan_future(
                self.pool,
                self.state,
                self.inventory,
                self.config.logistic_steepness,
                self.config.planning_horizon,
                self.config.redundancy_window_seconds,
            )
            planned = [f.behavior.id for f in self.inventory.future]
            payload = {"action": "refill", "planned": planned}
        except EmptyPoolError:
            # Nothing executable: nap until energy returns.
            scored = bh.ScoredBehavior(
                behavior=bh.REST_FALLBACK,
                score=0.0,
                expected_delta=(
                    bh.REST_FALLBACK.bio_consumption,
                    bh.REST_FALLBACK.valence_effect,
                    bh.REST_FALLBACK.arousal_effect,
                ),
            )
            self.inventory.present = scored
            payload = {"action": "rest_fallback", "planned": [bh.REST_FALLBACK.id]}
        self.present_started_tick = self.tick
        self._record(records, event, payload)

    def _plan_or_select(self, records: list[TrajectoryRecord]) -> None:
        if self.inventory.present is not None:
            valid = bh.present_valid(
                self.inventory.present,
                self.state,
                self.config.replanning_threshold,
                self.config.logistic_steepness,
            )
            if valid:
                return
            # Present no longer fits the state: displace it and replan now.
            self._plan(records, "replan")
            return
        if not self.inventory.future:
            self._plan(records, "plan")
            return
        eligible = self._rescore_future()
        if not eligible:
            self._plan(records, "plan")
            return
        chosen = bh.select_present(
            self.inventory,
            eligible,
            self.streams["selection"],
            self.config.softmax_temperature,
        )
        self.present_started_tick = self.tick
        self._record(
            records,
            "plan",
            {"action": "promote", "selected": chosen.behavior.id},
        )

    # -- execution ------------------------------------------------------------

    def _execute(self, records: list[TrajectoryRecord]) -> None:
        present = self.inventory.present
        if present is None:
            return
        started = self.present_started_tick if self.present_started_tick is not None else self.tick
        elapsed = self.tick - started + 1
        if elapsed < present.behavior.duration_ticks:
            self._record(
                records,
                "execute",
                {
                    "status": "in_progress",
                    "behavior": present.behavior.id,
                    "remaining_ticks": present.behavior.duration_ticks - elapsed,
                },
            )
            return
        outcome = 0.5 + 0.5 * self.streams["outcome"].uniform()
        self.state = dynamics.apply_behavior_effects(
            self.state, present, outcome, self.diagnostics
        )
        self.inventory.past.append(
            bh.PastEntry(
                scored=present,
                executed_at=self.sim_time,
                outcome_quality=outcome,
                executed=True,
            )
        )
        payload: dict[str, Any] = {
            "status": "completed",
            "behavior": present.behavior.id,
            "category": present.behavior.category,
            "outcome_quality": outcome,
        }
        if present.behavior.category in ("leisure", "social"):
            if self.streams["timeline"].uniform() < self.config.timeline_post_probability:
                post = self._post_timeline(present)
                payload["timeline_post_id"] = post.id
        bh.consume_present(self.inventory)
        self.present_started_tick = None
        self._record(records, "execute", payload)

    def _post_timeline(self, scored: bh.ScoredBehavior) -> TimelinePost:
        self._timeline_counter += 1
        prompt = (
            f"[timeline] Write one short, first-person life update about: "
            f"{scored.behavior.label}."
        )
        try:
            text = self.generator.generate(prompt, max_length=200)
        except Exception:
            self.diagnostics.generator_failures += 1
            text = f"Today I {scored.behavior.label}."
        post = TimelinePost(
            id=self._timeline_counter,
            sim_time=self.sim_time,
            text=text,
            behavior_id=scored.behavior.id,
        )
        self.timeline.append(post)
        self._emit("timeline_post", {"post": post.to_dict()})
        return post

    # -- conversation ----------------------------------------------------------

    def _sense(self, records: list[TrajectoryRecord]) -> list[tuple[mem.DialogTurn, float]]:
        now = self.sim_time
        due = [e for e in self.inbound if e["at"] <= now]
        self.inbound = [e for e in self.inbound if e["at"] > now]
        pending: list[tuple[mem.DialogTurn, float]] = []
        for event in due:
            if event["kind"] == "message":
                turn = mem.DialogTurn(
                    at=event["at"],
                    speaker="user",
                    text=event["text"],
                    sentiment_hint=event.get("sentiment_hint"),
                )
                gap = max(0.0, turn.at - self.last_interaction_at)
                self.memory.append_turn(turn)
                self.last_interaction_at = turn.at
                pending.append((turn, gap))
                self._record(records, "message_in", {"text": turn.text})
            elif event["kind"] == "reaction":
                turn = mem.DialogTurn(
                    at=event["at"], speaker="user", text="", reaction=event.get("reaction", "like")
                )
                gap = max(0.0, turn.at - self.last_interaction_at)
                self.last_interaction_at = turn.at
                pending.append((turn, gap))
                self._record(records, "message_in", {"reaction": turn.reaction})
        return pending

    def _respond(
        self,
        records: list[TrajectoryRecord],
        intent: interaction.InteractionIntent,
        assessment: sf.SafetyAssessment,
        feedback: Optional[interaction.FeedbackFeatures],
    ) -> None:
        snippets = mem.retrieve_context(self.memory, self.sim_time, self.config.memory_budget)
        tail_turns = [t for t in self.memory.turns[-6:] if t.text]
        tail = "\n".join(f"{t.speaker}: {t.text}" for t in tail_turns)
        if intent.mode == interaction.MODE_PROACTIVE:
            tail += "\n(You are starting this conversation yourself.)"
        bundle = interaction.compose_prompt(
            character=interaction.build_character_prompt(
                self.profile,
                self.config.nickname,
                self.state.familiarity,
                self.config.familiarity_stranger_max,
                self.config.familiarity_close_min,
            ),
            state=interaction.build_state_prompt(self.state, feedback),
            memory_context=snippets.items,
            real_world_context=interaction.real_world_context(self.sim_time, self.holidays),
            safety_constraints=assessment.constraints_prompt,
            rules=sf.dialog_rules(),
            conversation_tail=tail,
            max_chars=self.config.prompt_max_chars,
        )
        self.last_prompt = bundle.rendered
        message = interaction.generate_response(
            bundle,
            self.generator,
            assessment,
            intent.strategy,
            self.state,
            self.lexicon,
            self.config.emoji_map,
            log=self._log,
        )
        if message.degraded:
            self.diagnostics.generator_failures += 1
        agent_turn = mem.DialogTurn(at=self.sim_time, speaker="agent", text=message.text)
        self.memory.append_turn(agent_turn)
        self.last_interaction_at = self.sim_time
        self._record(
            records,
            "message_out",
            {
                "mode": intent.mode,
                "strategy": message.strategy,
                "risk": message.risk.label,
                "emoji_tag": message.emoji_tag,
                "text": message.text,
            },
        )
        self._emit(
            "agent_message",
            {"text": message.text, "emoji_tag": message.emoji_tag, "mode": intent.mode},
        )

    # -- the tick -------------------------------------------------------------

    def step(self) -> list[TrajectoryRecord]:
        """Run one tick and return its trajectory records."""
        records: list[TrajectoryRecord] = []
        now = self.sim_time
        self.state.sim_time = now

        if self.tick > 0:
            prev_day = self.day_of(now - self.config.tick_seconds)
            if self.day_of(now) > prev_day and self._last_rollover_day != prev_day:
                self._rollover(prev_day, records)
                self._last_rollover_day = prev_day

        pending = self._sense(records)
        self._plan_or_select(records)
        self._execute(records)

        assessment = sf.SafetyAssessment(level=sf.RiskLevel.NONE)
        feedback: Optional[interaction.FeedbackFeatures] = None
        if pending:
            last_turn, gap = pending[-1]
            if last_turn.text:
                assessment = sf.assess(
                    last_turn.text,
                    self.classifiers,
                    self.lexicon,
                    self.config.classifier_timeout_seconds,
                    log=self._log,
                )
                self._record(
                    records,
                    "safety",
                    {
                        "level": assessment.level.label,
                        "keywords": assessment.triggered_keywords,
                        "actions": sorted(assessment.actions),
                    },
                )
            feedback = interaction.extract_feedback(
                last_turn,
                self.sentiment,
                risk=assessment.level,
                seconds_since_last_turn=gap,
                log=self._log,
            )
            self.last_feedback = feedback
            # Conversation acts on mood like a small pseudo-behavior.
            gain = (
                self.config.like_valence_gain
                if "like" in feedback.explicit_signals and not last_turn.text
                else self.config.feedback_valence_gain * feedback.sentiment_valence
            )
            if gain:
                pseudo = bh.ScoredBehavior(
                    behavior=bh.BehaviorSpec(
                        id="_conversation",
                        label="conversation",
                        category="emotional",
                        bio_require=0.0,
                        bio_consumption=0.0,
                        valence_effect=max(-1.0, min(1.0, gain)),
                        arousal_effect=0.0,
                    ),
                    score=0.0,
                    expected_delta=(0.0, gain, 0.0),
                )
                self.state = dynamics.apply_behavior_effects(
                    self.state, pseudo, 1.0, self.diagnostics
                )

        has_text_pending = bool(pending and pending[-1][0].text)
        intent = interaction.decide_intent(
            self.state,
            idle_seconds=now - self.last_interaction_at,
            feedback=feedback,
            rng_stream=self.streams["proactive"],
            pending_user_turn=has_text_pending,
            p_base=self.config.proactive_p_base,
            idle_min_seconds=self.config.proactive_idle_min_minutes * 60.0,
        )
        if intent is not None:
            self._respond(records, intent, assessment, feedback)

        tone = tone_labels(self.state.physio)
        if tone != self._last_tone:
            self._emit(
                "state_change",
                {
                    "tone_labels": {
                        "energy": tone.energy,
                        "valence": tone.valence,
                        "arousal": tone.arousal,
                    }
                },
            )
            self._last_tone = tone
        self.tick += 1
        return records

    def run(self, until_sim_time: float) -> list[TrajectoryRecord]:
        """Step until the simulated clock reaches the target time."""
        if until_sim_time <= self.sim_time:
            raise ValueError("until must lie in the simulated future")
        all_records: list[TrajectoryRecord] = []
        while self.sim_time < until_sim_time:
            all_records.extend(self.step())
        return all_records

    def replace_persona(
        self, character_notes: str, motivation: "Any"
    ) -> None:
        """Hot-swap the personality baseline.

        Physio, familiarity, and memory survive: the relationship outlives
        a persona tweak, only the configured G baseline changes.
        """
        new_profile = PersonalityProfile(
            name=self.profile.name,
            baseline_motivation=motivation,
            character_notes=character_notes,
            baseline_physio=self.profile.baseline_physio,
        )
        new_profile.validate()
        self.profile = new_profile
        self.state.personality = new_profile
        self.state.motivation = motivation

    # -- snapshots ------------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        body = {
            "schema_version": SNAPSHOT_SCHEMA_VERSION,
            "config_hash": self.config.config_hash(),
            "tick": self.tick,
            "state": self.state.to_dict(),
            "inventory": self.inventory.to_dict(),
            "memory": self.memory.to_dict(),
            "rng": self.streams.get_state(),
            "diagnostics": self.diagnostics.to_dict(),
            "present_started_tick": self.present_started_tick,
            "inbound": list(self.inbound),
            "last_interaction_at": self.last_interaction_at,
            "last_feedback": self.last_feedback.to_dict() if self.last_feedback else None,
            "timeline": [p.to_dict() for p in self.timeline],
            "timeline_counter": self._timeline_counter,
            "event_seq": self.event_seq,
            "last_rollover_day": self._last_rollover_day,
            "last_tone": {
                "energy": self._last_tone.energy,
                "valence": self._last_tone.valence,
                "arousal": self._last_tone.arousal,
            },
        }
        checksum = hashlib.sha256(
            json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
        ).hexdigest()
        return {"checksum": checksum, "body": body}

    def save_snapshot(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.snapshot(), indent=1), encoding="utf-8")

    @classmethod
    def load_snapshot(
        cls,
        path: str | Path,
        config: EngineConfig,
        generator: Optional[interaction.TextGenerator] = None,
    ) -> "Engine":
        """Rebuild an engine mid-run; resumed ticks match the unbroken run."""
        raw = json.loads(Path(path).read_text("utf-8"))
        body = raw.get("body", {})
        checksum = hashlib.sha256(
            json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
        ).hexdigest()
        if checksum != raw.get("checksum"):
            raise SnapshotCorruptError(f"snapshot checksum mismatch: {path}")
        version = body.get("schema_version")
        notes: list[str] = []
        if version != SNAPSHOT_SCHEMA_VERSION:
            body, notes = _migrate_snapshot(body, version)
        if body.get("config_hash") != config.config_hash():
            raise ConfigError("snapshot was produced under a different config")

        engine = cls(config, generator=generator)
        engine.log_messages.extend(notes)
        engine.tick = int(body["tick"])
        engine.state = EmotionalState.from_dict(body["state"])
        engine.state.memory_ref = None
        engine.inventory = bh.BehaviorInventory.from_dict(body["inventory"])
        engine.memory = mem.MemoryStore.from_dict(body["memory"])
        engine.state.memory_ref = engine.memory
        engine.streams.set_state(body["rng"])
        engine.diagnostics = Diagnostics.from_dict(body["diagnostics"])
        engine.present_started_tick = body["present_started_tick"]
        engine.inbound = list(body["inbound"])
        engine.last_interaction_at = float(body["last_interaction_at"])
        engine.timeline = [
            TimelinePost(
                id=p["id"],
                sim_time=p["sim_time"],
                text=p["text"],
                behavior_id=p["behavior_id"],
                reactions=list(p.get("reactions", [])),
            )
            for p in body["timeline"]
        ]
        engine._timeline_counter = int(body["timeline_counter"])
        engine.event_seq = int(body["event_seq"])
        engine._last_rollover_day = body["last_rollover_day"]
        engine._last_tone = ToneLabelSet(**body["last_tone"])
        engine.profile = engine.state.personality
        return engine


def _migrate_snapshot(body: dict[str, Any], version: Any) -> tuple[dict[str, Any], list[str]]:
    if version == 1:
        migrated = dict(body)
        migrated.setdefault("diagnostics", Diagnostics().to_dict())
        migrated["schema_version"] = 2
        return migrated, ["migrated snapshot schema 1 -> 2 (filled diagnostics)"]
    raise SnapshotVersionError(f"unsupported snapshot schema_version: {version}")


def write_trajectory(records: list[TrajectoryRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(r.to_json())
            f.write("\n")
