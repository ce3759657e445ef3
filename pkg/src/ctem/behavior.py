"""Behavior pool, score function, and the Past/Present/Future inventory.

Scoring blends two alignment terms between the agent's motivational
drives and a candidate behavior's 12-dim embedding: a biological term and
a psychological+social term, mixed by a logistic weight on physical
energy. Low energy tilts selection toward biological needs; high energy
frees attention for psychological and social pursuits.

Arithmetic is deliberately plain Python, summed left to right: score
ordering is verified bitwise against an independent re-evaluation, which
only works if no library reorders the sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .errors import EmptyPoolError, NoCandidatesError, ParseError, ValidationError
from .state import (
    BIO_DIMS,
    EmotionalState,
    MotivationalVector,
)

CATEGORIES = ("physiological", "work", "leisure", "social", "emotional")

LOGISTIC_STEEPNESS = 8.0
SOFTMAX_TEMPERATURE = 1.0
REPLANNING_THRESHOLD = 0.15
PLANNING_HORIZON = 3
DEFAULT_DURATION_TICKS = 4

INELIGIBLE_SCORE = -1.0

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class BehaviorSpec:
    """One candidate action: energy contract, affect deltas, drive embedding."""

    id: str
    label: str
    category: str
    bio_require: float = 0.1
    bio_consumption: float = -0.1
    valence_effect: float = 0.0
    arousal_effect: float = 0.0
    embedding: MotivationalVector = field(default_factory=MotivationalVector)
    restorative: bool = False
    duration_ticks: int = DEFAULT_DURATION_TICKS

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("behavior id must be non-empty", field="id")
        if self.category not in CATEGORIES:
            raise ValidationError(
                f"behavior {self.id}: unknown category {self.category!r}",
                field=f"{self.id}.category",
            )
        for name, value, lo, hi in (
            ("bio_require", self.bio_require, 0.0, 1.0),
            ("bio_consumption", self.bio_consumption, -1.0, 1.0),
            ("valence_effect", self.valence_effect, -1.0, 1.0),
            ("arousal_effect", self.arousal_effect, -1.0, 1.0),
        ):
            if math.isnan(value) or not lo <= value <= hi:
                raise ValidationError(
                    f"behavior {self.id}: {name}={value} out of [{lo},{hi}]",
                    field=f"{self.id}.{name}",
                )
        if self.duration_ticks < 1:
            raise ValidationError(
                f"behavior {self.id}: duration_ticks must be >= 1",
                field=f"{self.id}.duration_ticks",
            )
        try:
            self.embedding.validate()
        except Exception as exc:
            raise ValidationError(
                f"behavior {self.id}: {exc}", field=f"{self.id}.embedding"
            ) from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label,
            "category": self.category,
            "bio_require": self.bio_require,
            "bio_consumption": self.bio_consumption,
            "valence_effect": self.valence_effect,
            "arousal_effect": self.arousal_effect,
            "restorative": self.restorative,
            "duration_ticks": self.duration_ticks,
            "embedding": self.embedding.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BehaviorSpec":
        allowed = {
            "id",
            "label",
            "category",
            "bio_require",
            "bio_consumption",
            "valence_effect",
            "arousal_effect",
            "restorative",
            "duration_ticks",
            "embedding",
        }
        unknown = set(d) - allowed
        if unknown:
            raise ValidationError(
                f"unknown behavior keys: {sorted(unknown)}", field=sorted(unknown)[0]
            )
        spec = cls(
            id=str(d.get("id", "")),
            label=str(d.get("label", d.get("id", ""))),
            category=str(d.get("category", "")),
            bio_require=float(d.get("bio_require", 0.1)),
            bio_consumption=float(d.get("bio_consumption", -0.1)),
            valence_effect=float(d.get("valence_effect", 0.0)),
            arousal_effect=float(d.get("arousal_effect", 0.0)),
            embedding=MotivationalVector.from_dict(d["embedding"]),
            restorative=bool(d.get("restorative", False)),
            duration_ticks=int(d.get("duration_ticks", DEFAULT_DURATION_TICKS)),
        )
        spec.validate()
        return spec


@dataclass(frozen=True)
class BehaviorPool:
    """Immutable, shareable set of candidate behaviors with unique ids."""

    behaviors: tuple[BehaviorSpec, ...]

    def __iter__(self):
        return iter(self.behaviors)

    def __len__(self) -> int:
        return len(self.behaviors)

    def get(self, behavior_id: str) -> Optional[BehaviorSpec]:
        for b in self.behaviors:
            if b.id == behavior_id:
                return b
        return None


def load_pool(document: bytes, default_duration_ticks: int = DEFAULT_DURATION_TICKS) -> BehaviorPool:
    """Parse and validate a behavior pool JSON document.

    Entries without an explicit duration get ``default_duration_ticks``.

    Raises:
        ParseError: document is not valid JSON or lacks the behaviors list.
        ValidationError: duplicate ids or out-of-range fields, naming the field.
    """
    try:
        raw = json.loads(document.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"pool document is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("behaviors"), list):
        raise ParseError("pool document must be an object with a behaviors list")
    behaviors = []
    seen: set[str] = set()
    for entry in raw["behaviors"]:
        if isinstance(entry, dict) and "duration_ticks" not in entry:
            entry = {**entry, "duration_ticks": default_duration_ticks}
        spec = BehaviorSpec.from_dict(entry)
        if spec.id in seen:
            raise ValidationError(f"duplicate behavior id: {spec.id}", field=spec.id)
        seen.add(spec.id)
        behaviors.append(spec)
    return BehaviorPool(behaviors=tuple(behaviors))


# Built-in fallback when every pool behavior is energy-ineligible: the agent
# always has a nap available.
REST_FALLBACK = BehaviorSpec(
    id="rest.fallback_nap",
    label="curl up for a nap",
    category="physiological",
    bio_require=0.0,
    bio_consumption=0.35,
    valence_effect=0.05,
    arousal_effect=-0.2,
    embedding=MotivationalVector(
        physiological_drive=1.0,
        pain_avoidance=0.6,
        health_preservation=0.9,
        emotional_reactivity=0.1,
        risk_aversion=0.3,
        goal_persistence=0.0,
        curiosity_drive=0.0,
        norm_adherence=0.1,
        prosocial_motivation=0.0,
        self_presentation=0.0,
        role_duty_sense=0.0,
        group_affiliation=0.0,
    ),
    restorative=True,
    duration_ticks=2,
)


@dataclass(frozen=True)
class ScoredBehavior:
    """A behavior with its score and expected state delta at scoring time."""

    behavior: BehaviorSpec
    score: float
    expected_delta: tuple[float, float, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "behavior": self.behavior.to_dict(),
            "score": self.score,
            "expected_delta": list(self.expected_delta),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoredBehavior":
        return cls(
            behavior=BehaviorSpec.from_dict(d["behavior"]),
            score=float(d["score"]),
            expected_delta=tuple(float(x) for x in d["expected_delta"]),
        )


@dataclass
class PastEntry:
    """An executed (or displaced, when ``executed`` is False) behavior."""

    scored: ScoredBehavior
    executed_at: float
    outcome_quality: float
    executed: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "scored": self.scored.to_dict(),
            "executed_at": self.executed_at,
            "outcome_quality": self.outcome_quality,
            "executed": self.executed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PastEntry":
        return cls(
            scored=ScoredBehavior.from_dict(d["scored"]),
            executed_at=float(d["executed_at"]),
            outcome_quality=float(d["outcome_quality"]),
            executed=bool(d.get("executed", True)),
        )


@dataclass
class BehaviorInventory:
    """Executed history, the active behavior, and up to 3 planned ones."""

    past: list[PastEntry] = field(default_factory=list)
    present: Optional[ScoredBehavior] = None
    future: list[ScoredBehavior] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "past": [p.to_dict() for p in self.past],
            "present": self.present.to_dict() if self.present else None,
            "future": [f.to_dict() for f in self.future],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BehaviorInventory":
        return cls(
            past=[PastEntry.from_dict(p) for p in d["past"]],
            present=ScoredBehavior.from_dict(d["present"]) if d["present"] else None,
            future=[ScoredBehavior.from_dict(f) for f in d["future"]],
        )


def logistic(x: float, steepness: float = LOGISTIC_STEEPNESS) -> float:
    return 1.0 / (1.0 + math.exp(-steepness * (x - 0.5)))


def modulation_weight(energy: float, steepness: float = LOGISTIC_STEEPNESS) -> float:
    """Energy-to-weight mapping w = 1 - logistic(energy), centered at 0.5.

    Strictly decreasing in energy, w(0.5) = 0.5. A raw logistic over [0,1]
    would pin w inside [0.27, 0.5]; the shifted, steepened form lets low
    energy actually dominate the biological term.
    """
    return 1.0 - logistic(energy, steepness)


def ndot(x: Sequence[float], y: Sequence[float]) -> float:
    """Mean of elementwise products, summed left to right.

    Keeps each score term in [0, 1] so the modulation weight mixes two
    comparable quantities. The explicit loop pins the arithmetic order.
    """
    total = 0.0
    for a, b in zip(x, y):
        total += a * b
    return total / len(x)


def score_behavior(
    b: BehaviorSpec,
    state: EmotionalState,
    steepness: float = LOGISTIC_STEEPNESS,
) -> ScoredBehavior:
    """Score one behavior against the current state.

    Behaviors whose energy requirement exceeds the agent's current energy
    get the ineligible sentinel score -1 and are excluded before sampling.
    """
    delta = (b.bio_consumption, b.valence_effect, b.arousal_effect)
    if state.physio.energy < b.bio_require:
        return ScoredBehavior(behavior=b, score=INELIGIBLE_SCORE, expected_delta=delta)
    w = modulation_weight(state.physio.energy, steepness)
    bio_term = ndot(state.motivation.bio(), b.embedding.bio())
    psycho_social_term = ndot(
        state.motivation.psycho() + state.motivation.social(),
        b.embedding.psycho() + b.embedding.social(),
    )
    score = w * bio_term + (1.0 - w) * psycho_social_term
    return ScoredBehavior(behavior=b, score=score, expected_delta=delta)


def filter_redundant(
    candidates: list[ScoredBehavior],
    past: Iterable[PastEntry],
    now: float,
    window_seconds: Optional[float] = None,
) -> list[ScoredBehavior]:
    """Drop candidates already executed inside the trailing window.

    Default window is the current simulated day: an entry executed at any
    time today blocks re-selection, yesterday's do not. Order preserved.
    """
    if window_seconds is None:
        day_start = math.floor(now / SECONDS_PER_DAY) * SECONDS_PER_DAY
        recent_ids = {p.scored.behavior.id for p in past if p.executed_at >= day_start}
    else:
        recent_ids = {p.scored.behavior.id for p in past if now - p.executed_at <= window_seconds}
    return [c for c in candidates if c.behavior.id not in recent_ids]


def rank_candidates(candidates: list[ScoredBehavior]) -> list[ScoredBehavior]:
    # Deterministic replay requires a total order: ties break on behavior id.
    return sorted(candidates, key=lambda c: (-c.score, c.behavior.id))


def plan_future(
    pool: BehaviorPool,
    state: EmotionalState,
    inventory: BehaviorInventory,
    steepness: float = LOGISTIC_STEEPNESS,
    horizon: int = PLANNING_HORIZON,
    redundancy_window_seconds: Optional[float] = None,
) -> BehaviorInventory:
    """Refill the future queue with the top-scored eligible behaviors.

    Candidates are scored at the current state, redundancy-filtered
    against today's history, ranked (ties by behavior id), and the top
    ``horizon`` become the new future. The present is promoted from the
    head of that future; a displaced, unexecuted present is appended to
    past first, so every behavior ever set as present lands in past
    exactly once.

    Raises:
        EmptyPoolError: no behavior is energy-eligible at all. Callers
            schedule a rest behavior instead.
    """
    if inventory.present is not None:
        inventory.past.append(
            PastEntry(
                scored=inventory.present,
                executed_at=state.sim_time,
                outcome_quality=0.0,
                executed=False,
            )
        )
        inventory.present = None

    eligible = [
        sb
        for sb in (score_behavior(b, state, steepness) for b in pool)
        if sb.score > INELIGIBLE_SCORE
    ]
    if not eligible:
        raise EmptyPoolError(
            f"no behavior eligible at energy {state.physio.energy:.3f}"
        )
    fresh = filter_redundant(
        eligible, inventory.past, state.sim_time, redundancy_window_seconds
    )
    if not fresh:
        # Everything eligible already ran today; repeating beats stalling.
        fresh = eligible
    ranked = rank_candidates(fresh)
    inventory.future = ranked[:horizon]
    inventory.present = inventory.future[0]
    return inventory


def consume_present(inventory: BehaviorInventory) -> None:
    """Drop the finished present from the head of the future queue."""
    present = inventory.present
    if present is None:
        return
    inventory.future = [
        f for f in inventory.future if f.behavior.id != present.behavior.id
    ]
    inventory.present = None


def softmax_probabilities(scores: Sequence[float], temperature: float = SOFTMAX_TEMPERATURE) -> list[float]:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    peak = max(scores)
    exps = [math.exp((s - peak) / temperature) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def select_present(
    inventory: BehaviorInventory,
    candidates: list[ScoredBehavior],
    rng_stream,
    temperature: float = SOFTMAX_TEMPERATURE,
) -> ScoredBehavior:
    """Sample one behavior with probability softmax(score / temperature).

    Consumes exactly one value from the named random stream so replay
    stays stable when other streams gain consumers. The chosen behavior
    becomes present; if it sat in the future queue it is removed there.

    Raises:
        NoCandidatesError: empty candidate list.
    """
    if not candidates:
        raise NoCandidatesError("select_present needs at least one candidate")
    probs = softmax_probabilities([c.score for c in candidates], temperature)
    u = float(rng_stream.uniform())
    cumulative = 0.0
    chosen = candidates[-1]
    for c, p in zip(candidates, probs):
        cumulative += p
        if u < cumulative:
            chosen = c
            break
    inventory.future = [f for f in inventory.future if f.behavior.id != chosen.behavior.id]
    inventory.present = chosen
    return chosen


def present_valid(
    present: ScoredBehavior,
    state: EmotionalState,
    threshold: float = REPLANNING_THRESHOLD,
    steepness: float = LOGISTIC_STEEPNESS,
) -> bool:
    """Re-check the active behavior against the evolved state.

    False (energy below requirement, or the recomputed score fell under
    the threshold) tells the engine to replan immediately.
    """
    if state.physio.energy < present.behavior.bio_require:
        return False
    rescored = score_behavior(present.behavior, state, steepness)
    return rescored.score >= threshold
