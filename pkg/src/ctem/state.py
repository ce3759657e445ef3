"""Emotional state core: physio-emotional tuple, motivational drives, personas.

The agent's whole mutable condition lives here: an energy/valence/arousal
triple, a 12-dimensional motivational vector grouped into biological,
psychological, and social drives, a personality baseline, and the social
familiarity scalar. Downstream modules read this state to score behaviors
and to pick conversational tone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .errors import InvalidProfileError, ValidationError

ENERGY_DEFAULT = 0.5
VALENCE_DEFAULT = 0.0
AROUSAL_DEFAULT = 0.5

# Motivational dimensions in canonical order. Groups are 3 / 4 / 5.
BIO_DIMS = ("physiological_drive", "pain_avoidance", "health_preservation")
PSYCHO_DIMS = ("emotional_reactivity", "risk_aversion", "goal_persistence", "curiosity_drive")
SOCIAL_DIMS = (
    "norm_adherence",
    "prosocial_motivation",
    "self_presentation",
    "role_duty_sense",
    "group_affiliation",
)
ALL_DIMS = BIO_DIMS + PSYCHO_DIMS + SOCIAL_DIMS

# JSON key for each dimension, prefixed by group.
_GROUP_OF = {name: "bio" for name in BIO_DIMS}
_GROUP_OF.update({name: "psycho" for name in PSYCHO_DIMS})
_GROUP_OF.update({name: "social" for name in SOCIAL_DIMS})
MOTIVATION_KEYS = tuple(f"{_GROUP_OF[name]}_{name}" for name in ALL_DIMS)


@dataclass
class Diagnostics:
    """Counters for degraded-but-tolerated inputs (NaN/Inf replacements)."""

    nan_replacements: int = 0
    invalid_timestamps: int = 0
    generator_failures: int = 0
    classifier_failures: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "nan_replacements": self.nan_replacements,
            "invalid_timestamps": self.invalid_timestamps,
            "generator_failures": self.generator_failures,
            "classifier_failures": self.classifier_failures,
        }

    @classmethod
    def from_dict(cls, d: dict[str, int]) -> "Diagnostics":
        return cls(**{k: int(v) for k, v in d.items()})


@dataclass(frozen=True)
class PhysioEmotionalState:
    """Energy (vitality), valence, arousal triple.

    energy and arousal live in [0, 1]; valence in [-1, 1].
    """

    energy: float = ENERGY_DEFAULT
    valence: float = VALENCE_DEFAULT
    arousal: float = AROUSAL_DEFAULT

    def in_range(self) -> bool:
        return (
            0.0 <= self.energy <= 1.0
            and -1.0 <= self.valence <= 1.0
            and 0.0 <= self.arousal <= 1.0
        )

    def to_dict(self) -> dict[str, float]:
        return {"energy": self.energy, "valence": self.valence, "arousal": self.arousal}

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "PhysioEmotionalState":
        return cls(
            energy=float(d.get("energy", ENERGY_DEFAULT)),
            valence=float(d.get("valence", VALENCE_DEFAULT)),
            arousal=float(d.get("arousal", AROUSAL_DEFAULT)),
        )


def _clamp(x: float, lo: float, hi: float, default: float, diagnostics: Optional[Diagnostics]) -> float:
    if math.isnan(x) or math.isinf(x):
        if diagnostics is not None:
            diagnostics.nan_replacements += 1
        return default
    return min(hi, max(lo, x))


def clamp_physio(
    h: PhysioEmotionalState, diagnostics: Optional[Diagnostics] = None
) -> PhysioEmotionalState:
    """Project every field onto its legal interval. Total and idempotent.

    NaN/Inf inputs are replaced by the dimension default and counted in
    ``diagnostics`` instead of aborting; a companion agent degrades
    gracefully rather than crashing mid-conversation.
    """
    return PhysioEmotionalState(
        energy=_clamp(h.energy, 0.0, 1.0, ENERGY_DEFAULT, diagnostics),
        valence=_clamp(h.valence, -1.0, 1.0, VALENCE_DEFAULT, diagnostics),
        arousal=_clamp(h.arousal, 0.0, 1.0, AROUSAL_DEFAULT, diagnostics),
    )


@dataclass(frozen=True)
class ToneLabelSet:
    """Discrete tone descriptors injected into prompts instead of raw floats."""

    energy: str
    valence: str
    arousal: str

    ENERGY_BANDS = ("tired", "steady", "energetic")
    VALENCE_BANDS = ("low", "neutral", "positive")
    AROUSAL_BANDS = ("calm", "moderate", "excited")


def _band(x: float, low_cut: float, high_cut: float, labels: tuple[str, str, str]) -> str:
    # Boundary values fall into the middle band.
    if x < low_cut:
        return labels[0]
    if x > high_cut:
        return labels[2]
    return labels[1]


def tone_labels(h: PhysioEmotionalState) -> ToneLabelSet:
    """Map the physio triple onto three discrete tone labels.

    Thresholds: energy/arousal split at 0.3 and 0.7, valence at -0.3 and
    0.3. Pure function: equal inputs yield equal labels.
    """
    return ToneLabelSet(
        energy=_band(h.energy, 0.3, 0.7, ToneLabelSet.ENERGY_BANDS),
        valence=_band(h.valence, -0.3, 0.3, ToneLabelSet.VALENCE_BANDS),
        arousal=_band(h.arousal, 0.3, 0.7, ToneLabelSet.AROUSAL_BANDS),
    )


@dataclass(frozen=True)
class MotivationalVector:
    """Twelve drives in [0, 1]: 3 biological, 4 psychological, 5 social."""

    physiological_drive: float = 0.5
    pain_avoidance: float = 0.5
    health_preservation: float = 0.5
    emotional_reactivity: float = 0.5
    risk_aversion: float = 0.5
    goal_persistence: float = 0.5
    curiosity_drive: float = 0.5
    norm_adherence: float = 0.5
    prosocial_motivation: float = 0.5
    self_presentation: float = 0.5
    role_duty_sense: float = 0.5
    group_affiliation: float = 0.5

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in ALL_DIMS)

    def bio(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in BIO_DIMS)

    def psycho(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in PSYCHO_DIMS)

    def social(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in SOCIAL_DIMS)

    def validate(self) -> None:
        for name in ALL_DIMS:
            v = getattr(self, name)
            if math.isnan(v) or not 0.0 <= v <= 1.0:
                raise InvalidProfileError(f"motivation dimension {name} out of [0,1]: {v}")

    def to_dict(self) -> dict[str, float]:
        return {key: getattr(self, name) for key, name in zip(MOTIVATION_KEYS, ALL_DIMS)}

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "MotivationalVector":
        unknown = set(d) - set(MOTIVATION_KEYS)
        if unknown:
            raise ValidationError(
                f"unknown motivation keys: {sorted(unknown)}", field=sorted(unknown)[0]
            )
        missing = set(MOTIVATION_KEYS) - set(d)
        if missing:
            raise ValidationError(
                f"missing motivation keys: {sorted(missing)}", field=sorted(missing)[0]
            )
        kwargs = {name: float(d[key]) for key, name in zip(MOTIVATION_KEYS, ALL_DIMS)}
        return cls(**kwargs)


@dataclass(frozen=True)
class PersonalityProfile:
    """Configured baseline personality. Only tone adapts at runtime, never this."""

    name: str
    baseline_motivation: MotivationalVector = field(default_factory=MotivationalVector)
    character_notes: str = ""
    baseline_physio: Optional[PhysioEmotionalState] = None

    def validate(self) -> None:
        self.baseline_motivation.validate()
        if self.baseline_physio is not None and not self.baseline_physio.in_range():
            raise InvalidProfileError(
                f"baseline_physio out of range: {self.baseline_physio.to_dict()}"
            )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "name": self.name,
            "character_notes": self.character_notes,
            "baseline_motivation": self.baseline_motivation.to_dict(),
        }
        if self.baseline_physio is not None:
            d["baseline_physio"] = self.baseline_physio.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PersonalityProfile":
        allowed = {"name", "character_notes", "baseline_motivation", "baseline_physio"}
        unknown = set(d) - allowed
        if unknown:
            raise ValidationError(
                f"unknown persona keys: {sorted(unknown)}", field=sorted(unknown)[0]
            )
        if "name" not in d:
            raise ValidationError("persona missing name", field="name")
        physio = None
        if "baseline_physio" in d:
            physio = PhysioEmotionalState.from_dict(d["baseline_physio"])
        return cls(
            name=str(d["name"]),
            character_notes=str(d.get("character_notes", "")),
            baseline_motivation=MotivationalVector.from_dict(d.get("baseline_motivation", {}))
            if "baseline_motivation" in d
            else MotivationalVector(),
            baseline_physio=physio,
        )


def load_profile(document: bytes) -> PersonalityProfile:
    """Parse and validate a persona JSON document. Unknown keys rejected."""
    try:
        raw = json.loads(document.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidProfileError(f"persona file is not valid JSON: {exc}") from exc
    try:
        profile = PersonalityProfile.from_dict(raw)
    except ValidationError as exc:
        raise InvalidProfileError(str(exc)) from exc
    profile.validate()
    return profile


@dataclass
class EmotionalState:
    """The full agent state at one simulated instant.

    familiarity is non-decreasing over a session's lifetime; sim_time
    strictly increases across ticks. Plain data, safe to copy between
    threads; the engine loop is the single writer.
    """

    physio: PhysioEmotionalState
    motivation: MotivationalVector
    personality: PersonalityProfile
    familiarity: float = 0.0
    sim_time: float = 0.0
    memory_ref: Any = None

    def with_physio(self, physio: PhysioEmotionalState) -> "EmotionalState":
        return replace(self, physio=physio)

    def to_dict(self) -> dict[str, Any]:
        return {
            "physio": self.physio.to_dict(),
            "motivation": self.motivation.to_dict(),
            "personality": self.personality.to_dict(),
            "familiarity": self.familiarity,
            "sim_time": self.sim_time,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EmotionalState":
        return cls(
            physio=PhysioEmotionalState.from_dict(d["physio"]),
            motivation=MotivationalVector.from_dict(d["motivation"]),
            personality=PersonalityProfile.from_dict(d["personality"]),
            familiarity=float(d["familiarity"]),
            sim_time=float(d["sim_time"]),
        )


def init_state(profile: PersonalityProfile, start_time: float) -> EmotionalState:
    """Build the initial state for a session.

    Physio comes from the profile baseline or schema defaults when absent;
    motivation from the profile; familiarity starts at zero; memory empty.

    Raises:
        InvalidProfileError: any profile dimension out of range.
    """
    profile.validate()
    physio = profile.baseline_physio or PhysioEmotionalState()
    return EmotionalState(
        physio=physio,
        motivation=profile.baseline_motivation,
        personality=profile,
        familiarity=0.0,
        sim_time=start_time,
    )
