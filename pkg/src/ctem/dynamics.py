"""State evolution: behavior effects, nightly rest, familiarity growth.

Pure functions over state values; the engine loop is the single writer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .behavior import ScoredBehavior
from .state import Diagnostics, EmotionalState, PhysioEmotionalState, clamp_physio

FAMILIARITY_ETA = 0.1


@dataclass(frozen=True)
class RestConfig:
    """Nightly regression target and per-dimension pull strengths.

    Defaults make one night recover 80% of an energy deficit while only
    halving emotional carry-over, so a bad day still colors the next
    morning without snowballing.
    """

    baseline: PhysioEmotionalState = field(
        default_factory=lambda: PhysioEmotionalState(energy=0.9, valence=0.0, arousal=0.3)
    )
    lambda_energy: float = 0.8
    lambda_valence: float = 0.5
    lambda_arousal: float = 0.6

    def validate(self) -> None:
        for name, lam in (
            ("lambda_energy", self.lambda_energy),
            ("lambda_valence", self.lambda_valence),
            ("lambda_arousal", self.lambda_arousal),
        ):
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {lam}")
        if not self.baseline.in_range():
            raise ValueError(f"rest baseline out of range: {self.baseline.to_dict()}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline.to_dict(),
            "lambdas": {
                "energy": self.lambda_energy,
                "valence": self.lambda_valence,
                "arousal": self.lambda_arousal,
            },
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RestConfig":
        lambdas = d.get("lambdas", {})
        cfg = cls(
            baseline=PhysioEmotionalState.from_dict(d.get("baseline", {})),
            lambda_energy=float(lambdas.get("energy", 0.8)),
            lambda_valence=float(lambdas.get("valence", 0.5)),
            lambda_arousal=float(lambdas.get("arousal", 0.6)),
        )
        cfg.validate()
        return cfg


def apply_behavior_effects(
    state: EmotionalState,
    b: ScoredBehavior,
    outcome_quality: float,
    diagnostics: Optional[Diagnostics] = None,
) -> EmotionalState:
    """Fold a completed behavior's deltas into the physio triple.

    Energy moves by the behavior's consumption, valence by its effect
    scaled by how well the behavior went, arousal by its effect; all
    clamped. Restorative behaviors carry their (typically larger,
    positive) consumption unchanged, which is what lets meals and sleep
    produce the big swings the day-cycle needs.
    """
    spec = b.behavior
    physio = PhysioEmotionalState(
        energy=state.physio.energy + spec.bio_consumption,
        valence=state.physio.valence + spec.valence_effect * outcome_quality,
        arousal=state.physio.arousal + spec.arousal_effect,
    )
    return state.with_physio(clamp_physio(physio, diagnostics))


def nightly_rest(
    state: EmotionalState,
    cfg: RestConfig,
    diagnostics: Optional[Diagnostics] = None,
) -> EmotionalState:
    """Pull every physio dimension toward its baseline: x' = x + lambda*(beta - x).

    A strict contraction for lambda in (0,1): |x' - beta| = (1-lambda)|x - beta|.
    Invoked exactly once per simulated day boundary.
    """
    h = state.physio
    beta = cfg.baseline
    physio = PhysioEmotionalState(
        energy=h.energy + cfg.lambda_energy * (beta.energy - h.energy),
        valence=h.valence + cfg.lambda_valence * (beta.valence - h.valence),
        arousal=h.arousal + cfg.lambda_arousal * (beta.arousal - h.arousal),
    )
    return state.with_physio(clamp_physio(physio, diagnostics))


def update_familiarity(
    state: EmotionalState, active_day: bool, eta: float = FAMILIARITY_ETA
) -> EmotionalState:
    """Grow social familiarity after each day with at least one exchange.

    f' = f + eta*(1 - f): monotone non-decreasing, asymptotic to 1.
    Inactive days leave familiarity untouched.
    """
    if not active_day:
        return state
    f = state.familiarity + eta * (1.0 - state.familiarity)
    return replace(state, familiarity=min(1.0, f))
