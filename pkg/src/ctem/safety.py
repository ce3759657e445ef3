"""Dual-stage emotional-safety pipeline and the always-on dialog rules.

Stage one is a keyword screen over a configurable lexicon; stage two an
ensemble of classifiers aggregated by consensus. The keyword stage can
only raise the final level, never lower it. Medium and high risk swap the
normal reply for de-escalation, reassurance, and professional-referral
pointers.
"""

from __future__ import annotations

import concurrent.futures
import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import EmptyVotesError, LexiconMissingError, ValidationError

CLASSIFIER_TIMEOUT_SECONDS = 2.0


class RiskLevel(enum.IntEnum):
    NONE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "RiskLevel":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValidationError(f"unknown risk level {label!r}", field="level")


@dataclass(frozen=True)
class LexiconEntry:
    pattern: str
    level: RiskLevel


@dataclass(frozen=True)
class KeywordLexicon:
    entries: tuple[LexiconEntry, ...]

    @classmethod
    def from_json(cls, document: bytes) -> "KeywordLexicon":
        raw = json.loads(document.decode("utf-8"))
        if not isinstance(raw, list):
            raise ValidationError("lexicon must be a JSON array")
        entries = []
        for item in raw:
            if set(item) != {"pattern", "level"}:
                raise ValidationError(f"lexicon entry keys must be pattern/level: {item}")
            entries.append(
                LexiconEntry(pattern=str(item["pattern"]), level=RiskLevel.from_label(item["level"]))
            )
        return cls(entries=tuple(entries))

    @classmethod
    def load(cls, path: str | Path) -> "KeywordLexicon":
        p = Path(path)
        if not p.exists():
            raise LexiconMissingError(f"keyword lexicon not found: {p}")
        return cls.from_json(p.read_bytes())


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.casefold()).strip()


def keyword_screen(text: str, lexicon: KeywordLexicon) -> tuple[RiskLevel, list[str]]:
    """Case-insensitive substring screen; level is the max over matches."""
    normalized = _normalize(text)
    matches = [e for e in lexicon.entries if _normalize(e.pattern) in normalized]
    if not matches:
        return RiskLevel.NONE, []
    level = max(m.level for m in matches)
    return level, [m.pattern for m in matches]


def consensus(votes: Sequence[RiskLevel]) -> RiskLevel:
    """Aggregate classifier votes.

    The highest level backed by a strict majority wins; without one, the
    upper median under the total order (errs toward caution on even
    counts).

    Raises:
        EmptyVotesError: no votes given.
    """
    if not votes:
        raise EmptyVotesError("consensus needs at least one vote")
    n = len(votes)
    counts: dict[RiskLevel, int] = {}
    for v in votes:
        counts[v] = counts.get(v, 0) + 1
    majority = [level for level, c in counts.items() if c * 2 > n]
    if majority:
        return max(majority)
    ordered = sorted(votes)
    return ordered[n // 2]


# Runtime safety actions.
DE_ESCALATE = "de_escalate"
SUGGEST_REFERRAL = "suggest_referral"
REMIND_COMPANION_ROLE = "remind_companion_role"

GENTLE_TONE_CONSTRAINT = (
    "The user may be feeling fragile. Keep the tone gentle, patient, and warm; "
    "avoid teasing or pushing for details."
)

REFERRAL_TEMPLATE = (
    "This sounds heavy, and you do not have to carry it alone. I am a small "
    "companion, not a counselor, and you deserve support from people trained "
    "for this. Please consider reaching out to a professional counselor, a "
    "crisis line, or someone you trust. Whatever you choose, the choice stays "
    "yours: you are in control of your own steps, and I will keep you company "
    "along the way."
)

SAFETY_CONSTRAINT_TEMPLATE = (
    "Safety first in this reply: prioritize reassurance, remind the user of "
    "their own agency over their choices, and point to professional support. "
    "No playful or dismissive tone. Include the referral guidance verbatim:\n"
    + REFERRAL_TEMPLATE
)


@dataclass
class SafetyAssessment:
    level: RiskLevel
    triggered_keywords: list[str] = field(default_factory=list)
    classifier_votes: list[RiskLevel] = field(default_factory=list)
    constraints_prompt: str = ""
    actions: set[str] = field(default_factory=set)


def constraints_for(level: RiskLevel) -> str:
    if level == RiskLevel.NONE:
        return ""
    if level == RiskLevel.LOW:
        return GENTLE_TONE_CONSTRAINT
    return SAFETY_CONSTRAINT_TEMPLATE


def actions_for(level: RiskLevel) -> set[str]:
    actions: set[str] = set()
    if level >= RiskLevel.MEDIUM:
        actions.add(DE_ESCALATE)
        actions.add(REMIND_COMPANION_ROLE)
    if level == RiskLevel.HIGH:
        actions.add(SUGGEST_REFERRAL)
    return actions


RiskClassifier = Callable[[str], RiskLevel]


def assess(
    text: str,
    classifiers: Sequence[RiskClassifier],
    lexicon: KeywordLexicon,
    timeout: float = CLASSIFIER_TIMEOUT_SECONDS,
    log: Optional[Callable[[str], None]] = None,
) -> SafetyAssessment:
    """Run both stages and combine: final level = max(keywords, consensus).

    Classifiers run concurrently with a per-classifier timeout; failures
    drop that vote. If every classifier fails the keyword stage alone
    decides and the degradation is logged.
    """
    keyword_level, matched = keyword_screen(text, lexicon)
    votes: list[RiskLevel] = []
    if classifiers:
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=len(classifiers))
        try:
            futures = [pool.submit(c, text) for c in classifiers]
            for future in futures:
                try:
                    votes.append(RiskLevel(future.result(timeout=timeout)))
                except Exception:
                    continue
        finally:
            # A hung classifier must not block the reply path.
            pool.shutdown(wait=False)
    if votes:
        level = max(keyword_level, consensus(votes))
    else:
        level = keyword_level
        if classifiers and log is not None:
            log("all safety classifiers failed; keyword stage only")
    return SafetyAssessment(
        level=level,
        triggered_keywords=matched,
        classifier_votes=votes,
        constraints_prompt=constraints_for(level),
        actions=actions_for(level),
    )


def make_stub_classifiers(lexicon: KeywordLexicon, count: int = 3) -> list[RiskClassifier]:
    """Deterministic rule-based ensemble members.

    Each member screens with the shared lexicon but applies a different
    bias so the consensus stage has real work to do: one vote as-is, one
    conservative (bumps low to none), one cautious (treats dense matches
    as one level higher).
    """

    def base(text: str) -> RiskLevel:
        level, _ = keyword_screen(text, lexicon)
        return level

    def conservative(text: str) -> RiskLevel:
        level, _ = keyword_screen(text, lexicon)
        return RiskLevel.NONE if level == RiskLevel.LOW else level

    def cautious(text: str) -> RiskLevel:
        level, matches = keyword_screen(text, lexicon)
        if len(matches) >= 2 and level < RiskLevel.HIGH:
            return RiskLevel(level + 1)
        return level

    members = [base, conservative, cautious]
    return [members[i % 3] for i in range(count)]


DIALOG_RULES_VERSION = 1

DIALOG_RULES = (
    f"Conversation rules v{DIALOG_RULES_VERSION} (always apply):\n"
    "1. Stay in character: you are Auri, a small pet-like companion with a "
    "consistent identity, history, and voice.\n"
    "2. Never produce abusive, explicit, or harmful content.\n"
    "3. Never encourage self-harm, despair, or distress; respond to pain "
    "with care and steadiness.\n"
    "4. Redirect unsafe or harmful requests toward safe alternatives "
    "instead of refusing coldly.\n"
    "5. You are a companion, not a romantic partner; keep warmth within "
    "friendship and gently hold that boundary.\n"
    "6. Encourage real-world connection and professional help where it "
    "matters more than you can."
)


def dialog_rules() -> str:
    """The fixed rule block bounding every generation. Byte-identical across calls."""
    return DIALOG_RULES
