"""Time-indexed conversation memory with gap clustering and daily summaries.

Turns append chronologically; a day's turns are grouped into clusters by
timestamp gaps, each cluster is summarized, and the merged daily record
plus any extracted user facts persist across sessions. Retrieval is
recency-based: the documented scenarios need yesterday's context, not
similarity search.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import DuplicateDayError
from .state import Diagnostics

GAP_FLOOR_SECONDS = 60.0
FACT_PREFIX = "FACT:"
SECONDS_PER_DAY = 86400.0


@dataclass
class DialogTurn:
    at: float
    speaker: str  # "user" | "agent"
    text: str
    sentiment_hint: Optional[float] = None
    reaction: Optional[str] = None  # UI reaction marker, e.g. "like"

    def to_dict(self) -> dict[str, Any]:
        return {
            "at": self.at,
            "speaker": self.speaker,
            "text": self.text,
            "sentiment_hint": self.sentiment_hint,
            "reaction": self.reaction,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DialogTurn":
        return cls(
            at=float(d["at"]),
            speaker=str(d["speaker"]),
            text=str(d["text"]),
            sentiment_hint=d.get("sentiment_hint"),
            reaction=d.get("reaction"),
        )


@dataclass
class DialogCluster:
    turns: list[DialogTurn]
    start: float
    end: float
    topic_tag: Optional[str] = None


@dataclass
class EpisodicSummary:
    day: int
    text: str
    clusters_covered: int
    salient_facts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "day": self.day,
            "text": self.text,
            "clusters_covered": self.clusters_covered,
            "salient_facts": list(self.salient_facts),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EpisodicSummary":
        return cls(
            day=int(d["day"]),
            text=str(d["text"]),
            clusters_covered=int(d["clusters_covered"]),
            salient_facts=[str(f) for f in d.get("salient_facts", [])],
        )


def _valid_timestamp(t: float) -> bool:
    return isinstance(t, (int, float)) and math.isfinite(t) and t >= 0


def clustering_threshold(gaps: list[float], floor_seconds: float = GAP_FLOOR_SECONDS) -> float:
    """Epsilon from gap statistics: mean + sample stddev, floored.

    The floor keeps rapid-fire typing from fragmenting one conversation
    into many clusters.
    """
    if not gaps:
        return floor_seconds
    mean = sum(gaps) / len(gaps)
    std = statistics.stdev(gaps) if len(gaps) >= 2 else 0.0
    return max(mean + std, floor_seconds)


def cluster_dialogs(
    turns: list[DialogTurn],
    diagnostics: Optional[Diagnostics] = None,
    floor_seconds: float = GAP_FLOOR_SECONDS,
) -> list[DialogCluster]:
    """Split turns into conversations wherever a gap exceeds epsilon.

    Invalid timestamps are discarded (and counted), the rest sorted; a
    single pass opens a new cluster on each gap > epsilon. Zero or one
    turn yields zero or one cluster.
    """
    valid = []
    for t in turns:
        if _valid_timestamp(t.at):
            valid.append(t)
        elif diagnostics is not None:
            diagnostics.invalid_timestamps += 1
    if not valid:
        return []
    valid.sort(key=lambda t: t.at)
    if len(valid) == 1:
        only = valid[0]
        return [DialogCluster(turns=[only], start=only.at, end=only.at)]

    gaps = [b.at - a.at for a, b in zip(valid, valid[1:])]
    eps = clustering_threshold(gaps, floor_seconds)

    clusters: list[DialogCluster] = []
    current = [valid[0]]
    for prev, turn in zip(valid, valid[1:]):
        if turn.at - prev.at > eps:
            clusters.append(DialogCluster(turns=current, start=current[0].at, end=current[-1].at))
            current = [turn]
        else:
            current.append(turn)
    clusters.append(DialogCluster(turns=current, start=current[0].at, end=current[-1].at))
    return clusters


def _topic_of(turn: DialogTurn) -> str:
    words = turn.text.split()
    return " ".join(words[:6]) if words else "(silence)"


def mine_facts(turns: list[DialogTurn]) -> list[str]:
    """Pull simple user facts into FACT: key=value lines."""
    facts: list[str] = []
    for t in turns:
        if t.speaker != "user":
            continue
        low = t.text.lower()
        if "my name is " in low:
            name = low.split("my name is ", 1)[1].split()
            if name:
                facts.append(f"{FACT_PREFIX} user_name={name[0].strip('.,!?')}")
        if "my favorite " in low and " is " in low.split("my favorite ", 1)[1]:
            rest = low.split("my favorite ", 1)[1]
            key, value = rest.split(" is ", 1)
            key = key.strip().replace(" ", "_")
            value = value.split()[0].strip(".,!?") if value.split() else ""
            if key and value:
                facts.append(f"{FACT_PREFIX} favorite_{key}={value}")
    return facts


def render_cluster_template(cluster: DialogCluster) -> str:
    """Deterministic cluster digest: speaker counts, first/last topics, facts."""
    user_count = sum(1 for t in cluster.turns if t.speaker == "user")
    agent_count = sum(1 for t in cluster.turns if t.speaker == "agent")
    lines = [
        f"Conversation with {user_count} user and {agent_count} agent turns.",
        f"Opened on: {_topic_of(cluster.turns[0])}",
        f"Closed on: {_topic_of(cluster.turns[-1])}",
    ]
    lines.extend(mine_facts(cluster.turns))
    return "\n".join(lines)


def render_day_template(partials: list[str], behavior_labels: list[str]) -> str:
    """Deterministic fallback daily record used by the scripted generator."""
    lines = []
    if partials:
        lines.append(f"{len(partials)} conversation(s) today.")
        lines.extend(partials)
    else:
        lines.append("No conversations today.")
    if behavior_labels:
        lines.append("Did today: " + ", ".join(behavior_labels))
    return "\n".join(lines)


CLUSTER_SUMMARY_DIRECTIVE = "[summarize-cluster]"
DAY_MERGE_DIRECTIVE = "[merge-day]"


def summarize_day(
    clusters: list[DialogCluster],
    behavior_labels: list[str],
    generator,
    day: int,
    diagnostics: Optional[Diagnostics] = None,
    log: Optional[Callable[[str], None]] = None,
) -> EpisodicSummary:
    """Summarize a finished day: one generator call per cluster, one merge.

    Prompts keep a daily-life focus and embed the timeline digest; the
    scripted generator echoes the digest so output stays deterministic.
    Generator failure falls back to the local template and never blocks
    the day rollover.
    """
    partials: list[str] = []
    salient: list[str] = []
    degraded = False
    for cluster in clusters:
        digest = render_cluster_template(cluster)
        prompt = (
            f"{CLUSTER_SUMMARY_DIRECTIVE} Summarize this conversation as part of a daily "
            f"journal. Keep everyday-life focus and respect the timeline.\n{digest}"
        )
        try:
            text = generator.generate(prompt, max_length=400)
        except Exception:
            degraded = True
            if diagnostics is not None:
                diagnostics.generator_failures += 1
            text = digest
        partials.append(text)

    merged_template = render_day_template(partials, behavior_labels)
    if not degraded:
        prompt = (
            f"{DAY_MERGE_DIRECTIVE} Merge these partial summaries into one coherent "
            f"record of the day, chronological order.\n{merged_template}"
        )
        try:
            text = generator.generate(prompt, max_length=800)
        except Exception:
            degraded = True
            if diagnostics is not None:
                diagnostics.generator_failures += 1
            text = merged_template
    else:
        text = merged_template
    if degraded and log is not None:
        log("generator unavailable during daily summary; used template fallback")

    for line in text.splitlines():
        if line.startswith(FACT_PREFIX):
            salient.append(line[len(FACT_PREFIX):].strip())
    return EpisodicSummary(
        day=day, text=text, clusters_covered=len(clusters), salient_facts=salient
    )


@dataclass
class MemoryStore:
    """Append-only turn log, daily summaries keyed by day, and user facts."""

    turns: list[DialogTurn] = field(default_factory=list)
    summaries: list[EpisodicSummary] = field(default_factory=list)
    facts: dict[str, str] = field(default_factory=dict)

    def append_turn(self, turn: DialogTurn) -> None:
        self.turns.append(turn)

    def turns_for_day(self, day: int) -> list[DialogTurn]:
        lo, hi = day * SECONDS_PER_DAY, (day + 1) * SECONDS_PER_DAY
        return [t for t in self.turns if lo <= t.at < hi]

    def has_summary(self, day: int) -> bool:
        return any(s.day == day for s in self.summaries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "turns": [t.to_dict() for t in self.turns],
            "summaries": [s.to_dict() for s in self.summaries],
            "facts": dict(self.facts),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MemoryStore":
        return cls(
            turns=[DialogTurn.from_dict(t) for t in d["turns"]],
            summaries=[EpisodicSummary.from_dict(s) for s in d["summaries"]],
            facts={str(k): str(v) for k, v in d["facts"].items()},
        )


def update_memory(m: MemoryStore, e: EpisodicSummary) -> MemoryStore:
    """Fold a daily summary into the store.

    Salient facts merge into the fact table, later values overwriting
    earlier ones under the same key.

    Raises:
        DuplicateDayError: a summary for that day already exists.
    """
    if m.has_summary(e.day):
        raise DuplicateDayError(f"summary for day {e.day} already stored")
    m.summaries.append(e)
    for fact in e.salient_facts:
        if "=" in fact:
            key, value = fact.split("=", 1)
            # Re-insert so an overwritten fact counts as newest.
            m.facts.pop(key.strip(), None)
            m.facts[key.strip()] = value.strip()
    return m


@dataclass
class ContextSnippets:
    items: list[str] = field(default_factory=list)


def retrieve_context(m: MemoryStore, now: float, budget: int) -> ContextSnippets:
    """Recency-ordered context: newest summary, recent facts, closing turns.

    Yields at most budget + 2 items: one summary, up to ``budget`` facts
    (newest insertions first), and one snippet with the tail of the most
    recent conversation when budget allows. Deterministic for a fixed
    store.
    """
    items: list[str] = []
    if m.summaries:
        newest = max(m.summaries, key=lambda s: s.day)
        items.append(f"Yesterday's record (day {newest.day}): {newest.text}")
    if budget > 0 and m.facts:
        recent = list(m.facts.items())[-budget:]
        for key, value in reversed(recent):
            items.append(f"Known about the user: {key} = {value}")
    if budget > 0 and m.turns:
        tail = m.turns[-3:]
        rendered = " / ".join(f"{t.speaker}: {t.text}" for t in tail if t.text)
        if rendered:
            items.append(f"Last exchange: {rendered}")
    return ContextSnippets(items=items)
