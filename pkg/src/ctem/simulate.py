"""Headless deterministic simulator: an agent vs a scripted user.

The user script stands in for a human participant: timed messages,
reactions, and silences. A sentiment_hint on a message bypasses the stub
classifier so tests can inject exact affective inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .engine import Engine, EngineConfig, TrajectoryRecord, SECONDS_PER_DAY
from .errors import ValidationError

SCRIPT_ACTIONS = ("message", "reaction", "silence")


@dataclass(frozen=True)
class ScriptEvent:
    at: float  # offset from simulation start, seconds
    action: str
    text: str = ""
    sentiment_hint: Optional[float] = None
    reaction: str = "like"


@dataclass
class UserScript:
    events: list[ScriptEvent] = field(default_factory=list)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "UserScript":
        events = []
        last_at = float("-inf")
        for entry in raw.get("events", []):
            action = entry.get("action")
            if action not in SCRIPT_ACTIONS:
                raise ValidationError(f"unknown script action: {action!r}", field="action")
            at = float(entry["at"])
            if at < last_at:
                raise ValidationError("script events must be time-ordered", field="at")
            last_at = at
            hint = entry.get("sentiment_hint")
            if hint is not None and not -1.0 <= float(hint) <= 1.0:
                raise ValidationError(
                    f"sentiment_hint out of [-1,1]: {hint}", field="sentiment_hint"
                )
            events.append(
                ScriptEvent(
                    at=at,
                    action=action,
                    text=str(entry.get("text", "")),
                    sentiment_hint=None if hint is None else float(hint),
                    reaction=str(entry.get("reaction", "like")),
                )
            )
        return cls(events=events)

    @classmethod
    def load(cls, path: str | Path) -> "UserScript":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


class ScriptRunner:
    """Feeds script events into the engine as simulated time passes.

    Delivery is a pure function of the tick clock (an event is delivered
    for the first tick whose time reaches it), so a resumed engine sees
    exactly the events an unbroken run would.
    """

    def __init__(self, engine: Engine, script: UserScript):
        self.engine = engine
        self.script = script
        self.origin = engine.config.sim_start_time

    def deliver_due(self) -> None:
        now = self.engine.sim_time
        for event in self.script.events:
            at = self.origin + event.at
            if at > now or at <= now - self.engine.config.tick_seconds:
                continue
            if event.action == "message":
                self.engine.enqueue_message(
                    event.text, at=at, sentiment_hint=event.sentiment_hint
                )
            elif event.action == "reaction":
                self.engine.enqueue_reaction(event.reaction, at=at)
            # silence is an explicit no-op marker

    def step(self) -> list[TrajectoryRecord]:
        self.deliver_due()
        return self.engine.step()

    def run_days(self, days: float) -> list[TrajectoryRecord]:
        until = self.origin + days * SECONDS_PER_DAY
        records: list[TrajectoryRecord] = []
        while self.engine.sim_time < until:
            records.extend(self.step())
        return records


def summarize_records(records: list[dict[str, Any]]) -> dict[str, Any]:
    """Summary statistics over trajectory records (as plain dicts).

    The CLI prints this block; an independent pass over the JSONL must
    reproduce it exactly, so everything here is a simple fold.
    """
    energies = [r["energy"] for r in records]
    valences = [r["valence"] for r in records]
    arousals = [r["arousal"] for r in records]
    categories: dict[str, int] = {}
    replans = 0
    proactive = 0
    final_familiarity = records[-1]["familiarity"] if records else 0.0
    for r in records:
        if r["event"] == "execute" and r["payload"].get("status") == "completed":
            cat = r["payload"]["category"]
            categories[cat] = categories.get(cat, 0) + 1
        elif r["event"] == "replan":
            replans += 1
        elif r["event"] == "message_out" and r["payload"].get("mode") == "proactive":
            proactive += 1

    def stats(values: list[float]) -> dict[str, float]:
        if not values:
            return {"mean": 0.0, "min": 0.0, "max": 0.0}
        return {"mean": sum(values) / len(values), "min": min(values), "max": max(values)}

    return {
        "energy": stats(energies),
        "valence": stats(valences),
        "arousal": stats(arousals),
        "category_counts": dict(sorted(categories.items())),
        "replans": replans,
        "proactive_messages": proactive,
        "final_familiarity": final_familiarity,
    }


def format_summary(summary: dict[str, Any]) -> str:
    lines = []
    for dim in ("energy", "valence", "arousal"):
        s = summary[dim]
        lines.append(f"{dim} mean={s['mean']:.6f} min={s['min']:.6f} max={s['max']:.6f}")
    cats = " ".join(f"{k}={v}" for k, v in summary["category_counts"].items())
    lines.append(f"category_counts {cats}".rstrip())
    lines.append(f"replans {summary['replans']}")
    lines.append(f"proactive_messages {summary['proactive_messages']}")
    lines.append(f"final_familiarity {summary['final_familiarity']:.6f}")
    return "\n".join(lines)
