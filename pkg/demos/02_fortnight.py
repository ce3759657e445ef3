"""Run two personas through the same two weeks and compare their lives.

The learner buries itself in books; the adventurer fills the timeline
with friends and games. Same pool, same seed, different drives.
"""

import json
from collections import Counter
from pathlib import Path

from ctem.engine import SECONDS_PER_DAY, Engine, EngineConfig
from ctem.simulate import ScriptRunner, UserScript, format_summary, summarize_records

PERSONAS = Path(__file__).parent.parent / "src" / "ctem" / "data" / "personas"

SCRIPT = UserScript.from_dict(
    {
        "events": [
            {"at": 7200, "action": "message", "text": "morning! slept great"},
            {"at": 3 * SECONDS_PER_DAY, "action": "message", "text": "what did you do today?"},
            {"at": 8 * SECONDS_PER_DAY, "action": "message", "text": "i miss our chats"},
        ]
    }
)


def main():
    for persona in ("learner", "adventurer"):
        config = EngineConfig()
        config.persona_path = str(PERSONAS / f"{persona}.json")
        engine = Engine(config)
        records = ScriptRunner(engine, SCRIPT).run_days(14.0)
        print(f"=== {persona}: 14 simulated days ===")
        print(format_summary(summarize_records([json.loads(r.to_json()) for r in records])))
        moods = Counter(
            r.payload["strategy"] for r in records if r.event == "message_out"
        )
        print(f"reply strategies: {dict(moods)}")
        print(f"timeline posts: {len(engine.timeline)}")
        print(f"final familiarity: {engine.state.familiarity:.3f}\n")


if __name__ == "__main__":
    main()
