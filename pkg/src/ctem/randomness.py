"""Named deterministic random streams.

Each consumer (behavior selection, proactive gate, scripted generator,
outcome quality, timeline posting) draws from its own PCG64 stream, so
adding a consumer never perturbs another stream's replay. Stream state
serializes into snapshots.
"""

from __future__ import annotations

import hashlib
from typing import Any

import numpy as np

STREAM_NAMES = ("selection", "proactive", "generator", "outcome", "timeline")


def _stream_seed(root_seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{root_seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class RandomStream:
    """One named PCG64 stream with JSON-serializable cursor state."""

    def __init__(self, root_seed: int, name: str):
        self.name = name
        self._rng = np.random.Generator(np.random.PCG64(_stream_seed(root_seed, name)))

    def uniform(self) -> float:
        return float(self._rng.random())

    def get_state(self) -> dict[str, Any]:
        state = self._rng.bit_generator.state
        return {
            "bit_generator": state["bit_generator"],
            "state": {"state": str(state["state"]["state"]), "inc": str(state["state"]["inc"])},
            "has_uint32": state["has_uint32"],
            "uinteger": state["uinteger"],
        }

    def set_state(self, state: dict[str, Any]) -> None:
        self._rng.bit_generator.state = {
            "bit_generator": state["bit_generator"],
            "state": {"state": int(state["state"]["state"]), "inc": int(state["state"]["inc"])},
            "has_uint32": state["has_uint32"],
            "uinteger": state["uinteger"],
        }


class StreamBundle:
    """All named streams for one engine instance."""

    def __init__(self, root_seed: int):
        self.root_seed = root_seed
        self.streams = {name: RandomStream(root_seed, name) for name in STREAM_NAMES}

    def __getitem__(self, name: str) -> RandomStream:
        return self.streams[name]

    def get_state(self) -> dict[str, Any]:
        return {name: s.get_state() for name, s in self.streams.items()}

    def set_state(self, state: dict[str, Any]) -> None:
        for name, s in state.items():
            if name in self.streams:
                self.streams[name].set_state(s)
