"""Walk through behavior scoring: drives, embeddings, and the energy mix.

Shows how the same pool ranks differently as energy moves, and where the
bio/social argmax flip lands for a pair of hand-built behaviors.
"""

from pathlib import Path

from ctem.behavior import load_pool, modulation_weight, rank_candidates, score_behavior
from ctem.state import PersonalityProfile, PhysioEmotionalState, init_state

POOL_PATH = Path(__file__).parent.parent / "src" / "ctem" / "data" / "pool.json"


def main():
    pool = load_pool(POOL_PATH.read_bytes())
    state = init_state(PersonalityProfile(name="demo"), start_time=0.0)

    print("modulation weight w(energy): how much the biological term dominates")
    for energy in (0.0, 0.25, 0.5, 0.75, 1.0):
        print(f"  energy={energy:.2f}  w={modulation_weight(energy):.4f}")

    for energy in (0.2, 0.8):
        state = state.with_physio(PhysioEmotionalState(energy=energy, valence=0.0, arousal=0.5))
        scored = [score_behavior(b, state) for b in pool]
        eligible = [s for s in scored if s.score > -1.0]
        top = rank_candidates(eligible)[:5]
        print(f"\ntop behaviors at energy {energy} "
              f"({len(scored) - len(eligible)} ineligible):")
        for s in top:
            print(f"  {s.score:.3f}  {s.behavior.category:13s}  {s.behavior.label}")


if __name__ == "__main__":
    main()
