from __future__ import annotations

import json
import math
import random
from pathlib import Path

import pytest
from scipy import stats

from ctem.behavior import (
    BehaviorInventory,
    BehaviorPool,
    BehaviorSpec,
    PastEntry,
    ScoredBehavior,
    consume_present,
    filter_redundant,
    load_pool,
    modulation_weight,
    plan_future,
    present_valid,
    rank_candidates,
    score_behavior,
    select_present,
)
from ctem.errors import EmptyPoolError, NoCandidatesError, ParseError, ValidationError
from ctem.randomness import StreamBundle
from ctem.state import ALL_DIMS, MotivationalVector, PersonalityProfile, PhysioEmotionalState, init_state


# ---------------------------------------------------------------------------
# Independent re-evaluation of the score function, used as the ranking oracle.
# Arithmetic order mirrors the engine's contract (left-to-right mean of
# products) so scores must agree bitwise.
# ---------------------------------------------------------------------------

def oracle_weight(energy: float, k: float = 8.0) -> float:
    return 1.0 - 1.0 / (1.0 + math.exp(-k * (energy - 0.5)))


def oracle_score(values12, embedding12, energy: float, bio_require: float) -> float:
    if energy < bio_require:
        return -1.0
    w = oracle_weight(energy)
    bio = 0.0
    for i in range(3):
        bio += values12[i] * embedding12[i]
    bio /= 3
    rest = 0.0
    for i in range(3, 12):
        rest += values12[i] * embedding12[i]
    rest /= 9
    return w * bio + (1.0 - w) * rest


def make_state(energy=0.5, valence=0.0, arousal=0.5, motivation=None):
    profile = PersonalityProfile(
        name="t", baseline_motivation=motivation or MotivationalVector()
    )
    state = init_state(profile, 0.0)
    return state.with_physio(PhysioEmotionalState(energy, valence, arousal))


def vec(values) -> MotivationalVector:
    return MotivationalVector(**dict(zip(ALL_DIMS, values)))


def make_behavior(id="b", bio_require=0.0, embedding=None, category="leisure", **kw):
    return BehaviorSpec(
        id=id,
        label=id,
        category=category,
        bio_require=bio_require,
        embedding=embedding or MotivationalVector(),
        **kw,
    )


class TestModulationWeight:
    def test_midpoint_is_half(self):
        assert modulation_weight(0.5) == 0.5

    def test_extremes_match_logistic(self):
        # w(0) = 1 - 1/(1+e^4), w(1) = 1 - 1/(1+e^-4)
        assert modulation_weight(0.0) == pytest.approx(1.0 - 1.0 / (1.0 + math.exp(4.0)), abs=1e-15)
        assert modulation_weight(0.0) == pytest.approx(0.9820, abs=5e-5)
        assert modulation_weight(1.0) == pytest.approx(0.0180, abs=5e-5)

    def test_strictly_decreasing_on_grid(self):
        grid = [i / 100 for i in range(101)]
        weights = [modulation_weight(x) for x in grid]
        assert all(a > b for a, b in zip(weights, weights[1:]))

    def test_symmetry(self):
        assert abs(modulation_weight(0.0) + modulation_weight(1.0) - 1.0) < 1e-12


class TestScoreBehavior:
    def test_uniform_vectors_give_quarter(self):
        scored = score_behavior(make_behavior(), make_state(energy=0.5))
        assert scored.score == 0.25

    def test_energy_below_requirement_is_ineligible(self):
        scored = score_behavior(make_behavior(bio_require=0.1), make_state(energy=0.05))
        assert scored.score == -1.0

    def test_social_persona_vs_social_behavior_matches_oracle(self):
        motivation = vec([0.4, 0.35, 0.4, 0.5, 0.4, 0.5, 0.4, 0.5, 1.0, 1.0, 1.0, 1.0])
        state = make_state(energy=0.9, motivation=motivation)
        embedding = vec([0.0] * 3 + [0.0] * 4 + [1.0] * 5)
        b = make_behavior("social_burst", category="social", embedding=embedding)
        scored = score_behavior(b, state)
        expected = oracle_score(motivation.values(), embedding.values(), 0.9, 0.0)
        assert scored.score == expected

    def test_expected_delta_carries_behavior_effects(self):
        b = make_behavior(bio_consumption=-0.2, valence_effect=0.3, arousal_effect=0.1)
        scored = score_behavior(b, make_state())
        assert scored.expected_delta == (-0.2, 0.3, 0.1)

    def test_ranking_matches_oracle_on_random_pools(self):
        # Engine score ordering must equal the brute-force evaluation exactly.
        rng = random.Random(555)
        for _ in range(100):
            n = rng.randint(1, 50)
            behaviors = [
                make_behavior(
                    id=f"b{i:03d}",
                    bio_require=rng.choice([0.0, 0.1, 0.3, 0.6]),
                    embedding=vec([rng.random() for _ in range(12)]),
                )
                for i in range(n)
            ]
            motivation = vec([rng.random() for _ in range(12)])
            state = make_state(energy=rng.random(), motivation=motivation)
            scored = [score_behavior(b, state) for b in behaviors]
            expected = [
                oracle_score(
                    motivation.values(), b.embedding.values(), state.physio.energy, b.bio_require
                )
                for b in behaviors
            ]
            for s, e in zip(scored, expected):
                assert s.score == e  # bitwise
            engine_rank = [s.behavior.id for s in rank_candidates(scored)]
            oracle_rank = [
                b.id for b, e in sorted(zip(behaviors, expected), key=lambda p: (-p[1], p[0].id))
            ]
            assert engine_rank == oracle_rank


class TestEnergyWeightingFlip:
    def test_argmax_switches_once_as_energy_rises(self):
        bio_aligned = make_behavior("a_bio", embedding=vec([1.0] * 3 + [0.0] * 9))
        soc_aligned = make_behavior("b_soc", embedding=vec([0.0] * 7 + [1.0] * 5))
        winners = []
        for i in range(101):
            state = make_state(energy=i / 100)
            s_bio = score_behavior(bio_aligned, state).score
            s_soc = score_behavior(soc_aligned, state).score
            winners.append("bio" if s_bio > s_soc else "soc")
        assert winners[0] == "bio" and winners[-1] == "soc"
        flips = sum(1 for a, b in zip(winners, winners[1:]) if a != b)
        assert flips == 1


class TestPlanFuture:
    def make_pool(self, specs):
        return BehaviorPool(behaviors=tuple(specs))

    def test_refill_is_top3_by_brute_force(self):
        rng = random.Random(99)
        behaviors = [
            make_behavior(f"b{i}", embedding=vec([rng.random() for _ in range(12)]))
            for i in range(10)
        ]
        state = make_state()
        inventory = plan_future(self.make_pool(behaviors), state, BehaviorInventory())
        expected_scores = [
            (
                -oracle_score(state.motivation.values(), b.embedding.values(), 0.5, 0.0),
                b.id,
            )
            for b in behaviors
        ]
        expected_top3 = [bid for _, bid in sorted(expected_scores)[:3]]
        assert [f.behavior.id for f in inventory.future] == expected_top3
        assert inventory.present is inventory.future[0]

    def test_fewer_candidates_than_horizon(self):
        behaviors = [make_behavior("a"), make_behavior("b")]
        inventory = plan_future(self.make_pool(behaviors), make_state(), BehaviorInventory())
        assert len(inventory.future) == 2
        assert inventory.present is not None

    def test_universal_ineligibility_raises(self):
        behaviors = [make_behavior("a", bio_require=0.9), make_behavior("b", bio_require=0.8)]
        with pytest.raises(EmptyPoolError):
            plan_future(self.make_pool(behaviors), make_state(energy=0.1), BehaviorInventory())

    def test_displaced_present_moves_to_past(self):
        behaviors = [make_behavior(f"b{i}") for i in range(5)]
        inventory = BehaviorInventory()
        plan_future(self.make_pool(behaviors), make_state(), inventory)
        displaced = inventory.present
        plan_future(self.make_pool(behaviors), make_state(), inventory)
        assert any(
            p.scored.behavior.id == displaced.behavior.id and not p.executed
            for p in inventory.past
        )

    def test_future_never_exceeds_horizon(self):
        behaviors = [make_behavior(f"b{i}") for i in range(20)]
        inventory = plan_future(self.make_pool(behaviors), make_state(), BehaviorInventory())
        assert len(inventory.future) <= 3


class TestSelectPresent:
    def draw_many(self, scores, n=10_000, temperature=1.0):
        candidates = [
            ScoredBehavior(make_behavior(f"c{i}"), s, (0.0, 0.0, 0.0))
            for i, s in enumerate(scores)
        ]
        streams = StreamBundle(4242)
        counts = [0] * len(scores)
        for _ in range(n):
            inventory = BehaviorInventory(future=list(candidates))
            chosen = select_present(inventory, candidates, streams["selection"], temperature)
            counts[int(chosen.behavior.id[1:])] += 1
            assert chosen.behavior.id not in [f.behavior.id for f in inventory.future]
        return counts

    def test_equal_scores_sample_uniformly(self):
        counts = self.draw_many([0.4, 0.4, 0.4, 0.4])
        result = stats.chisquare(counts)
        assert result.pvalue > 0.01

    def test_two_point_softmax_probabilities(self):
        counts = self.draw_many([1.0, 0.0])
        p_hot = math.e / (math.e + 1.0)
        assert p_hot == pytest.approx(0.731, abs=5e-4)
        expected = [10_000 * p_hot, 10_000 * (1 - p_hot)]
        result = stats.chisquare(counts, expected)
        assert result.pvalue > 0.01

    def test_single_candidate_always_selected(self):
        candidates = [ScoredBehavior(make_behavior("only"), 0.2, (0.0, 0.0, 0.0))]
        streams = StreamBundle(1)
        for _ in range(50):
            inventory = BehaviorInventory(future=list(candidates))
            assert select_present(inventory, candidates, streams["selection"]).behavior.id == "only"

    def test_empty_candidates_error(self):
        with pytest.raises(NoCandidatesError):
            select_present(BehaviorInventory(), [], StreamBundle(1)["selection"])

    def test_draw_consumes_exactly_one_value(self):
        candidates = [
            ScoredBehavior(make_behavior(f"c{i}"), 0.3, (0.0, 0.0, 0.0)) for i in range(3)
        ]
        a, b = StreamBundle(777), StreamBundle(777)
        select_present(BehaviorInventory(future=list(candidates)), candidates, a["selection"])
        b["selection"].uniform()
        assert a["selection"].uniform() == b["selection"].uniform()


class TestPresentValid:
    def test_energy_below_requirement_invalidates(self):
        scored = ScoredBehavior(make_behavior("x", bio_require=0.1), 0.5, (0.0, 0.0, 0.0))
        assert not present_valid(scored, make_state(energy=0.05))

    def test_score_below_threshold_invalidates(self):
        # Uniform state scores 0.25; a threshold above that invalidates.
        scored = score_behavior(make_behavior("x"), make_state())
        assert not present_valid(scored, make_state(), threshold=0.3)
        assert present_valid(scored, make_state(), threshold=0.15)

    def test_both_conditions_met(self):
        embedding = vec([1.0] * 12)
        scored = score_behavior(make_behavior("x", embedding=embedding), make_state(energy=0.9))
        assert present_valid(scored, make_state(energy=0.9), threshold=0.15)


class TestFilterRedundant:
    def entry(self, behavior_id, executed_at):
        return PastEntry(
            scored=ScoredBehavior(make_behavior(behavior_id), 0.2, (0.0, 0.0, 0.0)),
            executed_at=executed_at,
            outcome_quality=0.8,
        )

    def test_same_day_execution_removed(self):
        now = 86400.0 * 5 + 3600 * 10  # day 5, 10:00
        candidates = [ScoredBehavior(make_behavior("a"), 0.2, (0.0, 0.0, 0.0))]
        past = [self.entry("a", now - 2 * 3600)]
        assert filter_redundant(candidates, past, now) == []

    def test_yesterday_execution_kept(self):
        now = 86400.0 * 5 + 3600 * 1  # day 5, 01:00
        candidates = [ScoredBehavior(make_behavior("a"), 0.2, (0.0, 0.0, 0.0))]
        past = [self.entry("a", now - 2 * 3600)]  # day 4, 23:00
        assert len(filter_redundant(candidates, past, now)) == 1

    def test_empty_past_is_identity(self):
        candidates = [
            ScoredBehavior(make_behavior(f"b{i}"), 0.2, (0.0, 0.0, 0.0)) for i in range(4)
        ]
        assert filter_redundant(candidates, [], 1000.0) == candidates


class TestLoadPool:
    def test_bundled_default_pool_is_valid(self, data_dir):
        pool = load_pool((data_dir / "pool.json").read_bytes())
        assert len(pool) >= 30
        categories = {b.category for b in pool}
        assert categories == {"physiological", "work", "leisure", "social", "emotional"}

    def test_duplicate_id_rejected(self):
        spec = {
            "id": "dup",
            "label": "dup",
            "category": "leisure",
            "embedding": MotivationalVector().to_dict(),
        }
        doc = json.dumps({"behaviors": [spec, spec]}).encode()
        with pytest.raises(ValidationError) as exc_info:
            load_pool(doc)
        assert "dup" in str(exc_info.value)

    def test_out_of_range_field_rejected_with_path(self):
        spec = {
            "id": "bad",
            "label": "bad",
            "category": "leisure",
            "bio_consumption": 2.0,
            "embedding": MotivationalVector().to_dict(),
        }
        with pytest.raises(ValidationError) as exc_info:
            load_pool(json.dumps({"behaviors": [spec]}).encode())
        assert exc_info.value.field == "bad.bio_consumption"

    def test_garbage_is_parse_error(self):
        with pytest.raises(ParseError):
            load_pool(b"not json at all")


class TestInventoryConservation:
    def test_every_present_lands_in_past_exactly_once(self, data_dir):
        pool = load_pool((data_dir / "pool.json").read_bytes())
        state = make_state(energy=0.9)
        inventory = BehaviorInventory()
        streams = StreamBundle(3)
        assignments = []
        for step in range(40):
            if inventory.present is None:
                eligible = [
                    c
                    for c in (score_behavior(f.behavior, state) for f in inventory.future)
                    if c.score > -1.0
                ]
                if eligible:
                    select_present(inventory, eligible, streams["selection"])
                else:
                    plan_future(pool, state, inventory)
            assignments.append(inventory.present.behavior.id)
            # complete it immediately
            inventory.past.append(
                PastEntry(inventory.present, executed_at=float(step), outcome_quality=0.9)
            )
            consume_present(inventory)
        executed_ids = [p.scored.behavior.id for p in inventory.past if p.executed]
        assert executed_ids == assignments
