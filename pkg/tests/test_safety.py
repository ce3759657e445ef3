from __future__ import annotations

import itertools
import json
import random
import time

import pytest

from ctem.errors import EmptyVotesError, LexiconMissingError
from ctem.safety import (
    DE_ESCALATE,
    REFERRAL_TEMPLATE,
    REMIND_COMPANION_ROLE,
    SUGGEST_REFERRAL,
    KeywordLexicon,
    RiskLevel,
    assess,
    consensus,
    dialog_rules,
    keyword_screen,
    make_stub_classifiers,
)

LEVELS = (RiskLevel.NONE, RiskLevel.LOW, RiskLevel.MEDIUM, RiskLevel.HIGH)


def lexicon_from(entries):
    return KeywordLexicon.from_json(json.dumps(entries).encode())


FIXTURE_LEXICON = lexicon_from(
    [
        {"pattern": "hopeless", "level": "medium"},
        {"pattern": "want to die", "level": "high"},
        {"pattern": "lonely", "level": "low"},
    ]
)


# Independent consensus oracle: counts for strict majority, plain sorted
# upper median otherwise.
def oracle_consensus(votes):
    n = len(votes)
    best = None
    for level in LEVELS:
        if votes.count(level) > n / 2:
            best = level
    if best is not None:
        return best
    return sorted(votes)[n // 2]


class TestKeywordScreen:
    def test_high_entry_containment(self):
        level, matches = keyword_screen("some days I just want to die", FIXTURE_LEXICON)
        assert level == RiskLevel.HIGH
        assert matches == ["want to die"]

    def test_neutral_text(self):
        assert keyword_screen("lovely weather today", FIXTURE_LEXICON) == (RiskLevel.NONE, [])

    def test_max_over_matches(self):
        level, matches = keyword_screen(
            "feeling lonely and hopeless tonight", FIXTURE_LEXICON
        )
        assert level == RiskLevel.MEDIUM
        assert set(matches) == {"lonely", "hopeless"}

    def test_case_and_whitespace_insensitive(self):
        level, _ = keyword_screen("I FEEL   SO HOPELESS", FIXTURE_LEXICON)
        assert level == RiskLevel.MEDIUM

    def test_missing_lexicon_fails_fast(self, tmp_path):
        with pytest.raises(LexiconMissingError):
            KeywordLexicon.load(tmp_path / "nope.json")

    def test_shipped_lexicon_full_recall(self, data_dir):
        # Every shipped keyword embedded in 5 random carrier sentences is
        # flagged at its configured level.
        lexicon = KeywordLexicon.load(data_dir / "lexicon.json")
        rng = random.Random(11)
        carriers = [
            "well {kw} that is how it goes",
            "I told my friend {kw} yesterday",
            "sometimes... {kw}, you know?",
            "{kw}",
            "do you ever think {kw} when it rains",
        ]
        for entry in lexicon.entries:
            for carrier in rng.sample(carriers, len(carriers)):
                level, matches = keyword_screen(carrier.format(kw=entry.pattern), lexicon)
                assert level >= entry.level
                assert entry.pattern in matches


class TestConsensus:
    def test_majority(self):
        assert consensus([RiskLevel.HIGH, RiskLevel.NONE, RiskLevel.HIGH]) == RiskLevel.HIGH
        assert consensus([RiskLevel.LOW, RiskLevel.NONE, RiskLevel.NONE]) == RiskLevel.NONE

    def test_upper_median_without_majority(self):
        votes = [RiskLevel.NONE, RiskLevel.LOW, RiskLevel.MEDIUM, RiskLevel.HIGH]
        assert consensus(votes) == RiskLevel.MEDIUM

    def test_empty_votes_error(self):
        with pytest.raises(EmptyVotesError):
            consensus([])

    def test_matches_oracle_for_all_multisets_up_to_six(self):
        for n in range(1, 7):
            for votes in itertools.combinations_with_replacement(LEVELS, n):
                assert consensus(list(votes)) == oracle_consensus(list(votes)), votes

    def test_order_independence(self):
        rng = random.Random(3)
        for _ in range(300):
            votes = [rng.choice(LEVELS) for _ in range(rng.randint(1, 6))]
            shuffled = list(votes)
            rng.shuffle(shuffled)
            assert consensus(votes) == consensus(shuffled)

    def test_adding_vote_at_or_above_consensus_never_lowers_it(self):
        for n in range(1, 6):
            for votes in itertools.combinations_with_replacement(LEVELS, n):
                base = consensus(list(votes))
                for extra in LEVELS:
                    if extra >= base:
                        assert consensus(list(votes) + [extra]) >= base

    def test_raising_one_vote_never_lowers_consensus(self):
        for n in range(1, 7):
            for votes in itertools.combinations_with_replacement(LEVELS, n):
                base = consensus(list(votes))
                for i in range(n):
                    for higher in LEVELS:
                        if higher > votes[i]:
                            raised = list(votes)
                            raised[i] = higher
                            assert consensus(raised) >= base


class TestAssess:
    def test_consensus_none_gives_empty_constraints(self):
        classifiers = [lambda text: RiskLevel.NONE] * 3
        result = assess("nice weather", classifiers, FIXTURE_LEXICON)
        assert result.level == RiskLevel.NONE
        assert result.constraints_prompt == ""
        assert result.actions == set()

    def test_keyword_stage_can_only_raise(self):
        classifiers = [lambda text: RiskLevel.NONE] * 3
        result = assess("I want to die", classifiers, FIXTURE_LEXICON)
        assert result.level == RiskLevel.HIGH
        assert DE_ESCALATE in result.actions
        assert SUGGEST_REFERRAL in result.actions
        assert REMIND_COMPANION_ROLE in result.actions

    def test_all_classifiers_down_falls_back_to_keywords(self):
        def broken(text):
            raise ConnectionError("down")

        logs = []
        result = assess(
            "everything feels hopeless", [broken, broken], FIXTURE_LEXICON, log=logs.append
        )
        assert result.level == RiskLevel.MEDIUM
        assert result.classifier_votes == []
        assert logs

    def test_slow_classifier_vote_skipped(self):
        def slow(text):
            time.sleep(0.5)
            return RiskLevel.HIGH

        result = assess(
            "nice day", [slow, lambda t: RiskLevel.NONE], FIXTURE_LEXICON, timeout=0.05
        )
        assert result.level == RiskLevel.NONE

    def test_medium_actions(self):
        classifiers = make_stub_classifiers(FIXTURE_LEXICON)
        result = assess("so hopeless today", classifiers, FIXTURE_LEXICON)
        assert result.level >= RiskLevel.MEDIUM
        assert DE_ESCALATE in result.actions
        assert REMIND_COMPANION_ROLE in result.actions

    def test_level_invariant_max_of_stages(self):
        rng = random.Random(8)
        texts = ["fine", "lonely", "hopeless", "want to die", "lonely and hopeless"]
        for _ in range(100):
            text = rng.choice(texts)
            votes = [rng.choice(LEVELS) for _ in range(3)]
            classifiers = [lambda t, v=v: v for v in votes]
            result = assess(text, classifiers, FIXTURE_LEXICON)
            keyword_level, _ = keyword_screen(text, FIXTURE_LEXICON)
            assert result.level == max(keyword_level, oracle_consensus(votes))


class TestDialogRules:
    def test_stable_bytes(self):
        assert dialog_rules() == dialog_rules()
        assert isinstance(dialog_rules(), str)

    def test_companion_not_romantic_partner(self):
        rules = dialog_rules()
        assert "companion, not a romantic partner" in rules

    def test_core_prohibitions_present(self):
        rules = dialog_rules().lower()
        for needle in ("identity", "harmful", "self-harm", "safe alternatives"):
            assert needle in rules

    def test_referral_template_mentions_professional_support(self):
        assert "professional" in REFERRAL_TEMPLATE
        assert "control" in REFERRAL_TEMPLATE
