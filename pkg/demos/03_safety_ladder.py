"""Escalate message risk and watch the safety pipeline respond.

From small talk to crisis language: keyword screen, classifier votes,
consensus, the constraint injected into the prompt, and the actions the
runtime takes.
"""

from pathlib import Path

from ctem.safety import KeywordLexicon, assess, make_stub_classifiers

LEXICON_PATH = Path(__file__).parent.parent / "src" / "ctem" / "data" / "lexicon.json"

MESSAGES = [
    "guess what, I baked bread today!",
    "feeling kind of lonely tonight",
    "everything seems hopeless lately",
    "I keep thinking I want to die",
]


def main():
    lexicon = KeywordLexicon.load(LEXICON_PATH)
    classifiers = make_stub_classifiers(lexicon)
    for text in MESSAGES:
        result = assess(text, classifiers, lexicon)
        print(f"\n> {text}")
        print(f"  level={result.level.label}  keywords={result.triggered_keywords}")
        print(f"  votes={[v.label for v in result.classifier_votes]}  actions={sorted(result.actions)}")
        if result.constraints_prompt:
            first_line = result.constraints_prompt.splitlines()[0]
            print(f"  constraint: {first_line}...")


if __name__ == "__main__":
    main()
